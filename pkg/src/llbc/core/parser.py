"""Textual LLBC frontend: lark grammar, tree transformer and name resolution."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput

from src.common.errors import ErrorCode, ParseError, SourceLocation
from src.common.logger import get_logger

from .types import (
    BOOL,
    BOX_NEW,
    UNIT,
    AdtTy,
    Assign,
    Binop,
    BinopKind,
    BorrowKind,
    BorrowOf,
    BorrowTy,
    BoxTy,
    Call,
    Const,
    Copy,
    Ctor,
    CtorOp,
    Deref,
    DerefKind,
    Field,
    FnDecl,
    Free,
    I32,
    IfThenElse,
    LlbcProgram,
    Match,
    Move,
    Nop,
    Operand,
    Panic,
    Place,
    RefKind,
    Return,
    Rvalue,
    ScalarKind,
    ScalarTy,
    Seq,
    Statement,
    TupleField,
    TupleOp,
    TupleTy,
    Ty,
    TyVar,
    TypeDecl,
    U32,
    Unop,
    UnopKind,
    Use,
    seq,
    substitute_ty,
)

logger = get_logger(__name__)

_GRAMMAR = Path(__file__).with_name("grammar.lark")

_BINOPS = {
    "+": BinopKind.ADD,
    "-": BinopKind.SUB,
    "*": BinopKind.MUL,
    "/": BinopKind.DIV,
    "%": BinopKind.REM,
    "==": BinopKind.EQ,
    "!=": BinopKind.NE,
    "<": BinopKind.LT,
    "<=": BinopKind.LE,
    ">": BinopKind.GT,
    ">=": BinopKind.GE,
}

_DEREF = "*"


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(
        _GRAMMAR.read_text(encoding="utf-8"),
        parser="lalr",
        propagate_positions=True,
        maybe_placeholders=True,
    )


# ---------------------------------------------------------------------------
# Unresolved intermediate forms produced by the transformer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _RawPlace:
    base: str
    segs: Tuple[str, ...] = ()


@dataclass(frozen=True)
class _IntLit:
    value: int
    kind: Optional[ScalarKind]


@dataclass(frozen=True)
class _RawCtor:
    path: Tuple[str, ...]
    args: Tuple[object, ...] = ()


@dataclass(frozen=True)
class _RawCall:
    dest: _RawPlace
    path: Tuple[str, ...]
    regions: Tuple[str, ...]
    tys: Tuple[Ty, ...]
    args: Tuple[object, ...]
    loc: SourceLocation


@dataclass(frozen=True)
class _RawFn:
    name: str
    regions: Tuple[str, ...]
    ty_params: Tuple[str, ...]
    args: Tuple[Tuple[str, Ty], ...]
    ret: Tuple[str, Ty]
    locals: Tuple[Tuple[str, Ty], ...]
    body: Optional[object]
    loc: SourceLocation


def _loc(meta) -> SourceLocation:
    if meta is None or getattr(meta, "empty", True):
        return SourceLocation()
    return SourceLocation(line=meta.line, column=meta.column)


def _present(items: Sequence) -> list:
    return [i for i in items if i is not None]


class _ToAst(Transformer):
    """Build declarations from the parse tree; names are resolved afterwards."""

    # -- types ---------------------------------------------------------------
    def bool_ty(self, _):
        return BOOL

    def i32_ty(self, _):
        return I32

    def u32_ty(self, _):
        return U32

    def unit_ty(self, _):
        return UNIT

    def mut_ref_ty(self, children):
        region, inner = children
        return BorrowTy(BorrowKind.MUT, str(region)[1:], inner)

    def shared_ref_ty(self, children):
        region, inner = children
        return BorrowTy(BorrowKind.SHARED, str(region)[1:], inner)

    @v_args(meta=True)
    def unary_tuple_ty(self, meta, _):
        raise ParseError(
            "tuple types must have length 0 or at least 2", meta.line, meta.column,
            code=ErrorCode.UNARY_TUPLE,
        )

    def tuple_ty(self, children):
        return TupleTy(tuple(children))

    def named_ty(self, children):
        name, *args = children
        if str(name) == "Box" and len(args) == 1:
            return BoxTy(args[0])
        return AdtTy(str(name), tuple(_present(args)))

    # -- declarations --------------------------------------------------------
    def region_param(self, children):
        return ("region", str(children[0])[1:])

    def type_param(self, children):
        return ("type", str(children[0]))

    def ty_params(self, children):
        return list(children)

    def param(self, children):
        name, ty = children
        return (str(name), ty)

    def params(self, children):
        return tuple(_present(children))

    def locals_block(self, children):
        return ("locals", tuple(_present(children)))

    def ret_decl(self, children):
        name, ty = children
        return (str(name), ty)

    def anon_ret(self, children):
        return ("ret", children[0])

    def body(self, children):
        local_decls: Tuple[Tuple[str, Ty], ...] = ()
        stmts = []
        for child in children:
            if isinstance(child, tuple) and child and child[0] == "locals":
                local_decls = child[1]
            else:
                stmts.append(child)
        return (local_decls, seq(*stmts))

    @staticmethod
    def _generics(params) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
        params = params or []
        regions = tuple(n for k, n in params if k == "region")
        tys = tuple(n for k, n in params if k == "type")
        return regions, tys

    @v_args(meta=True)
    def fn_decl(self, meta, children):
        name, generics, params, ret, body = children
        regions, ty_params = self._generics(generics)
        local_decls, stmt = body
        return _RawFn(
            str(name), regions, ty_params, params, ret or ("ret", UNIT),
            local_decls, stmt, _loc(meta),
        )

    @v_args(meta=True)
    def opaque_decl(self, meta, children):
        name, generics, params, ret = children
        regions, ty_params = self._generics(generics)
        return _RawFn(
            str(name), regions, ty_params, params, ret or ("ret", UNIT),
            (), None, _loc(meta),
        )

    def variant(self, children):
        name, *tys = children
        tys = _present(tys)
        return Ctor(str(name), tuple((str(i), t) for i, t in enumerate(tys)))

    @v_args(meta=True)
    def enum_decl(self, meta, children):
        name, generics, *variants = children
        _, ty_params = self._generics(generics)
        return TypeDecl(str(name), ty_params, tuple(_present(variants)), False, _loc(meta))

    def struct_field(self, children):
        name, ty = children
        return (str(name), ty)

    @v_args(meta=True)
    def struct_decl(self, meta, children):
        name, generics, *fields = children
        _, ty_params = self._generics(generics)
        ctor = Ctor(str(name), tuple(_present(fields)))
        return TypeDecl(str(name), ty_params, (ctor,), True, _loc(meta))

    def start(self, children):
        return list(children)

    # -- places --------------------------------------------------------------
    def var(self, children):
        return _RawPlace(str(children[0]))

    def deref(self, children):
        place = children[0]
        return _RawPlace(place.base, place.segs + (_DEREF,))

    def field(self, children):
        place, seg = children
        return _RawPlace(place.base, place.segs + (str(seg),))

    def place_atom(self, children):
        return children[0]

    # -- operands ------------------------------------------------------------
    def move_op(self, children):
        return ("move", children[0])

    def copy_op(self, children):
        return ("copy", children[0])

    def true_lit(self, _):
        return Const(ScalarKind.BOOL, True)

    def false_lit(self, _):
        return Const(ScalarKind.BOOL, False)

    def int_lit(self, children):
        text = str(children[0])
        kind = None
        for suffix in ("i32", "u32"):
            if text.endswith(suffix):
                kind = ScalarKind(suffix)
                text = text[: -len(suffix)]
        return _IntLit(int(text), kind)

    def qualname(self, children):
        return tuple(str(c) for c in children)

    def nullary_ctor(self, children):
        return _RawCtor(children[0])

    def unit_op(self, _):
        return TupleOp(())

    @v_args(meta=True)
    def unary_tuple_op(self, meta, _):
        raise ParseError(
            "tuples must have length 0 or at least 2", meta.line, meta.column,
            code=ErrorCode.UNARY_TUPLE,
        )

    def tuple_op(self, children):
        return TupleOp(tuple(children))

    def args(self, children):
        return tuple(_present(children))

    # -- rvalues -------------------------------------------------------------
    def use(self, children):
        return ("use", children[0])

    def mut_borrow(self, children):
        return ("borrow", RefKind.MUT, children[0])

    def reserved_borrow(self, children):
        return ("borrow", RefKind.RESERVED, children[0])

    def shared_borrow(self, children):
        return ("borrow", RefKind.SHARED, children[0])

    def not_op(self, children):
        return ("not", children[0])

    def binop(self, children):
        left, op, right = children
        return ("binop", _BINOPS[str(op)], left, right)

    # -- statements ----------------------------------------------------------
    @v_args(meta=True)
    def assign(self, meta, children):
        place, rvalue = children
        return ("assign", place, rvalue, _loc(meta))

    def region_arg(self, children):
        return ("region", str(children[0])[1:])

    def type_arg(self, children):
        return ("type", children[0])

    def turbofish(self, children):
        return list(children)

    @v_args(meta=True)
    def call_or_ctor_assign(self, meta, children):
        dest, path, generics, args = children
        generics = generics or []
        regions = tuple(v for k, v in generics if k == "region")
        tys = tuple(v for k, v in generics if k == "type")
        return _RawCall(dest, path, regions, tys, args or (), _loc(meta))

    def block(self, children):
        return seq(*children)

    @v_args(meta=True)
    def if_stmt(self, meta, children):
        cond, then_branch, else_branch = (list(children) + [None])[:3]
        return ("if", cond, then_branch, else_branch or Nop(), _loc(meta))

    def arm(self, children):
        path, body = children
        return (path, body)

    @v_args(meta=True)
    def match_stmt(self, meta, children):
        place, *arms = children
        return ("match", place, tuple(_present(arms)), _loc(meta))

    @v_args(meta=True)
    def return_stmt(self, meta, _):
        return Return(_loc(meta))

    @v_args(meta=True)
    def panic_stmt(self, meta, _):
        return Panic(_loc(meta))

    @v_args(meta=True)
    def free_stmt(self, meta, children):
        return ("free", children[0], _loc(meta))

    @v_args(meta=True)
    def assert_stmt(self, meta, children):
        loc = _loc(meta)
        return ("if", children[0], Nop(), Panic(loc), loc)

    @v_args(meta=True)
    def loop_stmt(self, meta, _):
        raise ParseError(
            "loops are not supported", meta.line, meta.column,
            code=ErrorCode.LOOP_UNSUPPORTED,
        )

    def nop_stmt(self, _):
        return Nop()


# ---------------------------------------------------------------------------
# Resolution: derefs, fields, constructors, literal widths, calls
# ---------------------------------------------------------------------------

class _Resolver:
    """Turns the raw forms into the final AST using declared types.

    Resolution is best-effort: anything that does not fit the declared types is
    still turned into syntax, and `validate` reports the mismatch.
    """

    def __init__(self, types: Dict[str, TypeDecl], fns: Dict[str, _RawFn]) -> None:
        self.types = types
        self.fns = fns
        self._ctor_owner: Dict[str, List[str]] = {}
        for decl in types.values():
            for ctor in decl.ctors:
                self._ctor_owner.setdefault(ctor.name, []).append(decl.name)

    # -- types ---------------------------------------------------------------
    def ty(self, ty: Ty, ty_params: Tuple[str, ...]) -> Ty:
        if isinstance(ty, AdtTy):
            if not ty.args and ty.name in ty_params:
                return TyVar(ty.name)
            return AdtTy(ty.name, tuple(self.ty(a, ty_params) for a in ty.args))
        if isinstance(ty, BorrowTy):
            return BorrowTy(ty.kind, ty.region, self.ty(ty.inner, ty_params))
        if isinstance(ty, BoxTy):
            return BoxTy(self.ty(ty.inner, ty_params))
        if isinstance(ty, TupleTy):
            return TupleTy(tuple(self.ty(e, ty_params) for e in ty.elems))
        return ty

    def type_decl(self, decl: TypeDecl) -> TypeDecl:
        ctors = tuple(
            Ctor(c.name, tuple((n, self.ty(t, decl.ty_params)) for n, t in c.fields))
            for c in decl.ctors
        )
        return TypeDecl(decl.name, decl.ty_params, ctors, decl.is_struct, decl.loc)

    def signature(self, raw: _RawFn) -> _RawFn:
        tp = raw.ty_params
        return _RawFn(
            raw.name, raw.regions, tp,
            tuple((n, self.ty(t, tp)) for n, t in raw.args),
            (raw.ret[0], self.ty(raw.ret[1], tp)),
            tuple((n, self.ty(t, tp)) for n, t in raw.locals),
            raw.body, raw.loc,
        )

    # -- places --------------------------------------------------------------
    def place(self, raw: _RawPlace, env: Dict[str, Ty]) -> Tuple[Place, Optional[Ty]]:
        ty = env.get(raw.base)
        path = []
        segs = list(raw.segs)
        i = 0
        while i < len(segs):
            seg = segs[i]
            if seg == _DEREF:
                if isinstance(ty, BorrowTy):
                    kind = DerefKind.MUT if ty.kind is BorrowKind.MUT else DerefKind.SHARED
                    path.append(Deref(kind))
                    ty = ty.inner
                elif isinstance(ty, BoxTy):
                    path.append(Deref(DerefKind.BOX))
                    ty = ty.inner
                else:
                    path.append(Deref(DerefKind.MUT))
                    ty = None
                i += 1
                continue
            decl = self.types.get(ty.name) if isinstance(ty, AdtTy) else None
            if isinstance(ty, TupleTy) and seg.isdigit():
                idx = int(seg)
                path.append(TupleField(idx))
                ty = ty.elems[idx] if idx < len(ty.elems) else None
                i += 1
            elif decl is not None and decl.ctor(seg) is not None and i + 1 < len(segs):
                ctor = decl.ctor(seg)
                fname = segs[i + 1]
                idx = ctor.field_index(fname)
                path.append(Field(seg, fname, -1 if idx is None else idx))
                ty = self._field_ty(decl, ty, seg, idx)
                i += 2
            elif decl is not None and len(decl.ctors) == 1 and decl.ctors[0].field_index(seg) is not None:
                ctor = decl.ctors[0]
                idx = ctor.field_index(seg)
                path.append(Field(ctor.name, seg, idx))
                ty = self._field_ty(decl, ty, ctor.name, idx)
                i += 1
            elif seg.isdigit():
                path.append(TupleField(int(seg)))
                ty = None
                i += 1
            else:
                path.append(Field("", seg, -1))
                ty = None
                i += 1
        return Place(raw.base, tuple(path)), ty

    @staticmethod
    def _field_ty(decl: TypeDecl, ty: AdtTy, ctor: str, idx: Optional[int]) -> Optional[Ty]:
        if idx is None:
            return None
        try:
            return decl.field_types(ctor, ty.args)[idx]
        except (KeyError, IndexError):
            return None

    # -- operands ------------------------------------------------------------
    def operand(self, raw, env: Dict[str, Ty], expected: Optional[Ty]) -> Tuple[Operand, Optional[Ty]]:
        if isinstance(raw, tuple) and raw and raw[0] in ("move", "copy"):
            place, ty = self.place(raw[1], env)
            return (Move(place) if raw[0] == "move" else Copy(place)), ty
        if isinstance(raw, Const):
            return raw, BOOL
        if isinstance(raw, _IntLit):
            kind = raw.kind
            if kind is None:
                kind = expected.kind if isinstance(expected, ScalarTy) and expected.kind.is_integer else ScalarKind.I32
            return Const(kind, raw.value), ScalarTy(kind)
        if isinstance(raw, TupleOp):
            exp = expected.elems if isinstance(expected, TupleTy) and len(expected.elems) == len(raw.elems) else (None,) * len(raw.elems)
            elems = [self.operand(e, env, t) for e, t in zip(raw.elems, exp)]
            ops = tuple(e for e, _ in elems)
            tys = [t for _, t in elems]
            ty = TupleTy(tuple(tys)) if all(t is not None for t in tys) else None
            return TupleOp(ops), ty
        if isinstance(raw, _RawCtor):
            return self.ctor(raw.path, raw.args, env, expected)
        raise ParseError(f"unexpected operand {raw!r}")

    def ctor(self, path: Tuple[str, ...], args, env, expected) -> Tuple[Operand, Optional[Ty]]:
        ctor_name = path[-1]
        if len(path) >= 2:
            adt = path[-2]
        else:
            owners = self._ctor_owner.get(ctor_name, [])
            if isinstance(expected, AdtTy) and expected.name in owners:
                adt = expected.name
            elif owners:
                adt = owners[0]
            else:
                adt = ""
        decl = self.types.get(adt)
        ty_args = expected.args if isinstance(expected, AdtTy) and expected.name == adt else ()
        field_tys: Sequence[Optional[Ty]] = (None,) * len(args)
        if decl is not None and decl.ctor(ctor_name) is not None and len(ty_args) == len(decl.ty_params):
            ftys = decl.field_types(ctor_name, ty_args)
            if len(ftys) == len(args):
                field_tys = ftys
        fields = tuple(self.operand(a, env, t)[0] for a, t in zip(args, field_tys))
        ty = AdtTy(adt, ty_args) if decl is not None and len(ty_args) == len(decl.ty_params) else None
        return CtorOp(adt, ctor_name, fields), ty

    def rvalue(self, raw, env, expected) -> Rvalue:
        tag = raw[0]
        if tag == "use":
            return Use(self.operand(raw[1], env, expected)[0])
        if tag == "borrow":
            return BorrowOf(raw[1], self.place(raw[2], env)[0])
        if tag == "not":
            return Unop(UnopKind.NOT, self.operand(raw[1], env, BOOL)[0])
        _, op, left, right = raw
        # Literal widths follow the other operand, then the destination.
        left_ty = self.operand(left, env, None)[1] if not isinstance(left, _IntLit) else None
        right_ty = self.operand(right, env, None)[1] if not isinstance(right, _IntLit) else None
        hint = left_ty or right_ty or (expected if op.is_arith else None)
        return Binop(op, self.operand(left, env, hint)[0], self.operand(right, env, hint)[0])

    # -- statements ----------------------------------------------------------
    def stmt(self, raw, env: Dict[str, Ty], ty_params: Tuple[str, ...]) -> Statement:
        if isinstance(raw, (Nop, Return, Panic)):
            return raw
        if isinstance(raw, Seq):
            return seq(self.stmt(raw.first, env, ty_params), self.stmt(raw.second, env, ty_params))
        if isinstance(raw, _RawCall):
            return self.call(raw, env, ty_params)
        tag = raw[0]
        if tag == "assign":
            _, raw_place, raw_rv, loc = raw
            place, ty = self.place(raw_place, env)
            return Assign(place, self.rvalue(raw_rv, env, ty), loc)
        if tag == "if":
            _, cond, then_b, else_b, loc = raw
            return IfThenElse(
                self.operand(cond, env, BOOL)[0],
                self.stmt(then_b, env, ty_params),
                self.stmt(else_b, env, ty_params),
                loc,
            )
        if tag == "match":
            _, raw_place, arms, loc = raw
            place, _ = self.place(raw_place, env)
            return Match(
                place,
                tuple((path[-1], self.stmt(body, env, ty_params)) for path, body in arms),
                loc,
            )
        if tag == "free":
            _, raw_place, loc = raw
            return Free(self.place(raw_place, env)[0], loc)
        raise ParseError(f"unexpected statement {raw!r}")

    def call(self, raw: _RawCall, env, ty_params) -> Statement:
        name = "::".join(raw.path)
        dest, dest_ty = self.place(raw.dest, env)
        tys = tuple(self.ty(t, ty_params) for t in raw.tys)
        callee = self.fns.get(name)
        if callee is not None:
            subst = dict(zip(callee.ty_params, tys))
            expected = [substitute_ty(t, subst) for _, t in callee.args]
            expected += [None] * (len(raw.args) - len(expected))
            args = tuple(self.operand(a, env, t)[0] for a, t in zip(raw.args, expected))
            return Call(dest, name, raw.regions, tys, args, raw.loc)
        if name == BOX_NEW:
            inner = tys[0] if tys else (dest_ty.inner if isinstance(dest_ty, BoxTy) else None)
            args = tuple(self.operand(a, env, inner)[0] for a in raw.args)
            return Call(dest, BOX_NEW, raw.regions, tys, args, raw.loc)
        op, _ = self.ctor(raw.path, raw.args, env, dest_ty)
        return Assign(dest, Use(op), raw.loc)

    def fn(self, raw: _RawFn) -> FnDecl:
        env: Dict[str, Ty] = {}
        env.update(raw.args)
        env.update(raw.locals)
        env[raw.ret[0]] = raw.ret[1]
        body = None if raw.body is None else self.stmt(raw.body, env, raw.ty_params)
        return FnDecl(
            raw.name, raw.regions, raw.ty_params, raw.args, raw.locals, raw.ret, body, raw.loc
        )


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

def parse_program(text: str) -> LlbcProgram:
    """Parse LLBC concrete syntax into a resolved program.

    Raises:
        ParseError: with line/column and the expected-token set.
    """
    try:
        tree = _parser().parse(text)
    except UnexpectedInput as exc:
        raise syntax_error(exc) from exc
    try:
        items = _ToAst().transform(tree)
    except Exception as exc:  # lark wraps transformer errors
        inner = getattr(exc, "orig_exc", exc)
        if isinstance(inner, ParseError):
            raise inner from exc
        raise
    raw_types = [i for i in items if isinstance(i, TypeDecl)]
    raw_fns = [i for i in items if isinstance(i, _RawFn)]

    bootstrap = _Resolver({d.name: d for d in raw_types}, {})
    type_decls = tuple(bootstrap.type_decl(d) for d in raw_types)
    resolver = _Resolver({d.name: d for d in type_decls}, {})
    sigs = [resolver.signature(f) for f in raw_fns]
    resolver.fns = {f.name: f for f in sigs}
    fn_decls = tuple(resolver.fn(f) for f in sigs)
    logger.debug("program_parsed", types=len(type_decls), functions=len(fn_decls))
    return LlbcProgram(type_decls, fn_decls)


def parse_file(path: Union[str, Path]) -> LlbcProgram:
    path = Path(path)
    if path.name.endswith(".llbc.json"):
        from .json_codec import program_from_json

        return program_from_json(path.read_text(encoding="utf-8"))
    return parse_program(path.read_text(encoding="utf-8"))


def syntax_error(exc: UnexpectedInput) -> ParseError:
    line = getattr(exc, "line", None)
    column = getattr(exc, "column", None)
    expected: List[str] = []
    if isinstance(exc, UnexpectedCharacters):
        expected = list(exc.allowed or [])
        message = f"unexpected character {exc.char!r}"
    elif isinstance(exc, UnexpectedEOF):
        expected = list(exc.expected or [])
        message = "unexpected end of input"
    else:
        expected = list(getattr(exc, "expected", None) or [])
        token = getattr(exc, "token", None)
        message = f"unexpected token {str(token)!r}" if isinstance(token, Token) else "syntax error"
    if line is not None and line < 0:
        line, column = None, None
    return ParseError(message, line, column, expected)
