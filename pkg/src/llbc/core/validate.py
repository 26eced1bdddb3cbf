"""Static validation of LLBC programs.

`validate` never raises on user programs: every problem becomes one Diagnostic,
reported in declaration order and, within a body, in statement order.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx

from src.common.errors import Diagnostic, ErrorCode, SourceLocation
from src.common.logger import get_logger

from .types import (
    BOOL,
    BOX_NEW,
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
    CtorOp,
    Deref,
    DerefKind,
    Field,
    FnDecl,
    Free,
    IfThenElse,
    LlbcProgram,
    Match,
    Move,
    Operand,
    Place,
    RefKind,
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
    Unop,
    Use,
    erase_regions,
    has_borrow,
    iter_types,
    substitute_ty,
)

logger = get_logger(__name__)


def _same(a: Optional[Ty], b: Optional[Ty]) -> bool:
    """Type equality up to region names; unknown types match anything."""
    if a is None or b is None:
        return True
    return erase_regions(a) == erase_regions(b)


class _Validator:
    def __init__(self, program: LlbcProgram) -> None:
        self.program = program
        self.diagnostics: List[Diagnostic] = []
        self.types: Dict[str, TypeDecl] = {}
        self.fns: Dict[str, FnDecl] = {}
        self._fn: Optional[FnDecl] = None
        self._vars: Dict[str, Ty] = {}

    # -- reporting -----------------------------------------------------------
    def report(self, code: ErrorCode, message: str, loc: Optional[SourceLocation] = None, **details) -> None:
        loc = loc or SourceLocation()
        if self._fn is not None and loc.function is None:
            loc = SourceLocation(loc.line, loc.column, self._fn.name)
        self.diagnostics.append(Diagnostic(code, message, loc, details))

    # -- entry ---------------------------------------------------------------
    def run(self) -> List[Diagnostic]:
        for decl in self.program.type_decls:
            if decl.name in self.types:
                self.report(ErrorCode.DUPLICATE_NAME, f"type {decl.name} declared twice", decl.loc)
                continue
            self.types[decl.name] = decl
        for fn in self.program.fn_decls:
            if fn.name in self.fns or fn.name == BOX_NEW:
                self.report(ErrorCode.DUPLICATE_NAME, f"function {fn.name} declared twice", fn.loc)
                continue
            self.fns[fn.name] = fn

        for decl in self.program.type_decls:
            self.type_decl(decl)
        self.guarded_recursion()
        for fn in self.program.fn_decls:
            self._fn = fn
            try:
                self.fn_decl(fn)
            finally:
                self._fn = None
        return self.diagnostics

    # -- types ---------------------------------------------------------------
    def ty(self, ty: Ty, ty_params: Sequence[str], loc: SourceLocation) -> None:
        for t in iter_types(ty):
            if isinstance(t, TupleTy) and len(t.elems) == 1:
                self.report(ErrorCode.UNARY_TUPLE, "tuple types must have length 0 or at least 2", loc)
            elif isinstance(t, TyVar) and t.name not in ty_params:
                self.report(ErrorCode.UNKNOWN_NAME, f"unknown type parameter {t.name}", loc)
            elif isinstance(t, AdtTy):
                decl = self.types.get(t.name)
                if decl is None:
                    self.report(ErrorCode.UNKNOWN_NAME, f"unknown type {t.name}", loc)
                elif len(decl.ty_params) != len(t.args):
                    self.report(
                        ErrorCode.ARITY_MISMATCH,
                        f"type {t.name} expects {len(decl.ty_params)} arguments, got {len(t.args)}",
                        loc,
                    )
                if any(has_borrow(a) for a in t.args):
                    self.report(ErrorCode.BORROW_IN_ADT, f"borrow type inside arguments of {t.name}", loc)
            elif isinstance(t, BoxTy) and has_borrow(t.inner):
                self.report(ErrorCode.BORROW_IN_ADT, "borrow type inside a box", loc)

    def type_decl(self, decl: TypeDecl) -> None:
        if len(set(decl.ty_params)) != len(decl.ty_params):
            self.report(ErrorCode.DUPLICATE_NAME, f"duplicate type parameter in {decl.name}", decl.loc)
        if not decl.ctors and not decl.is_struct:
            self.report(ErrorCode.TYPE_MISMATCH, f"enum {decl.name} has no variants", decl.loc)
        seen: Set[str] = set()
        for ctor in decl.ctors:
            if ctor.name in seen:
                self.report(ErrorCode.DUPLICATE_NAME, f"constructor {ctor.name} declared twice in {decl.name}", decl.loc)
            seen.add(ctor.name)
            names = [n for n, _ in ctor.fields]
            if len(set(names)) != len(names):
                self.report(ErrorCode.DUPLICATE_NAME, f"duplicate field in {decl.name}::{ctor.name}", decl.loc)
            for _, fty in ctor.fields:
                if has_borrow(fty):
                    self.report(ErrorCode.BORROW_IN_ADT, f"borrow type in a field of {decl.name}", decl.loc)
                self.ty(fty, decl.ty_params, decl.loc)

    def guarded_recursion(self) -> None:
        """Recursive occurrences of a data type must sit under a Box."""
        graph = nx.DiGraph()
        for decl in self.types.values():
            graph.add_node(decl.name)
            for ctor in decl.ctors:
                for _, fty in ctor.fields:
                    for target in _unboxed_adts(fty):
                        graph.add_edge(decl.name, target)
        for component in nx.strongly_connected_components(graph):
            cyclic = len(component) > 1 or any(graph.has_edge(n, n) for n in component)
            if not cyclic:
                continue
            for name in sorted(component, key=list(self.types).index):
                self.report(
                    ErrorCode.UNGUARDED_RECURSION,
                    f"type {name} contains itself without a Box",
                    self.types[name].loc,
                )

    # -- functions -----------------------------------------------------------
    def fn_decl(self, fn: FnDecl) -> None:
        names = [n for n, _ in fn.args] + [n for n, _ in fn.locals] + [fn.ret_var]
        seen: Set[str] = set()
        for name in names:
            if name in seen:
                self.report(ErrorCode.DUPLICATE_NAME, f"variable {name} declared twice", fn.loc)
            seen.add(name)
        generics = list(fn.region_params) + list(fn.ty_params)
        if len(set(generics)) != len(generics):
            self.report(ErrorCode.DUPLICATE_NAME, "duplicate generic parameter", fn.loc)

        for _, ty in list(fn.args) + [fn.ret]:
            self.ty(ty, fn.ty_params, fn.loc)
            self.signature_ty(ty, fn)
        for _, ty in fn.locals:
            self.ty(ty, fn.ty_params, fn.loc)

        if fn.body is None:
            return
        self._vars = fn.var_types()
        self.stmt(fn.body)

    def signature_ty(self, ty: Ty, fn: FnDecl) -> None:
        for t in iter_types(ty):
            if not isinstance(t, BorrowTy):
                continue
            if t.region not in fn.region_params:
                self.report(ErrorCode.UNKNOWN_REGION, f"region '{t.region} is not a parameter of {fn.name}", fn.loc)
            if has_borrow(t.inner):
                self.report(
                    ErrorCode.NESTED_BORROW_SIG,
                    f"nested borrow in the signature of {fn.name}",
                    fn.loc,
                )

    # -- places --------------------------------------------------------------
    def place(self, place: Place, loc: SourceLocation) -> Optional[Ty]:
        ty = self._vars.get(place.base)
        if ty is None:
            self.report(ErrorCode.UNKNOWN_NAME, f"unknown variable {place.base}", loc)
            return None
        for proj in place.path:
            ty = self.project(ty, proj, place, loc)
            if ty is None:
                return None
        return ty

    def project(self, ty: Ty, proj, place: Place, loc: SourceLocation) -> Optional[Ty]:
        if isinstance(proj, Deref):
            if proj.kind is DerefKind.BOX and isinstance(ty, BoxTy):
                return ty.inner
            if isinstance(ty, BorrowTy):
                want = DerefKind.MUT if ty.kind is BorrowKind.MUT else DerefKind.SHARED
                if proj.kind is want:
                    return ty.inner
            self.report(ErrorCode.TYPE_MISMATCH, f"cannot dereference {place.base} here", loc)
            return None
        if isinstance(proj, TupleField):
            if isinstance(ty, TupleTy) and proj.index < len(ty.elems):
                return ty.elems[proj.index]
            self.report(ErrorCode.TYPE_MISMATCH, f"no tuple field {proj.index} in {place.base}", loc)
            return None
        if isinstance(proj, Field):
            decl = self.types.get(ty.name) if isinstance(ty, AdtTy) else None
            ctor = decl.ctor(proj.ctor) if decl is not None else None
            if ctor is None or not 0 <= proj.index < len(ctor.fields) or ctor.fields[proj.index][0] != proj.name:
                self.report(ErrorCode.UNKNOWN_NAME, f"no field {proj.name} in {place.base}", loc)
                return None
            if len(ty.args) != len(decl.ty_params):
                return None
            return decl.field_types(proj.ctor, ty.args)[proj.index]
        return None

    # -- operands / rvalues --------------------------------------------------
    def operand(self, op: Operand, expected: Optional[Ty], loc: SourceLocation) -> Optional[Ty]:
        if isinstance(op, (Move, Copy)):
            return self.place(op.place, loc)
        if isinstance(op, Const):
            if op.kind is ScalarKind.BOOL:
                return BOOL
            if not op.kind.in_range(int(op.value)):
                self.report(ErrorCode.INT_OUT_OF_RANGE, f"{op.value} does not fit {op.kind.value}", loc)
            return ScalarTy(op.kind)
        if isinstance(op, TupleOp):
            if len(op.elems) == 1:
                self.report(ErrorCode.UNARY_TUPLE, "tuples must have length 0 or at least 2", loc)
            exp = expected.elems if isinstance(expected, TupleTy) and len(expected.elems) == len(op.elems) else (None,) * len(op.elems)
            tys = [self.operand(e, t, loc) for e, t in zip(op.elems, exp)]
            for got, want in zip(tys, exp):
                if not _same(got, want):
                    self.report(ErrorCode.TYPE_MISMATCH, "tuple component has the wrong type", loc)
            if any(t is None for t in tys):
                return None
            return TupleTy(tuple(tys))
        if isinstance(op, CtorOp):
            return self.ctor(op, expected, loc)
        return None

    def ctor(self, op: CtorOp, expected: Optional[Ty], loc: SourceLocation) -> Optional[Ty]:
        decl = self.types.get(op.adt)
        ctor = decl.ctor(op.ctor) if decl is not None else None
        if ctor is None:
            self.report(ErrorCode.UNKNOWN_NAME, f"unknown constructor {op.adt}::{op.ctor}", loc)
            for f in op.fields:
                self.operand(f, None, loc)
            return None
        if len(op.fields) != len(ctor.fields):
            self.report(
                ErrorCode.ARITY_MISMATCH,
                f"{op.adt}::{op.ctor} expects {len(ctor.fields)} fields, got {len(op.fields)}",
                loc,
            )
            return None
        if isinstance(expected, AdtTy) and expected.name == op.adt and len(expected.args) == len(decl.ty_params):
            args = expected.args
        elif not decl.ty_params:
            args = ()
        else:
            args = None
        if args is None:
            for f in op.fields:
                self.operand(f, None, loc)
            return None
        for f, fty in zip(op.fields, decl.field_types(op.ctor, args)):
            got = self.operand(f, fty, loc)
            if not _same(got, fty):
                self.report(ErrorCode.TYPE_MISMATCH, f"field of {op.adt}::{op.ctor} has the wrong type", loc)
        return AdtTy(op.adt, args)

    def rvalue(self, rv: Rvalue, expected: Optional[Ty], loc: SourceLocation) -> Optional[Ty]:
        if isinstance(rv, Use):
            return self.operand(rv.operand, expected, loc)
        if isinstance(rv, BorrowOf):
            inner = self.place(rv.place, loc)
            if inner is None:
                return None
            region = expected.region if isinstance(expected, BorrowTy) else "_"
            kind = BorrowKind.MUT if rv.kind is RefKind.MUT else BorrowKind.SHARED
            if rv.kind is RefKind.RESERVED and isinstance(expected, BorrowTy):
                # A reserved borrow is stored in a mutable-borrow slot.
                kind = expected.kind
            return BorrowTy(kind, region, inner)
        if isinstance(rv, Unop):
            ty = self.operand(rv.operand, BOOL, loc)
            if not _same(ty, BOOL):
                self.report(ErrorCode.TYPE_MISMATCH, "operand of ! must be bool", loc)
            return BOOL
        if isinstance(rv, Binop):
            hint = expected if rv.op.is_arith else None
            left = self.operand(rv.left, hint, loc)
            right = self.operand(rv.right, left or hint, loc)
            if not _same(left, right):
                self.report(ErrorCode.TYPE_MISMATCH, f"operands of {rv.op.symbol} differ in type", loc)
            operand_ty = left or right
            if rv.op.is_arith or rv.op not in (BinopKind.EQ, BinopKind.NE):
                if operand_ty is not None and not (isinstance(operand_ty, ScalarTy) and operand_ty.kind.is_integer):
                    self.report(ErrorCode.TYPE_MISMATCH, f"operands of {rv.op.symbol} must be integers", loc)
            elif operand_ty is not None and not isinstance(operand_ty, ScalarTy):
                self.report(ErrorCode.TYPE_MISMATCH, f"operands of {rv.op.symbol} must be scalars", loc)
            return operand_ty if rv.op.is_arith else BOOL
        return None

    # -- statements ----------------------------------------------------------
    def stmt(self, stmt: Statement) -> None:
        loc = stmt.loc
        if isinstance(stmt, Seq):
            self.stmt(stmt.first)
            self.stmt(stmt.second)
        elif isinstance(stmt, Assign):
            dest = self.place(stmt.place, loc)
            got = self.rvalue(stmt.rvalue, dest, loc)
            if not _same(got, dest):
                self.report(ErrorCode.TYPE_MISMATCH, "assigned value does not match the destination type", loc)
        elif isinstance(stmt, Call):
            self.call(stmt)
        elif isinstance(stmt, IfThenElse):
            cond = self.operand(stmt.cond, BOOL, loc)
            if not _same(cond, BOOL):
                self.report(ErrorCode.TYPE_MISMATCH, "condition must be bool", loc)
            self.stmt(stmt.then_branch)
            self.stmt(stmt.else_branch)
        elif isinstance(stmt, Match):
            self.match(stmt)
        elif isinstance(stmt, Free):
            ty = self.place(stmt.place, loc)
            if ty is not None and not isinstance(ty, BoxTy):
                self.report(ErrorCode.FREE_NON_BOX, "free expects a box", loc)

    def match(self, stmt: Match) -> None:
        loc = stmt.loc
        ty = self.place(stmt.place, loc)
        decl = self.types.get(ty.name) if isinstance(ty, AdtTy) else None
        if ty is not None and decl is None:
            self.report(ErrorCode.TYPE_MISMATCH, "match on a value that is not a data type", loc)
        seen: List[str] = []
        for ctor, body in stmt.arms:
            if decl is not None and decl.ctor(ctor) is None:
                self.report(ErrorCode.UNKNOWN_NAME, f"{ctor} is not a constructor of {decl.name}", loc)
            if ctor in seen:
                self.report(ErrorCode.DUPLICATE_NAME, f"duplicate match arm {ctor}", loc)
            seen.append(ctor)
            self.stmt(body)
        if decl is not None:
            missing = [c.name for c in decl.ctors if c.name not in seen]
            if missing:
                self.report(
                    ErrorCode.INCOMPLETE_MATCH,
                    f"match on {decl.name} misses {', '.join(missing)}",
                    loc,
                    missing=missing,
                )

    def call(self, stmt: Call) -> None:
        loc = stmt.loc
        dest = self.place(stmt.dest, loc)
        for ty in stmt.ty_args:
            self.ty(ty, self._fn.ty_params, loc)
            if has_borrow(ty):
                self.report(
                    ErrorCode.RESTRICTION_VIOLATION,
                    f"type argument of {stmt.fn} contains a borrow",
                    loc,
                )
        if stmt.fn == BOX_NEW:
            if len(stmt.args) != 1:
                self.report(ErrorCode.ARITY_MISMATCH, "Box::new takes one argument", loc)
                return
            inner = dest.inner if isinstance(dest, BoxTy) else (stmt.ty_args[0] if stmt.ty_args else None)
            got = self.operand(stmt.args[0], inner, loc)
            if dest is not None and not isinstance(dest, BoxTy):
                self.report(ErrorCode.TYPE_MISMATCH, "Box::new result must be stored in a box", loc)
            elif not _same(got, inner):
                self.report(ErrorCode.TYPE_MISMATCH, "Box::new argument does not match the box type", loc)
            return
        callee = self.fns.get(stmt.fn)
        if callee is None:
            self.report(ErrorCode.UNKNOWN_NAME, f"unknown function {stmt.fn}", loc)
            for a in stmt.args:
                self.operand(a, None, loc)
            return
        if stmt.region_args and len(stmt.region_args) != len(callee.region_params):
            self.report(
                ErrorCode.ARITY_MISMATCH,
                f"{stmt.fn} expects {len(callee.region_params)} region arguments",
                loc,
            )
        if len(stmt.ty_args) != len(callee.ty_params):
            self.report(
                ErrorCode.ARITY_MISMATCH,
                f"{stmt.fn} expects {len(callee.ty_params)} type arguments",
                loc,
            )
            return
        if len(stmt.args) != len(callee.args):
            self.report(
                ErrorCode.ARITY_MISMATCH,
                f"{stmt.fn} expects {len(callee.args)} arguments, got {len(stmt.args)}",
                loc,
            )
            return
        subst = dict(zip(callee.ty_params, stmt.ty_args))
        for arg, (name, formal) in zip(stmt.args, callee.args):
            want = substitute_ty(formal, subst)
            got = self.operand(arg, want, loc)
            if not _same(got, want):
                self.report(ErrorCode.TYPE_MISMATCH, f"argument {name} of {stmt.fn} has the wrong type", loc)
        if not _same(dest, substitute_ty(callee.ret_ty, subst)):
            self.report(ErrorCode.TYPE_MISMATCH, f"result of {stmt.fn} does not match the destination", loc)


def _unboxed_adts(ty: Ty) -> Tuple[str, ...]:
    """Data types reachable from `ty` without crossing a Box or a borrow."""
    if isinstance(ty, AdtTy):
        out = (ty.name,)
        for a in ty.args:
            out += _unboxed_adts(a)
        return out
    if isinstance(ty, TupleTy):
        out: Tuple[str, ...] = ()
        for e in ty.elems:
            out += _unboxed_adts(e)
        return out
    return ()


def validate(program: LlbcProgram) -> List[Diagnostic]:
    """Check a parsed program; an empty list means it is well formed."""
    diagnostics = _Validator(program).run()
    logger.debug("program_validated", diagnostics=len(diagnostics))
    return diagnostics
