"""Reader for the `ml` printer style, so emitted programs can be re-evaluated."""

from __future__ import annotations

import re
from dataclasses import replace
from functools import lru_cache
from pathlib import Path
from typing import AbstractSet, Tuple

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput

from src.common.errors import ParseError
from src.common.logger import get_logger
from src.llbc.core.parser import syntax_error
from src.llbc.core.types import BOOL, I32, U32, UNIT, AdtTy, ScalarKind, TupleTy, Ty, TyVar

from .ast import (
    Bind,
    CallExpr,
    CtorDef,
    CtorExpr,
    Expr,
    Fail,
    FunDef,
    IfExpr,
    Let,
    Lit,
    MatchArm,
    MatchExpr,
    PCtor,
    Prim,
    PTuple,
    PureGroup,
    PureProgram,
    PVar,
    PWild,
    Ret,
    TupleExpr,
    TypeDef,
    Var,
)

logger = get_logger(__name__)

_GRAMMAR = Path(__file__).with_name("pure.lark")
_PRIM = re.compile(r"^((i32|u32)_(add|sub|mul|div|rem)|not|eq|ne|lt|le|gt|ge)$")


@lru_cache(maxsize=1)
def _parser() -> Lark:
    return Lark(_GRAMMAR.read_text(encoding="utf-8"), parser="lalr")


class _ToPure(Transformer):
    # -- types ---------------------------------------------------------------
    def bool_ty(self, _):
        return BOOL

    def i32_ty(self, _):
        return I32

    def u32_ty(self, _):
        return U32

    def unit_ty(self, _):
        return UNIT

    def tuple_ty(self, children):
        return TupleTy(tuple(children))

    def named_ty(self, children):
        name, *args = children
        return AdtTy(str(name), tuple(args))

    # -- declarations --------------------------------------------------------
    def ty_params(self, children):
        return tuple(str(c) for c in children)

    def param(self, children):
        name, ty = children
        return (str(name), ty)

    def params(self, children):
        return tuple(children)

    def ctor_def(self, children):
        name, *fields = children
        return CtorDef(str(name), tuple(fields))

    def type_def(self, children):
        name, ty_params, *ctors = children
        return TypeDef(str(name), ty_params, tuple(ctors))

    def struct_def(self, children):
        name, ty_params, *ctors = children
        return TypeDef(str(name), ty_params, tuple(ctors), is_struct=True)

    def fun_def(self, children):
        name, ty_params, params, ret_ty, body = children
        return FunDef(str(name), ty_params, params, ret_ty, body)

    def val_def(self, children):
        name, ty_params, params, ret_ty = children
        return FunDef(str(name), ty_params, params, ret_ty)

    def rec_group(self, children):
        return PureGroup(tuple(children), recursive=True)

    def plain_group(self, children):
        return PureGroup(tuple(children))

    def module_header(self, children):
        return None

    def start(self, children):
        return [c for c in children if c is not None]

    # -- expressions ---------------------------------------------------------
    def let_expr(self, children):
        pattern, rhs, body = children
        return Let(pattern, rhs, body)

    def bind_expr(self, children):
        _, pattern, rhs, body = children
        return Bind(pattern, rhs, body)

    def if_expr(self, children):
        return IfExpr(*children)

    def arm(self, children):
        pattern, body = children
        return MatchArm(pattern, body)

    def match_expr(self, children):
        scrutinee, *arms = children
        return MatchExpr(scrutinee, tuple(arms))

    def var(self, children):
        return Var(str(children[0]))

    def true_lit(self, _):
        return Lit(ScalarKind.BOOL, True)

    def false_lit(self, _):
        return Lit(ScalarKind.BOOL, False)

    def int_lit(self, children):
        text = str(children[0])
        kind = ScalarKind.I32
        for suffix in ("i32", "u32"):
            if text.endswith(suffix):
                kind, text = ScalarKind(suffix), text[: -len(suffix)]
        return Lit(kind, int(text))

    def unit_expr(self, _):
        return TupleExpr(())

    def tuple_expr(self, children):
        return TupleExpr(tuple(children))

    def args(self, children):
        return tuple(children)

    def ty_args(self, children):
        return tuple(children)

    def ctor_expr(self, children):
        adt, ctor, *rest = children
        return CtorExpr(str(adt), str(ctor), rest[0] if rest else ())

    def call_expr(self, children):
        name, ty_args, args = children
        if _PRIM.match(str(name)) and not ty_args:
            return Prim(str(name), args)
        return CallExpr(str(name), ty_args, args)

    def ret_expr(self, children):
        return Ret(children[0])

    def fail_expr(self, _):
        return Fail()

    # -- patterns ------------------------------------------------------------
    def pvar(self, children):
        return PVar(str(children[0]))

    def pwild(self, _):
        return PWild()

    def punit(self, _):
        return PTuple(())

    def ptuple(self, children):
        return PTuple(tuple(children))

    def pctor(self, children):
        adt, ctor, *args = children
        return PCtor(str(adt), str(ctor), tuple(args))


# ---------------------------------------------------------------------------
# Type variables: parameter-less names that are not declared types
# ---------------------------------------------------------------------------

def _fix_ty(ty: Ty, adts: AbstractSet[str]) -> Ty:
    if isinstance(ty, AdtTy):
        if not ty.args and ty.name not in adts:
            return TyVar(ty.name)
        return AdtTy(ty.name, tuple(_fix_ty(a, adts) for a in ty.args))
    if isinstance(ty, TupleTy):
        return TupleTy(tuple(_fix_ty(e, adts) for e in ty.elems))
    return ty


def _fix_expr(e: Expr, adts: AbstractSet[str]) -> Expr:
    if isinstance(e, CallExpr):
        return CallExpr(
            e.fn,
            tuple(_fix_ty(t, adts) for t in e.ty_args),
            tuple(_fix_expr(a, adts) for a in e.args),
        )
    if isinstance(e, (Let, Bind)):
        return type(e)(e.pattern, _fix_expr(e.rhs, adts), _fix_expr(e.body, adts))
    if isinstance(e, IfExpr):
        return IfExpr(e.cond, _fix_expr(e.then_branch, adts), _fix_expr(e.else_branch, adts))
    if isinstance(e, MatchExpr):
        arms = tuple(MatchArm(a.pattern, _fix_expr(a.body, adts)) for a in e.arms)
        return MatchExpr(e.scrutinee, arms)
    return e


def _fix_decl(d, adts: AbstractSet[str]):
    if isinstance(d, TypeDef):
        ctors = tuple(CtorDef(c.name, tuple(_fix_ty(f, adts) for f in c.fields)) for c in d.ctors)
        return replace(d, ctors=ctors)
    return replace(
        d,
        params=tuple((n, _fix_ty(t, adts)) for n, t in d.params),
        ret_ty=_fix_ty(d.ret_ty, adts),
        body=None if d.body is None else _fix_expr(d.body, adts),
    )


def read_pure(text: str) -> PureProgram:
    """Parse `ml`-style text; a bare top-level declaration is its own group.

    Raises:
        ParseError: with line/column and the expected-token set.
    """
    try:
        tree = _parser().parse(text)
    except UnexpectedInput as exc:
        raise syntax_error(exc) from exc
    items = _ToPure().transform(tree)
    groups: Tuple[PureGroup, ...] = tuple(
        i if isinstance(i, PureGroup) else PureGroup((i,)) for i in items
    )
    adts = {d.name for g in groups for d in g.decls if isinstance(d, TypeDef)}
    program = PureProgram(tuple(
        replace(g, decls=tuple(_fix_decl(d, adts) for d in g.decls)) for g in groups
    ))
    logger.debug("pure_program_read", groups=len(program.groups))
    return program


def read_pure_file(path) -> PureProgram:
    try:
        return read_pure(Path(path).read_text(encoding="utf-8"))
    except ParseError as exc:
        logger.warning("pure_read_failed", path=str(path), error=str(exc))
        raise
