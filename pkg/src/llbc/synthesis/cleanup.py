"""Let-inlining and dead-binding removal on synthesized bodies."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from src.llbc.pure.ast import (
    UNIT_EXPR,
    Bind,
    CallExpr,
    CtorExpr,
    Expr,
    Fail,
    FunDef,
    IfExpr,
    Let,
    Lit,
    MatchArm,
    MatchExpr,
    Pattern,
    Prim,
    PTuple,
    PVar,
    PWild,
    Ret,
    TupleExpr,
    Var,
    count_uses,
    free_vars,
    pattern_vars,
)

# Primitives that cannot fail.
PURE_PRIMS = frozenset({"eq", "ne", "lt", "le", "gt", "ge", "not"})


def substitute(e: Expr, name: str, repl: Expr) -> Expr:
    """Replace free occurrences of variable `name`."""
    if isinstance(e, Var):
        return repl if e.name == name else e
    if isinstance(e, (Lit, Fail)):
        return e
    if isinstance(e, TupleExpr):
        return TupleExpr(tuple(substitute(x, name, repl) for x in e.elems))
    if isinstance(e, (CtorExpr, Prim, CallExpr)):
        return replace(e, args=tuple(substitute(x, name, repl) for x in e.args))
    if isinstance(e, IfExpr):
        return IfExpr(
            substitute(e.cond, name, repl),
            substitute(e.then_branch, name, repl),
            substitute(e.else_branch, name, repl),
        )
    if isinstance(e, MatchExpr):
        arms = tuple(
            arm if name in pattern_vars(arm.pattern)
            else MatchArm(arm.pattern, substitute(arm.body, name, repl))
            for arm in e.arms
        )
        return MatchExpr(substitute(e.scrutinee, name, repl), arms)
    if isinstance(e, (Let, Bind)):
        rhs = substitute(e.rhs, name, repl)
        body = e.body if name in pattern_vars(e.pattern) else substitute(e.body, name, repl)
        return type(e)(e.pattern, rhs, body)
    if isinstance(e, Ret):
        return Ret(substitute(e.value, name, repl))
    raise TypeError(e)


def _pattern_expr(p: Pattern) -> Optional[Expr]:
    if isinstance(p, PVar):
        return Var(p.name)
    if isinstance(p, PWild):
        return UNIT_EXPR
    if isinstance(p, PTuple):
        elems = tuple(_pattern_expr(x) for x in p.elems)
        return None if any(x is None for x in elems) else TupleExpr(elems)
    return None


def _unused(pattern: Pattern, body: Expr) -> bool:
    used = set(free_vars(body))
    return not any(v in used for v in pattern_vars(pattern))


def _trivial(e: Expr) -> bool:
    return isinstance(e, (Var, Lit)) or e == UNIT_EXPR


def _rewrite(e: Expr, backward: bool) -> Expr:
    """One rule at the root, if any applies."""
    if isinstance(e, Let):
        if isinstance(e.pattern, PVar) and _trivial(e.rhs):
            return substitute(e.body, e.pattern.name, e.rhs)
        if (
            isinstance(e.pattern, PVar)
            and isinstance(e.rhs, Prim)
            and e.rhs.op in PURE_PRIMS
            and count_uses(e.body, e.pattern.name) == 1
        ):
            return substitute(e.body, e.pattern.name, e.rhs)
        if _unused(e.pattern, e.body):
            return e.body
    if isinstance(e, Bind):
        if isinstance(e.body, Ret) and _pattern_expr(e.pattern) == e.body.value:
            return e.rhs
        if (
            backward
            and isinstance(e.rhs, CallExpr)
            and e.rhs.fn.endswith("_fwd")
            and _unused(e.pattern, e.body)
        ):
            return e.body
    return e


def simplify(e: Expr, backward: bool = False) -> Expr:
    """Bottom-up rewriting to a fixpoint."""
    while True:
        out = _simplify_once(e, backward)
        if out == e:
            return out
        e = out


def _simplify_once(e: Expr, backward: bool) -> Expr:
    if isinstance(e, IfExpr):
        e = IfExpr(
            _simplify_once(e.cond, backward),
            _simplify_once(e.then_branch, backward),
            _simplify_once(e.else_branch, backward),
        )
    elif isinstance(e, MatchExpr):
        e = MatchExpr(
            e.scrutinee,
            tuple(MatchArm(a.pattern, _simplify_once(a.body, backward)) for a in e.arms),
        )
    elif isinstance(e, (Let, Bind)):
        e = type(e)(e.pattern, _simplify_once(e.rhs, backward), _simplify_once(e.body, backward))
    return _rewrite(e, backward)


def cleanup(decl: FunDef, backward: bool = False) -> FunDef:
    if decl.body is None:
        return decl
    return replace(decl, body=simplify(decl.body, backward))
