"""Corpus paths, loaders and a structural comparison for generated pure functions."""

from pathlib import Path

from src.llbc.core import parse_file
from src.llbc.pure.ast import (
    Bind,
    CallExpr,
    CtorExpr,
    Fail,
    IfExpr,
    Let,
    Lit,
    MatchExpr,
    PCtor,
    Prim,
    PTuple,
    PVar,
    PWild,
    Ret,
    TupleExpr,
    Var,
)

CORPUS = Path(__file__).parent / "corpus"
INVALID = CORPUS / "invalid"

# Every corpus program the borrow checker accepts in full.
ACCEPTED_FILES = sorted(
    p.name for p in CORPUS.glob("*.llbc") if p.name != "illegal_borrow.llbc"
)


def load(name: str):
    return parse_file(CORPUS / name)


def alpha_equivalent(f, g) -> bool:
    """Same pure function up to the names of parameters and local binders."""
    if (f.name, f.ty_params, f.ret_ty) != (g.name, g.ty_params, g.ret_ty):
        return False
    if [ty for _, ty in f.params] != [ty for _, ty in g.params]:
        return False
    names = {a: b for (a, _), (b, _) in zip(f.params, g.params)}
    return _same_expr(f.body, g.body, names)


def _bind(p, q, names):
    if isinstance(p, PVar) and isinstance(q, PVar):
        return {**names, p.name: q.name}
    if isinstance(p, PWild) and isinstance(q, PWild):
        return names
    if isinstance(p, PTuple) and isinstance(q, PTuple) and len(p.elems) == len(q.elems):
        for a, b in zip(p.elems, q.elems):
            names = _bind(a, b, names)
            if names is None:
                return None
        return names
    if isinstance(p, PCtor) and isinstance(q, PCtor) and (p.adt, p.ctor) == (q.adt, q.ctor):
        return _bind(PTuple(p.args), PTuple(q.args), names)
    return None


def _same_all(xs, ys, names):
    return len(xs) == len(ys) and all(_same_expr(x, y, names) for x, y in zip(xs, ys))


def _same_expr(a, b, names) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        return names.get(a.name, a.name) == b.name
    if isinstance(a, (Lit, Fail)):
        return a == b
    if isinstance(a, TupleExpr):
        return _same_all(a.elems, b.elems, names)
    if isinstance(a, CtorExpr):
        return (a.adt, a.ctor) == (b.adt, b.ctor) and _same_all(a.args, b.args, names)
    if isinstance(a, Prim):
        return a.op == b.op and _same_all(a.args, b.args, names)
    if isinstance(a, CallExpr):
        return (a.fn, a.ty_args) == (b.fn, b.ty_args) and _same_all(a.args, b.args, names)
    if isinstance(a, Ret):
        return _same_expr(a.value, b.value, names)
    if isinstance(a, IfExpr):
        return _same_all(
            (a.cond, a.then_branch, a.else_branch), (b.cond, b.then_branch, b.else_branch), names
        )
    if isinstance(a, MatchExpr):
        if not _same_expr(a.scrutinee, b.scrutinee, names) or len(a.arms) != len(b.arms):
            return False
        for x, y in zip(a.arms, b.arms):
            inner = _bind(x.pattern, y.pattern, names)
            if inner is None or not _same_expr(x.body, y.body, inner):
                return False
        return True
    if isinstance(a, (Let, Bind)):
        inner = _bind(a.pattern, b.pattern, names)
        return (
            inner is not None
            and _same_expr(a.rhs, b.rhs, names)
            and _same_expr(a.body, b.body, inner)
        )
    raise TypeError(a)
