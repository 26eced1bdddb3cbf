"""Environment dumps in the `x -> loan^m l0, px -> borrow^m l0 (0)` style."""

from __future__ import annotations

from src.llbc.core.printer import print_ty

from .env import Abstraction, Env
from .values import (
    Bottom,
    BoxValue,
    CtorValue,
    Ignored,
    MutBorrow,
    MutLoan,
    ProjIn,
    ProjLoans,
    ProjOut,
    ReservedBorrow,
    ScalarValue,
    SharedBorrow,
    SharedLoan,
    SymbolicValue,
    TupleValue,
    Value,
)


def format_value(v: Value) -> str:
    if isinstance(v, ScalarValue):
        if isinstance(v.value, bool):
            return "true" if v.value else "false"
        return str(v.value)
    if isinstance(v, MutBorrow):
        return f"borrow^m l{v.loan} ({format_value(v.inner)})"
    if isinstance(v, SharedBorrow):
        return f"borrow^s l{v.loan}"
    if isinstance(v, ReservedBorrow):
        return f"borrow^r l{v.loan}"
    if isinstance(v, MutLoan):
        return f"loan^m l{v.loan}"
    if isinstance(v, SharedLoan):
        ids = ", ".join(f"l{i}" for i in sorted(v.loans))
        return f"loan^s {{{ids}}} ({format_value(v.inner)})"
    if isinstance(v, Bottom):
        return "⊥"
    if isinstance(v, Ignored):
        return "_"
    if isinstance(v, CtorValue):
        if not v.fields:
            return v.ctor
        return f"{v.ctor}({', '.join(format_value(f) for f in v.fields)})"
    if isinstance(v, TupleValue):
        return f"({', '.join(format_value(e) for e in v.elems)})"
    if isinstance(v, BoxValue):
        return f"box({format_value(v.inner)})"
    if isinstance(v, SymbolicValue):
        return f"s{v.sym}"
    if isinstance(v, ProjIn):
        return f"proj_in['{v.region}]({format_value(v.inner)})"
    if isinstance(v, ProjLoans):
        return f"proj_loans['{v.region}](s{v.sym} : {print_ty(v.ty)})"
    if isinstance(v, ProjOut):
        return f"proj_out(s{v.sym} : {print_ty(v.ty)})"
    return repr(v)


def format_env(env: Env, sep: str = ", ") -> str:
    parts = []
    for e in env.entries:
        if isinstance(e, Abstraction):
            body = ", ".join(format_value(v) for v in e.values)
            parts.append(f"A#{e.abs_id}('{e.region}) {{ {body} }}")
        else:
            parts.append(f"{e.var} -> {format_value(e.value)}")
    return sep.join(parts)
