"""Normalization of input, loan and output projectors."""

from __future__ import annotations

from typing import Callable, Iterator, List, Optional, Tuple

from src.common.errors import BorrowCheckError, ErrorCode
from src.common.logger import get_logger
from src.llbc.core.types import BorrowKind, BorrowTy, BoxTy, TupleTy, Ty, has_borrow
from src.llbc.store.env import Address, Env
from src.llbc.store.values import (
    BORROWS,
    IGNORED,
    BoxValue,
    MutBorrow,
    MutLoan,
    ProjIn,
    ProjLoans,
    ProjOut,
    ReservedBorrow,
    SharedBorrow,
    SharedLoan,
    SymbolicValue,
    SymId,
    TupleValue,
    Value,
)

from .types import AliasEvent, Event, ExpandEvent, TuplePat

logger = get_logger(__name__)


def _restriction(message: str) -> BorrowCheckError:
    return BorrowCheckError(message, code=ErrorCode.RESTRICTION_VIOLATION)


def reduce_in(v: Value, ty: Ty, region: str) -> Value:
    """Keep the borrows of `region` in `v`; everything else the callee cannot give back is `_`."""
    if not has_borrow(ty):
        return v if isinstance(v, SymbolicValue) else IGNORED
    if isinstance(ty, BorrowTy):
        if not isinstance(v, BORROWS):
            raise _restriction("borrow-typed argument does not hold a borrow")
        return v if ty.region == region else IGNORED
    if isinstance(ty, TupleTy) and isinstance(v, TupleValue):
        return TupleValue(tuple(reduce_in(e, t, region) for e, t in zip(v.elems, ty.elems)))
    if isinstance(ty, BoxTy) and isinstance(v, BoxValue):
        return BoxValue(reduce_in(v.inner, ty.inner, region))
    raise _restriction(f"cannot project an argument of type {ty}")


def _unfold(env: Env, sym: SymId, ty: Ty) -> Tuple[Env, List[Event]]:
    """Unfold one layer of the output projector on `sym` and all its loan projectors."""
    source = SymbolicValue(sym, ty)
    events: List[Event] = []
    out: Value
    loans: Callable[[str], Value]
    if not has_borrow(ty):
        out = source

        def loans(region: str) -> Value:
            return IGNORED
    elif isinstance(ty, TupleTy):
        comps = []
        for t in ty.elems:
            s, env = env.fresh_sym(t)
            comps.append(s)
        events.append(ExpandEvent(source, TuplePat(tuple(comps))))
        out = TupleValue(tuple(ProjOut(c.sym, c.ty) for c in comps))

        def loans(region: str) -> Value:
            return TupleValue(tuple(ProjLoans(c.sym, c.ty, region) for c in comps))
    elif isinstance(ty, BorrowTy):
        loan, env = env.fresh_loan()
        inner, env = env.fresh_sym(ty.inner)
        events.append(AliasEvent(inner, source))
        if ty.kind is BorrowKind.MUT:
            out = MutBorrow(loan, inner)

            def loans(region: str) -> Value:
                return MutLoan(loan) if region == ty.region else IGNORED
        else:
            out = SharedBorrow(loan)

            def loans(region: str) -> Value:
                return SharedLoan(frozenset({loan}), inner) if region == ty.region else IGNORED
    elif isinstance(ty, BoxTy):
        inner, env = env.fresh_sym(ty.inner)
        events.append(AliasEvent(inner, source))
        out = BoxValue(ProjOut(inner.sym, ty.inner))

        def loans(region: str) -> Value:
            return BoxValue(ProjLoans(inner.sym, ty.inner, region))
    else:
        raise _restriction(f"cannot project a value of type {ty}")

    def rewrite(node: Value) -> Optional[Value]:
        if isinstance(node, ProjOut) and node.sym == sym:
            return out
        if isinstance(node, ProjLoans) and node.sym == sym:
            return loans(node.region)
        return None

    return env.map_values(rewrite), events


def _first(env: Env, kind: type) -> Iterator[Tuple[Address, Value]]:
    for addr, sub in env.iter_nodes():
        if isinstance(sub, kind):
            yield addr, sub


def reduce_projectors(env: Env) -> Tuple[Env, List[Event]]:
    """Rewrite until no input projector, no output projector and no trivial loan projector is left."""
    events: List[Event] = []
    while True:
        found = next(_first(env, ProjIn), None)
        if found is not None:
            addr, proj = found
            env = env.put(addr, reduce_in(proj.inner, proj.ty, proj.region))
            continue
        found = next(_first(env, ProjOut), None)
        if found is not None:
            _, proj = found
            env, unfolded = _unfold(env, proj.sym, proj.ty)
            events.extend(unfolded)
            continue
        found = next(
            ((a, p) for a, p in _first(env, ProjLoans) if not has_borrow(p.ty)), None
        )
        if found is not None:
            addr, _ = found
            env = env.put(addr, IGNORED)
            continue
        if events:
            logger.debug("projectors_reduced", events=len(events))
        return env, events


def sym_project(v: Value, ty: Ty, region: str, supply: Iterator[SymbolicValue]) -> Value:
    """The returned value as seen by the backward function of `region`.

    Mutable borrows of `region` keep their loan and receive the next symbol
    from `supply` as their inner value. Shared borrows stay so their loans
    can still end. Everything else becomes `_`.
    """
    if isinstance(ty, BorrowTy):
        if ty.kind is BorrowKind.MUT and ty.region == region and isinstance(v, MutBorrow):
            return MutBorrow(v.loan, next(supply))
        if isinstance(v, (SharedBorrow, ReservedBorrow)):
            return v
        return IGNORED
    if isinstance(ty, TupleTy) and isinstance(v, TupleValue):
        return TupleValue(tuple(sym_project(e, t, region, supply) for e, t in zip(v.elems, ty.elems)))
    if isinstance(ty, BoxTy) and isinstance(v, BoxValue):
        return BoxValue(sym_project(v.inner, ty.inner, region, supply))
    return IGNORED
