"""Runtime values of the structured memory model.

Values are immutable trees. A position inside a value is addressed by a tuple
of child indices; `children` and `with_children` define the child order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, FrozenSet, Iterator, Optional, Tuple, Union

from src.llbc.core.types import ScalarKind, Ty

LoanId = int
SymId = int


@dataclass(frozen=True)
class ScalarValue:
    kind: ScalarKind
    value: Union[bool, int]


@dataclass(frozen=True)
class MutBorrow:
    loan: LoanId
    inner: "Value"


@dataclass(frozen=True)
class SharedBorrow:
    loan: LoanId


@dataclass(frozen=True)
class ReservedBorrow:
    loan: LoanId


@dataclass(frozen=True)
class MutLoan:
    loan: LoanId


@dataclass(frozen=True)
class SharedLoan:
    loans: FrozenSet[LoanId]
    inner: "Value"


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class CtorValue:
    adt: str
    ctor: str
    fields: Tuple["Value", ...] = ()


@dataclass(frozen=True)
class TupleValue:
    elems: Tuple["Value", ...] = ()


@dataclass(frozen=True)
class BoxValue:
    inner: "Value"


@dataclass(frozen=True)
class SymbolicValue:
    sym: SymId
    ty: Ty


@dataclass(frozen=True)
class ProjIn:
    """Input projector: the part of `inner` (of type `ty`) owned by `region`."""
    inner: "Value"
    ty: Ty
    region: str


@dataclass(frozen=True)
class ProjLoans:
    sym: SymId
    ty: Ty
    region: str


@dataclass(frozen=True)
class ProjOut:
    sym: SymId
    ty: Ty


@dataclass(frozen=True)
class Ignored:
    pass


Value = Union[
    ScalarValue, MutBorrow, SharedBorrow, ReservedBorrow, MutLoan, SharedLoan, Bottom,
    CtorValue, TupleValue, BoxValue, SymbolicValue, ProjIn, ProjLoans, ProjOut, Ignored,
]

BOTTOM = Bottom()
IGNORED = Ignored()
UNIT_VALUE = TupleValue(())

Path = Tuple[int, ...]

BORROWS = (MutBorrow, SharedBorrow, ReservedBorrow)
LOANS = (MutLoan, SharedLoan)
PROJECTORS = (ProjIn, ProjLoans, ProjOut)


def bool_value(b: bool) -> ScalarValue:
    return ScalarValue(ScalarKind.BOOL, bool(b))


# ---------------------------------------------------------------------------
# Generic structure
# ---------------------------------------------------------------------------

def children(v: Value) -> Tuple[Value, ...]:
    if isinstance(v, (MutBorrow, SharedLoan, BoxValue, ProjIn)):
        return (v.inner,)
    if isinstance(v, CtorValue):
        return v.fields
    if isinstance(v, TupleValue):
        return v.elems
    return ()


def with_children(v: Value, kids: Tuple[Value, ...]) -> Value:
    if isinstance(v, MutBorrow):
        return MutBorrow(v.loan, kids[0])
    if isinstance(v, SharedLoan):
        return SharedLoan(v.loans, kids[0])
    if isinstance(v, BoxValue):
        return BoxValue(kids[0])
    if isinstance(v, ProjIn):
        return ProjIn(kids[0], v.ty, v.region)
    if isinstance(v, CtorValue):
        return CtorValue(v.adt, v.ctor, tuple(kids))
    if isinstance(v, TupleValue):
        return TupleValue(tuple(kids))
    return v


def walk(v: Value, path: Path = ()) -> Iterator[Tuple[Path, Value]]:
    """Pre-order traversal yielding (path, sub-value)."""
    yield path, v
    for i, kid in enumerate(children(v)):
        yield from walk(kid, path + (i,))


def get_at(v: Value, path: Path) -> Value:
    for i in path:
        v = children(v)[i]
    return v


def replace_at(v: Value, path: Path, new: Value) -> Value:
    if not path:
        return new
    kids = list(children(v))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(v, tuple(kids))


def map_value(v: Value, fn: Callable[[Value], Optional[Value]]) -> Value:
    """Bottom-up rewrite; `fn` returns a replacement or None to keep the node."""
    kids = children(v)
    if kids:
        new_kids = tuple(map_value(k, fn) for k in kids)
        if new_kids != kids:
            v = with_children(v, new_kids)
    out = fn(v)
    return v if out is None else out


def outer_walk(v: Value, path: Path = ()) -> Iterator[Tuple[Path, Value]]:
    """Like `walk` but does not descend below borrows."""
    yield path, v
    if isinstance(v, MutBorrow):
        return
    for i, kid in enumerate(children(v)):
        yield from outer_walk(kid, path + (i,))


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

def contains(v: Value, kinds) -> bool:
    return any(isinstance(sub, kinds) for _, sub in walk(v))


def has_borrows(v: Value) -> bool:
    return contains(v, BORROWS)


def has_loans(v: Value) -> bool:
    return contains(v, LOANS)


def has_no_outer_loans(v: Value) -> bool:
    """No loan is reachable in `v` without passing through a borrow."""
    return not any(isinstance(sub, LOANS) for _, sub in outer_walk(v))


def loan_ids(v: Value) -> Tuple[LoanId, ...]:
    out = []
    for _, sub in walk(v):
        if isinstance(sub, MutLoan):
            out.append(sub.loan)
        elif isinstance(sub, SharedLoan):
            out.extend(sorted(sub.loans))
    return tuple(out)


def symbols(v: Value) -> Tuple[SymId, ...]:
    return tuple(sub.sym for _, sub in walk(v) if isinstance(sub, (SymbolicValue, ProjLoans, ProjOut)))


def pick_loan(v: Value, outer_only: bool = False, kinds=LOANS) -> Optional[Tuple[Path, Value]]:
    """The loan to end first in `v`.

    Deepest loans come first; at equal depth shared loans precede mutable ones,
    then traversal order decides.
    """
    nodes = outer_walk(v) if outer_only else walk(v)
    found = [(i, p, sub) for i, (p, sub) in enumerate(nodes) if isinstance(sub, kinds)]
    if not found:
        return None
    _, path, sub = min(
        found,
        key=lambda item: (-len(item[1]), 0 if isinstance(item[2], SharedLoan) else 1, item[0]),
    )
    return path, sub


def substitute_symbol(v: Value, sym: SymId, new: Value) -> Value:
    return map_value(v, lambda sub: new if isinstance(sub, SymbolicValue) and sub.sym == sym else None)
