"""Reading, writing and copying through places.

Every operation here is a single attempt. When the environment first needs
reorganizing (a loan must end, a reserved borrow must activate, a symbolic
value must expand) the operation raises `Blocked` with that goal; drivers
reorganize and retry.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

from src.common.errors import ErrorCode, EvalError
from src.llbc.core.printer import print_place
from src.llbc.core.types import (
    BorrowKind,
    BorrowTy,
    BoxTy,
    Deref,
    DerefKind,
    Field,
    Place,
    TupleField,
    Ty,
    iter_types,
)

from .env import Address, Env
from .values import (
    Bottom,
    BoxValue,
    CtorValue,
    MutBorrow,
    MutLoan,
    ReservedBorrow,
    ScalarValue,
    SharedBorrow,
    SharedLoan,
    SymbolicValue,
    TupleValue,
    Value,
)


@dataclass(frozen=True)
class EndLoan:
    loan: int


@dataclass(frozen=True)
class Activate:
    loan: int


@dataclass(frozen=True)
class Expand:
    sym: int


Goal = Union[EndLoan, Activate, Expand]


class Blocked(Exception):
    """An operation needs the environment reorganized before it can proceed."""

    def __init__(self, goal: Goal) -> None:
        super().__init__(goal)
        self.goal = goal


class Access(str, Enum):
    READ = "read"
    WRITE = "write"
    MOVE = "move"
    MUT_BORROW = "mut_borrow"
    GHOST = "ghost"

    @property
    def exclusive(self) -> bool:
        return self in (Access.WRITE, Access.MOVE, Access.MUT_BORROW)


def _mismatch(place: Place, what: str) -> EvalError:
    return EvalError(
        f"cannot follow {print_place(place)}: {what}",
        code=ErrorCode.PATH_MISMATCH,
        place=print_place(place),
    )


def resolve(env: Env, place: Place, access: Access = Access.READ) -> Address:
    """Address of the sub-value selected by `place`."""
    index = env.find_var(place.base)
    if index is None:
        raise EvalError(f"unbound variable {place.base}", code=ErrorCode.UNKNOWN_NAME)
    addr = Address(index, ())
    for proj in place.path:
        v = env.get(addr)
        while isinstance(v, SharedLoan):
            if access.exclusive:
                raise Blocked(EndLoan(min(v.loans)))
            addr = Address(addr.entry, addr.path + (0,))
            v = v.inner
        if isinstance(v, MutLoan):
            raise Blocked(EndLoan(v.loan))
        if isinstance(v, Bottom):
            raise EvalError(
                f"{print_place(place)} goes through an unusable value",
                code=ErrorCode.USE_OF_BOTTOM,
                place=print_place(place),
            )
        if isinstance(v, SymbolicValue):
            raise Blocked(Expand(v.sym))
        addr = _step(env, addr, v, proj, place, access)
    return addr


def _step(env: Env, addr: Address, v: Value, proj, place: Place, access: Access) -> Address:
    if isinstance(proj, Deref):
        if proj.kind is DerefKind.BOX:
            if not isinstance(v, BoxValue):
                raise _mismatch(place, "expected a box")
            return Address(addr.entry, addr.path + (0,))
        if proj.kind is DerefKind.MUT:
            if isinstance(v, MutBorrow):
                return Address(addr.entry, addr.path + (0,))
            if isinstance(v, ReservedBorrow):
                if access.exclusive:
                    raise Blocked(Activate(v.loan))
                return _owning_loan(env, v.loan, place)
            raise _mismatch(place, "expected a mutable borrow")
        if not isinstance(v, (SharedBorrow, ReservedBorrow)):
            raise _mismatch(place, "expected a shared borrow")
        if access.exclusive:
            raise EvalError(
                f"cannot mutate through the shared borrow in {print_place(place)}",
                code=ErrorCode.WRITE_THROUGH_SHARED,
                place=print_place(place),
            )
        return _owning_loan(env, v.loan, place)
    if isinstance(proj, Field):
        if not isinstance(v, CtorValue) or v.ctor != proj.ctor:
            raise _mismatch(place, f"expected constructor {proj.ctor}")
        return Address(addr.entry, addr.path + (proj.index,))
    if isinstance(proj, TupleField):
        if not isinstance(v, TupleValue) or proj.index >= len(v.elems):
            raise _mismatch(place, f"expected a tuple with field {proj.index}")
        return Address(addr.entry, addr.path + (proj.index,))
    raise _mismatch(place, f"unknown projection {proj!r}")


def _owning_loan(env: Env, loan: int, place: Place) -> Address:
    found = env.find_loan(loan)
    if found is None or not isinstance(found[1], SharedLoan):
        raise EvalError(
            f"borrow l{loan} in {print_place(place)} has no shared loan",
            code=ErrorCode.DANGLING_BORROW,
            loan=loan,
        )
    addr, _ = found
    return Address(addr.entry, addr.path + (0,))


def read_place(env: Env, place: Place) -> Value:
    return env.get(resolve(env, place, Access.READ))


def read_place_for_match(env: Env, place: Place) -> Value:
    """Like `read_place`, peeling one shared loan at the top."""
    v = read_place(env, place)
    if isinstance(v, SharedLoan):
        return v.inner
    return v


def write_place(env: Env, place: Place, value: Value) -> Env:
    return env.put(resolve(env, place, Access.WRITE), value)


def ghost_write(env: Env, place: Place, value: Value) -> Env:
    """Bookkeeping write that may follow shared borrows."""
    return env.put(resolve(env, place, Access.GHOST), value)


def is_copyable(ty: Ty) -> bool:
    for t in iter_types(ty):
        if isinstance(t, BoxTy):
            return False
        if isinstance(t, BorrowTy) and t.kind is BorrowKind.MUT:
            return False
    return True


def copy_value(env: Env, v: Value) -> Tuple[Value, Env]:
    """Copy `v`, minting fresh shared borrows for the shared borrows it holds."""
    if isinstance(v, ScalarValue):
        return v, env
    if isinstance(v, Bottom):
        raise EvalError("copy of an unusable value", code=ErrorCode.USE_OF_BOTTOM)
    if isinstance(v, MutLoan):
        raise Blocked(EndLoan(v.loan))
    if isinstance(v, SharedLoan):
        return copy_value(env, v.inner)
    if isinstance(v, SharedBorrow):
        found = env.find_loan(v.loan)
        if found is None or not isinstance(found[1], SharedLoan):
            raise EvalError(f"borrow l{v.loan} has no shared loan", code=ErrorCode.DANGLING_BORROW)
        addr, loan = found
        fresh, env = env.fresh_loan()
        env = env.put(addr, SharedLoan(loan.loans | {fresh}, loan.inner))
        return SharedBorrow(fresh), env
    if isinstance(v, CtorValue):
        fields = []
        for f in v.fields:
            c, env = copy_value(env, f)
            fields.append(c)
        return CtorValue(v.adt, v.ctor, tuple(fields)), env
    if isinstance(v, TupleValue):
        elems = []
        for e in v.elems:
            c, env = copy_value(env, e)
            elems.append(c)
        return TupleValue(tuple(elems)), env
    if isinstance(v, SymbolicValue):
        if is_copyable(v.ty):
            return v, env
        raise EvalError(f"cannot copy a value of type {v.ty}", code=ErrorCode.COPY_NONCOPYABLE)
    raise EvalError(f"cannot copy {type(v).__name__}", code=ErrorCode.COPY_NONCOPYABLE)
