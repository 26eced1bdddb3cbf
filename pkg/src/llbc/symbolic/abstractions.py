"""Reorganization rules that only exist in symbolic mode.

Ending a call abstraction gives back what the callee borrowed: the values
found under the abstraction's input borrows are replaced by fresh symbols,
and a backward call producing them is recorded.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, List, Optional, Tuple

from src.common.errors import BorrowCheckError, ErrorCode
from src.common.logger import get_logger
from src.llbc.core.types import BorrowKind
from src.llbc.concrete.reorganize import Reorganizer, loan_of
from src.llbc.store.env import Abstraction, Binding, Env
from src.llbc.store.places import Blocked, EndLoan
from src.llbc.store.values import (
    MutBorrow,
    MutLoan,
    SharedBorrow,
    ReservedBorrow,
    SymbolicValue,
    TupleValue,
    Value,
    pick_loan,
)
from src.llbc.synthesis.erase import erase_value

from .expand import expand_single, find_symbol
from .regions import ANY_BORROW, borrow_slots, value_at
from .types import EndAbsEvent

if TYPE_CHECKING:
    from .interpreter import SymbolicInterpreter

logger = get_logger(__name__)


def owner_name(env: Env, loan: int) -> Optional[str]:
    """Name of the variable a loan sits in, if it is a program variable."""
    found = env.find_loan(loan)
    if found is None:
        return None
    entry = env.entries[found[0].entry]
    if isinstance(entry, Binding) and not entry.ghost:
        return entry.var
    return None


class SymbolicReorganizer(Reorganizer):
    """Adds abstraction ending and symbolic expansion, recording events on the interpreter."""

    def __init__(self, interp: "SymbolicInterpreter") -> None:
        super().__init__()
        self.interp = interp

    def expand(self, env: Env, sym: int) -> Env:
        sv = find_symbol(env, sym)
        if sv is None:
            return env
        env, events = expand_single(env, sv, self.interp.program)
        logger.debug("symbol_expanded", sym=sym, ty=str(sv.ty))
        self.interp.emit(*events)
        return env

    def end_abstraction(self, env: Env, index: int) -> Env:
        abs_ = env.entries[index]
        assert isinstance(abs_, Abstraction)
        call = abs_.call
        if call is None:
            raise BorrowCheckError(
                f"borrow of region '{abs_.region} must outlive the function body",
                code=ErrorCode.STUCK_REORG,
                region=abs_.region,
            )
        picked = pick_loan(TupleValue(abs_.values))
        if picked is not None:
            raise Blocked(EndLoan(loan_of(picked[1])))

        region = call.region_param
        results: List[SymbolicValue] = []
        ghosts: List[Value] = []
        given_back = iter(call.given_back)
        for value, ty in zip(abs_.inputs, call.arg_tys):
            for path, bty in borrow_slots(ty, region, ANY_BORROW):
                borrow = value_at(value, path)
                if bty.kind is BorrowKind.MUT:
                    if not isinstance(borrow, MutBorrow):
                        raise BorrowCheckError(
                            f"region '{abs_.region} lost a mutable borrow",
                            code=ErrorCode.STUCK_REORG,
                        )
                    if call.merged:
                        back = next(given_back)
                    else:
                        back, env = self.interp.fresh(env, bty.inner, hint=owner_name(env, borrow.loan))
                        results.append(back)
                    ghosts.append(MutBorrow(borrow.loan, back))
                elif isinstance(borrow, (SharedBorrow, ReservedBorrow)):
                    ghosts.append(SharedBorrow(borrow.loan))

        if not call.merged:
            given = self._given(env, abs_)
            self.interp.emit(
                EndAbsEvent(call.callee, region, call.ty_args, call.args, given, tuple(results))
            )
        env = env.remove_entry(index)
        for ghost in ghosts:
            env = env.push_ghost(ghost)
        logger.debug(
            "abstraction_ended",
            abs_id=abs_.abs_id,
            callee=call.callee,
            region=region,
            merged=call.merged,
        )
        return env.prune_ghosts()

    @staticmethod
    def _given(env: Env, abs_: Abstraction) -> Optional[Value]:
        """What the caller hands back to the callee's backward function, if anything."""
        call = abs_.call
        values = tuple(
            erase_value(env, value_at(abs_.output, path))
            for path, _ in borrow_slots(call.ret_ty, call.region_param)
        )
        if not values:
            return None
        return values[0] if len(values) == 1 else TupleValue(values)


def close_input(
    reorg: Reorganizer, env: Env, region: str, arg_tys: Tuple
) -> Tuple[Env, Tuple[Value, ...]]:
    """End every mutable loan of the input abstraction of `region`.

    Returns the final values found under the region's mutable argument borrows.
    """
    while True:
        abs_ = _input_abstraction(env, region)
        picked = pick_loan(TupleValue(abs_.inputs), kinds=(MutLoan,))
        if picked is None:
            break
        goal = EndLoan(loan_of(picked[1]))
        solved = reorg.solve(env, goal)
        if solved == env:
            raise reorg.stuck(goal, "input abstraction cannot be closed")
        env = solved
    abs_ = _input_abstraction(env, region)
    values = tuple(
        erase_value(env, value_at(value, path))
        for value, ty in zip(abs_.inputs, arg_tys)
        for path, _ in borrow_slots(ty, region)
    )
    return env, values


def _input_abstraction(env: Env, region: str) -> Abstraction:
    for _, a in env.abstractions():
        if a.call is None and a.region == region:
            return a
    raise BorrowCheckError(
        f"no input abstraction for region '{region}",
        code=ErrorCode.BACKWARD_STUCK,
        region=region,
    )
