"""Lazy environment reorganization: ending loans and activating reserved borrows."""

from __future__ import annotations

from typing import Callable, List, Tuple, TypeVar

from src.common.errors import BorrowCheckError, ErrorCode
from src.common.logger import get_logger
from src.llbc.store.env import Abstraction, Address, Env
from src.llbc.store.places import Activate, Blocked, EndLoan, Expand, Goal
from src.llbc.store.values import (
    BOTTOM,
    MutBorrow,
    MutLoan,
    ReservedBorrow,
    SharedLoan,
    Value,
    pick_loan,
    walk,
)

logger = get_logger(__name__)

T = TypeVar("T")

DEFAULT_MAX_STEPS = 10_000


def loan_of(v: Value) -> int:
    """The loan id to end in order to get rid of loan value `v`."""
    if isinstance(v, MutLoan):
        return v.loan
    return min(v.loans)


def block_on_loans(v: Value, outer_only: bool = False) -> None:
    """Raise Blocked for the first loan in `v` that has to end."""
    picked = pick_loan(v, outer_only=outer_only)
    if picked is not None:
        raise Blocked(EndLoan(loan_of(picked[1])))


def block_on_reserved(v: Value) -> None:
    for _, sub in walk(v):
        if isinstance(sub, ReservedBorrow):
            raise Blocked(Activate(sub.loan))


class Reorganizer:
    """Solves reorganization goals one rule application at a time.

    `attempt` runs an operation and, every time it is blocked, solves the goal
    and retries. Solving a goal may itself be blocked on a sub-goal; goals are
    kept on a stack and a repeated goal means reorganization is stuck.
    """

    def __init__(self, max_steps: int = DEFAULT_MAX_STEPS) -> None:
        self.max_steps = max_steps

    # -- drivers -------------------------------------------------------------
    def attempt(self, env: Env, op: Callable[[Env], Tuple[T, Env]]) -> Tuple[T, Env]:
        for _ in range(self.max_steps):
            try:
                return op(env)
            except Blocked as blocked:
                solved = self.solve(env, blocked.goal)
                if solved == env:
                    raise self.stuck(blocked.goal, "reorganization made no progress")
                env = solved
        raise self.stuck(None, "step limit reached")

    def solve(self, env: Env, goal: Goal) -> Env:
        stack: List[Goal] = [goal]
        steps = 0
        while stack:
            steps += 1
            if steps > self.max_steps:
                raise self.stuck(goal, "step limit reached")
            current = stack[-1]
            try:
                env = self.step(env, current)
            except Blocked as blocked:
                if blocked.goal in stack:
                    raise self.stuck(blocked.goal, "cyclic reorganization goals")
                stack.append(blocked.goal)
                continue
            stack.pop()
        return env

    def step(self, env: Env, goal: Goal) -> Env:
        if isinstance(goal, EndLoan):
            return self.end_loan(env, goal.loan)
        if isinstance(goal, Activate):
            return self.activate(env, goal.loan)
        if isinstance(goal, Expand):
            return self.expand(env, goal.sym)
        raise TypeError(goal)

    @staticmethod
    def stuck(goal, reason: str) -> BorrowCheckError:
        return BorrowCheckError(
            f"cannot reorganize the environment ({reason}): {goal}",
            code=ErrorCode.STUCK_REORG,
            goal=str(goal),
        )

    # -- rules ---------------------------------------------------------------
    def _not_borrowed(self, env: Env, addr: Address) -> None:
        """Values under a mutable borrow or a shared loan must be released first."""
        for _, anc in reversed(env.ancestors(addr)):
            if isinstance(anc, MutBorrow):
                raise Blocked(EndLoan(anc.loan))
            if isinstance(anc, SharedLoan):
                raise Blocked(EndLoan(min(anc.loans)))

    def end_loan(self, env: Env, loan: int) -> Env:
        found = env.find_loan(loan)
        if found is None:
            return env
        loan_addr, loan_value = found
        held = env.find_borrow(loan)
        if held is None:
            raise BorrowCheckError(
                f"loan l{loan} has no borrow left to end",
                code=ErrorCode.STUCK_REORG,
                loan=loan,
            )
        borrow_addr, borrow = held
        if isinstance(env.entries[borrow_addr.entry], Abstraction):
            return self.end_abstraction(env, borrow_addr.entry)
        self._not_borrowed(env, borrow_addr)
        if isinstance(borrow, MutBorrow):
            block_on_loans(borrow.inner)
            env = env.put(borrow_addr, BOTTOM)
            env = env.put(loan_addr, borrow.inner)
            logger.debug("end_mut", loan=loan)
        else:
            remaining = loan_value.loans - {loan}
            env = env.put(borrow_addr, BOTTOM)
            env = env.put(
                loan_addr,
                SharedLoan(remaining, loan_value.inner) if remaining else loan_value.inner,
            )
            logger.debug("end_shared", loan=loan, remaining=sorted(remaining))
        return env.prune_ghosts()

    def activate(self, env: Env, loan: int) -> Env:
        held = env.find_borrow(loan)
        if held is None or not isinstance(held[1], ReservedBorrow):
            return env
        borrow_addr, _ = held
        found = env.find_loan(loan)
        if found is None or not isinstance(found[1], SharedLoan):
            raise BorrowCheckError(
                f"reserved borrow l{loan} has no shared loan",
                code=ErrorCode.DANGLING_BORROW,
                loan=loan,
            )
        loan_addr, shared = found
        others = sorted(shared.loans - {loan})
        if others:
            raise Blocked(EndLoan(others[0]))
        block_on_loans(shared.inner)
        for _, anc in reversed(env.ancestors(loan_addr)):
            if isinstance(anc, SharedLoan):
                raise Blocked(EndLoan(min(anc.loans)))
        env = env.put(loan_addr, MutLoan(loan))
        env = env.put(borrow_addr, MutBorrow(loan, shared.inner))
        logger.debug("activate_reserved", loan=loan)
        return env

    def end_abstraction(self, env: Env, index: int) -> Env:
        raise BorrowCheckError(
            "a borrow held by a region abstraction cannot end in concrete mode",
            code=ErrorCode.STUCK_REORG,
        )

    def expand(self, env: Env, sym: int) -> Env:
        raise BorrowCheckError(
            f"symbolic value s{sym} in a concrete environment",
            code=ErrorCode.SYMBOLIC_IN_CONCRETE,
        )
