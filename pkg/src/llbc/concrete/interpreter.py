"""Definitional interpreter for LLBC under the concrete ownership semantics.

Environments are immutable; every evaluation function takes an `Env` and
returns the updated one. Values that are being computed but not yet stored
(operands of a constructor, call arguments, return values) are parked in
temporary ghost bindings so that reorganization can still see the borrows
they carry.
"""

from __future__ import annotations

from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

from src.common.config import config
from src.common.errors import BorrowCheckError, ErrorCode, EvalError, LlbcError, SourceLocation
from src.common.logger import get_logger
from src.llbc.core.printer import LlbcPrinter, print_place
from src.llbc.core.types import (
    BOX_NEW,
    Assign,
    Binop,
    BinopKind,
    BorrowOf,
    Call,
    Const,
    Copy,
    CtorOp,
    DerefKind,
    FnDecl,
    Free,
    IfThenElse,
    LlbcProgram,
    Match,
    Move,
    Nop,
    Operand,
    Panic,
    Place,
    RefKind,
    Return,
    Rvalue,
    ScalarKind,
    Seq,
    Statement,
    TupleOp,
    Ty,
    Unop,
    Use,
    flatten,
    substitute_ty,
)
from src.llbc.store.dump import format_env
from src.llbc.store.env import Env
from src.llbc.store.invariants import check_invariants
from src.llbc.store.places import (
    Access,
    Blocked,
    EndLoan,
    copy_value,
    ghost_write,
    read_place,
    read_place_for_match,
    resolve,
)
from src.llbc.store.values import (
    BOTTOM,
    Bottom,
    BoxValue,
    CtorValue,
    MutBorrow,
    MutLoan,
    ReservedBorrow,
    ScalarValue,
    SharedBorrow,
    SharedLoan,
    TupleValue,
    Value,
    bool_value,
    contains,
    has_borrows,
    has_no_outer_loans,
    outer_walk,
    walk,
)

from .reorganize import Reorganizer, block_on_loans, block_on_reserved
from .types import Control, ExecResult, Invocation, Outcome, PanicSignal, TraceStep

logger = get_logger(__name__)


def _use_of_bottom(place: Place, program: Optional[LlbcProgram] = None) -> EvalError:
    return EvalError(
        f"{print_place(place, program)} holds an unusable value",
        code=ErrorCode.USE_OF_BOTTOM,
        place=print_place(place, program),
    )


def _assign_over_loan(place: Place, reason: str) -> BorrowCheckError:
    return BorrowCheckError(
        f"cannot assign to {print_place(place)} while it is borrowed: {reason}",
        code=ErrorCode.ASSIGN_OVER_LOAN,
        place=print_place(place),
    )


def _check_lenders_survive(env: Env, place: Place, old: Value, temp: str) -> None:
    """The value being assigned may not hold a borrow of the overwritten value."""
    parked = env.temp_index(temp)
    for _, sub in outer_walk(old):
        if isinstance(sub, MutLoan):
            loans = (sub.loan,)
        elif isinstance(sub, SharedLoan):
            loans = tuple(sorted(sub.loans))
        else:
            continue
        for loan in loans:
            held = env.find_borrow(loan)
            if held is not None and held[0].entry == parked:
                raise _assign_over_loan(place, f"the new value holds l{loan}")


def checked_int(kind: ScalarKind, value: int) -> ScalarValue:
    if not kind.in_range(value):
        raise PanicSignal(f"{kind.value} overflow: {value}")
    return ScalarValue(kind, value)


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def apply_binop(op: BinopKind, left: ScalarValue, right: ScalarValue) -> ScalarValue:
    """Checked arithmetic and comparisons; overflow and division by zero panic."""
    a, b = left.value, right.value
    if op is BinopKind.EQ:
        return bool_value(a == b)
    if op is BinopKind.NE:
        return bool_value(a != b)
    if op is BinopKind.LT:
        return bool_value(a < b)
    if op is BinopKind.LE:
        return bool_value(a <= b)
    if op is BinopKind.GT:
        return bool_value(a > b)
    if op is BinopKind.GE:
        return bool_value(a >= b)
    kind = left.kind
    if op is BinopKind.ADD:
        return checked_int(kind, a + b)
    if op is BinopKind.SUB:
        return checked_int(kind, a - b)
    if op is BinopKind.MUL:
        return checked_int(kind, a * b)
    if b == 0:
        raise PanicSignal("division by zero")
    q = _trunc_div(a, b)
    if op is BinopKind.DIV:
        return checked_int(kind, q)
    return checked_int(kind, a - b * q)


class ConcreteInterpreter:
    """Executes closed programs; subclasses override the hooks for symbolic mode."""

    symbolic = False

    def __init__(
        self,
        program: LlbcProgram,
        checks: Optional[bool] = None,
        trace: bool = False,
        max_call_depth: Optional[int] = None,
    ) -> None:
        self.program = program
        self.checks = config.CHECKS if checks is None else checks
        self.tracing = trace
        self.max_call_depth = max_call_depth or config.MAX_CALL_DEPTH
        self.reorg = self.make_reorganizer()
        self.printer = LlbcPrinter(program)
        self.trace: List[TraceStep] = []
        self.call_stack: List[str] = []
        self.last_env: Optional[Env] = None

    def make_reorganizer(self) -> Reorganizer:
        return Reorganizer()

    @property
    def current_fn(self) -> Optional[str]:
        return self.call_stack[-1] if self.call_stack else None

    # ------------------------------------------------------------------
    # Operands
    # ------------------------------------------------------------------
    def eval_operand(self, env: Env, op: Operand) -> Tuple[Value, Env]:
        if isinstance(op, Const):
            return ScalarValue(op.kind, op.value), env
        if isinstance(op, Move):
            return self.reorg.attempt(env, lambda e: self._move(e, op.place))
        if isinstance(op, Copy):
            return self.reorg.attempt(env, lambda e: self._copy(e, op.place))
        if isinstance(op, CtorOp):
            fields, env = self.eval_operands(env, op.fields)
            return CtorValue(op.adt, op.ctor, tuple(fields)), env
        if isinstance(op, TupleOp):
            elems, env = self.eval_operands(env, op.elems)
            return TupleValue(tuple(elems)), env
        raise TypeError(op)

    def park_operands(self, env: Env, ops: Sequence[Operand]) -> Tuple[List[str], Env]:
        """Evaluate left to right, keeping each result in a temporary."""
        temps = []
        for op in ops:
            v, env = self.eval_operand(env, op)
            name, env = env.push_temp(v)
            temps.append(name)
        return temps, env

    def take_temps(self, env: Env, temps: Sequence[str]) -> Tuple[List[Value], Env]:
        values = []
        for name in temps:
            v, env = env.take_temp(name)
            values.append(v)
        return values, env

    def eval_operands(self, env: Env, ops: Sequence[Operand]) -> Tuple[List[Value], Env]:
        temps, env = self.park_operands(env, ops)
        return self.take_temps(env, temps)

    def _move(self, env: Env, place: Place) -> Tuple[Value, Env]:
        if place.has_deref(DerefKind.MUT, DerefKind.SHARED):
            raise EvalError(
                f"cannot move out of {print_place(place, self.program)} through a borrow",
                code=ErrorCode.MOVE_THROUGH_DEREF,
                place=print_place(place, self.program),
            )
        addr = resolve(env, place, Access.MOVE)
        v = env.get(addr)
        if contains(v, Bottom):
            raise _use_of_bottom(place, self.program)
        block_on_reserved(v)
        block_on_loans(v)
        return v, env.put(addr, BOTTOM)

    def _copy(self, env: Env, place: Place) -> Tuple[Value, Env]:
        v = read_place(env, place)
        if contains(v, Bottom):
            raise _use_of_bottom(place, self.program)
        try:
            return copy_value(env, v)
        except EvalError as exc:
            if exc.code is ErrorCode.COPY_NONCOPYABLE:
                exc.diagnostic.details["place"] = print_place(place, self.program)
            raise

    # ------------------------------------------------------------------
    # Rvalues
    # ------------------------------------------------------------------
    def eval_rvalue(self, env: Env, rv: Rvalue) -> Tuple[Value, Env]:
        if isinstance(rv, Use):
            return self.eval_operand(env, rv.operand)
        if isinstance(rv, BorrowOf):
            if rv.kind is RefKind.MUT:
                return self.reorg.attempt(env, lambda e: self._mut_borrow(e, rv.place))
            return self.reorg.attempt(env, lambda e: self._shared_borrow(e, rv.place, rv.kind))
        if isinstance(rv, Unop):
            v, env = self.eval_operand(env, rv.operand)
            return self.apply_unop(env, v)
        if isinstance(rv, Binop):
            (left, right), env = self.eval_operands(env, (rv.left, rv.right))
            return self.apply_binop(env, rv.op, left, right)
        raise TypeError(rv)

    def apply_unop(self, env: Env, v: Value) -> Tuple[Value, Env]:
        if not isinstance(v, ScalarValue) or v.kind is not ScalarKind.BOOL:
            raise EvalError("`!` expects a boolean", code=ErrorCode.TYPE_MISMATCH)
        return bool_value(not v.value), env

    def apply_binop(self, env: Env, op: BinopKind, left: Value, right: Value) -> Tuple[Value, Env]:
        if not isinstance(left, ScalarValue) or not isinstance(right, ScalarValue):
            raise EvalError(f"`{op.symbol}` expects scalars", code=ErrorCode.TYPE_MISMATCH)
        return apply_binop(op, left, right), env

    def _mut_borrow(self, env: Env, place: Place) -> Tuple[Value, Env]:
        addr = resolve(env, place, Access.MUT_BORROW)
        v = env.get(addr)
        if contains(v, Bottom):
            raise _use_of_bottom(place, self.program)
        block_on_reserved(v)
        block_on_loans(v)
        loan, env = env.fresh_loan()
        return MutBorrow(loan, v), ghost_write(env, place, MutLoan(loan))

    def _shared_borrow(self, env: Env, place: Place, kind: RefKind) -> Tuple[Value, Env]:
        addr = resolve(env, place, Access.READ)
        v = env.get(addr)
        inner = v.inner if isinstance(v, SharedLoan) else v
        if contains(inner, Bottom):
            raise _use_of_bottom(place, self.program)
        for _, sub in walk(inner):
            if isinstance(sub, MutLoan):
                raise Blocked(EndLoan(sub.loan))
        block_on_reserved(inner)
        loan, env = env.fresh_loan()
        loans = (v.loans if isinstance(v, SharedLoan) else frozenset()) | {loan}
        env = env.put(addr, SharedLoan(frozenset(loans), inner))
        borrow = SharedBorrow(loan) if kind is RefKind.SHARED else ReservedBorrow(loan)
        return borrow, env

    # ------------------------------------------------------------------
    # Assignment
    # ------------------------------------------------------------------
    def assign_temp(self, env: Env, place: Place, temp: str) -> Env:
        """E-Assign for a value parked in `temp`; the old value is kept as a ghost."""

        def op(e: Env) -> Tuple[None, Env]:
            addr = resolve(e, place, Access.WRITE)
            old = e.get(addr)
            if not has_no_outer_loans(old):
                _check_lenders_survive(e, place, old, temp)
                block_on_loans(old, outer_only=True)
            v, e = e.take_temp(temp)
            addr = resolve(e, place, Access.WRITE)
            e = e.put(addr, v)
            if has_borrows(old):
                e = e.push_ghost(old)
            return None, e.prune_ghosts()

        try:
            _, env = self.reorg.attempt(env, op)
        except BorrowCheckError as exc:
            if exc.code is not ErrorCode.STUCK_REORG:
                raise
            raise _assign_over_loan(place, str(exc)) from exc
        return env

    def assign_value(self, env: Env, place: Place, v: Value) -> Env:
        temp, env = env.push_temp(v)
        return self.assign_temp(env, place, temp)

    # ------------------------------------------------------------------
    # Statements
    # ------------------------------------------------------------------
    def eval_block(self, env: Env, stmt: Statement) -> Tuple[Env, Control]:
        for s in flatten(stmt):
            env, control = self.eval_statement(env, s)
            if control is not Control.FALL_THROUGH:
                return env, control
        return env, Control.FALL_THROUGH

    def eval_statement(self, env: Env, stmt: Statement) -> Tuple[Env, Control]:
        self.last_env = env
        try:
            env, control = self._statement(env, stmt)
        except LlbcError as exc:
            raise exc.located(replace(stmt.loc, function=self.current_fn))
        if not isinstance(stmt, (Seq, IfThenElse, Match)):
            self.after_step(env, stmt)
        return env, control

    def after_step(self, env: Env, stmt: Statement) -> None:
        if self.tracing:
            lines = self.printer.stmt(stmt, 0)
            head = lines[0] if lines else "nop;"
            self.trace.append(TraceStep(self.current_fn or "", head.strip(), format_env(env)))
        if self.checks:
            diags = check_invariants(env, self.program, symbolic=self.symbolic)
            if diags:
                first = diags[0]
                raise EvalError(
                    f"environment invariant broken: {first.message}",
                    code=first.code,
                    location=replace(stmt.loc, function=self.current_fn),
                    env=format_env(env),
                )

    def _statement(self, env: Env, stmt: Statement) -> Tuple[Env, Control]:
        if isinstance(stmt, Nop):
            return env, Control.FALL_THROUGH
        if isinstance(stmt, Seq):
            return self.eval_block(env, stmt)
        if isinstance(stmt, Assign):
            try:
                v, env = self.eval_rvalue(env, stmt.rvalue)
            except PanicSignal as signal:
                logger.debug("panic", reason=str(signal), function=self.current_fn)
                return env, Control.PANICKED
            return self.assign_value(env, stmt.place, v), Control.FALL_THROUGH
        if isinstance(stmt, Call):
            return self.eval_call(env, stmt)
        if isinstance(stmt, IfThenElse):
            return self.eval_if(env, stmt)
        if isinstance(stmt, Match):
            return self.eval_match(env, stmt)
        if isinstance(stmt, Return):
            return env, Control.RETURNED
        if isinstance(stmt, Panic):
            return env, Control.PANICKED
        if isinstance(stmt, Free):
            return self.eval_free(env, stmt), Control.FALL_THROUGH
        raise TypeError(stmt)

    def eval_if(self, env: Env, stmt: IfThenElse) -> Tuple[Env, Control]:
        cond, env = self.eval_operand(env, stmt.cond)
        if not isinstance(cond, ScalarValue) or cond.kind is not ScalarKind.BOOL:
            raise EvalError("condition is not a boolean", code=ErrorCode.TYPE_MISMATCH)
        return self.eval_block(env, stmt.then_branch if cond.value else stmt.else_branch)

    def scrutinee(self, env: Env, place: Place) -> Tuple[Value, Env]:
        def op(e: Env) -> Tuple[Value, Env]:
            v = read_place_for_match(e, place)
            if isinstance(v, MutLoan):
                raise Blocked(EndLoan(v.loan))
            if isinstance(v, Bottom):
                raise _use_of_bottom(place, self.program)
            return v, e

        return self.reorg.attempt(env, op)

    def eval_match(self, env: Env, stmt: Match) -> Tuple[Env, Control]:
        v, env = self.scrutinee(env, stmt.place)
        if not isinstance(v, CtorValue):
            raise EvalError("match on a value that is not a constructor", code=ErrorCode.PATH_MISMATCH)
        for ctor, body in stmt.arms:
            if ctor == v.ctor:
                return self.eval_block(env, body)
        raise EvalError(f"no arm for constructor {v.ctor}", code=ErrorCode.INCOMPLETE_MATCH)

    def eval_free(self, env: Env, stmt: Free) -> Env:
        def op(e: Env) -> Tuple[None, Env]:
            v = e.get(resolve(e, stmt.place, Access.WRITE))
            if not isinstance(v, BoxValue):
                raise EvalError("free of a value that is not a box", code=ErrorCode.FREE_NON_BOX)
            return None, e

        _, env = self.reorg.attempt(env, op)
        return self.assign_value(env, stmt.place, BOTTOM)

    # ------------------------------------------------------------------
    # Calls
    # ------------------------------------------------------------------
    def eval_call(self, env: Env, stmt: Call) -> Tuple[Env, Control]:
        if stmt.fn == BOX_NEW:
            (inner,), env = self.eval_operands(env, stmt.args)
            return self.assign_value(env, stmt.dest, BoxValue(inner)), Control.FALL_THROUGH
        fn = self.program.fn_decl(stmt.fn)
        if fn is None:
            raise EvalError(f"unknown function {stmt.fn}", code=ErrorCode.UNKNOWN_NAME)
        if fn.is_opaque:
            return self.opaque_call(env, stmt, fn)
        temps, env = self.park_operands(env, stmt.args)
        if len(self.call_stack) >= self.max_call_depth:
            raise EvalError(
                f"call depth limit {self.max_call_depth} exceeded",
                code=ErrorCode.CALL_DEPTH_EXCEEDED,
            )
        env, control, ret_temp = self.invoke(env, fn, stmt.ty_args, temps).unpack()
        if control is Control.PANICKED:
            return env, control
        return self.assign_temp(env, stmt.dest, ret_temp), Control.FALL_THROUGH

    def opaque_call(self, env: Env, stmt: Call, fn: FnDecl) -> Tuple[Env, Control]:
        raise EvalError(
            f"cannot execute opaque function {fn.name}",
            code=ErrorCode.OPAQUE_CALL_IN_CONCRETE_MODE,
        )

    def invoke(self, env: Env, fn: FnDecl, ty_args: Sequence[Ty], temps: Sequence[str]) -> Invocation:
        subst = dict(zip(fn.ty_params, ty_args))
        caller, env = env.push_frame()
        for (name, ty), temp in zip(fn.args, temps):
            v, env = env.take_temp(temp)
            env = env.bind(name, v, substitute_ty(ty, subst))
        for name, ty in fn.locals + (fn.ret,):
            env = env.bind(name, BOTTOM, substitute_ty(ty, subst))
        self.call_stack.append(fn.name)
        logger.debug("call_enter", function=fn.name, depth=len(self.call_stack))
        try:
            env, control = self.eval_block(env, fn.body)
            if control is Control.PANICKED:
                return Invocation(env, control)
            env, ret_temp = self.leave(env, fn)
        finally:
            self.call_stack.pop()
        logger.debug("call_exit", function=fn.name)
        return Invocation(env.pop_frame(caller), Control.RETURNED, ret_temp)

    def leave(self, env: Env, fn: FnDecl) -> Tuple[Env, str]:
        """E-Return: blank arguments and locals, then move the return value out."""
        for name, _ in fn.args + fn.locals:
            env = self.assign_value(env, Place(name), BOTTOM)
        v, env = self.eval_operand(env, Move(Place(fn.ret_var)))
        temp, env = env.push_temp(v)
        return env, temp


def run_program(
    program: LlbcProgram,
    entry: str,
    checks: Optional[bool] = None,
    trace: bool = False,
    max_call_depth: Optional[int] = None,
) -> ExecResult:
    """Run the nullary function `entry` to completion."""
    fn = program.fn_decl(entry)
    if fn is None or fn.is_opaque:
        raise EvalError(f"no function body named {entry}", code=ErrorCode.NO_ENTRY)
    if fn.args:
        raise EvalError(f"entry {entry} takes arguments", code=ErrorCode.NO_ENTRY)
    interp = ConcreteInterpreter(program, checks=checks, trace=trace, max_call_depth=max_call_depth)
    try:
        env, control, ret_temp = interp.invoke(Env(), fn, (), ()).unpack()
    except RecursionError as exc:
        raise EvalError(
            "call nesting too deep for the interpreter",
            code=ErrorCode.CALL_DEPTH_EXCEEDED,
            location=SourceLocation(function=entry),
        ) from exc
    except LlbcError as exc:
        if interp.last_env is not None:
            exc.diagnostic.details.setdefault("env", format_env(interp.last_env))
        raise
    if control is Control.PANICKED:
        logger.debug("program_panicked", entry=entry)
        return ExecResult(Outcome.PANICKED, None, env, interp.trace)
    value, env = env.take_temp(ret_temp)
    logger.debug("program_returned", entry=entry)
    return ExecResult(Outcome.RETURNED, value, env, interp.trace)
