"""Symbolic execution of function bodies; doubles as the borrow checker.

Each function is executed once against its own signature: arguments are
symbolic, callees are summarized by region abstractions, and every branch
on a symbolic value forks the execution. The result is a branch tree that
synthesis folds into pure code.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

from src.common.errors import (
    BorrowCheckError,
    ErrorCode,
    EvalError,
    LlbcError,
    ValidationError,
)
from src.common.logger import get_logger
from src.llbc.concrete.interpreter import ConcreteInterpreter
from src.llbc.concrete.reorganize import Reorganizer
from src.llbc.concrete.types import Control
from src.llbc.core.terminalize import terminalize_program
from src.llbc.core.types import (
    BOOL,
    BOX_NEW,
    UNIT,
    Assign,
    BinopKind,
    Call,
    FnDecl,
    IfThenElse,
    LlbcProgram,
    Match,
    Move,
    Panic,
    Place,
    Return,
    ScalarKind,
    ScalarTy,
    Statement,
    Ty,
    UnopKind,
    flatten,
    seq,
    substitute_ty,
)
from src.llbc.core.validate import validate
from src.llbc.store.dump import format_env
from src.llbc.store.env import Abstraction, CallInfo, Env
from src.llbc.store.values import (
    BOTTOM,
    IGNORED,
    CtorValue,
    MutBorrow,
    ProjIn,
    ProjLoans,
    ProjOut,
    ScalarValue,
    SymbolicValue,
    Value,
    bool_value,
)
from src.llbc.synthesis.erase import erase_value

from .abstractions import SymbolicReorganizer, close_input, owner_name
from .expand import adt_decl, fresh_fields
from .projectors import reduce_projectors, sym_project
from .regions import borrow_slots, has_backward, merged_regions, value_at
from .types import (
    AliasEvent,
    Block,
    CallEvent,
    CheckResult,
    Event,
    FunctionTree,
    IfNode,
    LeafOutcome,
    MatchArm,
    MatchNode,
    PanicLeaf,
    PrimEvent,
    ReturnLeaf,
    Terminal,
)

logger = get_logger(__name__)


class SymbolicInterpreter(ConcreteInterpreter):
    """Runs one function at a time over symbolic inputs."""

    symbolic = True

    def __init__(self, program: LlbcProgram, checks: Optional[bool] = None) -> None:
        super().__init__(program, checks=checks)
        self.events: List[Event] = []
        self.hints: Dict[int, str] = {}
        self.hint: Optional[str] = None
        self.fn: Optional[FnDecl] = None
        self.back_params: Dict[str, Tuple[SymbolicValue, ...]] = {}
        self.last_env: Optional[Env] = None
        self.sym_high = 0
        self.region_counter = 0

    def make_reorganizer(self) -> Reorganizer:
        return SymbolicReorganizer(self)

    # ------------------------------------------------------------------
    # Symbols and events
    # ------------------------------------------------------------------
    def fresh(self, env: Env, ty: Ty, hint: Optional[str] = None) -> Tuple[SymbolicValue, Env]:
        sv, env = env.fresh_sym(ty)
        name = hint or self.hint
        if name:
            self.hints.setdefault(sv.sym, name)
        self.sym_high = max(self.sym_high, env.next_sym)
        return sv, env

    def emit(self, *events: Event) -> None:
        for event in events:
            if isinstance(event, AliasEvent) and event.source.sym in self.hints:
                self.hints.setdefault(event.target.sym, self.hints[event.source.sym])
            self.events.append(event)

    def reduce(self, env: Env) -> Env:
        env, events = reduce_projectors(env)
        self.emit(*events)
        self.sym_high = max(self.sym_high, env.next_sym)
        return env

    def resume(self, env: Env) -> Env:
        """Continue numbering after every symbol created on earlier branches."""
        self.sym_high = max(self.sym_high, env.next_sym)
        return replace(env, next_sym=self.sym_high)

    # ------------------------------------------------------------------
    # Hooks
    # ------------------------------------------------------------------
    def eval_statement(self, env: Env, stmt: Statement) -> Tuple[Env, Control]:
        if isinstance(stmt, Assign):
            self.hint = stmt.place.base
        elif isinstance(stmt, Call):
            self.hint = stmt.dest.base
        try:
            return super().eval_statement(env, stmt)
        finally:
            self.hint = None

    def after_step(self, env: Env, stmt: Statement) -> None:
        self.last_env = env
        super().after_step(env, stmt)

    @staticmethod
    def _operand_ty(v: Value) -> Ty:
        if isinstance(v, ScalarValue):
            return ScalarTy(v.kind)
        if isinstance(v, SymbolicValue):
            return v.ty
        raise EvalError("arithmetic on a value that is not a scalar", code=ErrorCode.TYPE_MISMATCH)

    def apply_unop(self, env: Env, v: Value) -> Tuple[Value, Env]:
        if self._operand_ty(v) != BOOL:
            raise EvalError("`!` expects a boolean", code=ErrorCode.TYPE_MISMATCH)
        dest, env = self.fresh(env, BOOL)
        self.emit(PrimEvent(dest, UnopKind.NOT, (v,)))
        return dest, env

    def apply_binop(self, env: Env, op: BinopKind, left: Value, right: Value) -> Tuple[Value, Env]:
        ty = self._operand_ty(left) if op.is_arith else BOOL
        self._operand_ty(right)
        dest, env = self.fresh(env, ty)
        self.emit(PrimEvent(dest, op, (left, right)))
        return dest, env

    def eval_call(self, env: Env, stmt: Call) -> Tuple[Env, Control]:
        if stmt.fn == BOX_NEW:
            return super().eval_call(env, stmt)
        fn = self.program.fn_decl(stmt.fn)
        if fn is None:
            raise EvalError(f"unknown function {stmt.fn}", code=ErrorCode.UNKNOWN_NAME)
        temps, env = self.park_operands(env, stmt.args)
        return self.abstract_call(env, stmt, fn, temps), Control.FALL_THROUGH

    # ------------------------------------------------------------------
    # Calls
    # ------------------------------------------------------------------
    def _fresh_region(self) -> str:
        self.region_counter += 1
        return f"_{self.region_counter}"

    def abstract_call(self, env: Env, stmt: Call, fn: FnDecl, temps: Sequence[str]) -> Env:
        """Summarize a call by one abstraction per region parameter of the callee."""
        ty_subst = dict(zip(fn.ty_params, stmt.ty_args))
        region_args = stmt.region_args or tuple(self._fresh_region() for _ in fn.region_params)
        arg_tys = tuple(substitute_ty(ty, ty_subst) for _, ty in fn.args)
        ret_ty = substitute_ty(fn.ret_ty, ty_subst)

        values, env = self.take_temps(env, temps)
        args = tuple(erase_value(env, v) for v in values)
        ret, env = self.fresh(env, ret_ty, hint=stmt.dest.base)

        given_back: List[SymbolicValue] = []
        for region, caller_region in zip(fn.region_params, region_args):
            merged = not has_backward(fn, region)
            back: List[SymbolicValue] = []
            if merged:
                for v, ty in zip(values, arg_tys):
                    for path, bty in borrow_slots(ty, region):
                        borrow = value_at(v, path)
                        hint = owner_name(env, borrow.loan) if isinstance(borrow, MutBorrow) else None
                        s, env = self.fresh(env, bty.inner, hint=hint)
                        back.append(s)
                given_back.extend(back)
            abs_id, env = env.fresh_abs()
            info = CallInfo(
                fn.name, region, stmt.ty_args, args, arg_tys, ret_ty, tuple(back), merged
            )
            env = env.append(
                Abstraction(
                    abs_id,
                    caller_region,
                    tuple(ProjIn(v, ty, region) for v, ty in zip(values, arg_tys)),
                    ProjLoans(ret.sym, ret_ty, region),
                    info,
                )
            )
        self.emit(CallEvent(ret, fn.name, stmt.ty_args, args, tuple(given_back)))
        temp, env = env.push_temp(ProjOut(ret.sym, ret_ty))
        env = self.reduce(env)
        logger.debug("call_abstracted", callee=fn.name, regions=list(region_args))
        return self.assign_temp(env, stmt.dest, temp)

    # ------------------------------------------------------------------
    # Function entry
    # ------------------------------------------------------------------
    def init_callee_env(self, fn: FnDecl) -> Tuple[Env, Tuple[SymbolicValue, ...]]:
        """Arguments as output projectors, one input abstraction per region."""
        env = Env()
        params: List[SymbolicValue] = []
        for name, ty in fn.args:
            s, env = self.fresh(env, ty, hint=name)
            params.append(s)
            env = env.bind(name, ProjOut(s.sym, ty), ty)
        for region in fn.region_params:
            abs_id, env = env.fresh_abs()
            env = env.append(
                Abstraction(
                    abs_id,
                    region,
                    tuple(ProjLoans(s.sym, ty, region) for s, (_, ty) in zip(params, fn.args)),
                    IGNORED,
                )
            )
        for name, ty in fn.locals + (fn.ret,):
            env = env.bind(name, BOTTOM, ty)
        return self.reduce(env), tuple(params)

    def _allocate_back_params(self, env: Env, fn: FnDecl) -> Env:
        for region in fn.region_params:
            if not has_backward(fn, region):
                continue
            syms = []
            for _, bty in borrow_slots(fn.ret_ty, region):
                s, env = self.fresh(env, bty.inner, hint="ret")
                syms.append(s)
            self.back_params[region] = tuple(syms)
        return env

    def check_function(self, fn: FnDecl) -> FunctionTree:
        self.fn = fn
        self.call_stack = [fn.name]
        self.events = []
        logger.debug("symbolic_start", function=fn.name)
        env, params = self.init_callee_env(fn)
        env = self._allocate_back_params(env, fn)
        self.last_env = env
        prologue = tuple(self.events)
        body = self.exec_block(env, fn.body)
        return FunctionTree(
            fn=fn,
            params=params,
            body=Block(prologue + body.events, body.terminal),
            merged=merged_regions(fn),
            back_params=dict(self.back_params),
            hints=dict(self.hints),
        )

    # ------------------------------------------------------------------
    # Blocks and branching
    # ------------------------------------------------------------------
    def exec_block(self, env: Env, stmt: Statement) -> Block:
        saved = self.events
        self.events = []
        try:
            terminal = self._exec(self.resume(env), list(flatten(stmt)))
            return Block(tuple(self.events), terminal)
        finally:
            self.events = saved

    def _exec(self, env: Env, items: List[Statement]) -> Terminal:
        while items:
            s, rest = items[0], items[1:]
            try:
                if isinstance(s, IfThenElse):
                    cond, env = self.eval_operand(env, s.cond)
                    if isinstance(cond, SymbolicValue):
                        return self._branch_if(env, cond, s, rest)
                    if not isinstance(cond, ScalarValue) or cond.kind is not ScalarKind.BOOL:
                        raise EvalError("condition is not a boolean", code=ErrorCode.TYPE_MISMATCH)
                    items = list(flatten(s.then_branch if cond.value else s.else_branch)) + rest
                    continue
                if isinstance(s, Match):
                    v, env = self.scrutinee(env, s.place)
                    if isinstance(v, SymbolicValue):
                        return self._branch_match(env, v, s, rest)
                    if not isinstance(v, CtorValue):
                        raise EvalError("match on a value that is not a constructor", code=ErrorCode.PATH_MISMATCH)
                    items = list(flatten(self._arm(s, v.ctor))) + rest
                    continue
                if isinstance(s, Return):
                    return self.return_leaf(env)
                if isinstance(s, Panic):
                    self.sym_high = max(self.sym_high, env.next_sym)
                    return PanicLeaf()
            except LlbcError as exc:
                raise exc.located(replace(s.loc, function=self.current_fn))
            env, control = self.eval_statement(env, s)
            if control is Control.PANICKED:
                return PanicLeaf()
            items = rest
        return self.return_leaf(env)

    @staticmethod
    def _arm(stmt: Match, ctor: str) -> Statement:
        for name, body in stmt.arms:
            if name == ctor:
                return body
        raise EvalError(f"no arm for constructor {ctor}", code=ErrorCode.INCOMPLETE_MATCH)

    def _branch_if(self, env: Env, cond: SymbolicValue, stmt: IfThenElse, rest: List[Statement]) -> IfNode:
        logger.debug("branch_if", sym=cond.sym)
        then_block = self.exec_block(
            env.substitute(cond.sym, bool_value(True)), seq(stmt.then_branch, *rest)
        )
        else_block = self.exec_block(
            env.substitute(cond.sym, bool_value(False)), seq(stmt.else_branch, *rest)
        )
        return IfNode(cond, then_block, else_block)

    def _branch_match(self, env: Env, v: SymbolicValue, stmt: Match, rest: List[Statement]) -> MatchNode:
        decl = adt_decl(self.program, v)
        logger.debug("branch_match", sym=v.sym, adt=decl.name)
        arms = []
        for ctor in decl.ctors:
            body = self._arm(stmt, ctor.name)
            arm_env = self.resume(env)
            fields, arm_env = fresh_fields(arm_env, decl, ctor.name, v)
            arm_env = arm_env.substitute(v.sym, CtorValue(decl.name, ctor.name, fields))
            arms.append(MatchArm(ctor.name, fields, self.exec_block(arm_env, seq(body, *rest))))
        return MatchNode(v, decl.name, tuple(arms))

    # ------------------------------------------------------------------
    # Return
    # ------------------------------------------------------------------
    def return_leaf(self, env: Env) -> ReturnLeaf:
        """Close the function from the same snapshot once per output function."""
        fn = self.fn
        for name, _ in fn.args + fn.locals:
            env = self.assign_value(env, Place(name), BOTTOM)
        ret, env = self.eval_operand(env, Move(Place(fn.ret_var)))
        self.last_env = env
        forward = self._forward_outcome(env, ret)
        backward = tuple(
            (region, self._backward_outcome(env, ret, region)) for region in self.back_params
        )
        return ReturnLeaf(forward, backward)

    def _capture(self) -> List[Event]:
        saved, self.events = self.events, []
        return saved

    def _forward_outcome(self, snapshot: Env, ret: Value) -> LeafOutcome:
        fn = self.fn
        values: List[Value] = [] if fn.ret_ty == UNIT else [erase_value(snapshot, ret)]
        outer = self._capture()
        try:
            env = self.resume(snapshot).push_ghost(ret)
            for region in merged_regions(fn):
                env, given = close_input(self.reorg, env, region, [ty for _, ty in fn.args])
                values.extend(given)
            self.sym_high = max(self.sym_high, env.next_sym)
            return LeafOutcome(tuple(self.events), tuple(values))
        finally:
            self.events = outer

    def _backward_outcome(self, snapshot: Env, ret: Value, region: str) -> LeafOutcome:
        fn = self.fn
        outer = self._capture()
        try:
            env = self.resume(snapshot)
            supply = iter(self.back_params[region])
            env = env.push_ghost(sym_project(ret, fn.ret_ty, region, supply))
            env, values = close_input(self.reorg, env, region, [ty for _, ty in fn.args])
            self.sym_high = max(self.sym_high, env.next_sym)
            return LeafOutcome(tuple(self.events), values)
        except BorrowCheckError as exc:
            raise BorrowCheckError(
                f"cannot give back region '{region}: {exc.diagnostic.message}",
                code=ErrorCode.BACKWARD_STUCK,
                region=region,
            ) from exc
        finally:
            self.events = outer


def check_function(program: LlbcProgram, fn: FnDecl, checks: Optional[bool] = None) -> CheckResult:
    """Borrow-check one function of a validated, terminalized program."""
    if fn.is_opaque:
        return CheckResult(fn.name, opaque=True)
    interp = SymbolicInterpreter(program, checks=checks)
    try:
        tree = interp.check_function(fn)
    except LlbcError as exc:
        diag = exc.diagnostic
        dump = diag.details.get("env")
        if dump is None and interp.last_env is not None:
            dump = format_env(interp.last_env)
        logger.debug("function_rejected", function=fn.name, code=diag.code.value)
        return CheckResult(fn.name, error=diag, env_dump=dump)
    except RecursionError:
        logger.debug("function_rejected", function=fn.name, code=ErrorCode.CALL_DEPTH_EXCEEDED.value)
        return CheckResult(
            fn.name,
            error=BorrowCheckError(
                "function body nests too deeply to analyse",
                code=ErrorCode.CALL_DEPTH_EXCEEDED,
            ).diagnostic,
        )
    logger.debug("function_accepted", function=fn.name)
    return CheckResult(fn.name, tree=tree)


def prepare(program: LlbcProgram) -> LlbcProgram:
    """Validate and terminalize; raises ValidationError on a malformed program."""
    diagnostics = validate(program)
    if diagnostics:
        raise ValidationError(diagnostics)
    return terminalize_program(program)


def borrow_check(program: LlbcProgram, checks: Optional[bool] = None) -> List[CheckResult]:
    """Symbolically execute every function; one verdict per declaration."""
    program = prepare(program)
    return [check_function(program, fn, checks=checks) for fn in program.fn_decls]
