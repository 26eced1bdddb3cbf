"""Fuel-bounded call-by-value evaluator for pure programs.

Values are the borrow-free store values (`ScalarValue`, `TupleValue`,
`CtorValue`) so results compare directly with concrete executions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Union

from src.common.config import config
from src.common.errors import ErrorCode, EvalError
from src.common.logger import get_logger
from src.llbc.concrete.interpreter import apply_binop
from src.llbc.concrete.types import PanicSignal
from src.llbc.core.types import AdtTy, BinopKind, ScalarKind, ScalarTy, TupleTy, Ty, substitute_ty
from src.llbc.store.dump import format_value
from src.llbc.store.values import CtorValue, ScalarValue, TupleValue, Value, bool_value

from .ast import (
    MASSERT,
    Bind,
    CallExpr,
    CtorExpr,
    Expr,
    Fail,
    FunDef,
    IfExpr,
    Let,
    Lit,
    MatchExpr,
    Pattern,
    PCtor,
    Prim,
    PTuple,
    PureProgram,
    PVar,
    PWild,
    Ret,
    TupleExpr,
    Var,
)

logger = get_logger(__name__)

_COMPARISONS = {op.value: op for op in (
    BinopKind.EQ, BinopKind.NE, BinopKind.LT, BinopKind.LE, BinopKind.GT, BinopKind.GE
)}


@dataclass(frozen=True)
class PureReturn:
    value: Value

    def __str__(self) -> str:
        return f"Return({format_value(self.value)})"


@dataclass(frozen=True)
class PureFail:
    def __str__(self) -> str:
        return "Fail"


PureOutcome = Union[PureReturn, PureFail]
FAIL = PureFail()


class OutOfFuel(Exception):
    """The call budget ran out before the evaluation finished."""


def _ill_scoped(message: str, **details: Any) -> EvalError:
    return EvalError(message, code=ErrorCode.ILL_SCOPED, **details)


def apply_prim(op: str, args: Sequence[Value]) -> PureOutcome:
    """`not`, comparisons, and checked `<width>_<op>` arithmetic."""
    if op == "not":
        (v,) = args
        return PureReturn(bool_value(not v.value))
    if op in _COMPARISONS:
        left, right = args
        return PureReturn(apply_binop(_COMPARISONS[op], left, right))
    width, _, name = op.partition("_")
    try:
        kind, binop = ScalarKind(width), BinopKind(name)
    except ValueError:
        raise _ill_scoped(f"unknown primitive {op}", op=op) from None
    left, right = args
    if left.kind is not kind:
        raise _ill_scoped(f"{op} applied to {left.kind.value}", op=op)
    try:
        return PureReturn(apply_binop(binop, left, right))
    except PanicSignal:
        return FAIL


class PureEvaluator:
    def __init__(self, program: PureProgram, fuel: Optional[int] = None) -> None:
        self.program = program
        self.fuel = config.FUEL if fuel is None else fuel

    # -- functions -----------------------------------------------------------
    def call(self, name: str, args: Sequence[Value]) -> PureOutcome:
        if name == MASSERT:
            (cond,) = args
            return PureReturn(TupleValue(())) if cond.value else FAIL
        self.fuel -= 1
        if self.fuel < 0:
            raise OutOfFuel(name)
        fun = self.program.fun(name)
        if fun is None:
            raise _ill_scoped(f"unknown function {name}", function=name)
        if fun.body is None:
            raise EvalError(
                f"cannot evaluate interface-only function {name}",
                code=ErrorCode.OPAQUE_CALL_IN_CONCRETE_MODE,
            )
        if len(args) != len(fun.params):
            raise _ill_scoped(f"{name} expects {len(fun.params)} arguments", function=name)
        env = {pname: v for (pname, _), v in zip(fun.params, args)}
        return self.run(fun.body, env)

    # -- monadic expressions -------------------------------------------------
    def run(self, e: Expr, env: Dict[str, Value]) -> PureOutcome:
        while True:
            if isinstance(e, Ret):
                return PureReturn(self.value(e.value, env))
            if isinstance(e, Fail):
                return FAIL
            if isinstance(e, Bind):
                out = self.run(e.rhs, env)
                if isinstance(out, PureFail):
                    return out
                env = self.bind(e.pattern, out.value, env)
                e = e.body
            elif isinstance(e, Let):
                env = self.bind(e.pattern, self.value(e.rhs, env), env)
                e = e.body
            elif isinstance(e, IfExpr):
                cond = self.value(e.cond, env)
                e = e.then_branch if cond.value else e.else_branch
            elif isinstance(e, MatchExpr):
                v = self.value(e.scrutinee, env)
                arm = next((a for a in e.arms if a.pattern.ctor == v.ctor), None)
                if arm is None:
                    raise _ill_scoped(f"no arm for constructor {v.ctor}")
                env = self.bind(arm.pattern, v, env)
                e = arm.body
            elif isinstance(e, CallExpr):
                return self.call(e.fn, [self.value(a, env) for a in e.args])
            elif isinstance(e, Prim):
                return apply_prim(e.op, [self.value(a, env) for a in e.args])
            else:
                raise _ill_scoped(f"{type(e).__name__} is not a computation")

    # -- pure expressions ----------------------------------------------------
    def value(self, e: Expr, env: Dict[str, Value]) -> Value:
        if isinstance(e, Var):
            if e.name not in env:
                raise _ill_scoped(f"unbound variable {e.name}", variable=e.name)
            return env[e.name]
        if isinstance(e, Lit):
            return ScalarValue(e.kind, e.value)
        if isinstance(e, TupleExpr):
            return TupleValue(tuple(self.value(x, env) for x in e.elems))
        if isinstance(e, CtorExpr):
            return CtorValue(e.adt, e.ctor, tuple(self.value(x, env) for x in e.args))
        if isinstance(e, Prim) and (e.op == "not" or e.op in _COMPARISONS):
            return apply_prim(e.op, [self.value(a, env) for a in e.args]).value
        raise _ill_scoped(f"{type(e).__name__} used as a value")

    def bind(self, p: Pattern, v: Value, env: Dict[str, Value]) -> Dict[str, Value]:
        if isinstance(p, PWild):
            return env
        if isinstance(p, PVar):
            return {**env, p.name: v}
        if isinstance(p, PTuple) and isinstance(v, TupleValue) and len(v.elems) == len(p.elems):
            for sub, x in zip(p.elems, v.elems):
                env = self.bind(sub, x, env)
            return env
        if isinstance(p, PCtor) and isinstance(v, CtorValue) and v.ctor == p.ctor:
            for sub, x in zip(p.args, v.fields):
                env = self.bind(sub, x, env)
            return env
        raise _ill_scoped(f"pattern {p} does not match {v}")


def _entry(program: PureProgram, entry: str) -> FunDef:
    for name in (entry, f"{entry}_fwd"):
        fun = program.fun(name)
        if fun is not None:
            return fun
    raise EvalError(f"no pure function named {entry}", code=ErrorCode.NO_ENTRY)


def _guarded(evaluator: PureEvaluator, name: str, args: Sequence[Value]) -> PureOutcome:
    try:
        return evaluator.call(name, args)
    except RecursionError as exc:
        raise EvalError(
            "pure evaluation nests too deeply",
            code=ErrorCode.CALL_DEPTH_EXCEEDED,
        ) from exc


def eval_pure(program: PureProgram, entry: str, fuel: Optional[int] = None) -> PureOutcome:
    """Evaluate the nullary function `entry` (or `entry_fwd`).

    Raises:
        OutOfFuel: more than `fuel` calls were needed.
    """
    fun = _entry(program, entry)
    if fun.params:
        raise EvalError(f"entry {fun.name} takes arguments", code=ErrorCode.NO_ENTRY)
    outcome = _guarded(PureEvaluator(program, fuel), fun.name, ())
    logger.debug("pure_evaluated", entry=fun.name, outcome=str(outcome))
    return outcome


def from_python(obj: Any, ty: Ty, program: PureProgram) -> Value:
    """Convert bools, ints, tuples and lists (for cons-list types) to pure values."""
    if isinstance(obj, (ScalarValue, TupleValue, CtorValue)):
        return obj
    if isinstance(ty, ScalarTy):
        return ScalarValue(ty.kind, obj)
    if isinstance(ty, TupleTy):
        return TupleValue(tuple(from_python(o, t, program) for o, t in zip(obj, ty.elems)))
    if isinstance(ty, AdtTy) and isinstance(obj, list):
        decl = program.type_def(ty.name)
        nil = next((c for c in decl.ctors if not c.fields), None) if decl else None
        cons = next((c for c in decl.ctors if len(c.fields) == 2), None) if decl else None
        if nil is None or cons is None:
            raise EvalError(f"{ty.name} is not a list type", code=ErrorCode.TYPE_MISMATCH)
        subst = dict(zip(decl.ty_params, ty.args))
        head_ty = substitute_ty(cons.fields[0], subst)
        result: Value = CtorValue(decl.name, nil.name)
        for item in reversed(obj):
            result = CtorValue(decl.name, cons.name, (from_python(item, head_ty, program), result))
        return result
    raise EvalError(f"cannot convert {obj!r} to {ty}", code=ErrorCode.TYPE_MISMATCH)


def eval_backward_direct(
    program: PureProgram,
    name: str,
    args: Sequence[Any],
    ty_args: Sequence[Ty] = (),
    fuel: Optional[int] = None,
) -> PureOutcome:
    """Run any generated function on explicit arguments.

    Python values are converted according to the parameter types, with type
    parameters instantiated by `ty_args`.
    """
    fun = program.fun(name)
    if fun is None:
        raise EvalError(f"no pure function named {name}", code=ErrorCode.NO_ENTRY)
    subst = dict(zip(fun.ty_params, ty_args))
    values = [
        from_python(arg, substitute_ty(ty, subst), program)
        for arg, (_, ty) in zip(args, fun.params)
    ]
    return _guarded(PureEvaluator(program, fuel), name, values)
