"""Static scope checking of pure programs.

Every variable must be bound by a parameter or an enclosing pattern, every
call must name a declared function with the right number of arguments, and
every constructor must exist with the right arity.
"""

from __future__ import annotations

from typing import AbstractSet, Dict, Tuple

from src.common.errors import ErrorCode, TranslationError
from src.common.logger import get_logger
from src.llbc.core.types import BinopKind, ScalarKind

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
    TypeDef,
    Var,
    pattern_vars,
)

logger = get_logger(__name__)

_COMPARISONS = frozenset({"eq", "ne", "lt", "le", "gt", "ge"})
_ARITHMETIC = frozenset({BinopKind.ADD, BinopKind.SUB, BinopKind.MUL, BinopKind.DIV, BinopKind.REM})


def prim_arity(op: str) -> int:
    """Number of arguments of a primitive; 0 when `op` is not one."""
    if op == "not":
        return 1
    if op in _COMPARISONS:
        return 2
    width, _, name = op.partition("_")
    try:
        kind, binop = ScalarKind(width), BinopKind(name)
    except ValueError:
        return 0
    return 2 if kind.is_integer and binop in _ARITHMETIC else 0


class ScopeChecker:
    def __init__(self, program: PureProgram) -> None:
        self.functions: Dict[str, FunDef] = {f.name: f for f in program.functions}
        self.ctors: Dict[Tuple[str, str], int] = {
            (d.name, c.name): len(c.fields)
            for d in program.decls()
            if isinstance(d, TypeDef)
            for c in d.ctors
        }
        self.current = ""

    def error(self, message: str) -> TranslationError:
        return TranslationError(
            f"{self.current}: {message}", code=ErrorCode.ILL_SCOPED, function=self.current
        )

    def function(self, fun: FunDef) -> None:
        if fun.body is None:
            return
        self.current = fun.name
        params = [name for name, _ in fun.params]
        if len(set(params)) != len(params):
            raise self.error("duplicate parameter names")
        self.expr(fun.body, frozenset(params))

    def pattern(self, p: Pattern, scope: AbstractSet[str]) -> AbstractSet[str]:
        names = pattern_vars(p)
        if len(set(names)) != len(names):
            raise self.error(f"a pattern binds {names} more than once")
        self._shape(p)
        return scope | set(names)

    def _shape(self, p: Pattern) -> None:
        if isinstance(p, PCtor):
            self._ctor(p.adt, p.ctor, len(p.args))
            for a in p.args:
                self._shape(a)
        elif isinstance(p, PTuple):
            for e in p.elems:
                self._shape(e)
        elif not isinstance(p, (PVar, PWild)):
            raise TypeError(p)

    def _ctor(self, adt: str, ctor: str, arity: int) -> None:
        expected = self.ctors.get((adt, ctor))
        if expected is None:
            raise self.error(f"unknown constructor {adt}::{ctor}")
        if expected != arity:
            raise self.error(f"{adt}::{ctor} takes {expected} fields, not {arity}")

    def _call(self, e: CallExpr) -> None:
        if e.fn == MASSERT:
            arity = 1
        else:
            callee = self.functions.get(e.fn)
            if callee is None:
                raise self.error(f"call to undeclared function {e.fn}")
            if len(e.ty_args) != len(callee.ty_params):
                raise self.error(f"{e.fn} expects {len(callee.ty_params)} type arguments")
            arity = len(callee.params)
        if len(e.args) != arity:
            raise self.error(f"{e.fn} expects {arity} arguments, not {len(e.args)}")

    def expr(self, e: Expr, scope: AbstractSet[str]) -> None:
        if isinstance(e, Var):
            if e.name not in scope:
                raise self.error(f"variable {e.name} is not bound here")
        elif isinstance(e, (Lit, Fail)):
            pass
        elif isinstance(e, TupleExpr):
            for x in e.elems:
                self.expr(x, scope)
        elif isinstance(e, CtorExpr):
            self._ctor(e.adt, e.ctor, len(e.args))
            for x in e.args:
                self.expr(x, scope)
        elif isinstance(e, Prim):
            arity = prim_arity(e.op)
            if arity == 0:
                raise self.error(f"unknown primitive {e.op}")
            if len(e.args) != arity:
                raise self.error(f"{e.op} expects {arity} arguments")
            for x in e.args:
                self.expr(x, scope)
        elif isinstance(e, CallExpr):
            self._call(e)
            for x in e.args:
                self.expr(x, scope)
        elif isinstance(e, IfExpr):
            self.expr(e.cond, scope)
            self.expr(e.then_branch, scope)
            self.expr(e.else_branch, scope)
        elif isinstance(e, MatchExpr):
            self.expr(e.scrutinee, scope)
            for arm in e.arms:
                self.expr(arm.body, self.pattern(arm.pattern, scope))
        elif isinstance(e, (Let, Bind)):
            self.expr(e.rhs, scope)
            self.expr(e.body, self.pattern(e.pattern, scope))
        elif isinstance(e, Ret):
            self.expr(e.value, scope)
        else:
            raise TypeError(e)


def check_scoped(program: PureProgram) -> None:
    """Raise TranslationError (ILL_SCOPED) on the first ill-scoped function."""
    checker = ScopeChecker(program)
    for fun in program.functions:
        checker.function(fun)
    logger.debug("scope_checked", functions=len(program.functions))
