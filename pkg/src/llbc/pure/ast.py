"""Pure target language: expressions in a result monad, data types and declarations.

Types are the borrow-free fragment of LLBC types (`src.llbc.core.types`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Tuple, Union

from src.llbc.core.types import ScalarKind, Ty


# ---------------------------------------------------------------------------
# Patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PWild:
    pass


@dataclass(frozen=True)
class PTuple:
    elems: Tuple["Pattern", ...]


@dataclass(frozen=True)
class PCtor:
    adt: str
    ctor: str
    args: Tuple["Pattern", ...] = ()


Pattern = Union[PVar, PWild, PTuple, PCtor]


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    kind: ScalarKind
    value: Union[bool, int]


@dataclass(frozen=True)
class TupleExpr:
    elems: Tuple["Expr", ...]


@dataclass(frozen=True)
class CtorExpr:
    adt: str
    ctor: str
    args: Tuple["Expr", ...] = ()


@dataclass(frozen=True)
class Prim:
    """Checked primitive `<width>_<op>`, `not`, or a comparison; may fail."""
    op: str
    args: Tuple["Expr", ...]


@dataclass(frozen=True)
class CallExpr:
    fn: str
    ty_args: Tuple[Ty, ...]
    args: Tuple["Expr", ...]


@dataclass(frozen=True)
class IfExpr:
    cond: "Expr"
    then_branch: "Expr"
    else_branch: "Expr"


@dataclass(frozen=True)
class MatchArm:
    pattern: PCtor
    body: "Expr"


@dataclass(frozen=True)
class MatchExpr:
    scrutinee: "Expr"
    arms: Tuple[MatchArm, ...]


@dataclass(frozen=True)
class Let:
    """Pure binding: `let p = rhs in body`."""
    pattern: Pattern
    rhs: "Expr"
    body: "Expr"


@dataclass(frozen=True)
class Bind:
    """Monadic binding: `p <-- rhs; body`."""
    pattern: Pattern
    rhs: "Expr"
    body: "Expr"


@dataclass(frozen=True)
class Ret:
    value: "Expr"


@dataclass(frozen=True)
class Fail:
    pass


Expr = Union[
    Var, Lit, TupleExpr, CtorExpr, Prim, CallExpr, IfExpr, MatchExpr, Let, Bind, Ret, Fail
]

UNIT_EXPR = TupleExpr(())

# Library function: bool -> result unit.
MASSERT = "massert"


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CtorDef:
    name: str
    fields: Tuple[Ty, ...] = ()


@dataclass(frozen=True)
class TypeDef:
    name: str
    ty_params: Tuple[str, ...]
    ctors: Tuple[CtorDef, ...]
    is_struct: bool = False

    def ctor(self, name: str) -> Optional[CtorDef]:
        return next((c for c in self.ctors if c.name == name), None)


@dataclass(frozen=True)
class FunDef:
    """A monadic function; `body` is None for an interface-only declaration."""
    name: str
    ty_params: Tuple[str, ...]
    params: Tuple[Tuple[str, Ty], ...]
    ret_ty: Ty
    body: Optional[Expr] = None

    @property
    def is_opaque(self) -> bool:
        return self.body is None


Decl = Union[TypeDef, FunDef]


@dataclass(frozen=True)
class PureGroup:
    decls: Tuple[Decl, ...]
    recursive: bool = False


@dataclass(frozen=True)
class PureProgram:
    groups: Tuple[PureGroup, ...] = ()

    def decls(self) -> Iterator[Decl]:
        for group in self.groups:
            yield from group.decls

    def fun(self, name: str) -> Optional[FunDef]:
        return next((d for d in self.decls() if isinstance(d, FunDef) and d.name == name), None)

    def type_def(self, name: str) -> Optional[TypeDef]:
        return next((d for d in self.decls() if isinstance(d, TypeDef) and d.name == name), None)

    @property
    def functions(self) -> Tuple[FunDef, ...]:
        return tuple(d for d in self.decls() if isinstance(d, FunDef))

    @property
    def types(self) -> Tuple[TypeDef, ...]:
        return tuple(d for d in self.decls() if isinstance(d, TypeDef))


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def pattern_vars(p: Pattern) -> Tuple[str, ...]:
    if isinstance(p, PVar):
        return (p.name,)
    if isinstance(p, (PTuple, PCtor)):
        elems = p.elems if isinstance(p, PTuple) else p.args
        return tuple(v for e in elems for v in pattern_vars(e))
    return ()


def tuple_pattern(pats: Tuple[Pattern, ...]) -> Pattern:
    """`()` for none, the pattern itself for one, a tuple otherwise."""
    if len(pats) == 1:
        return pats[0]
    return PTuple(pats)


def tuple_expr(exprs: Tuple[Expr, ...]) -> Expr:
    if len(exprs) == 1:
        return exprs[0]
    return TupleExpr(exprs)


def free_vars(e: Expr) -> Tuple[str, ...]:
    """Free variables in order of first occurrence (with repetition)."""
    if isinstance(e, Var):
        return (e.name,)
    if isinstance(e, (Lit, Fail)):
        return ()
    if isinstance(e, TupleExpr):
        return tuple(v for x in e.elems for v in free_vars(x))
    if isinstance(e, (CtorExpr, Prim, CallExpr)):
        return tuple(v for x in e.args for v in free_vars(x))
    if isinstance(e, IfExpr):
        return free_vars(e.cond) + free_vars(e.then_branch) + free_vars(e.else_branch)
    if isinstance(e, MatchExpr):
        out = free_vars(e.scrutinee)
        for arm in e.arms:
            bound = set(pattern_vars(arm.pattern))
            out += tuple(v for v in free_vars(arm.body) if v not in bound)
        return out
    if isinstance(e, (Let, Bind)):
        bound = set(pattern_vars(e.pattern))
        return free_vars(e.rhs) + tuple(v for v in free_vars(e.body) if v not in bound)
    if isinstance(e, Ret):
        return free_vars(e.value)
    raise TypeError(e)


def count_uses(e: Expr, name: str) -> int:
    return sum(1 for v in free_vars(e) if v == name)
