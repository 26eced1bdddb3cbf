"""Abstract syntax of the Low-Level Borrow Calculus.

All nodes are frozen dataclasses; sequences are tuples so that programs can be
shared freely between pipeline stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, Optional, Tuple, Union

from src.common.errors import SourceLocation


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class ScalarKind(str, Enum):
    BOOL = "bool"
    I32 = "i32"
    U32 = "u32"

    @property
    def is_integer(self) -> bool:
        return self is not ScalarKind.BOOL

    def bounds(self) -> Tuple[int, int]:
        """Inclusive range of an integer kind."""
        if self is ScalarKind.I32:
            return (-(2**31), 2**31 - 1)
        if self is ScalarKind.U32:
            return (0, 2**32 - 1)
        raise ValueError("bool has no integer bounds")

    def in_range(self, value: int) -> bool:
        lo, hi = self.bounds()
        return lo <= value <= hi


class BorrowKind(str, Enum):
    MUT = "mut"
    SHARED = "shared"


@dataclass(frozen=True)
class ScalarTy:
    kind: ScalarKind


@dataclass(frozen=True)
class BorrowTy:
    kind: BorrowKind
    region: str
    inner: "Ty"


@dataclass(frozen=True)
class BoxTy:
    inner: "Ty"


@dataclass(frozen=True)
class AdtTy:
    name: str
    args: Tuple["Ty", ...] = ()


@dataclass(frozen=True)
class TupleTy:
    elems: Tuple["Ty", ...] = ()


@dataclass(frozen=True)
class TyVar:
    name: str


Ty = Union[ScalarTy, BorrowTy, BoxTy, AdtTy, TupleTy, TyVar]

BOOL = ScalarTy(ScalarKind.BOOL)
I32 = ScalarTy(ScalarKind.I32)
U32 = ScalarTy(ScalarKind.U32)
UNIT = TupleTy(())


def iter_types(ty: Ty) -> Iterator[Ty]:
    """Pre-order traversal of a type."""
    yield ty
    if isinstance(ty, (BorrowTy, BoxTy)):
        yield from iter_types(ty.inner)
    elif isinstance(ty, AdtTy):
        for arg in ty.args:
            yield from iter_types(arg)
    elif isinstance(ty, TupleTy):
        for elem in ty.elems:
            yield from iter_types(elem)


def has_borrow(ty: Ty) -> bool:
    return any(isinstance(t, BorrowTy) for t in iter_types(ty))


def regions_of(ty: Ty) -> Tuple[str, ...]:
    """Regions occurring in a type, in order of first occurrence."""
    seen: Dict[str, None] = {}
    for t in iter_types(ty):
        if isinstance(t, BorrowTy):
            seen.setdefault(t.region, None)
    return tuple(seen)


def substitute_ty(
    ty: Ty,
    ty_subst: Dict[str, Ty],
    region_subst: Optional[Dict[str, str]] = None,
) -> Ty:
    """Instantiate type variables and rename regions."""
    if isinstance(ty, TyVar):
        return ty_subst.get(ty.name, ty)
    if isinstance(ty, BorrowTy):
        region = (region_subst or {}).get(ty.region, ty.region)
        return BorrowTy(ty.kind, region, substitute_ty(ty.inner, ty_subst, region_subst))
    if isinstance(ty, BoxTy):
        return BoxTy(substitute_ty(ty.inner, ty_subst, region_subst))
    if isinstance(ty, AdtTy):
        return AdtTy(
            ty.name, tuple(substitute_ty(a, ty_subst, region_subst) for a in ty.args)
        )
    if isinstance(ty, TupleTy):
        return TupleTy(tuple(substitute_ty(e, ty_subst, region_subst) for e in ty.elems))
    return ty


def erase_regions(ty: Ty) -> Ty:
    """Replace every region by '_' so that types can be compared across frames."""
    if isinstance(ty, BorrowTy):
        return BorrowTy(ty.kind, "_", erase_regions(ty.inner))
    if isinstance(ty, BoxTy):
        return BoxTy(erase_regions(ty.inner))
    if isinstance(ty, AdtTy):
        return AdtTy(ty.name, tuple(erase_regions(a) for a in ty.args))
    if isinstance(ty, TupleTy):
        return TupleTy(tuple(erase_regions(e) for e in ty.elems))
    return ty


# ---------------------------------------------------------------------------
# Places
# ---------------------------------------------------------------------------

class DerefKind(str, Enum):
    MUT = "mut"
    SHARED = "shared"
    BOX = "box"


@dataclass(frozen=True)
class Deref:
    kind: DerefKind


@dataclass(frozen=True)
class Field:
    """Field of an ADT constructor; `index` is the position of `name`."""
    ctor: str
    name: str
    index: int


@dataclass(frozen=True)
class TupleField:
    index: int


Proj = Union[Deref, Field, TupleField]


@dataclass(frozen=True)
class Place:
    base: str
    path: Tuple[Proj, ...] = ()

    def project(self, proj: Proj) -> "Place":
        return Place(self.base, self.path + (proj,))

    def has_deref(self, *kinds: DerefKind) -> bool:
        return any(isinstance(p, Deref) and p.kind in kinds for p in self.path)


# ---------------------------------------------------------------------------
# Operands and rvalues
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Move:
    place: Place


@dataclass(frozen=True)
class Copy:
    place: Place


@dataclass(frozen=True)
class Const:
    """ConstBool / ConstI32 / ConstU32, tagged by kind."""
    kind: ScalarKind
    value: Union[bool, int]


@dataclass(frozen=True)
class CtorOp:
    adt: str
    ctor: str
    fields: Tuple["Operand", ...] = ()


@dataclass(frozen=True)
class TupleOp:
    elems: Tuple["Operand", ...] = ()


Operand = Union[Move, Copy, Const, CtorOp, TupleOp]


class UnopKind(str, Enum):
    NOT = "not"


class BinopKind(str, Enum):
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    REM = "rem"
    EQ = "eq"
    NE = "ne"
    LT = "lt"
    LE = "le"
    GT = "gt"
    GE = "ge"

    @property
    def is_arith(self) -> bool:
        return self in _ARITH

    @property
    def symbol(self) -> str:
        return _BINOP_SYMBOLS[self]


_ARITH = frozenset(
    {BinopKind.ADD, BinopKind.SUB, BinopKind.MUL, BinopKind.DIV, BinopKind.REM}
)
_BINOP_SYMBOLS = {
    BinopKind.ADD: "+",
    BinopKind.SUB: "-",
    BinopKind.MUL: "*",
    BinopKind.DIV: "/",
    BinopKind.REM: "%",
    BinopKind.EQ: "==",
    BinopKind.NE: "!=",
    BinopKind.LT: "<",
    BinopKind.LE: "<=",
    BinopKind.GT: ">",
    BinopKind.GE: ">=",
}


@dataclass(frozen=True)
class Use:
    operand: Operand


@dataclass(frozen=True)
class BorrowOf:
    """`&mut p`, `&p` or `&reserved p`."""
    kind: "RefKind"
    place: Place


class RefKind(str, Enum):
    MUT = "mut"
    SHARED = "shared"
    RESERVED = "reserved"


@dataclass(frozen=True)
class Unop:
    op: UnopKind
    operand: Operand


@dataclass(frozen=True)
class Binop:
    op: BinopKind
    left: Operand
    right: Operand


Rvalue = Union[Use, BorrowOf, Unop, Binop]


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------

_NOWHERE = SourceLocation()


@dataclass(frozen=True)
class Nop:
    loc: SourceLocation = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class Seq:
    first: "Statement"
    second: "Statement"
    loc: SourceLocation = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class Assign:
    place: Place
    rvalue: Rvalue
    loc: SourceLocation = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class Call:
    dest: Place
    fn: str
    region_args: Tuple[str, ...] = ()
    ty_args: Tuple[Ty, ...] = ()
    args: Tuple[Operand, ...] = ()
    loc: SourceLocation = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class IfThenElse:
    cond: Operand
    then_branch: "Statement"
    else_branch: "Statement"
    loc: SourceLocation = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class Match:
    place: Place
    arms: Tuple[Tuple[str, "Statement"], ...]
    loc: SourceLocation = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class Return:
    loc: SourceLocation = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class Panic:
    loc: SourceLocation = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class Free:
    place: Place
    loc: SourceLocation = field(default=_NOWHERE, compare=False)


Statement = Union[Nop, Seq, Assign, Call, IfThenElse, Match, Return, Panic, Free]

# Built-in call handled primitively by every interpreter.
BOX_NEW = "Box::new"


def seq(*stmts: Statement) -> Statement:
    """Right-nested sequence; Nop for an empty list."""
    items = [item for s in stmts for item in flatten(s)]
    if not items:
        return Nop()
    result = items[-1]
    for s in reversed(items[:-1]):
        result = Seq(s, result)
    return result


def flatten(stmt: Statement) -> Tuple[Statement, ...]:
    """Linearize nested Seqs, dropping Nops."""
    if isinstance(stmt, Seq):
        return flatten(stmt.first) + flatten(stmt.second)
    if isinstance(stmt, Nop):
        return ()
    return (stmt,)


# ---------------------------------------------------------------------------
# Declarations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ctor:
    name: str
    fields: Tuple[Tuple[str, Ty], ...] = ()

    def field_index(self, name: str) -> Optional[int]:
        for i, (fname, _) in enumerate(self.fields):
            if fname == name:
                return i
        return None


@dataclass(frozen=True)
class TypeDecl:
    name: str
    ty_params: Tuple[str, ...] = ()
    ctors: Tuple[Ctor, ...] = ()
    is_struct: bool = False
    loc: SourceLocation = field(default=_NOWHERE, compare=False)

    def ctor(self, name: str) -> Optional[Ctor]:
        for c in self.ctors:
            if c.name == name:
                return c
        return None

    def field_types(self, ctor: str, args: Tuple[Ty, ...]) -> Tuple[Ty, ...]:
        """Field types of `ctor` instantiated with `args`."""
        decl = self.ctor(ctor)
        if decl is None:
            raise KeyError(ctor)
        subst = dict(zip(self.ty_params, args))
        return tuple(substitute_ty(t, subst) for _, t in decl.fields)


@dataclass(frozen=True)
class FnDecl:
    name: str
    region_params: Tuple[str, ...] = ()
    ty_params: Tuple[str, ...] = ()
    args: Tuple[Tuple[str, Ty], ...] = ()
    locals: Tuple[Tuple[str, Ty], ...] = ()
    ret: Tuple[str, Ty] = ("ret", UNIT)
    body: Optional[Statement] = None
    loc: SourceLocation = field(default=_NOWHERE, compare=False)

    @property
    def is_opaque(self) -> bool:
        return self.body is None

    @property
    def ret_var(self) -> str:
        return self.ret[0]

    @property
    def ret_ty(self) -> Ty:
        return self.ret[1]

    def var_types(self) -> Dict[str, Ty]:
        types = dict(self.args)
        types.update(self.locals)
        types[self.ret[0]] = self.ret[1]
        return types


@dataclass(frozen=True)
class LlbcProgram:
    type_decls: Tuple[TypeDecl, ...] = ()
    fn_decls: Tuple[FnDecl, ...] = ()

    def type_decl(self, name: str) -> Optional[TypeDecl]:
        for d in self.type_decls:
            if d.name == name:
                return d
        return None

    def fn_decl(self, name: str) -> Optional[FnDecl]:
        for d in self.fn_decls:
            if d.name == name:
                return d
        return None

    def with_fns(self, fns: Tuple[FnDecl, ...]) -> "LlbcProgram":
        return LlbcProgram(self.type_decls, fns)
