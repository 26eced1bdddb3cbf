"""Branch trees: the materialized outcome of symbolically executing one function."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

from src.common.errors import Diagnostic
from src.llbc.core.types import BinopKind, FnDecl, Ty, UnopKind
from src.llbc.store.values import SymbolicValue, Value


# ---------------------------------------------------------------------------
# Events: straight-line facts recorded while executing a block
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TuplePat:
    syms: Tuple[SymbolicValue, ...]


@dataclass(frozen=True)
class CtorPat:
    adt: str
    ctor: str
    syms: Tuple[SymbolicValue, ...]


Pattern = Union[TuplePat, CtorPat]


@dataclass(frozen=True)
class ExpandEvent:
    """A symbolic value of a single-shape type was destructured."""
    sym: SymbolicValue
    pattern: Pattern


@dataclass(frozen=True)
class AliasEvent:
    """`target` denotes the same pure value as `source`."""
    target: SymbolicValue
    source: SymbolicValue


@dataclass(frozen=True)
class PrimEvent:
    dest: SymbolicValue
    op: Union[BinopKind, UnopKind]
    args: Tuple[Value, ...]


@dataclass(frozen=True)
class CallEvent:
    """Forward call; `given_back` receives the outputs of merged regions."""
    dest: SymbolicValue
    callee: str
    ty_args: Tuple[Ty, ...]
    args: Tuple[Value, ...]
    given_back: Tuple[SymbolicValue, ...] = ()


@dataclass(frozen=True)
class EndAbsEvent:
    """Backward call emitted when a call's region abstraction ends."""
    callee: str
    region: str
    ty_args: Tuple[Ty, ...]
    args: Tuple[Value, ...]
    given: Optional[Value]
    results: Tuple[SymbolicValue, ...]


Event = Union[ExpandEvent, AliasEvent, PrimEvent, CallEvent, EndAbsEvent]


# ---------------------------------------------------------------------------
# Terminals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeafOutcome:
    """Events needed to close the input abstractions, then the returned values."""
    events: Tuple[Event, ...]
    values: Tuple[Value, ...]


@dataclass(frozen=True)
class ReturnLeaf:
    forward: LeafOutcome
    backward: Tuple[Tuple[str, LeafOutcome], ...] = ()

    def for_region(self, region: str) -> LeafOutcome:
        for name, outcome in self.backward:
            if name == region:
                return outcome
        raise KeyError(region)


@dataclass(frozen=True)
class PanicLeaf:
    pass


@dataclass(frozen=True)
class IfNode:
    cond: SymbolicValue
    then_block: "Block"
    else_block: "Block"


@dataclass(frozen=True)
class MatchArm:
    ctor: str
    fields: Tuple[SymbolicValue, ...]
    body: "Block"


@dataclass(frozen=True)
class MatchNode:
    scrutinee: SymbolicValue
    adt: str
    arms: Tuple[MatchArm, ...]


Terminal = Union[ReturnLeaf, PanicLeaf, IfNode, MatchNode]


@dataclass(frozen=True)
class Block:
    events: Tuple[Event, ...]
    terminal: Terminal


@dataclass
class FunctionTree:
    """Everything synthesis needs about one accepted function."""
    fn: FnDecl
    params: Tuple[SymbolicValue, ...]
    body: Block
    merged: Tuple[str, ...] = ()
    back_params: Dict[str, Tuple[SymbolicValue, ...]] = field(default_factory=dict)
    hints: Dict[int, str] = field(default_factory=dict)

    @property
    def backward_regions(self) -> Tuple[str, ...]:
        return tuple(r for r in self.fn.region_params if r in self.back_params)


@dataclass
class CheckResult:
    """Per-function verdict of the borrow checker."""
    name: str
    tree: Optional[FunctionTree] = None
    error: Optional[Diagnostic] = None
    env_dump: Optional[str] = None
    opaque: bool = False

    @property
    def accepted(self) -> bool:
        return self.error is None
