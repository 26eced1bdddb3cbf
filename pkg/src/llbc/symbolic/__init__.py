"""Symbolic execution and borrow checking."""

from .interpreter import SymbolicInterpreter, borrow_check, check_function, prepare
from .regions import borrow_slots, has_backward, merged_regions
from .types import (
    AliasEvent,
    Block,
    CallEvent,
    CheckResult,
    CtorPat,
    EndAbsEvent,
    ExpandEvent,
    FunctionTree,
    IfNode,
    LeafOutcome,
    MatchArm,
    MatchNode,
    PanicLeaf,
    PrimEvent,
    ReturnLeaf,
    TuplePat,
)

__all__ = [
    "AliasEvent",
    "Block",
    "CallEvent",
    "CheckResult",
    "CtorPat",
    "EndAbsEvent",
    "ExpandEvent",
    "FunctionTree",
    "IfNode",
    "LeafOutcome",
    "MatchArm",
    "MatchNode",
    "PanicLeaf",
    "PrimEvent",
    "ReturnLeaf",
    "SymbolicInterpreter",
    "TuplePat",
    "borrow_check",
    "borrow_slots",
    "check_function",
    "has_backward",
    "merged_regions",
    "prepare",
]
