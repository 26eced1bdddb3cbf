"""Concrete execution of closed LLBC programs."""

from .interpreter import ConcreteInterpreter, apply_binop, run_program
from .reorganize import Reorganizer
from .types import Control, ExecResult, Outcome

__all__ = [
    "ConcreteInterpreter",
    "Control",
    "ExecResult",
    "Outcome",
    "Reorganizer",
    "apply_binop",
    "run_program",
]
