"""Type definitions for the concrete interpreter."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from src.llbc.store.env import Env
from src.llbc.store.values import Value


class Control(str, Enum):
    """How a statement left the current block."""
    FALL_THROUGH = "fall_through"
    RETURNED = "returned"
    PANICKED = "panicked"


class Outcome(str, Enum):
    RETURNED = "returned"
    PANICKED = "panicked"


class PanicSignal(Exception):
    """Raised by checked arithmetic; statements turn it into Control.PANICKED."""


@dataclass(frozen=True)
class TraceStep:
    function: str
    statement: str
    env: str


@dataclass
class ExecResult:
    outcome: Outcome
    value: Optional[Value]
    env: Env
    trace: List[TraceStep] = field(default_factory=list)

    @property
    def returned(self) -> bool:
        return self.outcome is Outcome.RETURNED

    @property
    def panicked(self) -> bool:
        return self.outcome is Outcome.PANICKED


@dataclass(frozen=True)
class Invocation:
    """Result of running one function body: the env, how it ended, and the parked return value."""
    env: Env
    control: Control
    ret_temp: Optional[str] = None

    def unpack(self) -> Tuple[Env, Control, Optional[str]]:
        return self.env, self.control, self.ret_temp
