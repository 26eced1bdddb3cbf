"""The structured memory model: values, environments and place operations."""

from .dump import format_env, format_value
from .env import Abstraction, Address, Binding, CallInfo, Env
from .invariants import check_invariants, well_typed
from .places import (
    Access,
    Activate,
    Blocked,
    EndLoan,
    Expand,
    copy_value,
    ghost_write,
    read_place,
    read_place_for_match,
    resolve,
    write_place,
)
from .values import has_no_outer_loans

__all__ = [
    "Abstraction",
    "Access",
    "Activate",
    "Address",
    "Binding",
    "Blocked",
    "CallInfo",
    "EndLoan",
    "Env",
    "Expand",
    "check_invariants",
    "copy_value",
    "format_env",
    "format_value",
    "ghost_write",
    "has_no_outer_loans",
    "read_place",
    "read_place_for_match",
    "resolve",
    "well_typed",
    "write_place",
]
