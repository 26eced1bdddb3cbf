"""Ordered environments: variable bindings, ghost bindings and region abstractions."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterator, List, Optional, Tuple, Union

from src.llbc.core.types import Ty

from .values import (
    BORROWS,
    LOANS,
    LoanId,
    MutBorrow,
    MutLoan,
    Path,
    ReservedBorrow,
    SharedBorrow,
    SharedLoan,
    SymbolicValue,
    SymId,
    Value,
    contains,
    get_at,
    map_value,
    replace_at,
    substitute_symbol,
    walk,
)

TEMP_PREFIX = "@"
GHOST_PREFIX = "_@"


@dataclass(frozen=True)
class Binding:
    var: str
    value: Value
    ty: Optional[Ty] = None
    ghost: bool = False
    frame: int = 0

    @property
    def is_temp(self) -> bool:
        return self.var.startswith(TEMP_PREFIX)


@dataclass(frozen=True)
class CallInfo:
    """What a call abstraction needs to emit its backward call when it ends."""
    callee: str
    region_param: str
    ty_args: Tuple[Ty, ...]
    args: Tuple[Value, ...]
    arg_tys: Tuple[Ty, ...]
    ret_ty: Ty
    given_back: Tuple[SymbolicValue, ...] = ()
    merged: bool = False


@dataclass(frozen=True)
class Abstraction:
    """A(region): projected inputs plus the projected output.

    `call` is None for the input abstractions of the function being executed.
    """
    abs_id: int
    region: str
    inputs: Tuple[Value, ...]
    output: Value
    call: Optional[CallInfo] = None

    @property
    def values(self) -> Tuple[Value, ...]:
        return self.inputs + (self.output,)

    def with_values(self, values: Tuple[Value, ...]) -> "Abstraction":
        return replace(self, inputs=tuple(values[:-1]), output=values[-1])


Entry = Union[Binding, Abstraction]


@dataclass(frozen=True)
class Address:
    """Entry index plus a child path; for abstractions the first step picks the value."""
    entry: int
    path: Path = ()


@dataclass(frozen=True)
class Env:
    entries: Tuple[Entry, ...] = ()
    next_loan: int = 0
    next_sym: int = 0
    next_abs: int = 0
    next_ghost: int = 0
    next_frame: int = 1
    frame: int = 0

    # -- supplies ------------------------------------------------------------
    def fresh_loan(self) -> Tuple[LoanId, "Env"]:
        return self.next_loan, replace(self, next_loan=self.next_loan + 1)

    def fresh_sym(self, ty: Ty) -> Tuple[SymbolicValue, "Env"]:
        return SymbolicValue(self.next_sym, ty), replace(self, next_sym=self.next_sym + 1)

    def fresh_abs(self) -> Tuple[int, "Env"]:
        return self.next_abs, replace(self, next_abs=self.next_abs + 1)

    # -- entries -------------------------------------------------------------
    def append(self, entry: Entry) -> "Env":
        return replace(self, entries=self.entries + (entry,))

    def set_entry(self, index: int, entry: Entry) -> "Env":
        entries = list(self.entries)
        entries[index] = entry
        return replace(self, entries=tuple(entries))

    def remove_entry(self, index: int) -> "Env":
        return replace(self, entries=self.entries[:index] + self.entries[index + 1:])

    def bind(self, var: str, value: Value, ty: Optional[Ty] = None) -> "Env":
        return self.append(Binding(var, value, ty, False, self.frame))

    def find_var(self, var: str) -> Optional[int]:
        for i in range(len(self.entries) - 1, -1, -1):
            e = self.entries[i]
            if isinstance(e, Binding) and not e.ghost and e.var == var and e.frame == self.frame:
                return i
        return None

    def binding(self, var: str) -> Optional[Binding]:
        i = self.find_var(var)
        return None if i is None else self.entries[i]

    def push_ghost(self, value: Value, ty: Optional[Ty] = None) -> "Env":
        name = f"{GHOST_PREFIX}{self.next_ghost}"
        env = replace(self, next_ghost=self.next_ghost + 1)
        return env.append(Binding(name, value, ty, True, self.frame))

    def push_temp(self, value: Value, ty: Optional[Ty] = None) -> Tuple[str, "Env"]:
        """Park an in-flight value where reorganization can see it."""
        name = f"{TEMP_PREFIX}{self.next_ghost}"
        env = replace(self, next_ghost=self.next_ghost + 1)
        return name, env.append(Binding(name, value, ty, True, self.frame))

    def temp_index(self, name: str) -> int:
        for i, e in enumerate(self.entries):
            if isinstance(e, Binding) and e.var == name:
                return i
        raise KeyError(name)

    def take_temp(self, name: str) -> Tuple[Value, "Env"]:
        i = self.temp_index(name)
        return self.entries[i].value, self.remove_entry(i)

    def abstractions(self) -> List[Tuple[int, Abstraction]]:
        return [(i, e) for i, e in enumerate(self.entries) if isinstance(e, Abstraction)]

    def find_abs(self, abs_id: int) -> Optional[int]:
        for i, e in enumerate(self.entries):
            if isinstance(e, Abstraction) and e.abs_id == abs_id:
                return i
        return None

    # -- frames --------------------------------------------------------------
    def push_frame(self) -> Tuple[int, "Env"]:
        caller = self.frame
        return caller, replace(self, frame=self.next_frame, next_frame=self.next_frame + 1)

    def pop_frame(self, caller: int) -> "Env":
        kept = tuple(
            e for e in self.entries
            if not (isinstance(e, Binding) and not e.ghost and e.frame == self.frame)
        )
        return replace(self, entries=kept, frame=caller)

    # -- addressing ----------------------------------------------------------
    def roots(self, index: int) -> Tuple[Value, ...]:
        e = self.entries[index]
        return e.values if isinstance(e, Abstraction) else (e.value,)

    def get(self, addr: Address) -> Value:
        e = self.entries[addr.entry]
        if isinstance(e, Abstraction):
            return get_at(e.values[addr.path[0]], addr.path[1:])
        return get_at(e.value, addr.path)

    def put(self, addr: Address, value: Value) -> "Env":
        e = self.entries[addr.entry]
        if isinstance(e, Abstraction):
            values = list(e.values)
            k = addr.path[0]
            values[k] = replace_at(values[k], addr.path[1:], value)
            return self.set_entry(addr.entry, e.with_values(tuple(values)))
        return self.set_entry(addr.entry, replace(e, value=replace_at(e.value, addr.path, value)))

    def iter_nodes(self) -> Iterator[Tuple[Address, Value]]:
        """Every sub-value of every entry, in environment order."""
        for i, e in enumerate(self.entries):
            if isinstance(e, Abstraction):
                for k, root in enumerate(e.values):
                    for path, sub in walk(root):
                        yield Address(i, (k,) + path), sub
            else:
                for path, sub in walk(e.value):
                    yield Address(i, path), sub

    def find_loan(self, loan: LoanId) -> Optional[Tuple[Address, Value]]:
        for addr, sub in self.iter_nodes():
            if isinstance(sub, MutLoan) and sub.loan == loan:
                return addr, sub
            if isinstance(sub, SharedLoan) and loan in sub.loans:
                return addr, sub
        return None

    def find_borrow(self, loan: LoanId) -> Optional[Tuple[Address, Value]]:
        for addr, sub in self.iter_nodes():
            if isinstance(sub, (MutBorrow, SharedBorrow, ReservedBorrow)) and sub.loan == loan:
                return addr, sub
        return None

    def ancestors(self, addr: Address) -> List[Tuple[Address, Value]]:
        """Strict ancestors of `addr` inside its entry, outermost first."""
        e = self.entries[addr.entry]
        start = 1 if isinstance(e, Abstraction) else 0
        return [
            (Address(addr.entry, addr.path[:n]), self.get(Address(addr.entry, addr.path[:n])))
            for n in range(start, len(addr.path))
        ]

    # -- bulk rewrites -------------------------------------------------------
    def map_values(self, fn: Callable[[Value], Optional[Value]]) -> "Env":
        entries = []
        for e in self.entries:
            if isinstance(e, Abstraction):
                entries.append(e.with_values(tuple(map_value(v, fn) for v in e.values)))
            else:
                entries.append(replace(e, value=map_value(e.value, fn)))
        return replace(self, entries=tuple(entries))

    def substitute(self, sym: SymId, value: Value) -> "Env":
        """Replace every occurrence of symbol `sym`, abstractions included."""
        entries = []
        for e in self.entries:
            if isinstance(e, Abstraction):
                entries.append(e.with_values(tuple(substitute_symbol(v, sym, value) for v in e.values)))
            else:
                entries.append(replace(e, value=substitute_symbol(e.value, sym, value)))
        return replace(self, entries=tuple(entries))

    def prune_ghosts(self) -> "Env":
        """Drop ghost bindings that no longer hold a borrow or a loan."""
        kept = tuple(
            e for e in self.entries
            if not (
                isinstance(e, Binding) and e.ghost and not e.is_temp
                and not contains(e.value, BORROWS + LOANS)
            )
        )
        if len(kept) == len(self.entries):
            return self
        return replace(self, entries=kept)
