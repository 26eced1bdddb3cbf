"""Variable names for symbolic values, derived from source-level hints."""

from __future__ import annotations

import re
from typing import Dict, Mapping, Set

from src.llbc.store.values import SymbolicValue

_IDENT = re.compile(r"[^A-Za-z0-9_]")
DEFAULT_BASE = "s"


def _base(hint: str) -> str:
    base = _IDENT.sub("", hint).rstrip("0123456789") or DEFAULT_BASE
    return base if not base[0].isdigit() else DEFAULT_BASE + base


class Namer:
    """Names symbols on first use; aliases share the name of their source."""

    def __init__(self, hints: Mapping[int, str], reserved: Set[str] = frozenset()) -> None:
        self.hints = hints
        self.names: Dict[int, str] = {}
        self.used: Set[str] = set(reserved)
        self.counters: Dict[str, int] = {}

    def exact(self, sv: SymbolicValue) -> str:
        """Name a parameter after its hint when still available."""
        hint = self.hints.get(sv.sym)
        if hint is not None and sv.sym not in self.names:
            base = _base(hint)
            if base not in self.used:
                self.used.add(base)
                self.names[sv.sym] = base
        return self.name(sv)

    def name(self, sv: SymbolicValue) -> str:
        if sv.sym in self.names:
            return self.names[sv.sym]
        base = _base(self.hints.get(sv.sym, DEFAULT_BASE))
        k = self.counters.get(base, 0)
        while f"{base}{k}" in self.used:
            k += 1
        self.counters[base] = k + 1
        name = f"{base}{k}"
        self.used.add(name)
        self.names[sv.sym] = name
        return name

    def alias(self, target: SymbolicValue, source: SymbolicValue) -> None:
        self.names.setdefault(target.sym, self.name(source))
