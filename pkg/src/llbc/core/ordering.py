"""Dependency order of declarations, grouping mutual recursion."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

import networkx as nx

from .types import AdtTy, Call, IfThenElse, LlbcProgram, Match, Seq, Statement, iter_types


@dataclass(frozen=True)
class DeclGroup:
    """Declarations that must be emitted together."""
    names: Tuple[str, ...]
    recursive: bool


def callees(stmt: Statement) -> List[str]:
    """Functions called by `stmt`, in order of first occurrence."""
    found: Dict[str, None] = {}

    def walk(s: Statement) -> None:
        if isinstance(s, Seq):
            walk(s.first)
            walk(s.second)
        elif isinstance(s, Call):
            found.setdefault(s.fn, None)
        elif isinstance(s, IfThenElse):
            walk(s.then_branch)
            walk(s.else_branch)
        elif isinstance(s, Match):
            for _, body in s.arms:
                walk(body)

    walk(stmt)
    return list(found)


def _groups(order: List[str], edges: Iterable[Tuple[str, str]]) -> List[DeclGroup]:
    """SCCs of the graph, dependencies first, ties broken by declaration order.

    An edge (a, b) means `a` depends on `b`.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(order)
    graph.add_edges_from((b, a) for a, b in edges if a in graph and b in graph)
    rank = {name: i for i, name in enumerate(order)}
    dag = nx.condensation(graph)
    members = dag.graph["mapping"]
    comps: Dict[int, List[str]] = {}
    for name, comp in members.items():
        comps.setdefault(comp, []).append(name)
    groups = []
    for comp in nx.lexicographical_topological_sort(dag, key=lambda c: min(rank[n] for n in comps[c])):
        names = tuple(sorted(comps[comp], key=rank.__getitem__))
        recursive = len(names) > 1 or graph.has_edge(names[0], names[0])
        groups.append(DeclGroup(names, recursive))
    return groups


def function_groups(program: LlbcProgram) -> List[DeclGroup]:
    edges = [
        (fn.name, callee)
        for fn in program.fn_decls
        if fn.body is not None
        for callee in callees(fn.body)
    ]
    return _groups([fn.name for fn in program.fn_decls], edges)


def type_groups(program: LlbcProgram) -> List[DeclGroup]:
    edges = [
        (decl.name, t.name)
        for decl in program.type_decls
        for ctor in decl.ctors
        for _, fty in ctor.fields
        for t in iter_types(fty)
        if isinstance(t, AdtTy)
    ]
    return _groups([d.name for d in program.type_decls], edges)
