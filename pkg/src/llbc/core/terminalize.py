"""Continuation duplication: every conditional ends its enclosing sequence."""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

from .types import IfThenElse, LlbcProgram, Match, Panic, Return, Statement, flatten, seq


def _terminal(items: Sequence[Statement]) -> Statement:
    for i, stmt in enumerate(items):
        if isinstance(stmt, (Return, Panic)):
            return seq(*items[: i + 1])
        rest = tuple(items[i + 1:])
        if isinstance(stmt, IfThenElse):
            branch = IfThenElse(
                stmt.cond,
                _terminal(flatten(stmt.then_branch) + rest),
                _terminal(flatten(stmt.else_branch) + rest),
                stmt.loc,
            )
            return seq(*items[:i], branch)
        if isinstance(stmt, Match):
            arms = tuple((ctor, _terminal(flatten(body) + rest)) for ctor, body in stmt.arms)
            return seq(*items[:i], Match(stmt.place, arms, stmt.loc))
    return seq(*items)


def terminalize(stmt: Statement) -> Statement:
    """Push the continuation of every If/Match into its branches.

    Statements following a Return or Panic are unreachable and dropped. The
    result is a fixed point: terminalize(terminalize(s)) == terminalize(s).
    """
    return _terminal(flatten(stmt))


def terminalize_program(program: LlbcProgram) -> LlbcProgram:
    fns = tuple(
        fn if fn.body is None else replace(fn, body=terminalize(fn.body))
        for fn in program.fn_decls
    )
    return program.with_fns(fns)


def is_terminal(stmt: Statement) -> bool:
    """True when no If/Match in `stmt` has a successor."""
    items = flatten(stmt)
    for i, s in enumerate(items):
        if isinstance(s, IfThenElse):
            if i != len(items) - 1:
                return False
            if not (is_terminal(s.then_branch) and is_terminal(s.else_branch)):
                return False
        elif isinstance(s, Match):
            if i != len(items) - 1:
                return False
            if not all(is_terminal(body) for _, body in s.arms):
                return False
    return True
