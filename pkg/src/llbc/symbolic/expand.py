"""Refinement of symbolic values into shapes."""

from __future__ import annotations

from typing import List, Optional, Tuple

from src.common.errors import BorrowCheckError, ErrorCode, EvalError
from src.llbc.core.types import AdtTy, BoxTy, LlbcProgram, TupleTy, TypeDecl
from src.llbc.store.env import Env
from src.llbc.store.values import BoxValue, CtorValue, SymbolicValue, SymId, TupleValue

from .types import AliasEvent, CtorPat, Event, ExpandEvent, TuplePat


def find_symbol(env: Env, sym: SymId) -> Optional[SymbolicValue]:
    for _, sub in env.iter_nodes():
        if isinstance(sub, SymbolicValue) and sub.sym == sym:
            return sub
    return None


def adt_decl(program: LlbcProgram, sv: SymbolicValue) -> TypeDecl:
    decl = program.type_decl(sv.ty.name) if isinstance(sv.ty, AdtTy) else None
    if decl is None:
        raise BorrowCheckError(
            f"cannot branch on a symbolic value of type {sv.ty}",
            code=ErrorCode.EXPAND_UNSUPPORTED,
        )
    return decl


def fresh_fields(env: Env, decl: TypeDecl, ctor: str, sv: SymbolicValue) -> Tuple[Tuple[SymbolicValue, ...], Env]:
    fields: List[SymbolicValue] = []
    for ty in decl.field_types(ctor, sv.ty.args):
        s, env = env.fresh_sym(ty)
        fields.append(s)
    return tuple(fields), env


def expand_single(env: Env, sv: SymbolicValue, program: LlbcProgram) -> Tuple[Env, List[Event]]:
    """Expand a value whose type has exactly one shape: boxes, tuples and structs."""
    if isinstance(sv.ty, BoxTy):
        inner, env = env.fresh_sym(sv.ty.inner)
        return env.substitute(sv.sym, BoxValue(inner)), [AliasEvent(inner, sv)]
    if isinstance(sv.ty, TupleTy):
        comps: List[SymbolicValue] = []
        for t in sv.ty.elems:
            s, env = env.fresh_sym(t)
            comps.append(s)
        pattern = TuplePat(tuple(comps))
        return env.substitute(sv.sym, TupleValue(pattern.syms)), [ExpandEvent(sv, pattern)]
    if isinstance(sv.ty, AdtTy):
        decl = adt_decl(program, sv)
        if len(decl.ctors) != 1:
            raise EvalError(
                f"a value of enum type {decl.name} must be matched before it is accessed",
                code=ErrorCode.PATH_MISMATCH,
            )
        ctor = decl.ctors[0].name
        fields, env = fresh_fields(env, decl, ctor, sv)
        value = CtorValue(decl.name, ctor, fields)
        return env.substitute(sv.sym, value), [ExpandEvent(sv, CtorPat(decl.name, ctor, fields))]
    raise BorrowCheckError(
        f"cannot expand a symbolic value of type {sv.ty}",
        code=ErrorCode.EXPAND_UNSUPPORTED,
    )
