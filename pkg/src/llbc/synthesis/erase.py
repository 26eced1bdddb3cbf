"""Erasure of borrows and boxes from types and values."""

from __future__ import annotations

from typing import Optional

from src.common.errors import ErrorCode, TranslationError
from src.llbc.core.types import AdtTy, BorrowTy, BoxTy, TupleTy, Ty
from src.llbc.store.dump import format_value
from src.llbc.store.env import Env
from src.llbc.store.values import (
    BoxValue,
    CtorValue,
    MutBorrow,
    ScalarValue,
    SharedBorrow,
    SharedLoan,
    SymbolicValue,
    TupleValue,
    Value,
)


def erase_type(ty: Ty) -> Ty:
    """`&'a mut T`, `&'a T` and `Box<T>` all become `T`."""
    if isinstance(ty, (BorrowTy, BoxTy)):
        return erase_type(ty.inner)
    if isinstance(ty, AdtTy):
        return AdtTy(ty.name, tuple(erase_type(a) for a in ty.args))
    if isinstance(ty, TupleTy):
        return TupleTy(tuple(erase_type(e) for e in ty.elems))
    return ty


def erase_value(env: Optional[Env], v: Value) -> Value:
    """The pure image of `v`: scalars, symbols, constructors and tuples only.

    Shared borrows are resolved through their loan in `env`.

    Raises:
        TranslationError: for ⊥, loans, reserved borrows, projectors and `_`.
    """
    if isinstance(v, (ScalarValue, SymbolicValue)):
        return v
    if isinstance(v, (MutBorrow, BoxValue, SharedLoan)):
        return erase_value(env, v.inner)
    if isinstance(v, SharedBorrow) and env is not None:
        found = env.find_loan(v.loan)
        if found is not None and isinstance(found[1], SharedLoan):
            return erase_value(env, found[1].inner)
    if isinstance(v, CtorValue):
        return CtorValue(v.adt, v.ctor, tuple(erase_value(env, f) for f in v.fields))
    if isinstance(v, TupleValue):
        return TupleValue(tuple(erase_value(env, e) for e in v.elems))
    raise TranslationError(
        f"value {format_value(v)} has no pure counterpart",
        code=ErrorCode.UNTRANSLATABLE_VALUE,
        value=format_value(v),
    )
