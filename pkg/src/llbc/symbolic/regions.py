"""Where the borrows of a region sit inside a signature type."""

from __future__ import annotations

from typing import List, Sequence, Tuple

from src.common.errors import BorrowCheckError, ErrorCode
from src.llbc.core.types import BorrowKind, BorrowTy, BoxTy, FnDecl, TupleTy, Ty
from src.llbc.store.values import Path, Value, children

MUT_ONLY = (BorrowKind.MUT,)
ANY_BORROW = (BorrowKind.MUT, BorrowKind.SHARED)


def borrow_slots(
    ty: Ty,
    region: str,
    kinds: Sequence[BorrowKind] = MUT_ONLY,
) -> List[Tuple[Path, BorrowTy]]:
    """Value paths of the `region` borrows in `ty`, left to right."""
    found: List[Tuple[Path, BorrowTy]] = []

    def go(t: Ty, path: Path) -> None:
        if isinstance(t, BorrowTy):
            if t.kind in kinds and t.region == region:
                found.append((path, t))
        elif isinstance(t, TupleTy):
            for i, e in enumerate(t.elems):
                go(e, path + (i,))
        elif isinstance(t, BoxTy):
            go(t.inner, path + (0,))

    go(ty, ())
    return found


def has_backward(fn: FnDecl, region: str) -> bool:
    """A region gets a backward function when the result borrows from it
    and it has mutable inputs to give back."""
    return bool(borrow_slots(fn.ret_ty, region, ANY_BORROW)) and bool(
        given_back_types([ty for _, ty in fn.args], region)
    )


def merged_regions(fn: FnDecl) -> Tuple[str, ...]:
    return tuple(r for r in fn.region_params if not has_backward(fn, r))


def given_back_types(arg_tys: Sequence[Ty], region: str) -> List[Ty]:
    """Types of what ending `region` hands back: one per mutable input borrow."""
    return [bty.inner for ty in arg_tys for _, bty in borrow_slots(ty, region)]


def value_at(v: Value, path: Path) -> Value:
    for i in path:
        kids = children(v)
        if i >= len(kids):
            raise BorrowCheckError(
                "value does not have the shape of its signature type",
                code=ErrorCode.ILL_TYPED_VALUE,
            )
        v = kids[i]
    return v
