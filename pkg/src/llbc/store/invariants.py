"""Per-step environment consistency checks."""

from __future__ import annotations

from collections import Counter
from typing import Dict, List, Optional

from src.common.errors import Diagnostic, ErrorCode, SourceLocation
from src.llbc.core.types import (
    AdtTy,
    BorrowKind,
    BorrowTy,
    BoxTy,
    LlbcProgram,
    ScalarTy,
    TupleTy,
    Ty,
    TyVar,
    erase_regions,
)

from .env import Abstraction, Binding, Env
from .values import (
    Bottom,
    BoxValue,
    CtorValue,
    Ignored,
    MutBorrow,
    MutLoan,
    ProjIn,
    ProjLoans,
    ProjOut,
    ReservedBorrow,
    ScalarValue,
    SharedBorrow,
    SharedLoan,
    SymbolicValue,
    TupleValue,
    Value,
    walk,
)


def _diag(code: ErrorCode, message: str, **details) -> Diagnostic:
    return Diagnostic(code=code, message=message, location=SourceLocation(), details=details)


def well_typed(v: Value, ty: Ty, program: Optional[LlbcProgram]) -> bool:
    """Structural agreement of `v` with `ty`; loans, ⊥ and `_` fit anywhere."""
    if isinstance(v, (Bottom, Ignored, MutLoan, ProjIn, ProjLoans)) or isinstance(ty, TyVar):
        return True
    if isinstance(v, SharedLoan):
        return well_typed(v.inner, ty, program)
    if isinstance(v, SymbolicValue):
        return erase_regions(v.ty) == erase_regions(ty) or isinstance(v.ty, TyVar)
    if isinstance(v, ProjOut):
        return erase_regions(v.ty) == erase_regions(ty)
    if isinstance(v, ScalarValue):
        if not isinstance(ty, ScalarTy) or ty.kind is not v.kind:
            return False
        return not v.kind.is_integer or v.kind.in_range(v.value)
    if isinstance(v, MutBorrow):
        return isinstance(ty, BorrowTy) and ty.kind is BorrowKind.MUT and well_typed(v.inner, ty.inner, program)
    if isinstance(v, ReservedBorrow):
        return isinstance(ty, BorrowTy)
    if isinstance(v, SharedBorrow):
        return isinstance(ty, BorrowTy) and ty.kind is BorrowKind.SHARED
    if isinstance(v, BoxValue):
        return isinstance(ty, BoxTy) and well_typed(v.inner, ty.inner, program)
    if isinstance(v, TupleValue):
        return (
            isinstance(ty, TupleTy)
            and len(ty.elems) == len(v.elems)
            and all(well_typed(e, t, program) for e, t in zip(v.elems, ty.elems))
        )
    if isinstance(v, CtorValue):
        if not isinstance(ty, AdtTy) or ty.name != v.adt:
            return False
        decl = program.type_decl(v.adt) if program is not None else None
        if decl is None or decl.ctor(v.ctor) is None:
            return program is None
        field_tys = decl.field_types(v.ctor, ty.args)
        return len(field_tys) == len(v.fields) and all(
            well_typed(f, t, program) for f, t in zip(v.fields, field_tys)
        )
    return False


def check_invariants(
    env: Env,
    program: Optional[LlbcProgram] = None,
    symbolic: bool = False,
) -> List[Diagnostic]:
    """Every broken environment invariant, in environment order."""
    diags: List[Diagnostic] = []
    loans: Counter = Counter()
    mut_loans = set()
    shared_loans = set()
    borrows: Counter = Counter()
    borrow_kinds: Dict[int, type] = {}
    sym_types: Dict[int, Ty] = {}

    for index, entry in enumerate(env.entries):
        in_abs = isinstance(entry, Abstraction)
        roots = entry.values if in_abs else (entry.value,)
        for root in roots:
            for _, sub in walk(root):
                if isinstance(sub, MutLoan):
                    loans[sub.loan] += 1
                    mut_loans.add(sub.loan)
                elif isinstance(sub, SharedLoan):
                    for loan in sub.loans:
                        loans[loan] += 1
                        shared_loans.add(loan)
                    if any(isinstance(inner, MutLoan) for _, inner in walk(sub.inner)):
                        diags.append(_diag(
                            ErrorCode.MUT_LOAN_IN_SHARED,
                            f"shared loan {sorted(sub.loans)} holds a mutable loan",
                            entry=index,
                        ))
                elif isinstance(sub, (MutBorrow, SharedBorrow, ReservedBorrow)):
                    borrows[sub.loan] += 1
                    borrow_kinds[sub.loan] = type(sub)
                if isinstance(sub, (SymbolicValue, ProjIn, ProjLoans, ProjOut, Ignored)) and not symbolic:
                    diags.append(_diag(
                        ErrorCode.SYMBOLIC_IN_CONCRETE,
                        f"{type(sub).__name__} in a concrete environment",
                        entry=index,
                    ))
                if isinstance(sub, (ProjIn, ProjLoans)) and not in_abs:
                    diags.append(_diag(
                        ErrorCode.PROJECTOR_OUTSIDE_ABSTRACTION,
                        f"{type(sub).__name__} outside a region abstraction",
                        entry=index,
                    ))
                if isinstance(sub, SymbolicValue):
                    seen = sym_types.setdefault(sub.sym, sub.ty)
                    if erase_regions(seen) != erase_regions(sub.ty):
                        diags.append(_diag(
                            ErrorCode.ILL_TYPED_VALUE,
                            f"symbol s{sub.sym} used at two types",
                            sym=sub.sym,
                        ))
        if isinstance(entry, Binding) and entry.ty is not None:
            if not well_typed(entry.value, entry.ty, program):
                diags.append(_diag(
                    ErrorCode.ILL_TYPED_VALUE,
                    f"value of {entry.var} does not fit its type",
                    var=entry.var,
                ))

    for loan, count in sorted(loans.items()):
        if count > 1:
            diags.append(_diag(ErrorCode.DUPLICATE_LOAN, f"loan l{loan} appears {count} times", loan=loan))
    for loan, count in sorted(borrows.items()):
        if count > 1:
            diags.append(_diag(ErrorCode.DUPLICATE_BORROW, f"borrow l{loan} appears {count} times", loan=loan))
        kind = borrow_kinds[loan]
        expected = mut_loans if kind is MutBorrow else shared_loans
        if loan not in expected:
            diags.append(_diag(ErrorCode.DANGLING_BORROW, f"borrow l{loan} has no matching loan", loan=loan))
    return diags
