"""Diagnostics and the exception hierarchy shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional


class ErrorCode(str, Enum):
    """Stable diagnostic codes."""
    # Frontend
    PARSE_ERROR = "PARSE_ERROR"
    UNKNOWN_NAME = "UNKNOWN_NAME"
    DUPLICATE_NAME = "DUPLICATE_NAME"
    TYPE_MISMATCH = "TYPE_MISMATCH"
    ARITY_MISMATCH = "ARITY_MISMATCH"
    UNARY_TUPLE = "UNARY_TUPLE"
    INT_OUT_OF_RANGE = "INT_OUT_OF_RANGE"
    NESTED_BORROW_SIG = "NESTED_BORROW_SIG"
    BORROW_IN_ADT = "BORROW_IN_ADT"
    UNGUARDED_RECURSION = "UNGUARDED_RECURSION"
    UNKNOWN_REGION = "UNKNOWN_REGION"
    INCOMPLETE_MATCH = "INCOMPLETE_MATCH"
    LOOP_UNSUPPORTED = "LOOP_UNSUPPORTED"

    # Memory model
    PATH_MISMATCH = "PATH_MISMATCH"
    WRITE_THROUGH_SHARED = "WRITE_THROUGH_SHARED"
    COPY_NONCOPYABLE = "COPY_NONCOPYABLE"
    DANGLING_BORROW = "DANGLING_BORROW"
    DUPLICATE_LOAN = "DUPLICATE_LOAN"
    DUPLICATE_BORROW = "DUPLICATE_BORROW"
    MUT_LOAN_IN_SHARED = "MUT_LOAN_IN_SHARED"
    ILL_TYPED_VALUE = "ILL_TYPED_VALUE"
    SYMBOLIC_IN_CONCRETE = "SYMBOLIC_IN_CONCRETE"
    PROJECTOR_OUTSIDE_ABSTRACTION = "PROJECTOR_OUTSIDE_ABSTRACTION"
    INVARIANT_VIOLATION = "INVARIANT_VIOLATION"

    # Evaluation
    MOVE_LOANED = "MOVE_LOANED"
    MOVE_THROUGH_DEREF = "MOVE_THROUGH_DEREF"
    USE_OF_BOTTOM = "USE_OF_BOTTOM"
    BORROW_CONFLICT = "BORROW_CONFLICT"
    ASSIGN_OVER_LOAN = "ASSIGN_OVER_LOAN"
    FREE_NON_BOX = "FREE_NON_BOX"
    STUCK_REORG = "STUCK_REORG"
    OPAQUE_CALL_IN_CONCRETE_MODE = "OPAQUE_CALL_IN_CONCRETE_MODE"
    CALL_DEPTH_EXCEEDED = "CALL_DEPTH_EXCEEDED"
    NO_ENTRY = "NO_ENTRY"

    # Symbolic execution / synthesis
    EXPAND_UNSUPPORTED = "EXPAND_UNSUPPORTED"
    RESTRICTION_VIOLATION = "RESTRICTION_VIOLATION"
    BACKWARD_STUCK = "BACKWARD_STUCK"
    UNTRANSLATABLE_VALUE = "UNTRANSLATABLE_VALUE"

    # Pure language
    ILL_SCOPED = "ILL_SCOPED"


@dataclass(frozen=True)
class SourceLocation:
    """A position in an input file, or the function/statement a runtime error hit."""
    line: Optional[int] = None
    column: Optional[int] = None
    function: Optional[str] = None

    def __str__(self) -> str:
        parts = []
        if self.function:
            parts.append(self.function)
        if self.line is not None:
            parts.append(f"{self.line}:{self.column or 0}")
        return ":".join(parts) if parts else "<unknown>"


@dataclass
class Diagnostic:
    """One reported problem."""
    code: ErrorCode
    message: str
    location: SourceLocation = field(default_factory=SourceLocation)
    details: Dict[str, Any] = field(default_factory=dict)

    def __str__(self) -> str:
        return f"{self.code.value} at {self.location}: {self.message}"

    @classmethod
    def from_exception(cls, exc: Exception) -> "Diagnostic":
        """Wrap any exception; LlbcErrors keep their own diagnostic."""
        if isinstance(exc, LlbcError):
            return exc.diagnostic
        return cls(
            code=ErrorCode.INVARIANT_VIOLATION,
            message=f"{type(exc).__name__}: {exc}",
        )


class LlbcError(Exception):
    """Base class; every subclass carries a Diagnostic."""

    default_code = ErrorCode.INVARIANT_VIOLATION

    def __init__(
        self,
        message: str,
        code: Optional[ErrorCode] = None,
        location: Optional[SourceLocation] = None,
        **details: Any,
    ) -> None:
        super().__init__(message)
        self.diagnostic = Diagnostic(
            code=code or self.default_code,
            message=message,
            location=location or SourceLocation(),
            details=details,
        )

    @property
    def code(self) -> ErrorCode:
        return self.diagnostic.code

    def located(self, location: SourceLocation) -> "LlbcError":
        """Attach a location if none was recorded yet."""
        if self.diagnostic.location == SourceLocation():
            self.diagnostic.location = location
        return self


class ParseError(LlbcError):
    default_code = ErrorCode.PARSE_ERROR

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        expected: Optional[list] = None,
        code: Optional[ErrorCode] = None,
    ) -> None:
        super().__init__(
            message,
            code=code,
            location=SourceLocation(line=line, column=column),
            expected=sorted(expected or []),
        )
        self.line = line
        self.column = column
        self.expected = sorted(expected or [])


class ValidationError(LlbcError):
    """Raised when a program with diagnostics is pushed further down the pipeline."""

    def __init__(self, diagnostics: list) -> None:
        first = diagnostics[0]
        super().__init__(str(first), code=first.code, location=first.location)
        self.diagnostics = diagnostics


class EvalError(LlbcError):
    default_code = ErrorCode.PATH_MISMATCH


class BorrowCheckError(LlbcError):
    default_code = ErrorCode.STUCK_REORG


class TranslationError(LlbcError):
    default_code = ErrorCode.UNTRANSLATABLE_VALUE
