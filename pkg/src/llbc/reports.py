"""Machine-readable reports emitted by the CLI with `--json`."""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, Field

from src.common.errors import Diagnostic
from src.llbc.symbolic.types import CheckResult


class DiagnosticReport(BaseModel):
    code: str
    message: str
    location: str = Field(description="function:line:column, or <unknown>")

    @classmethod
    def of(cls, diagnostic: Diagnostic) -> "DiagnosticReport":
        return cls(
            code=diagnostic.code.value,
            message=diagnostic.message,
            location=str(diagnostic.location),
        )


class FunctionReport(BaseModel):
    name: str
    status: str = Field(description="accepted, rejected or opaque")
    error: Optional[DiagnosticReport] = None
    env_dump: Optional[str] = None
    backward_regions: List[str] = Field(default_factory=list)

    @classmethod
    def of(cls, result: CheckResult) -> "FunctionReport":
        if result.opaque:
            status = "opaque"
        elif result.accepted:
            status = "accepted"
        else:
            status = "rejected"
        return cls(
            name=result.name,
            status=status,
            error=DiagnosticReport.of(result.error) if result.error else None,
            env_dump=result.env_dump,
            backward_regions=list(result.tree.backward_regions) if result.tree else [],
        )


class CheckReport(BaseModel):
    file: str
    ok: bool
    diagnostics: List[DiagnosticReport] = Field(default_factory=list)
    functions: List[FunctionReport] = Field(default_factory=list)


class RunReport(BaseModel):
    file: str
    entry: str
    outcome: str = Field(description="returned, panicked or error")
    value: Optional[str] = None
    error: Optional[DiagnosticReport] = None
    trace: List[str] = Field(default_factory=list)
    env_dump: Optional[str] = None


class DiffReport(BaseModel):
    file: str
    entry: str
    verdict: str = Field(description="EQUAL, DIFFER or INCONCLUSIVE")
    concrete: str
    pure: str
    error: Optional[DiagnosticReport] = None


class TranslateSummary(BaseModel):
    file: str
    style: str
    output: Optional[str] = None
    types: int = 0
    forward: int = 0
    backward: int = 0
    opaque: int = 0
    error: Optional[DiagnosticReport] = None
