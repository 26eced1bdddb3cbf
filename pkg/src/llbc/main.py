"""
llbc: command-line entry point.

Usage:
    uv run llbc check tests/corpus/*.llbc
    uv run llbc run tests/corpus/ref_incr.llbc --entry test_incr --trace
    uv run llbc translate tests/corpus/list_nth.llbc -o out/ --style ml
    uv run llbc difftest tests/corpus/list_nth.llbc --fuel 1000
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.syntax import Syntax
from rich.table import Table

from src.common.config import config
from src.common.errors import Diagnostic, ErrorCode, LlbcError, ValidationError
from src.common.logger import get_logger, setup_logging
from src.llbc.concrete import ExecResult, run_program
from src.llbc.core import parse_file, validate
from src.llbc.core.types import LlbcProgram
from src.llbc.pure import OutOfFuel, PureOutcome, PureReturn, eval_pure, print_pure
from src.llbc.pure.ast import PureProgram
from src.llbc.reports import (
    CheckReport,
    DiagnosticReport,
    DiffReport,
    FunctionReport,
    RunReport,
    TranslateSummary,
)
from src.llbc.store import format_value
from src.llbc.symbolic import borrow_check
from src.llbc.synthesis.erase import erase_value
from src.llbc.synthesis.translate import translate_program

logger = get_logger(__name__)
console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_INCONCLUSIVE = 3
EXIT_PANIC = 101

_SUFFIX = {"fstar": ".pure.fst.txt", "ml": ".pure.ml.txt"}


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _load(path: Path) -> LlbcProgram:
    """Parse and validate one input file."""
    program = parse_file(path)
    diagnostics = validate(program)
    if diagnostics:
        raise ValidationError(diagnostics)
    return program


def _print_error(diagnostic: Diagnostic, file: Optional[Path] = None) -> None:
    where = f"{file}: " if file else ""
    err_console.print(
        f"[bold red]{diagnostic.code.value}[/bold red] {where}{diagnostic.location}: "
        f"{escape(diagnostic.message)}"
    )


def _emit_json(payload) -> None:
    sys.stdout.write(payload + "\n")


def module_name(path: Path) -> str:
    """`list_nth.llbc` -> `ListNth`."""
    stem = path.name.split(".")[0]
    return "".join(p.capitalize() for p in re.split(r"[^A-Za-z0-9]+", stem) if p) or "Output"


def _write_atomic(target: Path, text: str) -> None:
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def check_file(path: Path, checks: Optional[bool] = None) -> CheckReport:
    logger.info("checking_file", path=str(path))
    try:
        program = parse_file(path)
    except LlbcError as exc:
        return CheckReport(file=str(path), ok=False, diagnostics=[DiagnosticReport.of(exc.diagnostic)])
    diagnostics = validate(program)
    if diagnostics:
        return CheckReport(
            file=str(path), ok=False, diagnostics=[DiagnosticReport.of(d) for d in diagnostics]
        )
    functions = [FunctionReport.of(r) for r in borrow_check(program, checks=checks)]
    ok = all(f.status != "rejected" for f in functions)
    return CheckReport(file=str(path), ok=ok, functions=functions)


def _print_check(report: CheckReport) -> None:
    table = Table(title=report.file, show_header=True)
    table.add_column("Function", style="cyan")
    table.add_column("Status")
    table.add_column("Backward regions", style="green")
    table.add_column("Error", style="red")
    for d in report.diagnostics:
        table.add_row("-", "[red]invalid[/red]", "", escape(f"{d.code} at {d.location}: {d.message}"))
    for f in report.functions:
        status = {"accepted": "[green]accepted[/green]", "rejected": "[red]rejected[/red]"}.get(
            f.status, f"[dim]{f.status}[/dim]"
        )
        error = escape(f"{f.error.code} at {f.error.location}: {f.error.message}") if f.error else ""
        table.add_row(f.name, status, ", ".join(f.backward_regions), error)
    console.print(table)
    for f in report.functions:
        if f.env_dump:
            console.print(Panel(escape(f.env_dump), title=f"[bold]{f.name}[/bold] env at error", border_style="red"))


def _without_env(report: CheckReport) -> CheckReport:
    functions = [f.model_copy(update={"env_dump": None}) for f in report.functions]
    return report.model_copy(update={"functions": functions})


def cmd_check(args: argparse.Namespace) -> int:
    checks = False if args.no_invariant_checks else None
    files: List[Path] = args.files
    with ThreadPoolExecutor(max_workers=max(1, min(8, len(files)))) as pool:
        reports = list(pool.map(lambda p: check_file(p, checks), files))
    if not args.dump_env:
        reports = [_without_env(r) for r in reports]
    if args.json:
        _emit_json(json.dumps([r.model_dump() for r in reports], indent=2))
    else:
        for report in reports:
            _print_check(report)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_ERROR


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _describe(result: ExecResult) -> str:
    if result.panicked:
        return "Panic"
    return f"Return({format_value(result.value)})"


def cmd_run(args: argparse.Namespace) -> int:
    checks = False if args.no_invariant_checks else None
    path: Path = args.file
    try:
        program = _load(path)
        result = run_program(program, args.entry, checks=checks, trace=args.trace)
    except LlbcError as exc:
        dump = exc.diagnostic.details.get("env") if args.dump_env else None
        if args.json:
            report = RunReport(
                file=str(path), entry=args.entry, outcome="error",
                error=DiagnosticReport.of(exc.diagnostic),
                env_dump=dump,
            )
            _emit_json(report.model_dump_json(indent=2))
        else:
            _print_error(exc.diagnostic, path)
            if dump:
                console.print(Panel(escape(dump), title=f"[bold]{args.entry}[/bold] env at error", border_style="red"))
        return EXIT_ERROR

    trace = [f"{s.function}: {s.statement}  |  {s.env}" for s in result.trace]
    if args.json:
        report = RunReport(
            file=str(path),
            entry=args.entry,
            outcome=result.outcome.value,
            value=None if result.panicked else format_value(result.value),
            trace=trace,
        )
        _emit_json(report.model_dump_json(indent=2))
    else:
        for step in result.trace:
            console.print(f"[cyan]{step.function}[/cyan] {escape(step.statement)}")
            console.print(f"  [dim]{escape(step.env)}[/dim]")
        style = "red" if result.panicked else "green"
        console.print(f"[bold {style}]{_describe(result)}[/bold {style}]")
    return EXIT_PANIC if result.panicked else EXIT_OK


# ---------------------------------------------------------------------------
# translate
# ---------------------------------------------------------------------------

def summarize(pure: PureProgram) -> dict:
    functions = pure.functions
    return {
        "types": len(pure.types),
        "forward": sum(1 for f in functions if f.body is not None and f.name.endswith("_fwd")),
        "backward": sum(1 for f in functions if f.body is not None and "_back" in f.name),
        "opaque": sum(1 for f in functions if f.body is None),
    }


def cmd_translate(args: argparse.Namespace) -> int:
    path: Path = args.file
    style = args.style or config.OUTPUT_STYLE
    inline = False if args.no_inline_lets else None
    checks = False if args.no_invariant_checks else None
    try:
        pure = translate_program(_load(path), inline_lets=inline, checks=checks)
    except LlbcError as exc:
        if args.json:
            summary = TranslateSummary(
                file=str(path), style=style, error=DiagnosticReport.of(exc.diagnostic)
            )
            _emit_json(summary.model_dump_json(indent=2))
        else:
            _print_error(exc.diagnostic, path)
        return EXIT_ERROR

    text = print_pure(pure, style, module=module_name(path))
    target: Optional[Path] = None
    if args.output is not None:
        target = args.output / (path.name.split(".")[0] + _SUFFIX[style])
        _write_atomic(target, text)
        logger.info("translation_written", path=str(target))
    summary = TranslateSummary(
        file=str(path), style=style, output=str(target) if target else None, **summarize(pure)
    )
    if args.json:
        _emit_json(summary.model_dump_json(indent=2))
        return EXIT_OK
    if target is None:
        console.print(Panel(Syntax(text, "ocaml", word_wrap=True), title=f"[bold]{path.name}[/bold]"))
    console.print(
        f"[green]{summary.types} types, {summary.forward} forward, "
        f"{summary.backward} backward, {summary.opaque} interface declarations[/green]"
        + (f" -> {target}" if target else "")
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# difftest
# ---------------------------------------------------------------------------

def _closed_entries(program: LlbcProgram) -> List[str]:
    return [f.name for f in program.fn_decls if not f.is_opaque and not f.args]


def compare(
    program: LlbcProgram,
    pure: PureProgram,
    entry: str,
    fuel: Optional[int] = None,
    checks: Optional[bool] = None,
    file: str = "",
) -> DiffReport:
    """Run `entry` concretely and its translation purely, and compare the outcomes."""
    concrete = run_program(program, entry, checks=checks)
    concrete_text = _describe(concrete)
    try:
        outcome: PureOutcome = eval_pure(pure, entry, fuel=fuel)
    except OutOfFuel:
        return DiffReport(
            file=file, entry=entry, verdict="INCONCLUSIVE", concrete=concrete_text, pure="OutOfFuel"
        )
    if concrete.panicked:
        equal = not isinstance(outcome, PureReturn)
    else:
        equal = isinstance(outcome, PureReturn) and erase_value(None, concrete.value) == outcome.value
    verdict = "EQUAL" if equal else "DIFFER"
    logger.info("difftest_compared", entry=entry, verdict=verdict)
    return DiffReport(file=file, entry=entry, verdict=verdict, concrete=concrete_text, pure=str(outcome))


def cmd_difftest(args: argparse.Namespace) -> int:
    path: Path = args.file
    checks = False if args.no_invariant_checks else None
    reports: List[DiffReport] = []
    try:
        program = _load(path)
        pure = translate_program(program, checks=checks)
        entries = [args.entry] if args.entry else _closed_entries(program)
        for entry in entries:
            try:
                reports.append(compare(program, pure, entry, args.fuel, checks, str(path)))
            except LlbcError as exc:
                inconclusive = exc.code is ErrorCode.CALL_DEPTH_EXCEEDED
                reports.append(DiffReport(
                    file=str(path),
                    entry=entry,
                    verdict="INCONCLUSIVE" if inconclusive else "ERROR",
                    concrete="-",
                    pure="-",
                    error=DiagnosticReport.of(exc.diagnostic),
                ))
    except LlbcError as exc:
        _print_error(exc.diagnostic, path)
        return EXIT_ERROR

    if args.json:
        _emit_json(json.dumps([r.model_dump() for r in reports], indent=2))
    else:
        table = Table(title=f"difftest {path.name}", show_header=True)
        table.add_column("Entry", style="cyan")
        table.add_column("Verdict")
        table.add_column("Concrete")
        table.add_column("Pure")
        colors = {"EQUAL": "green", "INCONCLUSIVE": "yellow"}
        for r in reports:
            color = colors.get(r.verdict, "red")
            detail = r.error.message if r.error else r.pure
            table.add_row(r.entry, f"[{color}]{r.verdict}[/{color}]", escape(r.concrete), escape(detail))
        console.print(table)

    verdicts = {r.verdict for r in reports}
    if verdicts & {"DIFFER", "ERROR"}:
        return EXIT_ERROR
    if "INCONCLUSIVE" in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Print a machine-readable report")
    common.add_argument(
        "--no-invariant-checks",
        action="store_true",
        help="Skip per-step environment invariant checks (faster)",
    )
    common.add_argument("--log-level", default=None, help="Override LLBC_LOG_LEVEL")

    debug = argparse.ArgumentParser(add_help=False)
    debug.add_argument(
        "--dump-env",
        action="store_true",
        help="Print the environment at the statement where execution got stuck",
    )

    parser = argparse.ArgumentParser(
        prog="llbc",
        description="Interpret, borrow-check and translate LLBC programs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            "Exit codes: 0 ok, 2 error, 3 inconclusive, 101 panic.\n"
            "Examples:\n"
            "  llbc check tests/corpus/choose.llbc\n"
            "  llbc translate tests/corpus/list_nth.llbc -o out/\n"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", parents=[common, debug], help="Borrow-check every function")
    check.add_argument("files", type=Path, nargs="+")
    check.set_defaults(handler=cmd_check)

    run = sub.add_parser("run", parents=[common, debug], help="Execute a nullary entry concretely")
    run.add_argument("file", type=Path)
    run.add_argument("--entry", default="main")
    run.add_argument("--trace", action="store_true", help="Dump the environment after each step")
    run.set_defaults(handler=cmd_run)

    translate = sub.add_parser("translate", parents=[common], help="Emit the pure translation")
    translate.add_argument("file", type=Path)
    translate.add_argument("-o", "--output", type=Path, default=None, help="Output directory")
    translate.add_argument("--style", choices=sorted(_SUFFIX), default=None)
    translate.add_argument("--no-inline-lets", action="store_true")
    translate.set_defaults(handler=cmd_translate)

    difftest = sub.add_parser(
        "difftest", parents=[common], help="Compare concrete execution with the translation"
    )
    difftest.add_argument("file", type=Path)
    difftest.add_argument("--entry", default=None, help="Default: every nullary function")
    difftest.add_argument("--fuel", type=int, default=None)
    difftest.set_defaults(handler=cmd_difftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    setup_logging(args.log_level or config.LOG_LEVEL)
    try:
        config.validate()
    except ValueError as exc:
        err_console.print(f"[bold red]Configuration error:[/bold red] {exc}")
        return EXIT_ERROR
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
