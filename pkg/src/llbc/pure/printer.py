"""Text printers for pure programs.

Two styles: `fstar` follows F*-like conventions (`<--` binds, `Return`/`Fail`,
`begin match ... end`, snake_case type names); `ml` is a neutral syntax that
`reader.py` parses back.
"""

from __future__ import annotations

import re
from typing import List, Sequence

from src.llbc.core.printer import print_ty
from src.llbc.core.types import AdtTy, ScalarKind, ScalarTy, TupleTy, Ty, TyVar

from .ast import (
    Bind,
    CallExpr,
    CtorExpr,
    Decl,
    Expr,
    Fail,
    FunDef,
    IfExpr,
    Let,
    Lit,
    MatchExpr,
    Pattern,
    PCtor,
    Prim,
    PTuple,
    PureGroup,
    PureProgram,
    PVar,
    PWild,
    Ret,
    TupleExpr,
    TypeDef,
    Var,
)

INDENT = "  "
STYLES = ("fstar", "ml")

_INFIX = {"eq": "=", "ne": "<>", "lt": "<", "le": "<=", "gt": ">", "ge": ">="}
_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")


def snake_t(name: str) -> str:
    """`HashMap` -> `hash_map_t`."""
    return _CAMEL.sub("_", name).lower() + "_t"


def _indent(lines: Sequence[str], depth: int = 1) -> List[str]:
    return [INDENT * depth + line if line else line for line in lines]


def _is_simple(lines: Sequence[str]) -> bool:
    return len(lines) == 1


# ---------------------------------------------------------------------------
# F*-like
# ---------------------------------------------------------------------------

class FStarPrinter:
    def __init__(self, program: PureProgram) -> None:
        self.program = program

    # -- types ---------------------------------------------------------------
    def ty(self, ty: Ty, atomic: bool = False) -> str:
        if isinstance(ty, ScalarTy):
            return ty.kind.value
        if isinstance(ty, TyVar):
            return ty.name.lower()
        if isinstance(ty, TupleTy):
            if not ty.elems:
                return "unit"
            return "(" + " & ".join(self.ty(e) for e in ty.elems) + ")"
        if isinstance(ty, AdtTy):
            if not ty.args:
                return snake_t(ty.name)
            text = " ".join([snake_t(ty.name)] + [self.ty(a, atomic=True) for a in ty.args])
            return f"({text})" if atomic else text
        raise TypeError(ty)

    def ctor_name(self, adt: str, ctor: str) -> str:
        decl = self.program.type_def(adt)
        if decl is not None and decl.is_struct:
            return f"Mk{snake_t(adt)}"
        return f"{adt}{ctor}"

    # -- patterns and atoms -----------------------------------------------------
    def pattern(self, p: Pattern, atomic: bool = False) -> str:
        if isinstance(p, PVar):
            return p.name
        if isinstance(p, PWild):
            return "_"
        if isinstance(p, PTuple):
            return "(" + ", ".join(self.pattern(e) for e in p.elems) + ")"
        if isinstance(p, PCtor):
            if not p.args:
                return self.ctor_name(p.adt, p.ctor)
            text = " ".join([self.ctor_name(p.adt, p.ctor)] + [self.pattern(a, True) for a in p.args])
            return f"({text})" if atomic else text
        raise TypeError(p)

    def lit(self, e: Lit) -> str:
        if e.kind is ScalarKind.BOOL:
            return "true" if e.value else "false"
        return f"({e.value})" if e.value < 0 else str(e.value)

    def inline(self, e: Expr, atomic: bool = False) -> str:
        """Single-line rendering of a non-binding expression."""
        if isinstance(e, Var):
            return e.name
        if isinstance(e, Lit):
            return self.lit(e)
        if isinstance(e, TupleExpr):
            return "(" + ", ".join(self.inline(x) for x in e.elems) + ")"
        if isinstance(e, CtorExpr):
            head = self.ctor_name(e.adt, e.ctor)
            if not e.args:
                return head
            text = " ".join([head] + [self.inline(a, True) for a in e.args])
            return f"({text})" if atomic else text
        if isinstance(e, Prim):
            if e.op in _INFIX:
                text = f"{self.inline(e.args[0], True)} {_INFIX[e.op]} {self.inline(e.args[1], True)}"
            else:
                text = " ".join([e.op] + [self.inline(a, True) for a in e.args])
            return f"({text})" if atomic else text
        if isinstance(e, CallExpr):
            parts = [e.fn] + [self.ty(t, True) for t in e.ty_args] + [self.inline(a, True) for a in e.args]
            text = " ".join(parts)
            return f"({text})" if atomic and len(parts) > 1 else text
        if isinstance(e, Ret):
            text = f"Return {self.inline(e.value, True)}"
            return f"({text})" if atomic else text
        if isinstance(e, Fail):
            return "Fail"
        raise TypeError(f"{type(e).__name__} does not fit on one line")

    # -- computations --------------------------------------------------------
    def expr(self, e: Expr) -> List[str]:
        if isinstance(e, Bind):
            return [f"{self.pattern(e.pattern)} <-- {self.inline(e.rhs)};"] + self.expr(e.body)
        if isinstance(e, Let):
            return [f"let {self.pattern(e.pattern)} = {self.inline(e.rhs)} in"] + self.expr(e.body)
        if isinstance(e, IfExpr):
            if isinstance(e.else_branch, Fail):
                return [f"massert ({self.inline(e.cond)});"] + self.expr(e.then_branch)
            then_lines, else_lines = self.expr(e.then_branch), self.expr(e.else_branch)
            lines = [f"if {self.inline(e.cond)}"]
            lines += self._branch("then", then_lines)
            lines += self._branch("else", else_lines)
            return lines
        if isinstance(e, MatchExpr):
            lines = [f"begin match {self.inline(e.scrutinee)} with"]
            for arm in e.arms:
                lines.append(f"| {self.pattern(arm.pattern)} ->")
                lines += _indent(self.expr(arm.body))
            lines.append("end")
            return lines
        return [self.inline(e)]

    @staticmethod
    def _branch(keyword: str, body: List[str]) -> List[str]:
        if _is_simple(body):
            return [f"{keyword} {body[0]}"]
        return [f"{keyword} begin"] + _indent(body) + ["end"]

    # -- declarations --------------------------------------------------------
    def type_def(self, d: TypeDef, first: bool) -> List[str]:
        params = "".join(f" ({p.lower()} : Type)" for p in d.ty_params)
        self_ty = self.ty(AdtTy(d.name, tuple(TyVar(p) for p in d.ty_params)))
        head = f"{'type' if first else 'and'} {snake_t(d.name)}{params} ="
        lines = [head]
        for c in d.ctors:
            arrows = " -> ".join([self.ty(f, True) for f in c.fields] + [self_ty])
            lines.append(f"| {self.ctor_name(d.name, c.name)} : {arrows}")
        return lines

    def params(self, d: FunDef) -> str:
        parts = [f"({p.lower()} : Type)" for p in d.ty_params]
        parts += [f"({name} : {self.ty(ty)})" for name, ty in d.params]
        return "".join(" " + p for p in parts)

    def fun_def(self, d: FunDef, keyword: str) -> List[str]:
        if d.body is None:
            arrows = [f"({p.lower()} : Type)" for p in d.ty_params]
            arrows += [self.ty(ty, True) for _, ty in d.params]
            arrows.append(f"result {self.ty(d.ret_ty, True)}")
            return [f"val {d.name} : {' -> '.join(arrows)}"]
        head = f"{keyword} {d.name}{self.params(d)} : result {self.ty(d.ret_ty, True)} ="
        return [head] + _indent(self.expr(d.body))

    def group(self, g: PureGroup) -> List[str]:
        lines: List[str] = []
        first = True
        for decl in g.decls:
            if lines:
                lines.append("")
            if isinstance(decl, TypeDef):
                lines += self.type_def(decl, first or not g.recursive)
            elif decl.body is None:
                lines += self.fun_def(decl, "val")
            else:
                if g.recursive and first:
                    lines.append("(* decreases: termination measure to be supplied *)")
                keyword = ("let rec" if first else "and") if g.recursive else "let"
                lines += self.fun_def(decl, keyword)
            first = False
        return lines

    def program_text(self, module: str) -> str:
        lines = [f"module {module}", "open Primitives"]
        for g in self.program.groups:
            lines.append("")
            lines += self.group(g)
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Neutral ML
# ---------------------------------------------------------------------------

class MlPrinter:
    """Fully bracketed syntax; every construct parses back unambiguously."""

    def __init__(self, program: PureProgram) -> None:
        self.program = program

    def pattern(self, p: Pattern) -> str:
        if isinstance(p, PVar):
            return p.name
        if isinstance(p, PWild):
            return "_"
        if isinstance(p, PTuple):
            return "(" + ", ".join(self.pattern(e) for e in p.elems) + ")"
        if isinstance(p, PCtor):
            args = "(" + ", ".join(self.pattern(a) for a in p.args) + ")" if p.args else ""
            return f"{p.adt}::{p.ctor}{args}"
        raise TypeError(p)

    def inline(self, e: Expr) -> str:
        if isinstance(e, Var):
            return e.name
        if isinstance(e, Lit):
            if e.kind is ScalarKind.BOOL:
                return "true" if e.value else "false"
            return f"{e.value}{'u32' if e.kind is ScalarKind.U32 else ''}"
        if isinstance(e, TupleExpr):
            return "(" + ", ".join(self.inline(x) for x in e.elems) + ")"
        if isinstance(e, CtorExpr):
            args = "(" + ", ".join(self.inline(a) for a in e.args) + ")" if e.args else ""
            return f"{e.adt}::{e.ctor}{args}"
        if isinstance(e, Prim):
            return f"{e.op}(" + ", ".join(self.inline(a) for a in e.args) + ")"
        if isinstance(e, CallExpr):
            targs = "<" + ", ".join(print_ty(t) for t in e.ty_args) + ">" if e.ty_args else ""
            return f"{e.fn}{targs}(" + ", ".join(self.inline(a) for a in e.args) + ")"
        if isinstance(e, Ret):
            return f"return {self.inline(e.value)}"
        if isinstance(e, Fail):
            return "fail"
        raise TypeError(f"{type(e).__name__} does not fit on one line")

    def expr(self, e: Expr) -> List[str]:
        if isinstance(e, Bind):
            return [f"let* {self.pattern(e.pattern)} = {self.inline(e.rhs)} in"] + self.expr(e.body)
        if isinstance(e, Let):
            return [f"let {self.pattern(e.pattern)} = {self.inline(e.rhs)} in"] + self.expr(e.body)
        if isinstance(e, IfExpr):
            return (
                [f"if {self.inline(e.cond)} then {{"]
                + _indent(self.expr(e.then_branch))
                + ["} else {"]
                + _indent(self.expr(e.else_branch))
                + ["}"]
            )
        if isinstance(e, MatchExpr):
            lines = [f"match {self.inline(e.scrutinee)} {{"]
            for arm in e.arms:
                lines.append(f"| {self.pattern(arm.pattern)} ->")
                lines += _indent(self.expr(arm.body))
            lines.append("}")
            return lines
        return [self.inline(e)]

    def decl(self, d: Decl) -> List[str]:
        tparams = "<" + ", ".join(d.ty_params) + ">" if d.ty_params else ""
        if isinstance(d, TypeDef):
            lines = [f"{'struct' if d.is_struct else 'type'} {d.name}{tparams} ="]
            for c in d.ctors:
                fields = "(" + ", ".join(print_ty(f) for f in c.fields) + ")" if c.fields else ""
                lines.append(f"  | {c.name}{fields}")
            return lines
        params = ", ".join(f"{name}: {print_ty(ty)}" for name, ty in d.params)
        head = f"{d.name}{tparams}({params}) : {print_ty(d.ret_ty)}"
        if d.body is None:
            return [f"val {head}"]
        return [f"fun {head} ="] + _indent(self.expr(d.body))

    def program_text(self, module: str) -> str:
        lines = [f"module {module}"]
        for g in self.program.groups:
            lines.append("")
            body: List[str] = []
            for d in g.decls:
                body += self.decl(d)
            if g.recursive:
                lines += ["rec {"] + _indent(body) + ["}"]
            elif len(g.decls) > 1:
                lines += ["group {"] + _indent(body) + ["}"]
            else:
                lines += body
        return "\n".join(lines) + "\n"


def print_pure(program: PureProgram, style: str = "fstar", module: str = "Output") -> str:
    if style == "fstar":
        return FStarPrinter(program).program_text(module)
    if style == "ml":
        return MlPrinter(program).program_text(module)
    raise ValueError(f"unknown output style {style!r}; expected one of {STYLES}")
