"""Pretty printer for LLBC concrete syntax; output parses back to the same AST."""

from __future__ import annotations

from typing import List, Optional

from .types import (
    AdtTy,
    Assign,
    Binop,
    BorrowKind,
    BorrowOf,
    BorrowTy,
    BoxTy,
    Call,
    Const,
    Copy,
    CtorOp,
    Deref,
    Field,
    FnDecl,
    Free,
    IfThenElse,
    LlbcProgram,
    Match,
    Move,
    Nop,
    Operand,
    Panic,
    Place,
    RefKind,
    Return,
    Rvalue,
    ScalarKind,
    ScalarTy,
    Seq,
    Statement,
    TupleField,
    TupleOp,
    TupleTy,
    Ty,
    TyVar,
    TypeDecl,
    Unop,
    Use,
    flatten,
)

INDENT = "    "


def print_ty(ty: Ty) -> str:
    if isinstance(ty, ScalarTy):
        return ty.kind.value
    if isinstance(ty, BorrowTy):
        mut = "mut " if ty.kind is BorrowKind.MUT else ""
        return f"&'{ty.region} {mut}{print_ty(ty.inner)}"
    if isinstance(ty, BoxTy):
        return f"Box<{print_ty(ty.inner)}>"
    if isinstance(ty, AdtTy):
        if not ty.args:
            return ty.name
        return f"{ty.name}<{', '.join(print_ty(a) for a in ty.args)}>"
    if isinstance(ty, TupleTy):
        return f"({', '.join(print_ty(e) for e in ty.elems)})"
    if isinstance(ty, TyVar):
        return ty.name
    raise TypeError(f"not a type: {ty!r}")


class LlbcPrinter:
    """Prints programs; needs the type declarations to choose field syntax."""

    def __init__(self, program: Optional[LlbcProgram] = None) -> None:
        self._structs = set()
        if program is not None:
            self._structs = {d.name for d in program.type_decls if d.is_struct}

    # -- places / operands / rvalues ----------------------------------------
    def place(self, place: Place) -> str:
        text = place.base
        needs_paren = False
        for proj in place.path:
            if isinstance(proj, Deref):
                text = "*" + text
                needs_paren = True
                continue
            if needs_paren:
                text = f"({text})"
                needs_paren = False
            if isinstance(proj, TupleField):
                text += f".{proj.index}"
            elif isinstance(proj, Field):
                if proj.ctor in self._structs or not proj.ctor:
                    text += f".{proj.name}"
                else:
                    text += f".{proj.ctor}.{proj.name}"
        return text

    def operand(self, op: Operand) -> str:
        if isinstance(op, Move):
            return f"move {self.place(op.place)}"
        if isinstance(op, Copy):
            return f"copy {self.place(op.place)}"
        if isinstance(op, Const):
            if op.kind is ScalarKind.BOOL:
                return "true" if op.value else "false"
            if op.kind is ScalarKind.U32:
                return f"{op.value}u32"
            return str(op.value)
        if isinstance(op, CtorOp):
            name = f"{op.adt}::{op.ctor}" if op.adt else op.ctor
            if not op.fields:
                return name
            return f"{name}({', '.join(self.operand(f) for f in op.fields)})"
        if isinstance(op, TupleOp):
            return f"({', '.join(self.operand(e) for e in op.elems)})"
        raise TypeError(f"not an operand: {op!r}")

    def rvalue(self, rv: Rvalue) -> str:
        if isinstance(rv, Use):
            return self.operand(rv.operand)
        if isinstance(rv, BorrowOf):
            prefix = {RefKind.MUT: "&mut ", RefKind.SHARED: "&", RefKind.RESERVED: "&reserved "}
            return prefix[rv.kind] + self.place(rv.place)
        if isinstance(rv, Unop):
            return f"!{self.operand(rv.operand)}"
        if isinstance(rv, Binop):
            return f"{self.operand(rv.left)} {rv.op.symbol} {self.operand(rv.right)}"
        raise TypeError(f"not an rvalue: {rv!r}")

    # -- statements ----------------------------------------------------------
    def block(self, stmt: Statement, depth: int) -> List[str]:
        lines: List[str] = []
        for s in flatten(stmt):
            lines.extend(self.stmt(s, depth))
        return lines

    def _braced(self, head: str, body: Statement, depth: int) -> List[str]:
        pad = INDENT * depth
        inner = self.block(body, depth + 1)
        if not inner:
            return [f"{pad}{head}{{ }}"]
        return [f"{pad}{head}{{", *inner, f"{pad}}}"]

    def stmt(self, stmt: Statement, depth: int) -> List[str]:
        pad = INDENT * depth
        if isinstance(stmt, Seq):
            return self.block(stmt, depth)
        if isinstance(stmt, Nop):
            return []
        if isinstance(stmt, Assign):
            return [f"{pad}{self.place(stmt.place)} = {self.rvalue(stmt.rvalue)};"]
        if isinstance(stmt, Call):
            generics = [f"'{r}" for r in stmt.region_args] + [print_ty(t) for t in stmt.ty_args]
            fish = f"::<{', '.join(generics)}>" if generics else ""
            args = ", ".join(self.operand(a) for a in stmt.args)
            return [f"{pad}{self.place(stmt.dest)} = {stmt.fn}{fish}({args});"]
        if isinstance(stmt, IfThenElse):
            lines = self._braced(f"if {self.operand(stmt.cond)} ", stmt.then_branch, depth)
            else_lines = self._braced("else ", stmt.else_branch, depth)
            lines[-1] = lines[-1] + " " + else_lines[0].lstrip()
            return lines + else_lines[1:]
        if isinstance(stmt, Match):
            lines = [f"{pad}match {self.place(stmt.place)} {{"]
            for ctor, body in stmt.arms:
                arm = self._braced(f"{ctor} => ", body, depth + 1)
                arm[-1] += ","
                lines.extend(arm)
            lines.append(f"{pad}}}")
            return lines
        if isinstance(stmt, Return):
            return [f"{pad}return;"]
        if isinstance(stmt, Panic):
            return [f"{pad}panic;"]
        if isinstance(stmt, Free):
            return [f"{pad}free({self.place(stmt.place)});"]
        raise TypeError(f"not a statement: {stmt!r}")

    # -- declarations --------------------------------------------------------
    @staticmethod
    def _params(params) -> str:
        return ", ".join(f"{n}: {print_ty(t)}" for n, t in params)

    def fn(self, fn: FnDecl) -> str:
        generics = [f"'{r}" for r in fn.region_params] + list(fn.ty_params)
        gen = f"<{', '.join(generics)}>" if generics else ""
        ret_name, ret_ty = fn.ret
        head = f"fn {fn.name}{gen}({self._params(fn.args)}) -> ({ret_name}: {print_ty(ret_ty)})"
        if fn.body is None:
            return f"opaque {head};"
        lines = [head + " {"]
        if fn.locals:
            lines.append(f"{INDENT}locals {{ {self._params(fn.locals)} }}")
        lines.extend(self.block(fn.body, 1))
        lines.append("}")
        return "\n".join(lines)

    def type_decl(self, decl: TypeDecl) -> str:
        gen = f"<{', '.join(decl.ty_params)}>" if decl.ty_params else ""
        if decl.is_struct:
            fields = ", ".join(f"{n}: {print_ty(t)}" for n, t in decl.ctors[0].fields)
            return f"struct {decl.name}{gen} {{ {fields} }}"
        variants = []
        for ctor in decl.ctors:
            if ctor.fields:
                variants.append(f"{ctor.name}({', '.join(print_ty(t) for _, t in ctor.fields)})")
            else:
                variants.append(ctor.name)
        return f"enum {decl.name}{gen} {{ {', '.join(variants)} }}"

    def program(self, program: LlbcProgram) -> str:
        parts = [self.type_decl(d) for d in program.type_decls]
        parts += [self.fn(f) for f in program.fn_decls]
        return "\n\n".join(parts) + ("\n" if parts else "")


def pretty_llbc(program: LlbcProgram) -> str:
    return LlbcPrinter(program).program(program)


def print_place(place: Place, program: Optional[LlbcProgram] = None) -> str:
    return LlbcPrinter(program).place(place)
