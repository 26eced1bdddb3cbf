"""Synthesis of pure forward and backward functions from branch trees."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from src.common.config import config
from src.common.errors import ErrorCode, TranslationError
from src.common.logger import get_logger
from src.llbc.core.ordering import function_groups, type_groups
from src.llbc.core.types import (
    UNIT,
    BinopKind,
    FnDecl,
    LlbcProgram,
    ScalarKind,
    ScalarTy,
    TupleTy,
    Ty,
    TypeDecl,
    UnopKind,
)
from src.llbc.pure.ast import (
    UNIT_EXPR,
    Bind,
    CallExpr,
    CtorDef,
    CtorExpr,
    Expr,
    Fail,
    FunDef,
    IfExpr,
    Let,
    Lit,
    MatchArm,
    MatchExpr,
    Pattern,
    PCtor,
    PTuple,
    PureGroup,
    PureProgram,
    PVar,
    PWild,
    Prim,
    Ret,
    TupleExpr,
    TypeDef,
    Var,
    tuple_expr,
    tuple_pattern,
)
from src.llbc.pure.scope import check_scoped
from src.llbc.store.values import CtorValue, ScalarValue, SymbolicValue, TupleValue, Value
from src.llbc.symbolic.interpreter import check_function, prepare
from src.llbc.symbolic.regions import (
    borrow_slots,
    given_back_types,
    has_backward,
    merged_regions,
)
from src.llbc.symbolic.types import (
    AliasEvent,
    Block,
    CallEvent,
    EndAbsEvent,
    Event,
    ExpandEvent,
    FunctionTree,
    IfNode,
    LeafOutcome,
    MatchNode,
    PanicLeaf,
    PrimEvent,
    ReturnLeaf,
    TuplePat,
)

from .cleanup import cleanup
from .erase import erase_type
from .naming import Namer

logger = get_logger(__name__)

_COMPARISONS = {
    BinopKind.EQ: "eq",
    BinopKind.NE: "ne",
    BinopKind.LT: "lt",
    BinopKind.LE: "le",
    BinopKind.GT: "gt",
    BinopKind.GE: "ge",
}


# ---------------------------------------------------------------------------
# Names and signatures
# ---------------------------------------------------------------------------

def forward_name(fn: str) -> str:
    return f"{fn}_fwd"


def backward_name(fn: FnDecl, region: str) -> str:
    regions = [r for r in fn.region_params if has_backward(fn, r)]
    if len(regions) == 1:
        return f"{fn.name}_back"
    return f"{fn.name}_back_{region}"


def _tuple_ty(tys: Sequence[Ty]) -> Ty:
    return tys[0] if len(tys) == 1 else TupleTy(tuple(tys))


def forward_ret_ty(fn: FnDecl) -> Ty:
    """Erased result, followed by what merged regions give back."""
    arg_tys = [ty for _, ty in fn.args]
    tys = [] if fn.ret_ty == UNIT else [erase_type(fn.ret_ty)]
    for region in merged_regions(fn):
        tys.extend(erase_type(t) for t in given_back_types(arg_tys, region))
    return _tuple_ty(tys)


def backward_ret_ty(fn: FnDecl, region: str) -> Ty:
    return _tuple_ty([erase_type(t) for t in given_back_types([ty for _, ty in fn.args], region)])


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

def value_to_expr(v: Value, namer: Namer) -> Expr:
    """Translate an erased value; symbols become variables."""
    if isinstance(v, ScalarValue):
        return Lit(v.kind, v.value)
    if isinstance(v, SymbolicValue):
        if erase_type(v.ty) == UNIT:
            return UNIT_EXPR
        return Var(namer.name(v))
    if isinstance(v, CtorValue):
        return CtorExpr(v.adt, v.ctor, tuple(value_to_expr(f, namer) for f in v.fields))
    if isinstance(v, TupleValue):
        return TupleExpr(tuple(value_to_expr(e, namer) for e in v.elems))
    raise TranslationError(
        f"value {type(v).__name__} cannot appear in pure code",
        code=ErrorCode.UNTRANSLATABLE_VALUE,
    )


def _scalar_kind(v: Value) -> ScalarKind:
    ty = ScalarTy(v.kind) if isinstance(v, ScalarValue) else getattr(v, "ty", None)
    if not isinstance(ty, ScalarTy):
        raise TranslationError("primitive over a non-scalar value", code=ErrorCode.UNTRANSLATABLE_VALUE)
    return ty.kind


# ---------------------------------------------------------------------------
# Tree folding
# ---------------------------------------------------------------------------

class FunctionSynthesizer:
    """Folds one function's branch tree into its forward or a backward body."""

    def __init__(self, program: LlbcProgram, tree: FunctionTree, region: Optional[str] = None) -> None:
        self.program = program
        self.tree = tree
        self.region = region
        self.namer = Namer(tree.hints)

    def signature_params(self) -> Tuple[Tuple[str, Ty], ...]:
        fn = self.tree.fn
        params = [
            (self.namer.exact(sv), erase_type(ty)) for sv, (_, ty) in zip(self.tree.params, fn.args)
        ]
        if self.region is not None:
            params.extend(
                (self.namer.exact(sv), erase_type(sv.ty)) for sv in self.tree.back_params[self.region]
            )
        return tuple(params)

    def block(self, block: Block) -> Expr:
        return self.events(block.events, lambda: self.terminal(block.terminal))

    def events(self, events: Sequence[Event], tail) -> Expr:
        """Translate `events` left to right; names are fixed before the tail is built."""
        steps: List[Tuple[str, Pattern, Expr]] = []
        for event in events:
            step = self.event(event)
            if step is not None:
                steps.append(step)
        body = tail()
        for kind, pattern, rhs in reversed(steps):
            body = Let(pattern, rhs, body) if kind == "let" else Bind(pattern, rhs, body)
        return body

    def _var(self, sv: SymbolicValue) -> Pattern:
        if erase_type(sv.ty) == UNIT:
            return PWild()
        return PVar(self.namer.name(sv))

    def _expr(self, v: Value) -> Expr:
        return value_to_expr(v, self.namer)

    def event(self, event: Event) -> Optional[Tuple[str, Pattern, Expr]]:
        if isinstance(event, AliasEvent):
            self.namer.alias(event.target, event.source)
            return None
        if isinstance(event, ExpandEvent):
            scrutinee = self._expr(event.sym)
            pattern = event.pattern
            if isinstance(pattern, TuplePat):
                return "let", PTuple(tuple(self._var(s) for s in pattern.syms)), scrutinee
            return "let", PCtor(pattern.adt, pattern.ctor, tuple(self._var(s) for s in pattern.syms)), scrutinee
        if isinstance(event, PrimEvent):
            args = tuple(self._expr(a) for a in event.args)
            if event.op is UnopKind.NOT:
                return "let", self._var(event.dest), Prim("not", args)
            if event.op in _COMPARISONS:
                return "let", self._var(event.dest), Prim(_COMPARISONS[event.op], args)
            op = f"{_scalar_kind(event.args[0]).value}_{event.op.value}"
            return "bind", self._var(event.dest), Prim(op, args)
        if isinstance(event, CallEvent):
            callee = self.program.fn_decl(event.callee)
            args = tuple(self._expr(a) for a in event.args)
            outputs = [] if callee.ret_ty == UNIT else [event.dest]
            outputs.extend(event.given_back)
            pattern = tuple_pattern(tuple(self._var(s) for s in outputs)) if outputs else PWild()
            ty_args = tuple(erase_type(t) for t in event.ty_args)
            return "bind", pattern, CallExpr(forward_name(callee.name), ty_args, args)
        if isinstance(event, EndAbsEvent):
            callee = self.program.fn_decl(event.callee)
            args = tuple(self._expr(a) for a in event.args)
            if event.given is not None:
                args += (self._expr(event.given),)
            pattern = (
                tuple_pattern(tuple(self._var(s) for s in event.results)) if event.results else PWild()
            )
            ty_args = tuple(erase_type(t) for t in event.ty_args)
            return "bind", pattern, CallExpr(backward_name(callee, event.region), ty_args, args)
        raise TypeError(event)

    def terminal(self, terminal) -> Expr:
        if isinstance(terminal, PanicLeaf):
            return Fail()
        if isinstance(terminal, IfNode):
            return IfExpr(
                self._expr(terminal.cond),
                self.block(terminal.then_block),
                self.block(terminal.else_block),
            )
        if isinstance(terminal, MatchNode):
            scrutinee = self._expr(terminal.scrutinee)
            arms = tuple(
                MatchArm(
                    PCtor(terminal.adt, arm.ctor, tuple(self._var(f) for f in arm.fields)),
                    self.block(arm.body),
                )
                for arm in terminal.arms
            )
            return MatchExpr(scrutinee, arms)
        if isinstance(terminal, ReturnLeaf):
            outcome = terminal.forward if self.region is None else terminal.for_region(self.region)
            return self.leaf(outcome)
        raise TypeError(terminal)

    def leaf(self, outcome: LeafOutcome) -> Expr:
        return self.events(
            outcome.events,
            lambda: Ret(tuple_expr(tuple(self._expr(v) for v in outcome.values))),
        )


def synthesize_forward(program: LlbcProgram, tree: FunctionTree) -> FunDef:
    synth = FunctionSynthesizer(program, tree)
    params = synth.signature_params()
    body = synth.block(tree.body)
    fn = tree.fn
    return FunDef(forward_name(fn.name), fn.ty_params, params, forward_ret_ty(fn), body)


def synthesize_backward(program: LlbcProgram, tree: FunctionTree, region: str) -> FunDef:
    synth = FunctionSynthesizer(program, tree, region)
    params = synth.signature_params()
    body = synth.block(tree.body)
    fn = tree.fn
    return FunDef(backward_name(fn, region), fn.ty_params, params, backward_ret_ty(fn, region), body)


def _interface(fn: FnDecl) -> List[FunDef]:
    """Signature-only declarations for a function without a body."""
    params = tuple((name, erase_type(ty)) for name, ty in fn.args)
    decls = [FunDef(forward_name(fn.name), fn.ty_params, params, forward_ret_ty(fn))]
    for region in fn.region_params:
        if has_backward(fn, region):
            back = tuple(
                ("ret" if i == 0 else f"ret{i}", erase_type(bty))
                for i, bty in enumerate(_ret_slot_types(fn, region))
            )
            decls.append(
                FunDef(backward_name(fn, region), fn.ty_params, params + back, backward_ret_ty(fn, region))
            )
    return decls


def _ret_slot_types(fn: FnDecl, region: str) -> List[Ty]:
    return [bty.inner for _, bty in borrow_slots(fn.ret_ty, region)]


def translate_type(decl: TypeDecl) -> TypeDef:
    return TypeDef(
        decl.name,
        decl.ty_params,
        tuple(CtorDef(c.name, tuple(erase_type(t) for _, t in c.fields)) for c in decl.ctors),
        decl.is_struct,
    )


def translate_function(program: LlbcProgram, tree: FunctionTree, inline_lets: bool = True) -> List[FunDef]:
    fn = tree.fn
    decls = [synthesize_forward(program, tree)]
    decls.extend(synthesize_backward(program, tree, r) for r in tree.backward_regions)
    if inline_lets:
        decls = [cleanup(d, backward=i > 0) for i, d in enumerate(decls)]
    logger.debug("function_translated", function=fn.name, decls=[d.name for d in decls])
    return decls


def translate_program(
    program: LlbcProgram,
    inline_lets: Optional[bool] = None,
    checks: Optional[bool] = None,
) -> PureProgram:
    """Borrow-check then translate every declaration, in dependency order.

    Raises:
        ValidationError: the program is malformed.
        TranslationError: some function is rejected or cannot be translated.
    """
    inline = config.INLINE_LETS if inline_lets is None else inline_lets
    program = prepare(program)
    trees: Dict[str, FunctionTree] = {}
    for fn in program.fn_decls:
        if fn.is_opaque:
            continue
        result = check_function(program, fn, checks=checks)
        if result.error is not None:
            raise TranslationError(
                f"{fn.name} is rejected by the borrow checker: {result.error.message}",
                code=result.error.code,
                location=result.error.location,
                function=fn.name,
            )
        trees[fn.name] = result.tree

    groups: List[PureGroup] = []
    for group in type_groups(program):
        types = tuple(translate_type(program.type_decl(name)) for name in group.names)
        groups.append(PureGroup(types, group.recursive))
    for group in function_groups(program):
        decls: List[FunDef] = []
        for name in group.names:
            fn = program.fn_decl(name)
            if fn.is_opaque:
                decls.extend(_interface(fn))
            else:
                decls.extend(translate_function(program, trees[name], inline))
        groups.append(PureGroup(tuple(decls), group.recursive))
    pure = PureProgram(tuple(groups))
    check_scoped(pure)
    logger.debug("program_translated", groups=len(groups))
    return pure
