"""Pure target language: AST, evaluator, printers and the `ml` reader."""

from .ast import FunDef, PureGroup, PureProgram, TypeDef
from .eval import (
    FAIL,
    OutOfFuel,
    PureEvaluator,
    PureFail,
    PureOutcome,
    PureReturn,
    apply_prim,
    eval_backward_direct,
    eval_pure,
    from_python,
)
from .printer import STYLES, print_pure
from .reader import read_pure, read_pure_file
from .scope import check_scoped

__all__ = [
    "FAIL",
    "FunDef",
    "OutOfFuel",
    "PureEvaluator",
    "PureFail",
    "PureGroup",
    "PureOutcome",
    "PureProgram",
    "PureReturn",
    "STYLES",
    "TypeDef",
    "apply_prim",
    "check_scoped",
    "eval_backward_direct",
    "eval_pure",
    "from_python",
    "print_pure",
    "read_pure",
    "read_pure_file",
]
