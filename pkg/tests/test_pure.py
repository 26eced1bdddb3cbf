import pytest

from src.common.errors import ErrorCode, EvalError, ParseError, TranslationError
from src.llbc.core.types import BOOL, I32, U32, ScalarKind
from src.llbc.pure import (
    FAIL,
    FunDef,
    OutOfFuel,
    PureGroup,
    PureProgram,
    PureReturn,
    apply_prim,
    check_scoped,
    eval_pure,
    print_pure,
    read_pure,
)
from src.llbc.pure.ast import Bind, CallExpr, Let, Lit, Prim, PVar, PWild, Ret, Var
from src.llbc.store.values import ScalarValue
from src.llbc.synthesis.translate import translate_program

from .support import ACCEPTED_FILES, alpha_equivalent, load


def u32(n):
    return ScalarValue(ScalarKind.U32, n)


def i32(n):
    return ScalarValue(ScalarKind.I32, n)


def _program(*decls, recursive=False):
    return PureProgram((PureGroup(tuple(decls), recursive),))


# Primitives -----------------------------------------------------------------

def test_unsigned_underflow_fails():
    assert apply_prim("u32_sub", [u32(0), u32(1)]) == FAIL


def test_signed_overflow_fails():
    assert apply_prim("i32_add", [i32(2**31 - 1), i32(1)]) == FAIL


def test_division_by_zero_fails():
    assert apply_prim("i32_div", [i32(1), i32(0)]) == FAIL


def test_comparison_and_negation():
    assert apply_prim("lt", [i32(1), i32(2)]) == PureReturn(ScalarValue(ScalarKind.BOOL, True))
    assert apply_prim("not", [ScalarValue(ScalarKind.BOOL, True)]) == PureReturn(ScalarValue(ScalarKind.BOOL, False))


def test_unknown_primitive_is_ill_scoped():
    with pytest.raises(EvalError) as info:
        apply_prim("i32_pow", [i32(1), i32(2)])
    assert info.value.code is ErrorCode.ILL_SCOPED


# Evaluator ------------------------------------------------------------------

def test_bind_and_return():
    main = FunDef(
        "main", (), (), I32,
        Bind(PVar("x"), Prim("i32_add", (Lit(ScalarKind.I32, 1), Lit(ScalarKind.I32, 2))), Ret(Var("x"))),
    )
    assert eval_pure(_program(main), "main") == PureReturn(i32(3))


def test_entry_suffix_is_optional():
    main = FunDef("main_fwd", (), (), BOOL, Ret(Lit(ScalarKind.BOOL, True)))
    assert eval_pure(_program(main), "main") == PureReturn(ScalarValue(ScalarKind.BOOL, True))


def test_fuel_bounds_recursion():
    spin = FunDef("spin", (), (), U32, CallExpr("spin", (), ()))
    with pytest.raises(OutOfFuel):
        eval_pure(_program(spin, recursive=True), "spin", fuel=50)


def test_unbound_variable_is_ill_scoped():
    main = FunDef("main", (), (), I32, Ret(Var("nowhere")))
    with pytest.raises(EvalError) as info:
        eval_pure(_program(main), "main")
    assert info.value.code is ErrorCode.ILL_SCOPED


def test_missing_entry():
    with pytest.raises(EvalError) as info:
        eval_pure(PureProgram(), "main")
    assert info.value.code is ErrorCode.NO_ENTRY


# Printers -------------------------------------------------------------------

def test_empty_program_skeleton():
    assert print_pure(PureProgram(), module="X") == "module X\nopen Primitives\n"


def test_unknown_style():
    with pytest.raises(ValueError):
        print_pure(PureProgram(), style="coq")


def test_fstar_forward_function():
    text = print_pure(translate_program(load("ref_incr.llbc")), module="RefIncr")
    assert text.startswith("module RefIncr\nopen Primitives\n")
    assert "let ref_incr_fwd (x : i32) : result i32 =" in text
    assert "i32_add x 1" in text
    assert "massert" in text


def test_fstar_recursive_types_and_functions():
    text = print_pure(translate_program(load("list_nth.llbc")))
    assert "type list_t (t : Type) =" in text
    assert "| ListCons : t -> (list_t t) -> list_t t" in text
    assert "| ListNil : list_t t" in text
    assert "let rec list_nth_mut_fwd (t : Type) (l : list_t t) (i : u32) : result t =" in text
    assert "and list_nth_mut_back" in text
    assert "begin match" in text


def test_fstar_struct_constructor_and_interface():
    text = print_pure(translate_program(load("opaque.llbc")))
    assert "| Mkcounter_t : u32 -> u32 -> counter_t" in text
    assert "val bump_fwd : counter_t -> result (u32 & counter_t)" in text


@pytest.mark.parametrize("name", ACCEPTED_FILES)
def test_ml_output_reads_back(name):
    pure = translate_program(load(name))
    assert read_pure(print_pure(pure, style="ml")) == pure


def test_ml_reader_rejects_garbage():
    with pytest.raises(ParseError) as info:
        read_pure("fun f() : i32 = let in")
    assert info.value.line == 1


def test_ml_reader_builds_primitives():
    program = read_pure("fun f(x: u32) : u32 = u32_add(x, 1u32)")
    (fun,) = program.functions
    assert fun.body == Prim("u32_add", (Var("x"), Lit(ScalarKind.U32, 1)))
    assert fun.params == (("x", U32),)


def test_fstar_persistence_interfaces():
    text = print_pure(translate_program(load("hashmap.llbc")))
    assert "val deserialize_fwd : result assoc_list_t" in text
    assert "val serialize_fwd : assoc_list_t -> result unit" in text
    assert "let rec insert_in_list_fwd" in text


CHOOSE_BACK = """
fun choose_back<T>(b: bool, x: T, y: T, ret: T) : (T, T) =
  if b then {
    return (ret, y)
  } else {
    return (x, ret)
  }
"""

LIST_NTH_MUT_BACK = """
fun list_nth_mut_back<T>(l: List<T>, i: u32, ret: T) : List<T> =
  match l {
  | List::Cons(x, tl) ->
    if eq(i, 0u32) then {
      return List::Cons(ret, tl)
    } else {
      let* i0 = u32_sub(i, 1u32) in
      let* tl0 = list_nth_mut_back<T>(tl, i0, ret) in
      return List::Cons(x, tl0)
    }
  | List::Nil ->
    fail
  }
"""


@pytest.mark.parametrize(
    "name, expected",
    [("choose.llbc", CHOOSE_BACK), ("list_nth.llbc", LIST_NTH_MUT_BACK)],
)
def test_backward_bodies_match_reference(name, expected):
    (reference,) = read_pure(expected).functions
    generated = translate_program(load(name)).fun(reference.name)
    assert alpha_equivalent(generated, reference), print_pure(
        PureProgram((PureGroup((generated,), False),)), style="ml"
    )


def test_renamed_binders_are_still_equivalent():
    (reference,) = read_pure(CHOOSE_BACK).functions
    (renamed,) = read_pure(CHOOSE_BACK.replace("x", "a").replace("y", "c")).functions
    (swapped,) = read_pure(CHOOSE_BACK.replace("(ret, y)", "(y, ret)")).functions
    assert alpha_equivalent(renamed, reference)
    assert not alpha_equivalent(swapped, reference)


# Scoping --------------------------------------------------------------------

@pytest.mark.parametrize("name", ACCEPTED_FILES)
def test_corpus_translations_are_well_scoped(name):
    check_scoped(translate_program(load(name)))


def _fun(body, params=(("x", I32),)):
    return FunDef("f_fwd", (), params, I32, body)


@pytest.mark.parametrize(
    "body",
    [
        Ret(Var("y")),
        Bind(PVar("y"), Prim("i32_add", (Var("y"), Lit(ScalarKind.I32, 1))), Ret(Var("y"))),
        Bind(PVar("y"), CallExpr("g_fwd", (), (Var("x"),)), Ret(Var("y"))),
        Ret(Prim("i32_pow", (Var("x"), Var("x")))),
        Ret(Prim("i32_add", (Var("x"),))),
        Ret(CallExpr("f_fwd", (), ())),
    ],
)
def test_ill_scoped_bodies_are_rejected(body):
    with pytest.raises(TranslationError) as info:
        check_scoped(_program(_fun(body)))
    assert info.value.code is ErrorCode.ILL_SCOPED


def test_binders_scope_over_their_body_only():
    inner = Let(PVar("y"), Var("x"), Ret(Var("y")))
    escaped = Bind(PWild(), CallExpr("f_fwd", (), (Var("x"),)), Ret(Var("y")))
    check_scoped(_program(_fun(inner)))
    with pytest.raises(TranslationError):
        check_scoped(_program(_fun(Let(PVar("z"), inner, escaped))))


def test_unknown_constructors_are_rejected():
    program = read_pure(
        """
        type Opt = | None | Some(i32)
        fun f(x: i32) : Opt = return Opt::Some(x, x)
        """
    )
    with pytest.raises(TranslationError) as info:
        check_scoped(program)
    assert "takes 1 fields" in str(info.value)
