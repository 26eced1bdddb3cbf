import itertools

import pytest

from src.common.errors import ErrorCode, TranslationError
from src.llbc.core.types import I32, U32, AdtTy, ScalarKind
from src.llbc.pure import (
    FAIL,
    PureReturn,
    eval_backward_direct,
    eval_pure,
    from_python,
    print_pure,
    read_pure,
)
from src.llbc.pure.ast import FunDef, TypeDef
from src.llbc.store.values import ScalarValue, TupleValue
from src.llbc.synthesis.translate import backward_name, forward_name, translate_program

from .support import ACCEPTED_FILES, load


def i32(n):
    return ScalarValue(ScalarKind.I32, n)


@pytest.fixture(scope="module")
def list_nth():
    return translate_program(load("list_nth.llbc"))


def test_names():
    choose = load("choose.llbc").fn_decl("choose")
    assert forward_name("choose") == "choose_fwd"
    assert backward_name(choose, "a") == "choose_back"


def test_types_come_before_functions(list_nth):
    first, *rest = list_nth.groups
    assert [d.name for d in first.decls] == ["List"]
    assert isinstance(first.decls[0], TypeDef)
    assert first.recursive
    assert all(isinstance(d, FunDef) for g in rest for d in g.decls)


def test_declared_functions(list_nth):
    names = {f.name for f in list_nth.functions}
    assert names == {
        "list_nth_mut_fwd",
        "list_nth_mut_back",
        "sum_fwd",
        "test_nth_fwd",
        "test_nth_out_of_bounds_fwd",
    }


def test_forward_gives_back_merged_borrows():
    pure = translate_program(load("ref_incr.llbc"))
    fwd = pure.fun("ref_incr_fwd")
    assert fwd.ret_ty == I32
    assert eval_backward_direct(pure, "ref_incr_fwd", [41]) == PureReturn(i32(42))
    assert eval_backward_direct(pure, "ref_incr_fwd", [2**31 - 1]) == FAIL


def test_swap_returns_both_borrowed_values():
    pure = translate_program(load("swap.llbc"))
    assert eval_backward_direct(pure, "swap_fwd", [1, 2]) == PureReturn(TupleValue((i32(2), i32(1))))


@pytest.mark.parametrize("flag, expected", [(True, (9, 2)), (False, (1, 9))])
def test_choose_backward(flag, expected):
    pure = translate_program(load("choose.llbc"))
    fwd = eval_backward_direct(pure, "choose_fwd", [flag, 1, 2], ty_args=[I32])
    assert fwd == PureReturn(i32(1 if flag else 2))
    back = eval_backward_direct(pure, "choose_back", [flag, 1, 2, 9], ty_args=[I32])
    assert back == PureReturn(TupleValue(tuple(i32(n) for n in expected)))


def test_list_nth_forward_and_backward(list_nth):
    assert eval_backward_direct(list_nth, "list_nth_mut_fwd", [[1, 2, 3], 1], ty_args=[I32]) == PureReturn(i32(2))
    updated = eval_backward_direct(list_nth, "list_nth_mut_back", [[1, 2, 3], 1, 20], ty_args=[I32])
    assert updated == PureReturn(from_python([1, 20, 3], AdtTy("List", (I32,)), list_nth))


def test_list_nth_out_of_bounds_fails(list_nth):
    assert eval_backward_direct(list_nth, "list_nth_mut_fwd", [[1], 4], ty_args=[I32]) == FAIL
    assert eval_backward_direct(list_nth, "list_nth_mut_back", [[1], 4, 0], ty_args=[I32]) == FAIL


def test_sum_over_shared_borrow(list_nth):
    assert eval_backward_direct(list_nth, "sum_fwd", [[1, 2, 3]]) == PureReturn(i32(6))


def test_opaque_functions_become_interfaces():
    pure = translate_program(load("opaque.llbc"))
    bump = pure.fun("bump_fwd")
    assert bump.is_opaque
    assert pure.fun("bump_back") is None
    assert pure.type_def("Counter").is_struct


def test_struct_update_is_returned():
    pure = translate_program(load("opaque.llbc"))
    counter = pure.type_def("Counter")
    assert [c.name for c in counter.ctors] == ["Counter"]
    assert eval_pure(pure, "test_counter") == PureReturn(ScalarValue(ScalarKind.U32, 8))


@pytest.mark.parametrize("inline", [True, False])
def test_let_inlining_preserves_results(inline):
    pure = translate_program(load("list_nth.llbc"), inline_lets=inline)
    assert eval_pure(pure, "test_nth") == PureReturn(TupleValue(()))


@pytest.mark.parametrize("name", ACCEPTED_FILES)
def test_whole_corpus_translates(name):
    pure = translate_program(load(name))
    assert pure.functions


def test_rejected_function_stops_translation():
    with pytest.raises(TranslationError) as info:
        translate_program(load("illegal_borrow.llbc"))
    assert info.value.code is ErrorCode.USE_OF_BOTTOM


def test_u32_parameters():
    pure = translate_program(load("overflow.llbc"))
    assert pure.fun("decr_fwd").params == (("x", U32),)
    assert eval_pure(pure, "test_underflow") == FAIL


def test_shared_result_of_a_mutable_input():
    pure = translate_program(load("shared_return.llbc"))
    assert pure.fun("peek_back").params == (("x", I32),)
    assert eval_backward_direct(pure, "peek_fwd", [5]) == PureReturn(i32(5))
    assert eval_backward_direct(pure, "peek_back", [5]) == PureReturn(i32(5))


def test_split_gives_back_the_pair():
    pure = translate_program(load("shared_return.llbc"))
    pair = TupleValue((i32(1), i32(2)))
    assert eval_backward_direct(pure, "split_fwd", [(1, 2)]) == PureReturn(pair)
    assert eval_backward_direct(pure, "split_back", [(1, 2), 9]) == PureReturn(TupleValue((i32(9), i32(2))))
    assert eval_pure(pure, "test_split") == PureReturn(TupleValue(()))


@pytest.mark.parametrize("name", ACCEPTED_FILES)
def test_translation_is_deterministic(name):
    first = print_pure(translate_program(load(name)), "ml")
    second = print_pure(translate_program(load(name)), "ml")
    assert first == second
    assert read_pure(first) == read_pure(second)


SAMPLE = (-(2**31), -3, 0, 1, 7, 2**31 - 1)


def _choose_oracle(flag, x, y, v):
    ret = x if flag else y
    back = (v, y) if flag else (x, v)
    return ret, back


@pytest.mark.parametrize("flag", [True, False])
def test_choose_matches_its_oracle(flag):
    pure = translate_program(load("choose.llbc"))
    for x, y, v in itertools.product(SAMPLE, repeat=3):
        ret, back = _choose_oracle(flag, x, y, v)
        assert eval_backward_direct(pure, "choose_fwd", [flag, x, y], ty_args=[I32]) == PureReturn(i32(ret))
        outcome = eval_backward_direct(pure, "choose_back", [flag, x, y, v], ty_args=[I32])
        assert outcome == PureReturn(TupleValue(tuple(i32(n) for n in back)))


def _nth_oracle(items, i, v):
    if i >= len(items):
        return None, None
    updated = list(items)
    updated[i] = v
    return items[i], updated


@pytest.mark.parametrize("length", range(9))
def test_list_nth_matches_its_oracle(list_nth, length):
    items = [10 * k + 1 for k in range(length)]
    list_ty = AdtTy("List", (I32,))
    for i in range(length + 2):
        ret, updated = _nth_oracle(items, i, -5)
        fwd = eval_backward_direct(list_nth, "list_nth_mut_fwd", [items, i], ty_args=[I32])
        back = eval_backward_direct(list_nth, "list_nth_mut_back", [items, i, -5], ty_args=[I32])
        if ret is None:
            assert fwd == FAIL
            assert back == FAIL
        else:
            assert fwd == PureReturn(i32(ret))
            assert back == PureReturn(from_python(updated, list_ty, list_nth))
