import pytest

from src.common.errors import ErrorCode, ValidationError
from src.llbc.core import parse_file, parse_program
from src.llbc.symbolic import IfNode, borrow_check, has_backward, merged_regions

from .support import ACCEPTED_FILES, INVALID, load


def _verdicts(program):
    return {r.name: r for r in borrow_check(program)}


@pytest.mark.parametrize("name", ACCEPTED_FILES)
def test_corpus_is_accepted(name):
    for result in borrow_check(load(name)):
        assert result.accepted, f"{result.name}: {result.error}"


def test_use_after_borrow_ends_is_rejected():
    (result,) = borrow_check(load("illegal_borrow.llbc"))
    assert not result.accepted
    assert result.error.code is ErrorCode.USE_OF_BOTTOM
    assert result.error.location.function == "test_illegal"
    assert result.env_dump


def test_move_out_of_a_borrow_is_rejected():
    (result,) = borrow_check(parse_file(INVALID / "move_through_deref.llbc"))
    assert result.error.code is ErrorCode.MOVE_THROUGH_DEREF


def test_returning_a_borrow_of_a_local_is_rejected():
    (result,) = borrow_check(parse_file(INVALID / "dangling.llbc"))
    assert not result.accepted


def test_malformed_program_is_not_checked():
    with pytest.raises(ValidationError) as info:
        borrow_check(parse_file(INVALID / "nested_borrow.llbc"))
    assert info.value.code is ErrorCode.NESTED_BORROW_SIG


def test_opaque_functions_are_reported_separately():
    verdicts = _verdicts(load("opaque.llbc"))
    assert verdicts["bump"].opaque
    assert verdicts["bump"].accepted
    assert verdicts["bump_twice"].accepted


def test_suffix_search_is_accepted():
    verdicts = _verdicts(load("suffix.llbc"))
    assert verdicts["get_suffix_at_x"].accepted
    assert verdicts["get_suffix_at_x"].tree.backward_regions == ("a",)


def test_bucket_insert_gives_back_through_forward():
    verdicts = _verdicts(load("hashmap.llbc"))
    assert verdicts["insert_in_list"].tree.backward_regions == ()
    assert verdicts["serialize"].opaque
    assert verdicts["insert_on_disk"].accepted


def test_backward_regions():
    assert _verdicts(load("choose.llbc"))["choose"].tree.backward_regions == ("a",)
    assert _verdicts(load("list_nth.llbc"))["list_nth_mut"].tree.backward_regions == ("a",)
    assert _verdicts(load("ref_incr.llbc"))["ref_incr"].tree.backward_regions == ()


def test_regions_without_returned_borrows_are_merged():
    program = load("swap.llbc")
    swap = program.fn_decl("swap")
    assert merged_regions(swap) == ("a", "b")
    choose = load("choose.llbc").fn_decl("choose")
    assert has_backward(choose, "a")
    assert merged_regions(choose) == ()


def test_symbolic_branching_builds_a_tree():
    tree = _verdicts(load("choose.llbc"))["choose"].tree
    assert len(tree.params) == 3
    assert isinstance(tree.body.terminal, IfNode)


def test_shared_results_of_mutable_inputs_are_accepted():
    verdicts = _verdicts(load("shared_return.llbc"))
    for name in ("peek", "split", "test_peek", "test_split"):
        assert verdicts[name].accepted, f"{name}: {verdicts[name].error}"
    assert verdicts["peek"].tree.backward_regions == ("a",)
    assert verdicts["split"].tree.backward_regions == ("a",)


def test_shared_only_regions_have_no_backward_function():
    program = parse_program("fn first<'a>(x: &'a i32) -> &'a i32 { ret = move x; return; }")
    first = program.fn_decl("first")
    assert not has_backward(first, "a")
    assert merged_regions(first) == ("a",)


def test_assigning_over_a_borrowed_value_is_rejected():
    (result,) = borrow_check(parse_file(INVALID / "assign_over_loan.llbc"))
    assert not result.accepted
    assert result.error.code is ErrorCode.ASSIGN_OVER_LOAN
    assert result.error.location.function == "test_self_reference"
