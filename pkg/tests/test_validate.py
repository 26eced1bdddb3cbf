import pytest

from src.common.errors import ErrorCode
from src.llbc.core import parse_file, parse_program, validate

from .support import ACCEPTED_FILES, INVALID, load


def codes(text: str):
    return [d.code for d in validate(parse_program(text))]


@pytest.mark.parametrize("name", ACCEPTED_FILES + ["illegal_borrow.llbc"])
def test_corpus_is_well_formed(name):
    assert validate(load(name)) == []


def test_nested_borrow_in_signature():
    diags = validate(parse_file(INVALID / "nested_borrow.llbc"))
    assert [d.code for d in diags] == [ErrorCode.NESTED_BORROW_SIG]
    assert diags[0].location.function == "f"


def test_unguarded_recursion():
    diags = validate(parse_file(INVALID / "unguarded.llbc"))
    assert [d.code for d in diags] == [ErrorCode.UNGUARDED_RECURSION]


def test_unknown_region_in_signature():
    assert codes("fn f(x: &'a mut i32) { ret = (); return; }") == [ErrorCode.UNKNOWN_REGION]


def test_unknown_variable():
    assert codes("fn f() { ret = copy y; return; }") == [ErrorCode.UNKNOWN_NAME]


def test_incomplete_match():
    text = """
    enum E { A, B }
    fn f(e: E) {
        match e { E::A => { ret = (); return; } }
    }
    """
    assert codes(text) == [ErrorCode.INCOMPLETE_MATCH]


def test_borrow_in_adt_field():
    text = "struct S<'a> { f: &'a i32 }"
    assert ErrorCode.BORROW_IN_ADT in codes(text)


def test_type_mismatch_in_assignment():
    assert codes("fn f() { locals { b: bool } b = 1; ret = (); return; }") == [ErrorCode.TYPE_MISMATCH]


def test_integer_out_of_range():
    assert codes("fn f() { locals { x: u32 } x = -1; ret = (); return; }") == [ErrorCode.INT_OUT_OF_RANGE]


def test_call_arity():
    text = """
    fn g(x: i32) { ret = (); return; }
    fn f() { ret = g(); return; }
    """
    assert codes(text) == [ErrorCode.ARITY_MISMATCH]


def test_duplicate_function():
    text = "fn f() { ret = (); return; }\nfn f() { ret = (); return; }"
    assert codes(text) == [ErrorCode.DUPLICATE_NAME]


def test_free_requires_a_box():
    assert codes("fn f() { locals { x: i32 } x = 1; free(x); ret = (); return; }") == [ErrorCode.FREE_NON_BOX]


def test_diagnostics_keep_statement_order():
    text = """
    fn f() {
        locals { b: bool }
        b = 1;
        ret = copy nope;
        return;
    }
    """
    assert codes(text) == [ErrorCode.TYPE_MISMATCH, ErrorCode.UNKNOWN_NAME]
