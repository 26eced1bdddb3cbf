import pytest

from src.common.errors import BorrowCheckError, ErrorCode, EvalError
from src.llbc.concrete import Outcome, apply_binop, run_program
from src.llbc.core import parse_file, parse_program
from src.llbc.core.types import BinopKind, ScalarKind
from src.llbc.store.values import CtorValue, ScalarValue, TupleValue

from .support import INVALID, load

UNIT_VALUE = TupleValue(())


@pytest.mark.parametrize(
    "name, entry",
    [
        ("ref_incr.llbc", "test_incr"),
        ("choose.llbc", "test_choose"),
        ("list_nth.llbc", "test_nth"),
        ("swap.llbc", "test_swap"),
        ("option.llbc", "test_option"),
        ("shared.llbc", "test_shared"),
        ("reborrow.llbc", "test_reborrow"),
        ("two_phase.llbc", "test_two_phase"),
        ("precise_reborrow.llbc", "test_shared_reborrow"),
        ("precise_reborrow.llbc", "test_mut_reborrow"),
        ("shared_return.llbc", "test_peek"),
        ("shared_return.llbc", "test_split"),
    ],
)
def test_assertions_hold(name, entry):
    result = run_program(load(name), entry)
    assert result.outcome is Outcome.RETURNED
    assert result.value == UNIT_VALUE


def test_box_roundtrip():
    result = run_program(load("box.llbc"), "test_box")
    assert result.value == ScalarValue(ScalarKind.I32, 10)


def test_struct_fields():
    result = run_program(load("opaque.llbc"), "test_counter")
    assert result.value == ScalarValue(ScalarKind.U32, 8)


@pytest.mark.parametrize(
    "name, entry, expected",
    [
        ("call_choose.llbc", "test_call_choose", 1),
        ("suffix.llbc", "test_suffix", 1),
        ("hashmap.llbc", "test_insert", 20),
    ],
)
def test_u32_results(name, entry, expected):
    result = run_program(load(name), entry)
    assert result.value == ScalarValue(ScalarKind.U32, expected)


def test_disjoint_field_borrows():
    result = run_program(load("disjoint.llbc"), "test_disjoint")
    assert result.value == TupleValue((ScalarValue(ScalarKind.I32, 1), ScalarValue(ScalarKind.I32, 2)))


@pytest.mark.parametrize("entry", ["test_underflow", "test_divide"])
def test_arithmetic_failures_panic(entry):
    result = run_program(load("overflow.llbc"), entry)
    assert result.panicked
    assert result.value is None


def test_in_range_arithmetic():
    result = run_program(load("overflow.llbc"), "test_in_range")
    assert result.value == ScalarValue(ScalarKind.U32, 0)


def test_out_of_bounds_panics():
    assert run_program(load("list_nth.llbc"), "test_nth_out_of_bounds").panicked


def test_write_through_ended_borrow():
    with pytest.raises(EvalError) as info:
        run_program(load("illegal_borrow.llbc"), "test_illegal")
    assert info.value.code is ErrorCode.USE_OF_BOTTOM
    assert info.value.diagnostic.location.function == "test_illegal"


def test_opaque_callee_cannot_run():
    text = """
    opaque fn g() -> i32;
    fn main() -> i32 { ret = g(); return; }
    """
    with pytest.raises(EvalError) as info:
        run_program(parse_program(text), "main")
    assert info.value.code is ErrorCode.OPAQUE_CALL_IN_CONCRETE_MODE


@pytest.mark.parametrize("entry", ["missing", "ref_incr"])
def test_entry_must_be_a_closed_function(entry):
    with pytest.raises(EvalError) as info:
        run_program(load("ref_incr.llbc"), entry)
    assert info.value.code is ErrorCode.NO_ENTRY


def test_call_depth_limit():
    text = """
    fn spin(n: u32) -> u32 { ret = spin(copy n); return; }
    fn main() -> u32 { ret = spin(0u32); return; }
    """
    with pytest.raises(EvalError) as info:
        run_program(parse_program(text), "main", max_call_depth=20)
    assert info.value.code is ErrorCode.CALL_DEPTH_EXCEEDED


def test_moving_a_bottom_value():
    text = """
    fn main() -> i32 {
        locals { x: i32, y: i32 }
        x = 1;
        y = move x;
        ret = move x;
        return;
    }
    """
    with pytest.raises(EvalError) as info:
        run_program(parse_program(text), "main")
    assert info.value.code is ErrorCode.USE_OF_BOTTOM


def test_constructor_result():
    text = """
    enum Option<T> { None, Some(T) }
    fn main() -> Option<i32> {
        ret = Option::Some(3);
        return;
    }
    """
    result = run_program(parse_program(text), "main")
    assert result.value == CtorValue("Option", "Some", (ScalarValue(ScalarKind.I32, 3),))


def test_trace_records_every_step():
    result = run_program(load("ref_incr.llbc"), "test_incr", trace=True)
    statements = [step.statement for step in result.trace]
    assert statements[0] == "y = 0;"
    assert any(step.function == "ref_incr" for step in result.trace)
    assert "y -> 0" in result.trace[0].env


@pytest.mark.parametrize(
    "op, a, b, expected",
    [
        (BinopKind.DIV, -7, 2, -3),
        (BinopKind.REM, -7, 2, -1),
        (BinopKind.LT, 1, 2, True),
    ],
)
def test_binop_semantics(op, a, b, expected):
    out = apply_binop(op, ScalarValue(ScalarKind.I32, a), ScalarValue(ScalarKind.I32, b))
    assert out.value == expected


def test_assignment_cannot_swallow_its_own_lender():
    with pytest.raises(BorrowCheckError) as info:
        run_program(parse_file(INVALID / "assign_over_loan.llbc"), "test_self_reference")
    assert info.value.code is ErrorCode.ASSIGN_OVER_LOAN


def test_assignment_ends_outside_borrows_first():
    text = """
    fn main() -> i32 {
        locals { x: i32, px: &'l i32, y: i32 }
        x = 1;
        px = &x;
        y = copy *px;
        x = 2;
        ret = copy x + copy y;
        return;
    }
    """
    result = run_program(parse_program(text), "main")
    assert result.value == ScalarValue(ScalarKind.I32, 3)
