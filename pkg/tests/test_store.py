import pytest

from src.common.errors import ErrorCode, EvalError
from src.llbc.core.types import (
    I32,
    BorrowKind,
    BorrowTy,
    Deref,
    DerefKind,
    Place,
    ScalarKind,
    TupleField,
    TupleTy,
)
from src.llbc.store import Env, ghost_write, has_no_outer_loans
from src.llbc.store.env import Abstraction
from src.llbc.store.places import (
    Blocked,
    EndLoan,
    copy_value,
    read_place,
    read_place_for_match,
    write_place,
)
from src.llbc.store.values import (
    BOTTOM,
    IGNORED,
    BoxValue,
    MutBorrow,
    MutLoan,
    ProjLoans,
    ProjOut,
    ScalarValue,
    SharedBorrow,
    SharedLoan,
    SymbolicValue,
    TupleValue,
)
from src.llbc.symbolic.projectors import reduce_projectors, sym_project
from src.llbc.symbolic.types import AliasEvent

ONE = ScalarValue(ScalarKind.I32, 1)
TWO = ScalarValue(ScalarKind.I32, 2)
PAIR = TupleValue((ONE, TWO))
MUT_A = BorrowTy(BorrowKind.MUT, "a", I32)
SHARED_A = BorrowTy(BorrowKind.SHARED, "a", I32)


def deref(base, kind, *path):
    return Place(base, (Deref(kind),) + path)


def value_of(env, var):
    return env.binding(var).value


# Places ---------------------------------------------------------------------

def test_read_through_a_mutable_borrow():
    env = Env(next_loan=1).bind("x", MutLoan(0)).bind("px", MutBorrow(0, ONE))
    assert read_place(env, deref("px", DerefKind.MUT)) == ONE


def test_read_a_field_through_a_shared_borrow():
    # px1 = &p; read (*px1).0
    env = Env(next_loan=1).bind("p", SharedLoan(frozenset({0}), PAIR)).bind("px1", SharedBorrow(0))
    assert read_place(env, deref("px1", DerefKind.SHARED, TupleField(0))) == ONE
    assert read_place(env, deref("px1", DerefKind.SHARED, TupleField(1))) == TWO


def test_read_for_match_peels_the_shared_loan():
    env = Env(next_loan=1).bind("x", SharedLoan(frozenset({0}), ONE)).bind("p", SharedBorrow(0))
    assert read_place(env, Place("x")) == SharedLoan(frozenset({0}), ONE)
    assert read_place_for_match(env, Place("x")) == ONE


def test_reading_under_a_mutable_loan_blocks():
    env = Env(next_loan=1).bind("p", MutLoan(0)).bind("q", MutBorrow(0, PAIR))
    with pytest.raises(Blocked) as info:
        read_place(env, Place("p", (TupleField(0),)))
    assert info.value.goal == EndLoan(0)


def test_write_through_a_mutable_borrow():
    env = Env(next_loan=1).bind("x", MutLoan(0)).bind("px", MutBorrow(0, ONE))
    env = write_place(env, deref("px", DerefKind.MUT), TWO)
    assert value_of(env, "px") == MutBorrow(0, TWO)
    assert value_of(env, "x") == MutLoan(0)


def test_write_under_a_shared_loan_blocks():
    env = Env(next_loan=1).bind("p", SharedLoan(frozenset({0}), PAIR)).bind("q", SharedBorrow(0))
    with pytest.raises(Blocked) as info:
        write_place(env, Place("p", (TupleField(1),)), ONE)
    assert info.value.goal == EndLoan(0)


def test_write_through_a_shared_borrow_is_rejected():
    env = Env(next_loan=1).bind("x", SharedLoan(frozenset({0}), ONE)).bind("p", SharedBorrow(0))
    with pytest.raises(EvalError) as info:
        write_place(env, deref("p", DerefKind.SHARED), TWO)
    assert info.value.code is ErrorCode.WRITE_THROUGH_SHARED


def test_ghost_write_follows_shared_borrows():
    env = Env(next_loan=1).bind("x", SharedLoan(frozenset({0}), ONE)).bind("p", SharedBorrow(0))
    env = ghost_write(env, deref("p", DerefKind.SHARED), TWO)
    assert value_of(env, "x") == SharedLoan(frozenset({0}), TWO)


# Copies ---------------------------------------------------------------------

def test_copying_a_shared_borrow_mints_a_loan():
    env = Env(next_loan=1).bind("x", SharedLoan(frozenset({0}), ONE)).bind("p", SharedBorrow(0))
    copied, env = copy_value(env, TupleValue((ONE, SharedBorrow(0))))
    assert copied == TupleValue((ONE, SharedBorrow(1)))
    assert value_of(env, "x") == SharedLoan(frozenset({0, 1}), ONE)


def test_copy_reads_under_shared_loans():
    copied, _ = copy_value(Env(), SharedLoan(frozenset({0}), PAIR))
    assert copied == PAIR


def test_copy_blocks_on_a_mutable_loan():
    with pytest.raises(Blocked) as info:
        copy_value(Env(), TupleValue((MutLoan(4), ONE)))
    assert info.value.goal == EndLoan(4)


@pytest.mark.parametrize(
    "value, code",
    [
        (BOTTOM, ErrorCode.USE_OF_BOTTOM),
        (BoxValue(ONE), ErrorCode.COPY_NONCOPYABLE),
        (MutBorrow(0, ONE), ErrorCode.COPY_NONCOPYABLE),
    ],
)
def test_uncopyable_values(value, code):
    with pytest.raises(EvalError) as info:
        copy_value(Env(), value)
    assert info.value.code is code


@pytest.mark.parametrize(
    "value, expected",
    [
        (ONE, True),
        (TupleValue((MutLoan(0), ONE)), False),
        (BoxValue(SharedLoan(frozenset({0}), ONE)), False),
        (MutBorrow(0, TupleValue((MutLoan(1), ONE))), True),
        (TupleValue((SharedBorrow(0), MutBorrow(1, SharedLoan(frozenset({2}), ONE)))), True),
    ],
)
def test_outer_loans(value, expected):
    assert has_no_outer_loans(value) is expected


# Projectors -----------------------------------------------------------------

def test_output_projector_of_a_borrow_unfolds_with_its_loan():
    s, env = Env().fresh_sym(MUT_A)
    env = env.bind("p", ProjOut(s.sym, MUT_A))
    env = env.append(Abstraction(0, "a", (ProjLoans(s.sym, MUT_A, "a"),), IGNORED))
    env, events = reduce_projectors(env)
    inner = SymbolicValue(1, I32)
    assert value_of(env, "p") == MutBorrow(0, inner)
    assert env.entries[-1].inputs == (MutLoan(0),)
    assert events == [AliasEvent(inner, s)]


def test_projectors_of_plain_values_collapse():
    s, env = Env().fresh_sym(I32)
    env = env.bind("x", ProjOut(s.sym, I32))
    env = env.append(Abstraction(0, "a", (ProjLoans(s.sym, I32, "a"),), IGNORED))
    env, events = reduce_projectors(env)
    assert value_of(env, "x") == s
    assert env.entries[-1].inputs == (IGNORED,)
    assert events == []


def test_shared_loan_projector_keeps_the_value():
    s, env = Env().fresh_sym(SHARED_A)
    env = env.bind("r", ProjOut(s.sym, SHARED_A))
    env = env.append(Abstraction(0, "a", (ProjLoans(s.sym, SHARED_A, "b"),), ProjLoans(s.sym, SHARED_A, "a")))
    env, _ = reduce_projectors(env)
    assert value_of(env, "r") == SharedBorrow(0)
    abs_ = env.entries[-1]
    assert abs_.inputs == (IGNORED,)
    assert abs_.output == SharedLoan(frozenset({0}), SymbolicValue(1, I32))


def test_backward_view_of_a_returned_pair():
    ty = TupleTy((MUT_A, SHARED_A))
    returned = TupleValue((MutBorrow(0, ONE), SharedBorrow(1)))
    fresh = SymbolicValue(9, I32)
    assert sym_project(returned, ty, "a", iter([fresh])) == TupleValue((MutBorrow(0, fresh), SharedBorrow(1)))
    assert sym_project(returned, ty, "b", iter(())) == TupleValue((IGNORED, SharedBorrow(1)))
    assert sym_project(ONE, I32, "a", iter(())) == IGNORED
