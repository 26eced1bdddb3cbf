import pytest

from src.common.errors import LlbcError
from src.llbc.concrete import run_program
from src.llbc.core import is_terminal, parse_program, terminalize, terminalize_program
from src.llbc.core.types import IfThenElse, Match, Return, ScalarKind, flatten
from src.llbc.store.values import ScalarValue, TupleValue

from .support import ACCEPTED_FILES, load

BRANCH_THEN_CONTINUE = """
fn f(b: bool) -> i32 {
    locals { x: i32 }
    if copy b {
        x = 1;
    } else {
        x = 2;
    }
    ret = copy x;
    return;
    x = 3;
}
"""


def test_continuation_is_pushed_into_branches():
    body = parse_program(BRANCH_THEN_CONTINUE).fn_decl("f").body
    assert not is_terminal(body)
    out = terminalize(body)
    (branch,) = flatten(out)
    assert isinstance(branch, IfThenElse)
    for arm in (branch.then_branch, branch.else_branch):
        stmts = flatten(arm)
        assert len(stmts) == 3
        assert isinstance(stmts[-1], Return)
    assert is_terminal(out)


def test_unreachable_tail_is_dropped():
    body = parse_program("fn f() { ret = (); return; ret = (); }").fn_decl("f").body
    assert len(flatten(terminalize(body))) == 2


def test_match_arms_receive_the_continuation():
    text = """
    enum E { A, B }
    fn f(e: E) {
        locals { n: i32 }
        match e { E::A => { n = 1; }, E::B => { n = 2; } }
        ret = ();
        return;
    }
    """
    out = terminalize(parse_program(text).fn_decl("f").body)
    (match,) = flatten(out)
    assert isinstance(match, Match)
    assert all(isinstance(flatten(body)[-1], Return) for _, body in match.arms)


@pytest.mark.parametrize("name", ACCEPTED_FILES)
def test_idempotent_on_corpus(name):
    program = terminalize_program(load(name))
    for fn in program.fn_decls:
        if fn.body is None:
            continue
        assert is_terminal(fn.body)
        assert terminalize(fn.body) == fn.body


def _closed_runs(program):
    runs = {}
    for fn in program.fn_decls:
        if fn.body is None or fn.args:
            continue
        try:
            result = run_program(program, fn.name)
            runs[fn.name] = (result.outcome, result.value)
        except LlbcError as exc:
            runs[fn.name] = exc.code
    return runs


@pytest.mark.parametrize("name", ACCEPTED_FILES)
def test_results_survive_terminalization(name):
    program = load(name)
    assert _closed_runs(terminalize_program(program)) == _closed_runs(program)


def test_continuation_runs_in_either_branch():
    text = BRANCH_THEN_CONTINUE + """
    fn main() -> (i32, i32) {
        locals { a: i32, b: i32 }
        a = f(true);
        b = f(false);
        ret = (move a, move b);
        return;
    }
    """
    program = parse_program(text)
    expected = TupleValue((ScalarValue(ScalarKind.I32, 1), ScalarValue(ScalarKind.I32, 2)))
    assert run_program(program, "main").value == expected
    assert run_program(terminalize_program(program), "main").value == expected
