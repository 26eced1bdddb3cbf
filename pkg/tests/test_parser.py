import pytest

from src.common.errors import ErrorCode, ParseError
from src.llbc.core import (
    parse_file,
    parse_program,
    pretty_llbc,
    program_from_json,
    program_to_json,
)
from src.llbc.core.types import (
    BOX_NEW,
    U32,
    UNIT,
    AdtTy,
    Assign,
    BorrowKind,
    BorrowOf,
    BorrowTy,
    BoxTy,
    Call,
    Const,
    Deref,
    DerefKind,
    Field,
    IfThenElse,
    Match,
    Panic,
    RefKind,
    ScalarKind,
    TupleField,
    TyVar,
    flatten,
)

from .support import ACCEPTED_FILES, load


def _stmts(program, fn):
    return flatten(program.fn_decl(fn).body)


def test_signature_and_generics():
    program = load("list_nth.llbc")
    fn = program.fn_decl("list_nth_mut")
    assert fn.region_params == ("a",)
    assert fn.ty_params == ("T",)
    (l_name, l_ty), (i_name, i_ty) = fn.args
    assert l_name == "l"
    assert l_ty == BorrowTy(BorrowKind.MUT, "a", AdtTy("List", (TyVar("T"),)))
    assert i_ty == U32
    assert fn.ret == ("ret", BorrowTy(BorrowKind.MUT, "a", TyVar("T")))


def test_enum_fields_are_positional():
    decl = load("list_nth.llbc").type_decl("List")
    cons = decl.ctor("Cons")
    assert [n for n, _ in cons.fields] == ["0", "1"]
    assert cons.fields[1][1] == BoxTy(AdtTy("List", (TyVar("T"),)))
    assert decl.ctor("Nil").fields == ()


def test_ctor_qualified_place():
    program = load("list_nth.llbc")
    match = _stmts(program, "list_nth_mut")[0]
    assert isinstance(match, Match)
    cons_arm = dict(match.arms)["Cons"]
    branch = flatten(cons_arm)[-1]
    assert isinstance(branch, IfThenElse)
    borrow = flatten(branch.then_branch)[0]
    assert isinstance(borrow.rvalue, BorrowOf)
    assert borrow.rvalue.kind is RefKind.MUT
    assert borrow.rvalue.place.path == (Deref(DerefKind.MUT), Field("Cons", "0", 0))
    reborrow = flatten(branch.else_branch)[1]
    assert reborrow.rvalue.place.path == (
        Deref(DerefKind.MUT),
        Field("Cons", "1", 1),
        Deref(DerefKind.BOX),
    )


def test_literal_width_follows_context():
    program = load("overflow.llbc")
    (assign,) = [s for s in _stmts(program, "decr") if isinstance(s, Assign)]
    assert assign.rvalue.right == Const(ScalarKind.U32, 1)
    call = _stmts(program, "test_underflow")[0]
    assert isinstance(call, Call)
    assert call.args == (Const(ScalarKind.U32, 0),)


def test_box_new_and_struct_ctor():
    box = _stmts(load("box.llbc"), "test_box")[0]
    assert isinstance(box, Call) and box.fn == BOX_NEW
    program = load("opaque.llbc")
    assert program.type_decl("Counter").is_struct
    assert program.fn_decl("bump").is_opaque
    build = _stmts(program, "test_counter")[0]
    assert isinstance(build, Assign)
    assert build.rvalue.operand.adt == "Counter"


def test_tuple_field_place():
    program = load("disjoint.llbc")
    borrow = _stmts(program, "test_disjoint")[1]
    assert borrow.rvalue.place.path == (TupleField(0),)


def test_assert_desugars_to_panic_branch():
    program = load("ref_incr.llbc")
    check = [s for s in _stmts(program, "test_incr") if isinstance(s, IfThenElse)][0]
    assert isinstance(check.else_branch, Panic)


def test_default_return_is_unit():
    program = parse_program("fn f() { ret = (); return; }")
    assert program.fn_decl("f").ret == ("ret", UNIT)


def test_named_return_variable():
    program = parse_program("fn f() -> (r: i32) { r = 1; return; }")
    assert program.fn_decl("f").ret_var == "r"


@pytest.mark.parametrize(
    "text, code",
    [
        ("fn f() { loop { nop; } }", ErrorCode.LOOP_UNSUPPORTED),
        ("fn f(x: (i32,)) { return; }", ErrorCode.UNARY_TUPLE),
        ("fn f() { ret = () return; }", ErrorCode.PARSE_ERROR),
    ],
)
def test_syntax_errors(text, code):
    with pytest.raises(ParseError) as info:
        parse_program(text)
    assert info.value.code is code


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        parse_program("fn f() {\n  ret = () return;\n}")
    assert info.value.line == 2
    assert info.value.expected


@pytest.mark.parametrize("name", ACCEPTED_FILES)
def test_pretty_print_reparses(name):
    program = load(name)
    assert parse_program(pretty_llbc(program)) == program


def test_json_input_files(tmp_path):
    program = load("list_nth.llbc")
    target = tmp_path / "list_nth.llbc.json"
    target.write_text(program_to_json(program), encoding="utf-8")
    assert parse_file(target) == program


@pytest.mark.parametrize("name", ACCEPTED_FILES + ["illegal_borrow.llbc"])
def test_json_codec_keeps_every_corpus_program(name):
    program = load(name)
    assert program_from_json(program_to_json(program)) == program


def test_json_tags_do_not_clash_with_kind_fields():
    program = parse_program("fn f<'a>(x: &'a mut u32) -> u32 { ret = copy *x; return; }")
    decoded = program_from_json(program_to_json(program))
    assert decoded.fn_decl("f").args == program.fn_decl("f").args
    assert decoded == program
