import json

from src.llbc.main import EXIT_ERROR, EXIT_OK, EXIT_PANIC, main, module_name
from src.llbc.pure import read_pure_file

from .support import CORPUS, INVALID


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_module_name():
    assert module_name(CORPUS / "list_nth.llbc") == "ListNth"


def test_check_accepts(capsys):
    assert main(["check", "--json", str(CORPUS / "choose.llbc")]) == EXIT_OK
    (report,) = _json(capsys)
    assert report["ok"]
    statuses = {f["name"]: f["status"] for f in report["functions"]}
    assert statuses == {"choose": "accepted", "test_choose": "accepted"}


def test_check_reports_rejection(capsys):
    code = main(["check", "--json", str(CORPUS / "illegal_borrow.llbc"), str(CORPUS / "ref_incr.llbc")])
    assert code == EXIT_ERROR
    bad, good = _json(capsys)
    assert not bad["ok"]
    assert bad["functions"][0]["error"]["code"] == "USE_OF_BOTTOM"
    assert good["ok"]


def test_check_reports_validation_errors(capsys):
    assert main(["check", "--json", str(INVALID / "nested_borrow.llbc")]) == EXIT_ERROR
    (report,) = _json(capsys)
    assert [d["code"] for d in report["diagnostics"]] == ["NESTED_BORROW_SIG"]


def test_check_table_output(capsys):
    assert main(["check", str(CORPUS / "opaque.llbc")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "counter_hit" in out
    assert "opaque" in out


def test_run_returns_value(capsys):
    assert main(["run", "--json", str(CORPUS / "box.llbc"), "--entry", "test_box"]) == EXIT_OK
    report = _json(capsys)
    assert report["outcome"] == "returned"
    assert report["value"] == "10"


def test_run_panic_exit_code(capsys):
    assert main(["run", str(CORPUS / "overflow.llbc"), "--entry", "test_underflow"]) == EXIT_PANIC
    assert "Panic" in capsys.readouterr().out


def test_run_error_exit_code(capsys):
    code = main(["run", "--json", str(CORPUS / "illegal_borrow.llbc"), "--entry", "test_illegal"])
    assert code == EXIT_ERROR
    report = _json(capsys)
    assert report["outcome"] == "error"
    assert report["error"]["code"] == "USE_OF_BOTTOM"


def test_run_trace(capsys):
    assert main(["run", "--json", "--trace", str(CORPUS / "ref_incr.llbc"), "--entry", "test_incr"]) == EXIT_OK
    report = _json(capsys)
    assert report["trace"][0].startswith("test_incr: y = 0;")


def test_translate_writes_file(tmp_path, capsys):
    code = main(["translate", "--json", str(CORPUS / "list_nth.llbc"), "-o", str(tmp_path), "--style", "ml"])
    assert code == EXIT_OK
    summary = _json(capsys)
    assert summary == {
        "file": str(CORPUS / "list_nth.llbc"),
        "style": "ml",
        "output": str(tmp_path / "list_nth.pure.ml.txt"),
        "types": 1,
        "forward": 4,
        "backward": 1,
        "opaque": 0,
        "error": None,
    }
    program = read_pure_file(tmp_path / "list_nth.pure.ml.txt")
    assert program.fun("list_nth_mut_back") is not None


def test_translate_fstar_file_name(tmp_path, capsys):
    assert main(["translate", str(CORPUS / "ref_incr.llbc"), "-o", str(tmp_path), "--style", "fstar"]) == EXIT_OK
    text = (tmp_path / "ref_incr.pure.fst.txt").read_text(encoding="utf-8")
    assert text.startswith("module RefIncr\n")


def test_translate_rejected_program(capsys):
    assert main(["translate", "--json", str(CORPUS / "illegal_borrow.llbc")]) == EXIT_ERROR
    assert _json(capsys)["error"]["code"] == "USE_OF_BOTTOM"


def test_difftest_all_entries(capsys):
    assert main(["difftest", "--json", str(CORPUS / "overflow.llbc")]) == EXIT_OK
    verdicts = {r["entry"]: r["verdict"] for r in _json(capsys)}
    assert verdicts == {"test_underflow": "EQUAL", "test_divide": "EQUAL", "test_in_range": "EQUAL"}


def test_difftest_inconclusive(capsys):
    code = main(["difftest", "--json", str(CORPUS / "list_nth.llbc"), "--entry", "test_nth", "--fuel", "2"])
    assert code == 3
    assert _json(capsys)[0]["verdict"] == "INCONCLUSIVE"


def test_difftest_unknown_entry(capsys):
    code = main(["difftest", "--json", str(CORPUS / "ref_incr.llbc"), "--entry", "nope"])
    assert code == EXIT_ERROR
    (report,) = _json(capsys)
    assert report["verdict"] == "ERROR"
    assert report["error"]["code"] == "NO_ENTRY"


def test_check_accepts_suffix_search():
    assert main(["check", str(CORPUS / "suffix.llbc")]) == EXIT_OK


def test_check_dumps_env_only_on_request(capsys):
    target = str(CORPUS / "illegal_borrow.llbc")
    assert main(["check", "--json", target]) == EXIT_ERROR
    (plain,) = _json(capsys)
    assert plain["functions"][0]["env_dump"] is None
    assert main(["check", "--json", "--dump-env", target]) == EXIT_ERROR
    (dumped,) = _json(capsys)
    assert "px -> " in dumped["functions"][0]["env_dump"]


def test_run_dumps_env_where_it_got_stuck(capsys):
    args = ["run", "--json", "--dump-env", str(CORPUS / "illegal_borrow.llbc"), "--entry", "test_illegal"]
    assert main(args) == EXIT_ERROR
    report = _json(capsys)
    assert report["error"]["code"] == "USE_OF_BOTTOM"
    assert "x -> 0" in report["env_dump"]
    assert "px -> ⊥" in report["env_dump"]


def test_run_env_panel(capsys):
    args = ["run", "--dump-env", str(CORPUS / "illegal_borrow.llbc"), "--entry", "test_illegal"]
    assert main(args) == EXIT_ERROR
    assert "env at error" in capsys.readouterr().out
