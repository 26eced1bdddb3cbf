import pytest

from src.common.config import Config
from src.llbc.main import EXIT_ERROR, main

from .support import CORPUS


def test_defaults_are_valid():
    Config.validate()


@pytest.mark.parametrize(
    "name, value",
    [("FUEL", 0), ("MAX_CALL_DEPTH", -1), ("OUTPUT_STYLE", "coq")],
)
def test_invalid_settings_are_rejected(monkeypatch, name, value):
    monkeypatch.setattr(Config, name, value)
    with pytest.raises(ValueError):
        Config.validate()


def test_cli_refuses_bad_configuration(monkeypatch, capsys):
    monkeypatch.setattr(Config, "FUEL", 0)
    assert main(["check", str(CORPUS / "ref_incr.llbc")]) == EXIT_ERROR
    assert "Configuration error" in capsys.readouterr().err
