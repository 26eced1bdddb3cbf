import pytest
import structlog

from src.common.logger import add_component, get_logger


@pytest.mark.parametrize(
    "name, component",
    [
        ("src.llbc.symbolic.interpreter", "symbolic"),
        ("src.llbc.main", "main"),
        ("src.common.config", "config"),
    ],
)
def test_component_comes_from_the_module_path(name, component):
    event = add_component(None, "info", {"event": "checked", "logger_name": name})
    assert event == {"event": "checked", "component": component}


def test_events_without_a_logger_name_pass_through():
    assert add_component(None, "info", {"event": "checked"}) == {"event": "checked"}


def test_loggers_carry_their_module_name():
    with structlog.testing.capture_logs() as logs:
        get_logger("src.llbc.pure.scope").warning("scope_checked", functions=2)
    assert logs[0]["logger_name"] == "src.llbc.pure.scope"
    assert logs[0]["functions"] == 2
