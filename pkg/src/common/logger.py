"""Structured logging using structlog."""
import logging
import sys

import structlog

_PACKAGE = ("src", "llbc")


def add_component(logger, method_name, event_dict):
    """Swap the module path for the pipeline stage that logged the event.

    `src.llbc.symbolic.interpreter` becomes `component=symbolic`; modules
    outside the llbc package keep their last path segment.
    """
    name = event_dict.pop("logger_name", None)
    if not name:
        return event_dict
    parts = tuple(name.split("."))
    if parts[:2] == _PACKAGE and len(parts) > 2:
        event_dict["component"] = parts[2]
    else:
        event_dict["component"] = parts[-1]
    return event_dict


def setup_logging(level: str = "WARNING") -> None:
    """Configure structlog with console-friendly output on stderr."""
    numeric = getattr(logging, level.upper(), logging.WARNING)
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=numeric,
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            add_component,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="%H:%M:%S", utc=False),
            structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=True,
    )


def get_logger(name: str) -> structlog.BoundLogger:
    return structlog.get_logger(logger_name=name)
