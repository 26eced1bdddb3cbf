"""Configuration management for llbc-translate."""
import os
from pathlib import Path

from dotenv import load_dotenv

# Load .env from project root
_root = Path(__file__).resolve().parents[2]
load_dotenv(_root / ".env")


def _flag(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in {"1", "true", "yes", "on"}


class Config:
    """Central configuration object."""

    # Pure evaluator
    FUEL: int = int(os.getenv("LLBC_FUEL", "1000000"))

    # Interpreters
    CHECKS: bool = _flag("LLBC_CHECKS", True)
    MAX_CALL_DEPTH: int = int(os.getenv("LLBC_MAX_CALL_DEPTH", "200"))

    # Synthesis / printing
    INLINE_LETS: bool = _flag("LLBC_INLINE_LETS", True)
    OUTPUT_STYLE: str = os.getenv("LLBC_OUTPUT_STYLE", "fstar")

    LOG_LEVEL: str = os.getenv("LLBC_LOG_LEVEL", "WARNING")

    OUTPUT_STYLES: frozenset = frozenset({"fstar", "ml"})

    @classmethod
    def validate(cls) -> None:
        if cls.FUEL <= 0:
            raise ValueError("LLBC_FUEL must be a positive integer.")
        if cls.MAX_CALL_DEPTH <= 0:
            raise ValueError("LLBC_MAX_CALL_DEPTH must be a positive integer.")
        if cls.OUTPUT_STYLE not in cls.OUTPUT_STYLES:
            raise ValueError(
                f"LLBC_OUTPUT_STYLE must be one of {sorted(cls.OUTPUT_STYLES)}, "
                f"got {cls.OUTPUT_STYLE!r}."
            )


config = Config()
