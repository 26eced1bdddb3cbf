"""`.llbc.json` codec: one JSON object per AST node, tagged with its class under `node`."""

from __future__ import annotations

import dataclasses
import json
import typing
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, Type

from src.common.errors import ParseError

from . import types as ast

FORMAT = "llbc"
TAG = "node"
VERSION = 1

_NODES: Dict[str, Type] = {
    cls.__name__: cls
    for cls in vars(ast).values()
    if isinstance(cls, type) and dataclasses.is_dataclass(cls) and cls.__module__ == ast.__name__
}


@lru_cache(maxsize=None)
def _hints(cls: Type) -> Dict[str, Any]:
    return typing.get_type_hints(cls, vars(ast))


def _encode(node: Any) -> Any:
    if isinstance(node, Enum):
        return node.value
    if dataclasses.is_dataclass(node):
        out: Dict[str, Any] = {TAG: type(node).__name__}
        for f in dataclasses.fields(node):
            if f.name == "loc":
                continue
            out[f.name] = _encode(getattr(node, f.name))
        return out
    if isinstance(node, (tuple, list)):
        return [_encode(item) for item in node]
    return node


def _decode(obj: Any) -> Any:
    if isinstance(obj, dict):
        kind = obj.get(TAG)
        cls = _NODES.get(kind)
        if cls is None:
            raise ParseError(f"unknown node kind {kind!r}")
        hints = _hints(cls)
        kwargs = {}
        for name, raw in obj.items():
            if name == TAG:
                continue
            if name not in hints:
                raise ParseError(f"unknown field {name!r} on {kind}")
            value = _decode(raw)
            hint = hints[name]
            if isinstance(hint, type) and issubclass(hint, Enum):
                value = hint(value)
            kwargs[name] = value
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ParseError(f"malformed {kind}: {exc}") from exc
    if isinstance(obj, list):
        return tuple(_decode(item) for item in obj)
    return obj


def program_to_json(program: ast.LlbcProgram, indent: int = 2) -> str:
    doc = {"format": FORMAT, "version": VERSION, "program": _encode(program)}
    return json.dumps(doc, indent=indent)


def program_from_json(text: str) -> ast.LlbcProgram:
    """Decode a program written by `program_to_json`.

    Raises:
        ParseError: on malformed JSON or unknown node kinds.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ParseError("not an LLBC JSON document")
    if doc.get("version") != VERSION:
        raise ParseError(f"unsupported LLBC JSON version {doc.get('version')!r}")
    program = _decode(doc.get("program"))
    if not isinstance(program, ast.LlbcProgram):
        raise ParseError("document does not hold a program")
    return program
