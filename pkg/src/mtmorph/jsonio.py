"""Canonical JSON reading and writing.

Every file this package writes goes through :func:`canonical_json` so that
identical inputs always produce byte-identical outputs: two-space indent,
lexicographically sorted keys, UTF-8, trailing newline.  Empty collections
are omitted by the serializers; absent keys read back as empty.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError


def canonical_json(data: object) -> str:
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(data: object, path: str | Path) -> None:
    Path(path).write_text(canonical_json(data), encoding="utf-8")


def read_json(path: str | Path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(str(exc), path=str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=str(path), line=exc.lineno, col=exc.colno) from exc


def expect_object(value: object, ctx: str, *, required: tuple[str, ...] = (),
                  optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(value, dict):
        raise ParseError(f"{ctx}: expected an object, got {type(value).__name__}")
    allowed = set(required) | set(optional)
    unknown = sorted(key for key in value if key not in allowed)
    if unknown:
        raise ParseError(f"{ctx}: unknown key(s): {', '.join(unknown)}")
    missing = sorted(key for key in required if key not in value)
    if missing:
        raise ParseError(f"{ctx}: missing required key(s): {', '.join(missing)}")
    return value


def expect_list(value: object, ctx: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{ctx}: expected an array, got {type(value).__name__}")
    return value


def expect_str(value: object, ctx: str) -> str:
    if not isinstance(value, str):
        raise ParseError(f"{ctx}: expected a string, got {type(value).__name__}")
    return value


def expect_bool(value: object, ctx: str) -> bool:
    if not isinstance(value, bool):
        raise ParseError(f"{ctx}: expected a boolean, got {type(value).__name__}")
    return value


def expect_int(value: object, ctx: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{ctx}: expected an integer, got {type(value).__name__}")
    return value
