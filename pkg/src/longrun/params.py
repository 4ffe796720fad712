"""Flat ``name = value`` parameter files.

One assignment per line; ``#`` starts a comment; schedules are
comma-separated lists. Keys are checked against the fields the caller
accepts, so a misspelled key is an error rather than a silent default.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

from .errors import ValidationError


def _parse_value(text: str):
    text = text.strip()
    if "," in text:
        return tuple(_parse_scalar(v) for v in text.split(",") if v.strip())
    return _parse_scalar(text)


def _parse_scalar(text: str):
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        return text


def parse_params(text: str) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'name = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValidationError(f"line {lineno}: empty key")
        if key in out:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ValidationError(f"line {lineno}: empty value for {key!r}")
        out[key] = _parse_value(value)
    return out


def read_params(path: str | Path) -> dict:
    return parse_params(Path(path).read_text(encoding="utf-8"))


def check_keys(params: dict, allowed: Iterable[str], context: str) -> None:
    allowed = set(allowed)
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise ValidationError(
            f"unknown parameter(s) for {context}: {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}"
        )


def format_params(params: dict) -> str:
    lines = []
    for k, v in params.items():
        if isinstance(v, (tuple, list)):
            v = ", ".join(repr(float(x)) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
