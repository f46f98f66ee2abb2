"""Plain-text key-value files shared by presets and experiment configs.

Grammar, one entry per line::

    # comment
    key = value

Blank lines and ``#`` comments are ignored, keys are unique, and a value runs
to the end of the line (a trailing ``# ...`` is stripped).  Matrix values are
row-major nested lists whose entries are either real numbers or complex pairs
``[re, im]``, for example ``[[[1, 0], [2, 0]], [[0, 0], [1, 0]]]``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Malformed key-value text or an invalid value."""


def parse_keyvalue(text: str, source: str = "<string>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_keyvalue(path) -> dict:
    path = Path(path)
    return parse_keyvalue(path.read_text(), str(path))


def parse_number(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(t)
    except ValueError as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def parse_complex(text: str) -> complex:
    """``a``, ``inf`` or ``a b`` (real and imaginary parts)."""
    parts = text.split()
    if len(parts) == 1:
        return complex(parse_number(parts[0]))
    if len(parts) == 2:
        return complex(parse_number(parts[0]), parse_number(parts[1]))
    raise ConfigError(f"bad complex literal {text!r}")


def parse_matrix(text: str) -> np.ndarray:
    try:
        rows = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad matrix literal {text!r}") from exc
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(f"matrix must be a list of rows: {text!r}")
    n = len(rows)
    out = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ConfigError(f"matrix must be square: {text!r}")
        for j, entry in enumerate(row):
            if isinstance(entry, (int, float)):
                out[i, j] = entry
            elif isinstance(entry, list) and len(entry) == 2:
                out[i, j] = complex(entry[0], entry[1])
            else:
                raise ConfigError(f"bad matrix entry {entry!r}")
    return out


def format_matrix(m: np.ndarray) -> str:
    rows = [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]
    return json.dumps(rows)


def parse_letters(text: str) -> tuple:
    try:
        letters = tuple(int(tok) for tok in text.split())
    except ValueError as exc:
        raise ConfigError(f"bad letter list {text!r}") from exc
    if 0 in letters:
        raise ConfigError(f"letters are nonzero integers: {text!r}")
    return letters


def require(d: dict, key: str, source: str = "") -> str:
    if key not in d:
        raise ConfigError(f"{source}: missing key {key!r}")
    return d[key]
