"""Text formats for signals, ensembles, CSV tables and key=value configs.

Ensemble files hold a header line ``N M`` followed by M rows of 2N floats,
``re a_m1 im a_m1 ... re a_mN im a_mN``. A signal is the same with ``N 1``.
Numbers are written with 17 significant digits so a write/parse round trip
is bit-exact. Parsing never consults the locale.
"""

from __future__ import annotations

import math
import os
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError
from .lifted_model import SamplingEnsemble, as_signal
from .rng import RngStream, derive_stream

__all__ = [
    "parse_ensemble",
    "parse_signal",
    "write_ensemble",
    "write_signal",
    "write_csv",
    "format_float",
    "read_config",
    "derive_stream",
    "RngStream",
]


def _parse_float(token: str, path, lineno: int) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ParseError(f"not a decimal number: {token!r}", path, lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {token!r}", path, lineno)
    return v


def _read_matrix(path) -> np.ndarray:
    path = Path(path)
    lines = path.read_text(encoding="ascii").splitlines()
    # blank trailing lines are tolerated; blank lines elsewhere are not
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty file", path, 1)
    head = lines[0].split()
    if len(head) != 2 or not all(t.isdigit() for t in head):
        raise ParseError(f"header must be two positive integers 'N M', got {lines[0]!r}", path, 1)
    n, m = int(head[0]), int(head[1])
    if n < 1 or m < 1:
        raise ParseError(f"header needs N >= 1 and M >= 1, got {n} {m}", path, 1)
    body = lines[1:]
    if len(body) != m:
        # name the first line that breaks the declared count
        bad = min(len(body), m) + 2
        raise ParseError(f"header declares {m} rows but the file has {len(body)}", path, bad)
    out = np.empty((m, n), dtype=complex)
    for i, line in enumerate(body):
        lineno = i + 2
        toks = line.split()
        if len(toks) != 2 * n:
            raise ParseError(f"expected {2 * n} numbers, got {len(toks)}", path, lineno)
        vals = [_parse_float(t, path, lineno) for t in toks]
        out[i] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return out


def parse_ensemble(path) -> SamplingEnsemble:
    return SamplingEnsemble(_read_matrix(path), model_tag="file")


def parse_signal(path) -> np.ndarray:
    rows = _read_matrix(path)
    if rows.shape[0] != 1:
        raise ParseError(f"a signal file has M = 1, got {rows.shape[0]}", path, 1)
    return rows[0]


def _fmt17(v: float) -> str:
    return format(float(v), ".17g")


def _write_rows(rows: np.ndarray, path) -> None:
    m, n = rows.shape
    parts = [f"{n} {m}"]
    for row in rows:
        inter = np.empty(2 * n)
        inter[0::2] = row.real
        inter[1::2] = row.imag
        parts.append(" ".join(_fmt17(v) for v in inter))
    Path(path).write_text("\n".join(parts) + "\n", encoding="ascii")


def write_ensemble(ensemble: SamplingEnsemble, path) -> None:
    _write_rows(ensemble.vectors, path)


def write_signal(z, path) -> None:
    _write_rows(as_signal(z)[None, :], path)


# --- CSV -------------------------------------------------------------------------


def format_float(v) -> str:
    """12 significant digits; booleans as true/false, infinities as inf/-inf."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".12g")


def write_csv(schema: Sequence[str], rows: Iterable[Sequence], path) -> None:
    """Write a header line plus rows; every row must match the schema width.

    Output uses ``\\n`` line endings regardless of platform so files are
    byte-comparable.
    """
    schema = list(schema)
    lines = [",".join(schema)]
    for i, row in enumerate(rows):
        row = list(row)
        if len(row) != len(schema):
            raise ValueError(f"row {i} has {len(row)} fields, schema has {len(schema)}")
        lines.append(",".join(format_float(v) if not isinstance(v, str) else v for v in row))
    text = "\n".join(lines) + "\n"
    if str(path) == "-":
        sys.stdout.write(text)
        return
    tmp = Path(f"{path}.tmp")
    tmp.write_text(text, encoding="ascii", newline="\n")
    os.replace(tmp, path)


# --- config ----------------------------------------------------------------------


def read_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment. Keys are normalised so
    that ``delta-grid`` and ``delta_grid`` coincide."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {raw.strip()!r}", path, lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError("empty key", path, lineno)
        out[key.replace("-", "_")] = value
    return out
