"""Spectrum containers and the plain-text spectrum format.

A spectrum file holds one eigenvalue per line in descending order.  Lines
starting with ``#`` are comments; comments of the form ``# key: value`` for
the keys ``source``, ``n_total`` and ``trace_hint`` carry metadata and are
restored on read.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import EmptyInput, NonFiniteValue, NonPositiveEigenvalue, ParseError

SOURCES = ("ingested", "lanczos", "dense", "anm-inverse", "mlp", "eigengap")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted in non-increasing order, plus provenance.

    ``n_total`` is the dimension of the full operator when only a top slice
    was retained, and ``trace_hint`` the sum over *all* of its eigenvalues.
    """

    values: np.ndarray
    source: str = "ingested"
    n_total: Optional[int] = None
    trace_hint: Optional[float] = None

    def __post_init__(self):
        values = _frozen(self.values).ravel()
        if values.size == 0:
            raise EmptyInput("spectrum has no values")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise NonFiniteValue(int(bad[0]), float(values[bad[0]]))
        if np.any(values[1:] > values[:-1]):
            raise ValueError("spectrum values must be non-increasing; use make_spectrum to sort")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source tag {self.source!r}")
        if self.n_total is not None and self.n_total < values.size:
            raise ValueError("n_total is smaller than the number of retained values")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return (
            self.source == other.source
            and self.n_total == other.n_total
            and self.trace_hint == other.trace_hint
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def top(self, k: int) -> np.ndarray:
        if not 1 <= k <= len(self):
            raise ValueError(f"k={k} outside 1..{len(self)}")
        return self.values[:k]

    def scaled(self, c: float) -> "Spectrum":
        """The spectrum of ``c * H`` for ``c > 0``."""
        if not c > 0:
            raise ValueError("scale factor must be positive")
        hint = None if self.trace_hint is None else c * self.trace_hint
        return Spectrum(c * self.values, self.source, self.n_total, hint)


@dataclass(frozen=True, eq=False)
class TraceNormalizedSpectrum:
    fractions: np.ndarray = field()

    def __post_init__(self):
        object.__setattr__(self, "fractions", _frozen(self.fractions))

    def __len__(self):
        return self.fractions.size


def make_spectrum(raw_values: Iterable[float], source: str = "ingested", *,
                  n_total: Optional[int] = None, trace_hint: Optional[float] = None) -> Spectrum:
    """Sort ``raw_values`` descending (stable for ties) and wrap them."""
    values = np.asarray(list(raw_values) if not isinstance(raw_values, np.ndarray) else raw_values,
                        dtype=np.float64).ravel()
    if values.size == 0:
        raise EmptyInput("no eigenvalues given")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteValue(int(bad[0]), float(values[bad[0]]))
    order = np.argsort(-values, kind="stable")
    return Spectrum(values[order], source, n_total, trace_hint)


def trace_normalize(s: Spectrum, k: Optional[int] = None) -> TraceNormalizedSpectrum:
    """Fractions ``lambda_i / sum_{j<=k} lambda_j`` over the top ``k`` values."""
    k = len(s) if k is None else k
    top = s.top(k)
    bad = np.flatnonzero(top <= 0)
    if bad.size:
        raise NonPositiveEigenvalue(int(bad[0]), float(top[bad[0]]))
    return TraceNormalizedSpectrum(top / math.fsum(top))


# -- text format -------------------------------------------------------------

_META_KEYS = ("source", "n_total", "trace_hint")


def format_spectrum(s: Spectrum) -> str:
    lines = [f"# source: {s.source}"]
    if s.n_total is not None:
        lines.append(f"# n_total: {s.n_total}")
    if s.trace_hint is not None:
        lines.append(f"# trace_hint: {s.trace_hint!r}")
    # repr gives the shortest string that round-trips to the same double
    lines.extend(repr(float(v)) for v in s.values)
    return "\n".join(lines) + "\n"


def parse_spectrum(text: str) -> Spectrum:
    meta = {}
    values = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].partition(":")
            key = key.strip()
            if sep and key in _META_KEYS:
                meta[key] = val.strip()
            continue
        try:
            v = float(line)
        except ValueError:
            raise ParseError(lineno, f"not a number: {line!r}") from None
        if not math.isfinite(v):
            raise ParseError(lineno, f"non-finite value: {line!r}")
        values.append(v)
    if not values:
        raise EmptyInput("spectrum file contains no values")
    try:
        n_total = int(meta["n_total"]) if "n_total" in meta else None
        trace_hint = float(meta["trace_hint"]) if "trace_hint" in meta else None
    except ValueError as exc:
        raise ParseError(0, f"bad metadata: {exc}") from None
    # unsorted files are accepted and sorted
    return make_spectrum(values, meta.get("source", "ingested"), n_total=n_total, trace_hint=trace_hint)


def read_spectrum(path) -> Spectrum:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spectrum(fh.read())


def write_spectrum(s: Spectrum, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_spectrum(s))


def write_rank_size_csv(values, path) -> None:
    """Write ``rank,value`` rows with 1-based rank, in the order given."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("rank,value\n")
        for rank, v in enumerate(np.asarray(values, dtype=np.float64), start=1):
            fh.write(f"{rank},{float(v)!r}\n")


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return str(path)
