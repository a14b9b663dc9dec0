"""Recurrence times, waiting times and match lengths.

Each scan comes in two flavours: a ``naive_*`` quadratic reference that
compares windows directly, and the production scanner built on the
failure-function kernels in :mod:`eprec._kernels`.  Times are reported
1-based, exactly as in the definitions::

    R_n   = min{k >= 1 : x[n+k .. 2n+k-1] == x[1 .. n]}
    R'_n  = min{k >= 1 : x[1+k .. n+k]    == x[1 .. n]}
    R^_n  = min{k >= 1 : x[n+k .. 2n+k-1] == reverse_word(x[1 .. n])}
    W_n   = min{k >= 1 : y[k .. k+n-1]    == x[1 .. n]}

An occurrence only counts if its whole window lies inside the data;
otherwise the scan is censored at the data horizon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import AlphabetError, Involution, SymbolSequence, reverse_word


class DataExhaustedError(ValueError):
    """The data ends before a match length can be certified."""


@dataclass(frozen=True)
class ScanResult:
    """Outcome of a time search: ``Found(k)`` or ``Censored(horizon)``."""

    value: int
    censored: bool = False

    @classmethod
    def found_at(cls, k: int) -> "ScanResult":
        return cls(int(k), False)

    @classmethod
    def censored_at(cls, horizon: int) -> "ScanResult":
        return cls(int(horizon), True)

    @property
    def found(self) -> bool:
        return not self.censored

    @property
    def k(self) -> int | None:
        return None if self.censored else self.value

    def __repr__(self) -> str:
        return f"Censored({self.value})" if self.censored else f"Found({self.value})"


@dataclass(frozen=True)
class MatchRow:
    n: int
    r: ScanResult
    r_hat: ScanResult


@dataclass(frozen=True)
class MatchCurve:
    rows: tuple[MatchRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def _check_n(x: SymbolSequence, n: int) -> None:
    if n < 1:
        raise ValueError(f"word length must be >= 1, got {n}")
    if n > x.length:
        raise ValueError(f"word length {n} exceeds sequence length {x.length}")


def _check_theta(x: SymbolSequence, theta: Involution) -> None:
    if x.alphabet != theta.alphabet:
        raise AlphabetError("sequence and involution are over different alphabets")


def _scan(text: np.ndarray, pat: np.ndarray, lo: int, base: int) -> ScanResult:
    i = _kernels.find(text, pat, lo, text.shape[0])
    if i < 0:
        return ScanResult.censored_at(text.shape[0])
    return ScanResult.found_at(i - base)


def recurrence_time(x: SymbolSequence, n: int) -> ScanResult:
    """Non-overlapping recurrence time of the ``n``-prefix."""
    _check_n(x, n)
    d = x.data
    return _scan(d, d[:n], n, n - 1)


def recurrence_time_overlapping(x: SymbolSequence, n: int) -> ScanResult:
    """First return of the ``n``-prefix, overlaps with the prefix allowed."""
    _check_n(x, n)
    d = x.data
    return _scan(d, d[:n], 1, 0)


def reversed_recurrence_time(x: SymbolSequence, n: int, theta: Involution) -> ScanResult:
    """First non-overlapping occurrence of the reversed ``n``-prefix."""
    _check_n(x, n)
    _check_theta(x, theta)
    d = x.data
    return _scan(d, reverse_word(d[:n], theta), n, n - 1)


def waiting_time(x: SymbolSequence, y: SymbolSequence, n: int) -> ScanResult:
    """First position in ``y`` where the ``n``-prefix of ``x`` starts."""
    _check_n(x, n)
    if n > y.length:
        raise ValueError(f"word length {n} exceeds searched sequence length {y.length}")
    if x.alphabet != y.alphabet:
        raise AlphabetError("waiting time between sequences over different alphabets")
    return _scan(y.data, x.data[:n], 0, -1)


def match_length(x: SymbolSequence, m: int) -> int:
    """Longest n with ``R_1, ..., R_n <= m``.

    Raises :class:`DataExhaustedError` when ``x`` is too short to decide
    whether the first failing word length recurs within offset ``m``.
    """
    return _match_length(x, m, None)


def reversed_match_length(x: SymbolSequence, m: int, theta: Involution) -> int:
    """As :func:`match_length`, with reversed-prefix recurrence times."""
    _check_theta(x, theta)
    return _match_length(x, m, theta)


def _match_length(x: SymbolSequence, m: int, theta: Involution | None) -> int:
    if m < 1:
        raise ValueError(f"window size m must be >= 1, got {m}")
    if theta is None:
        res = _kernels.match_length_kernel(x.data, m, np.arange(x.alphabet.size, dtype=np.uint8), False)
    else:
        res = _kernels.match_length_kernel(x.data, m, theta.as_array(), True)
    if res == _kernels.EXHAUSTED:
        raise DataExhaustedError(
            f"sequence of length {x.length} too short to certify match length at m={m}"
        )
    return int(res)


def match_curve(x: SymbolSequence, n_max: int, theta: Involution) -> MatchCurve:
    """``R_n`` and ``R^_n`` for ``n = 1 .. n_max`` in one incremental pass."""
    _check_n(x, n_max)
    _check_theta(x, theta)
    starts, rstarts = _kernels.match_curve_kernel(x.data, n_max, theta.as_array())
    horizon = x.length
    rows = []
    for n in range(1, n_max + 1):
        s, rs = int(starts[n - 1]), int(rstarts[n - 1])
        r = ScanResult.censored_at(horizon) if s < 0 else ScanResult.found_at(s - n + 1)
        rh = ScanResult.censored_at(horizon) if rs < 0 else ScanResult.found_at(rs - n + 1)
        rows.append(MatchRow(n, r, rh))
    return MatchCurve(tuple(rows))


# ---------------------------------------------------------------------------
# Quadratic reference scanners.  Kept deliberately simple: they are the test
# oracle for everything above.


def _naive_first(text: bytes, pat: bytes, first_start: int) -> int:
    n = len(pat)
    for i in range(first_start, len(text) - n + 1):
        if text[i : i + n] == pat:
            return i
    return -1


def _naive_result(i: int, base: int, horizon: int) -> ScanResult:
    return ScanResult.censored_at(horizon) if i < 0 else ScanResult.found_at(i - base)


def naive_recurrence_time(x: SymbolSequence, n: int) -> ScanResult:
    _check_n(x, n)
    t = x.data.tobytes()
    return _naive_result(_naive_first(t, t[:n], n), n - 1, len(t))


def naive_recurrence_time_overlapping(x: SymbolSequence, n: int) -> ScanResult:
    _check_n(x, n)
    t = x.data.tobytes()
    return _naive_result(_naive_first(t, t[:n], 1), 0, len(t))


def naive_reversed_recurrence_time(x: SymbolSequence, n: int, theta: Involution) -> ScanResult:
    _check_n(x, n)
    _check_theta(x, theta)
    t = x.data.tobytes()
    pat = bytes(theta.mapping[c] for c in reversed(t[:n]))
    return _naive_result(_naive_first(t, pat, n), n - 1, len(t))


def naive_waiting_time(x: SymbolSequence, y: SymbolSequence, n: int) -> ScanResult:
    _check_n(x, n)
    t = y.data.tobytes()
    return _naive_result(_naive_first(t, x.data[:n].tobytes(), 0), -1, len(t))


def naive_match_length(x: SymbolSequence, m: int, theta: Involution | None = None) -> int:
    """Reference match length from per-n reference recurrence times."""
    if m < 1:
        raise ValueError(f"window size m must be >= 1, got {m}")
    L = 0
    for n in range(1, x.length // 2 + 1):
        if theta is None:
            r = naive_recurrence_time(x, n)
        else:
            r = naive_reversed_recurrence_time(x, n, theta)
        if r.found and r.value <= m:
            L = n
            continue
        if 2 * n + m - 1 <= x.length:
            return L
        raise DataExhaustedError(f"cannot certify match length at m={m}")
    return L
