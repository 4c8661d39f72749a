"""Stirling numbers of the second kind and the distinct-type distribution.

``{k brace y}`` counts partitions of a k-set into y nonempty blocks. Drawing
k coupons uniformly (with replacement) from m types yields exactly y distinct
types with probability ``(m)_y {k brace y} / m**k``, where ``(m)_y`` is the
falling factorial. That probability vector is :func:`distinct_type_pmf`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pmf import Pmf

__all__ = [
    "Pmf",
    "StirlingTable",
    "stirling2_exact",
    "stirling2_row",
    "log_stirling2",
    "log_stirling2_row",
    "stirling2_asymptotic_fixed_y",
    "log_falling_factorials",
    "distinct_type_pmf",
]

# m**k overflows a double once k*ln(m) exceeds this.
LOG_SPACE_THRESHOLD = 700.0
# Largest k for which log_stirling2 goes through exact big integers.
EXACT_LOG_MAX_K = 300
RENORM_TOL = 1e-8


@dataclass(frozen=True)
class StirlingTable:
    """Triangular table of exact ``{k brace y}`` for ``0 <= y <= k <= max_k``."""

    max_k: int
    entries: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, max_k: int) -> StirlingTable:
        if max_k < 0:
            raise ValueError("max_k must be nonnegative")
        rows = [(1,)]
        for k in range(1, max_k + 1):
            prev = rows[-1]
            row = [0] * (k + 1)
            for y in range(1, k + 1):
                left = prev[y] if y < k else 0
                row[y] = y * left + prev[y - 1]
            rows.append(tuple(row))
        return cls(max_k, tuple(rows))

    def __call__(self, k: int, y: int) -> int:
        if k > self.max_k:
            raise IndexError(f"k={k} exceeds table size {self.max_k}")
        if y < 0 or y > k:
            return 0
        return self.entries[k][y]


@lru_cache(maxsize=128)
def stirling2_row(k: int, ymax: int) -> tuple[int, ...]:
    """Exact ``({k brace 0}, ..., {k brace ymax})`` via the additive recurrence.

    Only ``ymax + 1`` columns are carried, so the cost is ``O(k * ymax)``
    big-integer additions.
    """
    if k < 0 or ymax < 0:
        raise ValueError("k and ymax must be nonnegative")
    row = [1] + [0] * ymax
    for _ in range(k):
        for y in range(ymax, 0, -1):
            row[y] = y * row[y] + row[y - 1]
        row[0] = 0
    return tuple(row)


def stirling2_exact(k: int, y: int) -> int:
    """Exact Stirling number of the second kind; zero when ``y > k``."""
    if k < 0 or y < 0:
        raise ValueError("k and y must be nonnegative")
    if y > k:
        return 0
    if y == k:
        return 1
    if y == 0:
        return 0
    return stirling2_row(k, y)[y]


def log_stirling2_row(k: int, ymax: int) -> np.ndarray:
    """Natural logs of ``{k brace y}`` for ``y = 0..ymax`` (``-inf`` where zero).

    Runs the recurrence ``S(k, y) = y S(k-1, y) + S(k-1, y-1)`` entirely in log
    space, so it never overflows.
    """
    if k < 0 or ymax < 0:
        raise ValueError("k and ymax must be nonnegative")
    logy = np.full(ymax + 1, -np.inf)
    logy[1:] = np.log(np.arange(1, ymax + 1))
    row = np.full(ymax + 1, -np.inf)
    row[0] = 0.0
    shifted = np.empty_like(row)
    for _ in range(k):
        shifted[0] = -np.inf
        shifted[1:] = row[:-1]
        row = np.logaddexp(logy + row, shifted)
    return row


def log_stirling2(k: int, y: int) -> float:
    """``ln {k brace y}`` for ``1 <= y <= k``.

    Exact big integers are used up to ``k = 300``; beyond that the log-space
    recurrence takes over.
    """
    if y < 1 or y > k:
        raise ValueError(f"log_stirling2 needs 1 <= y <= k, got k={k}, y={y}")
    if y == 1 or y == k:
        return 0.0
    if k <= EXACT_LOG_MAX_K:
        return math.log(stirling2_exact(k, y))
    return float(log_stirling2_row(k, y)[y])


def stirling2_asymptotic_fixed_y(k: int, y: int, prec: int | None = None):
    """Log of the fixed-y asymptotic ``{k brace y} ~ y**k / y!``.

    Returns ``k ln y - ln y!``. With ``prec`` (decimal digits) the value is an
    ``mpmath.mpf`` evaluated at that working precision instead of a float.
    """
    if y < 1:
        raise ValueError("y must be >= 1")
    if prec is None:
        return k * math.log(y) - math.lgamma(y + 1)
    import mpmath

    with mpmath.workdps(prec):
        return +(k * mpmath.log(y) - mpmath.loggamma(y + 1))


def log_falling_factorials(m: int, ymax: int) -> np.ndarray:
    """``ln (m)_y`` for ``y = 0..ymax`` as a cumulative log-sum (``ymax <= m``)."""
    if ymax > m:
        raise ValueError("ymax must not exceed m")
    out = np.zeros(ymax + 1)
    out[1:] = np.cumsum(np.log(np.arange(m, m - ymax, -1, dtype=float)))
    return out


def distinct_type_pmf(m: int, k: int) -> Pmf:
    """Distribution of the number of distinct types among ``k`` uniform draws from ``m``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if k < 0:
        raise ValueError("k must be >= 0")
    mass = np.zeros(m + 1)
    if k == 0:
        mass[0] = 1.0
        return Pmf(m, mass)
    if m == 1:
        mass[1] = 1.0
        return Pmf(m, mass)

    top = min(k, m)
    if k * math.log(m) <= LOG_SPACE_THRESHOLD:
        srow = stirling2_row(k, top)
        denom = m**k
        falling = 1
        for y in range(1, top + 1):
            falling *= m - y + 1
            mass[y] = falling * srow[y] / denom
        return Pmf(m, mass / mass.sum())

    if k <= EXACT_LOG_MAX_K:
        srow = stirling2_row(k, top)
        log_s = np.array([math.log(s) if s else -np.inf for s in srow])
    else:
        log_s = log_stirling2_row(k, top)
    log_w = np.full(m + 1, -np.inf)
    log_w[: top + 1] = log_falling_factorials(m, top) + log_s - k * math.log(m)
    return Pmf.from_log_weights(log_w, tol=RENORM_TOL)
