"""Haar system on unit cells and the partial Haar expansions P_n f.

Every cell [k, k+1) carries the same basic Haar system: h_{k,1} is the indicator
of the cell and, for j = 2^m + r with 1 <= r <= 2^m, h_{k,j} is +2^(m/2) on the
left half and -2^(m/2) on the right half of [k + (r-1)/2^m, k + r/2^m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from loguru import logger

from engine.apnorms import stepanov_norm_integer
from engine.errors import OutOfWindow
from engine.signals import DEFAULT_TOL, Signal, Steps, integrate, integrate_map, shift
from utils.parallel import ordered_map

MODULUS_SAMPLES = 32
MODULUS_SPAN = 1e-3
MODULUS_FACTOR = 24.0


@dataclass(frozen=True)
class HaarIndex:
    k: int
    j: int

    def __post_init__(self):
        if self.j < 1:
            raise ValueError(f"Haar index j must be >= 1, got {self.j}")

    @property
    def m(self) -> int:
        """Dyadic level of j >= 2 (j = 2^m + r); -1 for the cell indicator."""
        return (self.j - 1).bit_length() - 1

    @property
    def r(self) -> int:
        return self.j - 2**self.m if self.j > 1 else 0

    @property
    def amplitude(self) -> float:
        return 1.0 if self.j == 1 else 2.0 ** (self.m / 2)

    def support(self) -> tuple[float, float]:
        if self.j == 1:
            return float(self.k), float(self.k + 1)
        width = math.ldexp(1.0, -self.m)
        return self.k + (self.r - 1) * width, self.k + self.r * width

    def as_signal(self) -> Signal:
        lo, hi = self.support()
        if self.j == 1:
            return Steps((lo, hi), (1.0,))
        mid = 0.5 * (lo + hi)
        return Steps((lo, mid, hi), (self.amplitude, -self.amplitude))


def haar_fn(idx: HaarIndex, t: float) -> float:
    """Value of h_{k,j} at t; right-open at every dyadic breakpoint."""
    lo, hi = idx.support()
    if not lo <= t < hi:
        return 0.0
    if idx.j == 1:
        return 1.0
    return idx.amplitude if t < 0.5 * (lo + hi) else -idx.amplitude


def _finest_level(n: int) -> int:
    """Number of dyadic halvings of a cell on which P_n f is constant."""
    return 0 if n == 1 else HaarIndex(0, n).m + 1


@dataclass
class HaarCoeffs:
    """Coefficient table a[k][j] = integral of f*h_{k,j}, cells k0..k1, j = 1..n."""

    k0: int
    k1: int
    n: int
    table: np.ndarray

    def coeff(self, k: int, j: int) -> float:
        if not (self.k0 <= k <= self.k1 and 1 <= j <= self.n):
            raise OutOfWindow(f"a[{k}][{j}] outside cells {self.k0}..{self.k1}, j <= {self.n}")
        return float(self.table[k - self.k0, j - 1])

    def _cell_values(self) -> np.ndarray:
        """Value of P_n f on each finest dyadic sub-interval, one row per cell."""
        level = _finest_level(self.n)
        count = 2**level
        mids = (np.arange(count) + 0.5) / count
        basis = np.array(
            [[haar_fn(HaarIndex(0, j), float(x)) for x in mids] for j in range(1, self.n + 1)]
        )
        return self.table @ basis

    def to_signal(self) -> Steps:
        """P_n f on [k0, k1 + 1) as a finite step signal (zero outside)."""
        values = self._cell_values()
        count = values.shape[1]
        breaks = [
            k + i / count for k in range(self.k0, self.k1 + 1) for i in range(count)
        ]
        breaks.append(float(self.k1 + 1))
        return Steps(tuple(breaks), tuple(float(v) for v in values.ravel()))


def _cell_row(f: Signal, k: int, n: int, tol: float) -> list[float]:
    level = _finest_level(n)
    count = 2**level
    cuts = [k + i / count for i in range(count + 1)]
    share = tol / count
    chunks = [integrate(f, lo, hi, share)[0] for lo, hi in zip(cuts, cuts[1:])]
    row = [math.fsum(chunks)]
    for j in range(2, n + 1):
        idx = HaarIndex(k, j)
        span = count >> idx.m
        start = (idx.r - 1) * span
        half = span // 2
        left = math.fsum(chunks[start : start + half])
        right = math.fsum(chunks[start + half : start + span])
        row.append(idx.amplitude * (left - right))
    return row


def coefficients(f: Signal, k0: int, k1: int, n: int, tol: float = DEFAULT_TOL) -> HaarCoeffs:
    """Haar-Fourier coefficients of ``f`` on cells k0..k1 up to index n.

    Each cell is split into its finest dyadic sub-intervals; the coefficients are
    signed sums of the signal integrals over them, so exact signals stay exact.
    """
    if k0 > k1:
        raise ValueError(f"Need k0 <= k1, got {k0} > {k1}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rows = ordered_map(lambda k: _cell_row(f, k, n, tol), range(k0, k1 + 1))
    return HaarCoeffs(k0=k0, k1=k1, n=n, table=np.array(rows, dtype=float))


def project(coeffs: HaarCoeffs, t: float) -> float:
    """(P_n f)(t) as the finite sum over j of a[floor(t)][j]*h_{floor(t),j}(t)."""
    k = math.floor(t)
    if not coeffs.k0 <= k <= coeffs.k1:
        raise OutOfWindow(f"t={t} outside cells {coeffs.k0}..{coeffs.k1}")
    return math.fsum(
        coeffs.table[k - coeffs.k0, j - 1] * haar_fn(HaarIndex(k, j), t)
        for j in range(1, coeffs.n + 1)
    )


def project_many(coeffs: HaarCoeffs, ts) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    cells = np.floor(ts).astype(int)
    if ts.size and (cells.min() < coeffs.k0 or cells.max() > coeffs.k1):
        raise OutOfWindow(f"some t outside cells {coeffs.k0}..{coeffs.k1}")
    values = coeffs._cell_values()
    count = values.shape[1]
    sub = np.minimum(np.floor((ts - cells) * count).astype(int), count - 1)
    return values[cells - coeffs.k0, sub]


def projection_error(
    f: Signal, n: int, p: float, k0: int, k1: int, tol: float = DEFAULT_TOL
) -> float:
    """max over cells l of (integral over [l, l+1] of |P_n f - f|^p)^(1/p)."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    residual = coefficients(f, k0, k1, n, tol).to_signal() - f
    power = abs if p == 1 else (lambda v: abs(v) ** p)
    cells = ordered_map(
        lambda l: integrate_map(residual, float(l), float(l + 1), power, tol)[0],
        range(k0, k1 + 1),
    )
    return max(max(c, 0.0) ** (1.0 / p) for c in cells)


@dataclass
class ModulusCheck:
    lhs: float
    rhs: float
    holds: bool


def modulus_bound_check(
    f: Signal, n: int, p: float, k0: int, k1: int, tol: float = 1e-9
) -> ModulusCheck:
    """Compare the projection error with 24 times the sampled S^p modulus of continuity.

    The modulus sup over h in (0, 1/n] is sampled at MODULUS_SAMPLES log-spaced
    points, so a failure is reported as a warning rather than raised.
    """
    lhs = projection_error(f, n, p, k0, k1)
    hs = np.geomspace(MODULUS_SPAN / n, 1.0 / n, MODULUS_SAMPLES)
    modulus = max(stepanov_norm_integer(shift(f, float(h)) - f, p, k0, k1) for h in hs)
    rhs = MODULUS_FACTOR * modulus
    holds = lhs <= rhs + tol
    if not holds:
        logger.warning(f"modulus bound failed at n={n}, p={p}: {lhs:.6g} > {rhs:.6g}")
    return ModulusCheck(lhs=lhs, rhs=rhs, holds=holds)
