"""Symbolic input signals.

A signal is an immutable expression tree. Leaves are constants, generalized
trigonometric polynomials, periodic step functions, finite step functions, the
dyadic series constructions used as counterexamples for almost periodic inputs,
and arbitrary callables. Inner nodes are sums, scalings, shifts and truncations.

Integrals are exact (error bound 0) whenever every node in the tree has a
closed-form antiderivative; callables fall back to adaptive Simpson quadrature.
Weighted integrals always use the shifted kernel ``exp(sigma * (u - t))``.
"""

from __future__ import annotations

import bisect
import cmath
import math
from abc import ABC, abstractmethod
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from loguru import logger

from utils.quadrature import adaptive_simpson

DEFAULT_TOL = 1e-10
SERIES_TERM_CAP = 4096


@dataclass(frozen=True)
class Window:
    """A bounded observation interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"Window bounds must be finite, got [{self.a}, {self.b}]")
        if not self.a < self.b:
            raise ValueError(f"Window needs a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    def grid(self, samples_per_unit: int) -> np.ndarray:
        """Equally spaced points covering the window, both ends included."""
        count = max(2, int(math.ceil(self.length * samples_per_unit)) + 1)
        return np.linspace(self.a, self.b, count)


@dataclass(frozen=True)
class Piece:
    """Linear piece on [lo, hi): ``value`` at ``lo`` plus ``slope * (u - lo)``."""

    lo: float
    hi: float
    value: float
    slope: float = 0.0

    def at(self, u: float) -> float:
        return self.value + self.slope * (u - self.lo)

    @property
    def end_value(self) -> float:
        return self.at(self.hi)


# ---------------------------------------------------------------------------
# Closed-form kernels
# ---------------------------------------------------------------------------


def _phi1(x: float) -> float:
    """Return the integral of exp(x*s) over s in [0, 1]."""
    if abs(x) < 1e-2:
        return 1.0 + x * (1 / 2 + x * (1 / 6 + x * (1 / 24 + x * (1 / 120 + x / 720))))
    return math.expm1(x) / x


def _phi2(x: float) -> float:
    """Return the integral of s*exp(x*s) over s in [0, 1]."""
    if abs(x) < 1e-2:
        return 1 / 2 + x * (1 / 3 + x * (1 / 8 + x * (1 / 30 + x * (1 / 144 + x / 840))))
    return (x * math.exp(x) - math.expm1(x)) / (x * x)


def _cphi1(z: complex) -> complex:
    if abs(z) < 1e-2:
        return 1.0 + z * (1 / 2 + z * (1 / 6 + z * (1 / 24 + z * (1 / 120 + z / 720))))
    return (cmath.exp(z) - 1.0) / z


def _cphi1_array(z: np.ndarray) -> np.ndarray:
    small = np.abs(z) < 1e-2
    series = 1.0 + z * (1 / 2 + z * (1 / 6 + z * (1 / 24 + z * (1 / 120 + z / 720))))
    safe = np.where(small, 1.0, z)
    return np.where(small, series, (np.exp(safe) - 1.0) / safe)


def linear_moment(
    value: float, slope: float, lo: float, hi: float, sigma: float, t: float
) -> float:
    """Integral of (value + slope*(u - lo)) * exp(sigma*(u - t)) over [lo, hi]."""
    width = hi - lo
    if width <= 0.0:
        return 0.0
    x = sigma * width
    scale = math.exp(sigma * (lo - t)) if sigma else 1.0
    return scale * width * (value * _phi1(x) + slope * width * _phi2(x))


def kernel_mass(sigma: float, t: float, a: float, b: float) -> float:
    """Integral of exp(sigma*(u - t)) over [a, b]."""
    return linear_moment(1.0, 0.0, a, b, sigma, t)


def kernel_mass_grid(sigma: float, width: np.ndarray) -> np.ndarray:
    """Integral of exp(sigma*v) over [0, w] for every w in ``width``."""
    width = np.asarray(width, dtype=float)
    return width * _cphi1_array(sigma * width + 0j).real


def _pieces_moment(pieces: Iterable[Piece], sigma: float, t: float) -> float:
    return math.fsum(linear_moment(p.value, p.slope, p.lo, p.hi, sigma, t) for p in pieces)


def _sweep(bumps: Sequence[Piece], a: float, b: float, baseline: float = 0.0) -> list[Piece]:
    """Common refinement of possibly overlapping pieces, covering [a, b).

    Points of [a, b) not covered by any bump take the baseline value.
    """
    cuts = {a, b}
    for p in bumps:
        if a < p.lo < b:
            cuts.add(p.lo)
        if a < p.hi < b:
            cuts.add(p.hi)
    points = sorted(cuts)
    ordered = sorted((p for p in bumps if p.hi > a and p.lo < b), key=lambda p: p.lo)
    out: list[Piece] = []
    active: list[Piece] = []
    nxt = 0
    for lo, hi in zip(points, points[1:]):
        active = [p for p in active if p.hi > lo]
        while nxt < len(ordered) and ordered[nxt].lo <= lo:
            if ordered[nxt].hi > lo:
                active.append(ordered[nxt])
            nxt += 1
        value = baseline + math.fsum(p.at(lo) for p in active)
        slope = math.fsum(p.slope for p in active)
        out.append(Piece(lo, hi, value, slope))
    return out


def _clip(pieces: Iterable[Piece], a: float, b: float) -> list[Piece]:
    out = []
    for p in pieces:
        lo, hi = max(p.lo, a), min(p.hi, b)
        if lo < hi:
            out.append(Piece(lo, hi, p.at(lo), p.slope))
    return out


# ---------------------------------------------------------------------------
# Signal nodes
# ---------------------------------------------------------------------------


class Signal(ABC):
    """Base class of every node of the signal expression tree."""

    @abstractmethod
    def eval(self, t: float) -> float: ...

    def values(self, ts: np.ndarray) -> np.ndarray:
        return np.fromiter((self.eval(float(t)) for t in ts), dtype=float, count=len(ts))

    @abstractmethod
    def moment(
        self, sigma: float, t: float, a: float, b: float, tol: float = DEFAULT_TOL
    ) -> tuple[float, float]:
        """Integral of f(u)*exp(sigma*(u - t)) over [a, b], with its error bound."""

    def pieces(self, a: float, b: float) -> list[Piece] | None:
        """Piecewise-linear decomposition covering [a, b), or None if the node is not
        piecewise linear."""
        return None

    def breaks(self, a: float, b: float) -> list[float]:
        """Points of (a, b) where the signal may jump or kink."""
        return []

    def moments_grid(self, sigma: float, t: float, s: np.ndarray) -> np.ndarray | None:
        """Vectorised moments over [t, s_i] for every s_i, when available."""
        return None

    def __add__(self, other: Signal) -> Signal:
        return Sum((self, other))

    def __sub__(self, other: Signal) -> Signal:
        return Sum((self, Scale(-1.0, other)))

    def __neg__(self) -> Signal:
        return Scale(-1.0, self)

    def __mul__(self, c: float) -> Signal:
        return Scale(float(c), self)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Const(Signal):
    c: float

    def eval(self, t: float) -> float:
        return self.c

    def values(self, ts: np.ndarray) -> np.ndarray:
        return np.full(np.shape(ts), self.c, dtype=float)

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        return linear_moment(self.c, 0.0, a, b, sigma, t), 0.0

    def pieces(self, a, b):
        return [Piece(a, b, self.c)]

    def moments_grid(self, sigma, t, s):
        return self.c * kernel_mass_grid(sigma, np.asarray(s, dtype=float) - t)


@dataclass(frozen=True)
class TrigPoly(Signal):
    """Sum of a_j*sin(lam_j*t) + b_j*cos(lam_j*t) over terms (a_j, b_j, lam_j)."""

    terms: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        terms = tuple((float(a), float(b), float(lam)) for a, b, lam in self.terms)
        for a, b, lam in terms:
            if not all(math.isfinite(x) for x in (a, b, lam)):
                raise ValueError(f"TrigPoly term ({a}, {b}, {lam}) is not finite")
        object.__setattr__(self, "terms", terms)

    def eval(self, t: float) -> float:
        return math.fsum(a * math.sin(lam * t) + b * math.cos(lam * t) for a, b, lam in self.terms)

    def values(self, ts):
        ts = np.asarray(ts, dtype=float)
        out = np.zeros_like(ts)
        for a, b, lam in self.terms:
            out += a * np.sin(lam * ts) + b * np.cos(lam * ts)
        return out

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        width = b - a
        if width <= 0.0:
            return 0.0, 0.0
        total = []
        for ca, cb, lam in self.terms:
            # exp(sigma*(u-t) + i*lam*u) integrated over [a, b]
            w = (
                math.exp(sigma * (a - t))
                * cmath.exp(1j * lam * a)
                * width
                * _cphi1(complex(sigma, lam) * width)
            )
            total.append(ca * w.imag + cb * w.real)
        return math.fsum(total), 0.0

    def moments_grid(self, sigma, t, s):
        width = np.asarray(s, dtype=float) - t
        out = np.zeros_like(width)
        for ca, cb, lam in self.terms:
            w = cmath.exp(1j * lam * t) * width * _cphi1_array(complex(sigma, lam) * width)
            out += ca * w.imag + cb * w.real
        return out


@dataclass(frozen=True)
class PiecewisePeriodic(Signal):
    """Periodic step function: ``pieces`` are (breakpoint, value) pairs in [0, period).

    Each value holds on [breakpoint, next breakpoint); the last value wraps around
    to the first breakpoint of the next period.
    """

    period: float
    pieces_: tuple[tuple[float, float], ...]
    _starts: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _values: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _cumulative: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.period) and self.period > 0):
            raise ValueError(f"Period must be positive, got {self.period}")
        pieces = tuple((float(x), float(v)) for x, v in self.pieces_)
        if not pieces:
            raise ValueError("PiecewisePeriodic needs at least one piece")
        points = [x for x, _ in pieces]
        if any(x < 0 or x >= self.period for x in points):
            raise ValueError(f"Breakpoints must lie in [0, {self.period}), got {points}")
        if any(x >= y for x, y in zip(points, points[1:])):
            raise ValueError(f"Breakpoints must be strictly increasing, got {points}")
        starts = [0.0] if points[0] > 0 else []
        values = [pieces[-1][1]] if points[0] > 0 else []
        starts += points
        values += [v for _, v in pieces]
        cumulative = [0.0]
        for i, v in enumerate(values):
            end = starts[i + 1] if i + 1 < len(starts) else self.period
            cumulative.append(cumulative[-1] + v * (end - starts[i]))
        object.__setattr__(self, "pieces_", pieces)
        object.__setattr__(self, "_starts", tuple(starts))
        object.__setattr__(self, "_values", tuple(values))
        object.__setattr__(self, "_cumulative", tuple(cumulative))

    def _phase(self, t: float) -> tuple[int, float]:
        k = math.floor(t / self.period)
        phase = t - k * self.period
        if phase < 0.0:
            phase = 0.0
        elif phase >= self.period:
            k, phase = k + 1, 0.0
        return k, phase

    def eval(self, t: float) -> float:
        _, phase = self._phase(t)
        return self._values[bisect.bisect_right(self._starts, phase) - 1]

    def values(self, ts):
        ts = np.asarray(ts, dtype=float)
        k = np.floor(ts / self.period)
        phase = ts - k * self.period
        phase = np.where(phase >= self.period, 0.0, np.maximum(phase, 0.0))
        idx = np.searchsorted(np.asarray(self._starts), phase, side="right") - 1
        return np.asarray(self._values)[np.clip(idx, 0, len(self._values) - 1)]

    def _antiderivative(self, x: float) -> float:
        k, phase = self._phase(x)
        i = bisect.bisect_right(self._starts, phase) - 1
        within = self._cumulative[i] + self._values[i] * (phase - self._starts[i])
        return k * self._cumulative[-1] + within

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        if b <= a:
            return 0.0, 0.0
        if sigma == 0.0:
            return self._antiderivative(b) - self._antiderivative(a), 0.0
        return _pieces_moment(self.pieces(a, b), sigma, t), 0.0

    def _boundaries(self, a: float, b: float) -> tuple[list[float], list[float]]:
        k0 = math.floor(a / self.period) - 1
        k1 = math.floor(b / self.period) + 1
        cuts, vals = [], []
        for k in range(k0, k1 + 1):
            base = k * self.period
            for start, v in zip(self._starts, self._values):
                cuts.append(base + start)
                vals.append(v)
        return cuts, vals

    def pieces(self, a, b):
        cuts, vals = self._boundaries(a, b)
        raw = [Piece(lo, hi, v) for lo, hi, v in zip(cuts, cuts[1:], vals)]
        return _clip(raw, a, b)

    def breaks(self, a, b):
        cuts, _ = self._boundaries(a, b)
        return [c for c in cuts if a < c < b]


@dataclass(frozen=True)
class Steps(Signal):
    """Finite step function: values[i] on [breaks[i], breaks[i+1]), zero elsewhere."""

    breaks_: tuple[float, ...]
    values_: tuple[float, ...]

    def __post_init__(self):
        cuts = tuple(float(x) for x in self.breaks_)
        vals = tuple(float(v) for v in self.values_)
        if len(cuts) != len(vals) + 1 or not vals:
            raise ValueError("Steps needs len(breaks) == len(values) + 1 >= 2")
        if any(x >= y for x, y in zip(cuts, cuts[1:])):
            raise ValueError("Steps breakpoints must be strictly increasing")
        object.__setattr__(self, "breaks_", cuts)
        object.__setattr__(self, "values_", vals)

    def eval(self, t):
        if t < self.breaks_[0] or t >= self.breaks_[-1]:
            return 0.0
        return self.values_[bisect.bisect_right(self.breaks_, t) - 1]

    def values(self, ts):
        ts = np.asarray(ts, dtype=float)
        idx = np.searchsorted(np.asarray(self.breaks_), ts, side="right") - 1
        inside = (ts >= self.breaks_[0]) & (ts < self.breaks_[-1])
        vals = np.asarray(self.values_)[np.clip(idx, 0, len(self.values_) - 1)]
        return np.where(inside, vals, 0.0)

    def pieces(self, a, b):
        raw = [Piece(lo, hi, v) for lo, hi, v in zip(self.breaks_, self.breaks_[1:], self.values_)]
        return _sweep(_clip(raw, a, b), a, b)

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        return _pieces_moment(self.pieces(a, b), sigma, t), 0.0

    def breaks(self, a, b):
        return [c for c in self.breaks_ if a < c < b]


@dataclass(frozen=True, eq=False)
class Func(Signal):
    """Signal given by a Python callable; integrated by adaptive quadrature."""

    fn: Callable[[float], float]
    label: str = "func"

    def eval(self, t):
        return float(self.fn(t))

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        if b <= a:
            return 0.0, 0.0
        if sigma == 0.0:
            return adaptive_simpson(self.eval, a, b, tol)
        return adaptive_simpson(lambda u: self.eval(u) * math.exp(sigma * (u - t)), a, b, tol)


@dataclass(frozen=True)
class Sum(Signal):
    children: tuple[Signal, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def eval(self, t):
        return math.fsum(c.eval(t) for c in self.children)

    def values(self, ts):
        out = np.zeros(np.shape(ts), dtype=float)
        for c in self.children:
            out += c.values(ts)
        return out

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        share = tol / max(1, len(self.children))
        parts = [c.moment(sigma, t, a, b, share) for c in self.children]
        return math.fsum(v for v, _ in parts), sum(e for _, e in parts)

    def pieces(self, a, b):
        bumps: list[Piece] = []
        for c in self.children:
            part = c.pieces(a, b)
            if part is None:
                return None
            bumps.extend(part)
        return _sweep(bumps, a, b)

    def breaks(self, a, b):
        return sorted({x for c in self.children for x in c.breaks(a, b)})

    def moments_grid(self, sigma, t, s):
        out = None
        for c in self.children:
            part = c.moments_grid(sigma, t, s)
            if part is None:
                return None
            out = part if out is None else out + part
        return out if out is not None else np.zeros(np.shape(s))


@dataclass(frozen=True)
class Scale(Signal):
    c: float
    child: Signal

    def eval(self, t):
        return self.c * self.child.eval(t)

    def values(self, ts):
        return self.c * self.child.values(ts)

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        inner_tol = tol / abs(self.c) if self.c else tol
        value, err = self.child.moment(sigma, t, a, b, inner_tol)
        return self.c * value, abs(self.c) * err

    def pieces(self, a, b):
        part = self.child.pieces(a, b)
        if part is None:
            return None
        return [Piece(p.lo, p.hi, self.c * p.value, self.c * p.slope) for p in part]

    def breaks(self, a, b):
        return self.child.breaks(a, b)

    def moments_grid(self, sigma, t, s):
        part = self.child.moments_grid(sigma, t, s)
        return None if part is None else self.c * part


@dataclass(frozen=True)
class Shift(Signal):
    """The translate f^tau(t) = f(t + tau)."""

    tau: float
    child: Signal

    def eval(self, t):
        return self.child.eval(t + self.tau)

    def values(self, ts):
        return self.child.values(np.asarray(ts, dtype=float) + self.tau)

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        return self.child.moment(sigma, t + self.tau, a + self.tau, b + self.tau, tol)

    def pieces(self, a, b):
        part = self.child.pieces(a + self.tau, b + self.tau)
        if part is None:
            return None
        shifted = [Piece(p.lo - self.tau, p.hi - self.tau, p.value, p.slope) for p in part]
        return _clip(shifted, a, b)

    def breaks(self, a, b):
        return [x - self.tau for x in self.child.breaks(a + self.tau, b + self.tau)]

    def moments_grid(self, sigma, t, s):
        return self.child.moments_grid(sigma, t + self.tau, np.asarray(s, dtype=float) + self.tau)


@dataclass(frozen=True)
class Truncated(Signal):
    """Clamp of ``child`` to [-level, level]."""

    child: Signal
    level: float

    def __post_init__(self):
        if not self.level > 0:
            raise ValueError(f"Truncation level must be positive, got {self.level}")

    def eval(self, t):
        return min(max(self.child.eval(t), -self.level), self.level)

    def values(self, ts):
        return np.clip(self.child.values(ts), -self.level, self.level)

    def pieces(self, a, b):
        part = self.child.pieces(a, b)
        if part is None:
            return None
        out: list[Piece] = []
        for p in part:
            if p.slope == 0.0:
                out.append(Piece(p.lo, p.hi, min(max(p.value, -self.level), self.level)))
                continue
            cuts = [p.lo, p.hi]
            for level in (-self.level, self.level):
                x = p.lo + (level - p.value) / p.slope
                if p.lo < x < p.hi:
                    cuts.append(x)
            cuts.sort()
            for lo, hi in zip(cuts, cuts[1:]):
                mid = p.at(0.5 * (lo + hi))
                if mid >= self.level:
                    out.append(Piece(lo, hi, self.level))
                elif mid <= -self.level:
                    out.append(Piece(lo, hi, -self.level))
                else:
                    out.append(Piece(lo, hi, p.at(lo), p.slope))
        return out

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        part = self.pieces(a, b)
        if part is not None:
            return _pieces_moment(part, sigma, t), 0.0
        return _segmented_quadrature(
            lambda u: self.eval(u) * math.exp(sigma * (u - t)), a, b, self.breaks(a, b), tol
        )

    def breaks(self, a, b):
        return self.child.breaks(a, b)


# ---------------------------------------------------------------------------
# Dyadic series constructions
# ---------------------------------------------------------------------------


class SeriesKind(str, Enum):
    """The four series counterexamples, each a baseline plus sum_n f_n with f_n
    supported in unit cells [z, z+1] anchored on a lattice A_n = P_n*Z + c_n."""

    MU_NO_MU = "mu_no_mu"
    MEANLESS_SERIES = "meanless_series"
    UNBOUNDED_MEAN_SERIES = "unbounded_mean_series"
    ALTERNATING_OFFSETS = "alternating_offsets"


_BASELINE = {
    SeriesKind.MU_NO_MU: 1.0,
    SeriesKind.MEANLESS_SERIES: 0.0,
    SeriesKind.UNBOUNDED_MEAN_SERIES: 0.0,
    SeriesKind.ALTERNATING_OFFSETS: 2.0,
}


def _lattice(kind: SeriesKind, n: int) -> tuple[int, int]:
    """Period and offset (P, c) of the anchor lattice A_n = P*Z + c."""
    if kind is SeriesKind.MU_NO_MU:
        return 2**n, 2 ** (n - 1)
    if kind is SeriesKind.MEANLESS_SERIES:
        # B_n = A_{2^n} with A_m = 4^m Z + 2^m
        m = 2**n
        return 4**m, 2**m
    if kind is SeriesKind.UNBOUNDED_MEAN_SERIES:
        return 2 * 3**n, -(3**n)
    return 2**n, ((-2) ** (n - 1) - 1) // 3


def _nearest_anchor(period: int, offset: int) -> int:
    r = offset % period
    return min(r, period - r)


def _comb_measure(x: float, spacing: float, width: float, count: int) -> float:
    """Measure of (-inf, x] intersected with the union of [k*spacing, k*spacing + width)."""
    if x <= 0.0:
        return 0.0
    k = math.floor(x / spacing)
    if k >= count:
        return count * width
    return k * width + min(x - k * spacing, width)


def _term_pieces(kind: SeriesKind, n: int, lo: float, hi: float) -> list[Piece]:
    """Pieces of the n-th term inside its unit cell, in cell coordinates, meeting [lo, hi]."""
    if kind is SeriesKind.MU_NO_MU:
        spacing = math.ldexp(1.0, 1 - n)
        width = math.ldexp(1.0, 1 - 2 * n)
        height = math.ldexp(1.0, n)
        count = 2 ** (n - 1)
        k0 = max(0, math.floor((lo - width) / spacing))
        k1 = min(count - 1, math.floor(hi / spacing))
        return [Piece(k * spacing, k * spacing + width, height) for k in range(k0, k1 + 1)]
    if kind is SeriesKind.MEANLESS_SERIES:
        slope = (n + 1) ** 2 * 2.0 ** (2**n)
        half = 1.0 / (n + 1)
        return [
            Piece(0.5 - half, 0.5, 0.0, slope),
            Piece(0.5, 0.5 + half, slope * half, -slope),
        ]
    if kind is SeriesKind.UNBOUNDED_MEAN_SERIES:
        return [Piece(0.0, 1.0 / n, float(n * n))]
    return [Piece(1.0 - 1.0 / (n + 1), 1.0, float((n + 1) ** 2))]


@dataclass(frozen=True)
class DyadicSpikes(Signal):
    """Baseline plus the series sum_n f_n of one of the four constructions.

    ``max_terms`` truncates the series to its first k terms (the partial sums g_k);
    None keeps every term. Only the finitely many terms whose anchor cells meet a
    bounded window are ever generated.
    """

    kind: SeriesKind
    max_terms: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SeriesKind(self.kind))
        if self.max_terms is not None and self.max_terms < 0:
            raise ValueError(f"max_terms must be non-negative, got {self.max_terms}")

    @property
    def baseline(self) -> float:
        return _BASELINE[self.kind]

    def _budget(self) -> int:
        return SERIES_TERM_CAP if self.max_terms is None else min(self.max_terms, SERIES_TERM_CAP)

    def anchors(self, a: float, b: float) -> Iterator[tuple[int, list[int]]]:
        """Yield (n, anchors z in A_n) for every term whose cell [z, z+1] meets [a, b]."""
        zlo = math.ceil(a) - 1
        zhi = math.floor(b)
        reach = max(abs(zlo), abs(zhi))
        for n in range(1, self._budget() + 1):
            period, offset = _lattice(self.kind, n)
            if _nearest_anchor(period, offset) > reach:
                break
            q_lo = -((offset - zlo) // period)
            q_hi = (zhi - offset) // period
            if q_lo <= q_hi:
                yield n, [period * q + offset for q in range(q_lo, q_hi + 1)]

    def eval(self, t):
        z = math.floor(t)
        x = t - z
        total = self.baseline
        for n in range(1, self._budget() + 1):
            period, offset = _lattice(self.kind, n)
            if _nearest_anchor(period, offset) > abs(z):
                break
            if (z - offset) % period == 0:
                for p in _term_pieces(self.kind, n, x, x):
                    if p.lo <= x < p.hi:
                        total += p.at(x)
        return total

    def moment(self, sigma, t, a, b, tol=DEFAULT_TOL):
        if b <= a:
            return 0.0, 0.0
        parts = [linear_moment(self.baseline, 0.0, a, b, sigma, t)]
        for n, zs in self.anchors(a, b):
            for z in zs:
                lo, hi = a - z, b - z
                if sigma == 0.0 and self.kind is SeriesKind.MU_NO_MU:
                    spacing = math.ldexp(1.0, 1 - n)
                    width = math.ldexp(1.0, 1 - 2 * n)
                    count = 2 ** (n - 1)
                    covered = _comb_measure(hi, spacing, width, count) - _comb_measure(
                        lo, spacing, width, count
                    )
                    parts.append(math.ldexp(covered, n))
                    continue
                for p in _term_pieces(self.kind, n, lo, hi):
                    s0, s1 = max(p.lo, lo), min(p.hi, hi)
                    if s0 < s1:
                        # anchor-relative coordinates keep precision far from the origin
                        parts.append(
                            linear_moment(p.at(s0), p.slope, s0, s1, sigma, t - z)
                        )
        return math.fsum(parts), 0.0

    def pieces(self, a, b):
        bumps = []
        for n, zs in self.anchors(a, b):
            for z in zs:
                for p in _term_pieces(self.kind, n, a - z, b - z):
                    bumps.append(Piece(p.lo + z, p.hi + z, p.value, p.slope))
        return _sweep(_clip(bumps, a, b), a, b, self.baseline)

    def breaks(self, a, b):
        part = self.pieces(a, b)
        return [p.lo for p in part[1:]]


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def evaluate(sig: Signal, t: float) -> float:
    """Value of ``sig`` at the finite time ``t``."""
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    return sig.eval(t)


def eval_many(sig: Signal, ts: Sequence[float] | np.ndarray) -> np.ndarray:
    return sig.values(np.asarray(ts, dtype=float))


def integrate(sig: Signal, a: float, b: float, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Definite integral of ``sig`` over [a, b].

    Returns:
        (value, err_bound); err_bound is 0.0 when every node integrates in closed form.

    Raises:
        ValueError: If a > b or tol <= 0.
        QuadratureError: If a quadrature fallback cannot reach ``tol``.
    """
    if a > b:
        raise ValueError(f"integrate needs a <= b, got [{a}, {b}]")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    return sig.moment(0.0, a, a, b, tol)


def weighted_segment(
    sig: Signal, sigma: float, t: float, a: float, b: float, tol: float = DEFAULT_TOL
) -> tuple[float, float]:
    """Integral of (f(u) - sigma)*exp(sigma*(u - t)) over [a, b]."""
    value, err = sig.moment(sigma, t, a, b, tol)
    return value - sigma * kernel_mass(sigma, t, a, b), err


def integrate_weighted(
    sig: Signal, sigma: float, t: float, s: float, tol: float = DEFAULT_TOL
) -> tuple[float, float]:
    """Charge integral of (f(u) - sigma)*exp(sigma*(u - t)) over [t, s].

    This is the implicit firing equation divided through by exp(sigma*t).
    """
    if t > s:
        raise ValueError(f"integrate_weighted needs t <= s, got t={t}, s={s}")
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    return weighted_segment(sig, sigma, t, t, s, tol)


def active_terms(sig: DyadicSpikes, window: Window) -> int:
    """Index of the last series term whose anchor cells meet ``window`` (0 if none)."""
    last = 0
    for n, _ in sig.anchors(window.a, window.b):
        last = n
    logger.debug(f"{sig.kind.value}: {last} active terms on [{window.a}, {window.b}]")
    return last


def shift(sig: Signal, tau: float) -> Signal:
    return Shift(float(tau), sig)


def scale(sig: Signal, c: float) -> Signal:
    return Scale(float(c), sig)


def sum_signals(sigs: Iterable[Signal]) -> Signal:
    return Sum(tuple(sigs))


def pieces(sig: Signal, a: float, b: float) -> list[Piece] | None:
    return sig.pieces(a, b)


def _interior(fn: Callable[[float], float], lo: float, hi: float) -> Callable[[float], float]:
    """``fn`` sampled on the open interval (lo, hi); the ends take one-sided limits."""
    left, right = math.nextafter(lo, hi), math.nextafter(hi, lo)
    return lambda u: fn(min(max(u, left), right))


def _segmented_quadrature(
    fn: Callable[[float], float], a: float, b: float, cuts: Sequence[float], tol: float
) -> tuple[float, float]:
    points = [a, *sorted(x for x in cuts if a < x < b), b]
    share = tol / (len(points) - 1)
    parts = [
        adaptive_simpson(_interior(fn, lo, hi), lo, hi, share)
        for lo, hi in zip(points, points[1:])
    ]
    return math.fsum(v for v, _ in parts), sum(e for _, e in parts)


def integrate_map(
    sig: Signal,
    a: float,
    b: float,
    fn: Callable[[float], float],
    tol: float = DEFAULT_TOL,
) -> tuple[float, float]:
    """Integral of fn(sig(u)) over [a, b].

    Exact on constant pieces; adaptive Simpson on every smooth segment otherwise.
    """
    if b <= a:
        return 0.0, 0.0
    part = sig.pieces(a, b)
    if part is None:
        return _segmented_quadrature(lambda u: fn(sig.eval(u)), a, b, sig.breaks(a, b), tol)
    sloped = sum(1 for p in part if p.slope != 0.0)
    share = tol / max(1, sloped)
    values, err = [], 0.0
    for p in part:
        if p.slope == 0.0:
            values.append(fn(p.value) * (p.hi - p.lo))
        else:
            v, e = adaptive_simpson(lambda u, p=p: fn(p.at(u)), p.lo, p.hi, share)
            values.append(v)
            err += e
    return math.fsum(values), err
