"""Almost-periodicity metrics on bounded windows.

Every sup over the real line is replaced by a maximum over a finite anchor grid,
so the reported norms and deviations are lower bounds of the true suprema.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from loguru import logger

from engine.signals import (
    DEFAULT_TOL,
    Piece,
    Signal,
    Truncated,
    Window,
    integrate,
    integrate_map,
    shift,
)
from utils.parallel import ordered_map

MEASURE_SUBSAMPLES = 2048
DEFAULT_MEAN_TOL = 1e-3
DEFAULT_MEAN_TRAILING = 3


@dataclass
class NormParams:
    """Parameters of the sliding-window seminorm ||f||_{S^p_r} on a finite window."""

    window: Window
    p: float = 1.0
    r: float = 1.0
    samples_per_unit: int = 16

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if self.samples_per_unit <= 0:
            raise ValueError(f"samples_per_unit must be positive, got {self.samples_per_unit}")


def _power_map(p: float):
    if p == 1.0:
        return abs
    return lambda v: abs(v) ** p


def _window_norm(f: Signal, u: float, r: float, p: float, tol: float) -> float:
    value, _ = integrate_map(f, u, u + r, _power_map(p), tol)
    return (max(value, 0.0) / r) ** (1.0 / p)


def stepanov_norm(f: Signal, params: NormParams, tol: float = DEFAULT_TOL) -> float:
    """Grid maximum of ((1/r) * integral of |f|^p over [t, t+r])^(1/p).

    The grid is ``params.window`` sampled at ``params.samples_per_unit``; the result
    is a lower bound of the true seminorm.
    """
    anchors = params.window.grid(params.samples_per_unit)
    norms = ordered_map(
        lambda u: _window_norm(f, float(u), params.r, params.p, tol), anchors
    )
    return max(norms)


def stepanov_norm_integer(
    f: Signal, p: float, k0: int, k1: int, tol: float = DEFAULT_TOL
) -> float:
    """Integer-anchored seminorm: max over cells l in [k0, k1] of (int_l^{l+1} |f|^p)^(1/p)."""
    if k0 > k1:
        raise ValueError(f"Need k0 <= k1, got {k0} > {k1}")
    norms = ordered_map(lambda l: _window_norm(f, float(l), 1.0, p, tol), range(k0, k1 + 1))
    return max(norms)


# ---------------------------------------------------------------------------
# Measure deviation D(eta; f, g)
# ---------------------------------------------------------------------------


def _level_measure(piece: Piece, eta: float) -> float:
    """Measure of {x in [lo, hi) : |value(x)| >= eta} for one linear piece."""
    width = piece.hi - piece.lo
    if piece.slope == 0.0:
        return width if abs(piece.value) >= eta else 0.0
    total = 0.0
    for sign in (1.0, -1.0):
        v, s = sign * piece.value, sign * piece.slope
        cross = piece.lo + (eta - v) / s
        if s > 0:
            total += max(0.0, piece.hi - max(piece.lo, cross))
        else:
            total += max(0.0, min(piece.hi, cross) - piece.lo)
    return min(total, width)


def _exceed_measure(diff: Signal, eta: float, a: float, b: float) -> float:
    part = diff.pieces(a, b)
    if part is not None:
        return math.fsum(_level_measure(p, eta) for p in part)
    count = max(1, int(math.ceil((b - a) * MEASURE_SUBSAMPLES)))
    mids = a + (np.arange(count) + 0.5) * ((b - a) / count)
    hits = np.count_nonzero(np.abs(diff.values(mids)) >= eta)
    return (b - a) * hits / count


def d_measure(f: Signal, g: Signal, eta: float, window: Window, grid: int = 16) -> float:
    """Grid maximum over anchors u of the measure of {t in [u, u+1] : |f - g| >= eta}.

    Exact interval arithmetic when f - g is piecewise linear; otherwise each unit
    window is sub-sampled at MEASURE_SUBSAMPLES midpoints.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    diff = f - g
    anchors = window.grid(grid)
    if diff.pieces(window.a, window.a + 1.0) is None:
        logger.debug(f"d_measure: sampling at {MEASURE_SUBSAMPLES} points per unit")
    measures = ordered_map(lambda u: _exceed_measure(diff, eta, float(u), float(u) + 1.0), anchors)
    return max(measures)


def d_measure_integer(f: Signal, g: Signal, eta: float, k0: int, k1: int) -> float:
    """D(eta; f, g) with anchors restricted to the integers k0..k1."""
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if k0 > k1:
        raise ValueError(f"Need k0 <= k1, got {k0} > {k1}")
    diff = f - g
    measures = ordered_map(
        lambda l: _exceed_measure(diff, eta, float(l), float(l) + 1.0), range(k0, k1 + 1)
    )
    return max(measures)


def f_norm_prime(f: Signal, window: Window, grid: int = 16, tol: float = DEFAULT_TOL) -> float:
    """Grid maximum over anchors u of the integral of |f|/(1+|f|) over [u, u+1]."""
    anchors = window.grid(grid)

    def one(u: float) -> float:
        value, _ = integrate_map(f, u, u + 1.0, lambda v: abs(v) / (1.0 + abs(v)), tol)
        return value

    return max(ordered_map(lambda u: one(float(u)), anchors))


def d_distances(
    f: Signal,
    approximants: Sequence[Signal],
    eta: float,
    window: Window,
    grid: int = 16,
) -> list[tuple[float, float]]:
    """(D(eta; g_k, f), |g_k - f|') for every approximant g_k."""
    return [
        (d_measure(g, f, eta, window, grid), f_norm_prime(g - f, window, grid))
        for g in approximants
    ]


# ---------------------------------------------------------------------------
# Almost periods
# ---------------------------------------------------------------------------


class ScanKind(str, Enum):
    UNIFORM = "uniform"
    STEPANOV = "stepanov"
    MU = "mu"


@dataclass(frozen=True)
class ScanMode:
    kind: ScanKind
    p: float = 1.0
    eta: float = 0.5

    @classmethod
    def uniform(cls) -> ScanMode:
        return cls(ScanKind.UNIFORM)

    @classmethod
    def stepanov(cls, p: float = 1.0) -> ScanMode:
        if not p >= 1:
            raise ValueError(f"p must be >= 1, got {p}")
        return cls(ScanKind.STEPANOV, p=p)

    @classmethod
    def mu(cls, eta: float) -> ScanMode:
        if not eta > 0:
            raise ValueError(f"eta must be positive, got {eta}")
        return cls(ScanKind.MU, eta=eta)

    def accepts(self, deviation: float, eps: float) -> bool:
        # measure deviations use <=, sup and S^p deviations use <
        if self.kind is ScanKind.MU:
            return deviation <= eps
        return deviation < eps


@dataclass
class AlmostPeriodScan:
    mode: ScanMode
    eps: float
    tau_grid: list[float]
    deviations: list[float]
    accepted: list[tuple[float, float]] = field(default_factory=list)
    max_gap: float = math.inf

    def rows(self) -> list[tuple[float, float, bool]]:
        kept = {tau for tau, _ in self.accepted}
        return [(tau, dev, tau in kept) for tau, dev in zip(self.tau_grid, self.deviations)]


def _max_gap(taus: Sequence[float]) -> float:
    if len(taus) < 2:
        return math.inf
    ordered = sorted(taus)
    return max(b - a for a, b in zip(ordered, ordered[1:]))


def scan_periods(
    f: Signal,
    mode: ScanMode,
    eps: float,
    tau_grid: Sequence[float],
    window: Window,
    samples_per_unit: int = 64,
) -> AlmostPeriodScan:
    """Deviation of every translate f^tau from f and the accepted eps-almost periods.

    Args:
        f: Signal under test.
        mode: Deviation used (sup, S^p_1 seminorm or measure deviation D).
        eps: Acceptance threshold.
        tau_grid: Candidate translations; integer grids probe integer almost periods.
        window: Window on which the deviation is sampled.
        samples_per_unit: Grid density of the sampled sup.

    Returns:
        AlmostPeriodScan with one deviation per candidate, in grid order.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    taus = [float(tau) for tau in tau_grid]

    if mode.kind is ScanKind.UNIFORM:
        ts = window.grid(samples_per_unit)
        base = f.values(ts)

        def deviation(tau: float) -> float:
            return float(np.max(np.abs(f.values(ts + tau) - base)))

    elif mode.kind is ScanKind.STEPANOV:
        params = NormParams(window, p=mode.p, r=1.0, samples_per_unit=samples_per_unit)

        def deviation(tau: float) -> float:
            return stepanov_norm(shift(f, tau) - f, params)

    else:

        def deviation(tau: float) -> float:
            return d_measure(shift(f, tau), f, mode.eta, window, samples_per_unit)

    deviations = ordered_map(deviation, taus)
    accepted = [(tau, dev) for tau, dev in zip(taus, deviations) if mode.accepts(dev, eps)]
    scan = AlmostPeriodScan(
        mode=mode,
        eps=eps,
        tau_grid=taus,
        deviations=deviations,
        accepted=accepted,
        max_gap=_max_gap([tau for tau, _ in accepted]),
    )
    logger.debug(
        f"scan_periods[{mode.kind.value}]: {len(accepted)}/{len(taus)} accepted, "
        f"max_gap={scan.max_gap}"
    )
    return scan


# ---------------------------------------------------------------------------
# Mean value
# ---------------------------------------------------------------------------


class VerdictKind(str, Enum):
    CONVERGED = "converged"
    OSCILLATING = "oscillating"
    INCONCLUSIVE = "inconclusive"


@dataclass
class MeanVerdict:
    kind: VerdictKind
    limit: float | None = None
    tol: float | None = None
    witness: tuple[float, float] | None = None


@dataclass
class MeanEstimate:
    schedule: list[float]
    partials: list[tuple[float, float]]
    verdict: MeanVerdict
    alpha: float = 0.0

    @property
    def last(self) -> float:
        return self.partials[-1][1]


def _judge(partials: list[tuple[float, float]], trailing: int, tol: float) -> MeanVerdict:
    tail = [m for _, m in partials[-trailing:]]
    if len(tail) >= trailing and max(tail) - min(tail) <= tol:
        return MeanVerdict(VerdictKind.CONVERGED, limit=tail[-1], tol=tol)

    # oscillation needs the late partials to move both up and down by more than tol;
    # monotone drift stays inconclusive
    median = float(np.median([t for t, _ in partials]))
    late = [(t, m) for t, m in partials if t >= median]
    rise: tuple[float, float, float] | None = None
    fall: tuple[float, float, float] | None = None
    for i, (t1, m1) in enumerate(late):
        for t2, m2 in late[i + 1 :]:
            step = m2 - m1
            if step > tol and (rise is None or step > rise[0]):
                rise = (step, t1, t2)
            if -step > tol and (fall is None or -step > fall[0]):
                fall = (-step, t1, t2)
    if rise is not None and fall is not None:
        _, t1, t2 = max(rise, fall)
        return MeanVerdict(VerdictKind.OSCILLATING, tol=tol, witness=(t1, t2))
    return MeanVerdict(VerdictKind.INCONCLUSIVE, tol=tol)


def mean_value(
    f: Signal,
    schedule: Sequence[float],
    trailing: int = DEFAULT_MEAN_TRAILING,
    tol: float = DEFAULT_MEAN_TOL,
    alpha: float = 0.0,
    quad_tol: float = DEFAULT_TOL,
) -> MeanEstimate:
    """Partial means (1/T) * integral of f over [alpha, alpha+T] along ``schedule``.

    Verdicts:
        converged: the last ``trailing`` partials agree within ``tol``.
        oscillating: partials at T >= median(schedule) both rise and fall by more than
            ``tol``; the pair is the witness.
        inconclusive: neither.

    Raises:
        ValueError: If the schedule is empty, not strictly increasing or not positive.
    """
    ts = [float(t) for t in schedule]
    if not ts:
        raise ValueError("Schedule cannot be empty.")
    if ts[0] <= 0 or any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError(f"Schedule must be positive and strictly increasing, got {ts}")
    if trailing < 1 or not tol > 0:
        raise ValueError(f"mean_value needs trailing >= 1 and tol > 0, got {trailing}, {tol}")

    ends = [alpha, *(alpha + t for t in ts)]
    chunks = ordered_map(
        lambda ab: integrate(f, ab[0], ab[1], quad_tol)[0], list(zip(ends, ends[1:]))
    )
    partials = []
    running: list[float] = []
    for t, chunk in zip(ts, chunks):
        running.append(chunk)
        partials.append((t, math.fsum(running) / t))
    verdict = _judge(partials, trailing, tol)
    logger.debug(f"mean_value: {verdict.kind.value} after {len(ts)} partials")
    return MeanEstimate(schedule=ts, partials=partials, verdict=verdict, alpha=alpha)


def truncate(f: Signal, level: float) -> Signal:
    """The truncated signal max(-level, min(f, level))."""
    return Truncated(f, float(level))


def antiderivative_residual(
    f: Signal, m: float, window: Window, grid: int = 64, tol: float = DEFAULT_TOL
) -> float:
    """Grid maximum over t of |integral of (f(s) - m) over [0, t]|."""
    ts = [float(t) for t in window.grid(grid)]
    first = ts[0]
    if first >= 0:
        start = integrate(f, 0.0, first, tol)[0]
    else:
        start = -integrate(f, first, 0.0, tol)[0]
    steps = ordered_map(lambda ab: integrate(f, ab[0], ab[1], tol)[0], list(zip(ts, ts[1:])))
    total = start
    worst = abs(start - m * first)
    for t, step in zip(ts[1:], steps):
        total += step
        worst = max(worst, abs(total - m * t))
    return worst
