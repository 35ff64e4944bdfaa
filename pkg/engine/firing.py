"""Firing-map engine for the normalised leaky integrate-and-fire model.

The membrane potential obeys x' = -sigma*x + f(t), resets to 0 and fires at the
threshold 1. Starting from a reset at t, the next firing time Phi(t) is the first
s > t whose charge

    Q(t, s) = integral over [t, s] of (f(u) - sigma) * exp(sigma*(u - t)) du

reaches 1. The charge is the implicit firing equation divided through by
exp(sigma*t), which keeps every exponential bounded by exp(sigma*(s - t)).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from loguru import logger
from scipy.optimize import brentq

from engine.apnorms import VerdictKind, mean_value
from engine.errors import HorizonExceeded
from engine.signals import (
    Signal,
    Window,
    integrate_weighted,
    kernel_mass_grid,
    linear_moment,
    weighted_segment,
)
from utils.parallel import ordered_map
from utils.settings import (
    DEFAULT_HORIZON,
    DEFAULT_QUAD_TOL,
    DEFAULT_SCAN_STEP,
    DEFAULT_TIME_TOL,
)

THRESHOLD = 1.0
RESET = 0.0

FIRST_CHUNK = 1.0
FIRST_BLOCK = 1024
PROBE_CHECKPOINTS = 64


@dataclass(frozen=True)
class FiringModel:
    """Leak rate sigma >= 0 and the input signal f. sigma = 0 is the perfect integrator."""

    sigma: float
    input: Signal

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be finite and non-negative, got {self.sigma}")


@dataclass
class SolveConfig:
    scan_step: float = DEFAULT_SCAN_STEP
    time_tol: float = DEFAULT_TIME_TOL
    horizon: float = DEFAULT_HORIZON
    varsigma: float | None = None
    quad_tol: float = DEFAULT_QUAD_TOL

    def __post_init__(self):
        for name in ("scan_step", "time_tol", "horizon", "quad_tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.varsigma is not None and not self.varsigma > 0:
            raise ValueError(f"varsigma must be positive, got {self.varsigma}")

    @property
    def effective_horizon(self) -> float:
        """Search horizon; with a known lower bound varsigma of f - sigma, 1/varsigma
        plus one scan step."""
        if self.varsigma is not None:
            return 1.0 / self.varsigma + self.scan_step
        return self.horizon


@dataclass
class FiringTrajectory:
    t0: float
    spikes: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    time_tol: float = DEFAULT_TIME_TOL

    def __len__(self) -> int:
        return len(self.spikes)

    def error_budget(self) -> float:
        """Accumulated time tolerance relative to the last spike, n*time_tol/Phi^n."""
        if not self.spikes or self.spikes[-1] == 0:
            return math.inf
        return len(self.spikes) * self.time_tol / abs(self.spikes[-1])


def charge(model: FiringModel, t: float, s: float, cfg: SolveConfig | None = None) -> float:
    cfg = cfg or SolveConfig()
    value, _ = integrate_weighted(model.input, model.sigma, t, s, cfg.quad_tol)
    return value


# ---------------------------------------------------------------------------
# First-crossing scans
# ---------------------------------------------------------------------------


def _refine(residual, lo: float, hi: float, cfg: SolveConfig) -> float:
    if residual(hi) == 0.0:
        return hi
    return brentq(residual, lo, hi, xtol=cfg.time_tol)


def _grid_charge(sig: Signal, sigma: float, t: float, x: float) -> float:
    """Charge Q(t, x) through the same vectorised path the grid scan uses."""
    s = np.array([x])
    return float(sig.moments_grid(sigma, t, s)[0] - sigma * kernel_mass_grid(sigma, s - t)[0])


def _scan_pieces(model: FiringModel, t: float, end: float, cfg: SolveConfig) -> float | None:
    """Exact scan over the linear pieces of the input.

    Each piece is split where f - sigma changes sign, so the charge is monotone on
    every sub-interval and a crossing is bracketed by the first one whose end
    charge reaches the threshold.
    """
    sigma = model.sigma
    total = 0.0
    lo, chunk = t, FIRST_CHUNK
    while lo < end:
        hi = min(lo + chunk, end)
        for p in model.input.pieces(lo, hi):
            cuts = [p.lo, p.hi]
            if p.slope != 0.0:
                zero = p.lo + (sigma - p.value) / p.slope
                if p.lo < zero < p.hi:
                    cuts.insert(1, zero)
            for x0, x1 in zip(cuts, cuts[1:]):
                head = p.at(x0) - sigma
                gain = linear_moment(head, p.slope, x0, x1, sigma, t)
                if total + gain >= THRESHOLD:
                    base = total

                    def residual(x: float, x0=x0, head=head) -> float:
                        return base + linear_moment(head, p.slope, x0, x, sigma, t) - THRESHOLD

                    logger.debug(f"fire({t}): bracket [{x0}, {x1}] from pieces")
                    return _refine(residual, x0, x1, cfg)
                total += gain
        lo, chunk = hi, 2 * chunk
    return None


def _scan_vectorised(model: FiringModel, t: float, end: float, cfg: SolveConfig) -> float | None:
    """Grid scan at step h with the charge evaluated on whole blocks at once."""
    sig, sigma, h = model.input, model.sigma, cfg.scan_step
    start, block = 0, FIRST_BLOCK
    while True:
        steps = np.arange(start + 1, start + block + 1, dtype=float)
        s = np.minimum(t + h * steps, end)
        with np.errstate(over="ignore", invalid="ignore"):
            q = sig.moments_grid(sigma, t, s) - sigma * kernel_mass_grid(sigma, s - t)
        bad = ~np.isfinite(q)
        hit = np.flatnonzero(q >= THRESHOLD)
        if bad.any() and (not hit.size or np.flatnonzero(bad)[0] < hit[0]):
            raise OverflowError(f"charge overflow after t={t}")
        if hit.size:
            i = int(hit[0])
            hi = float(s[i])
            lo = float(s[i - 1]) if i > 0 else (t + h * start if start else t)
            logger.debug(f"fire({t}): bracket [{lo}, {hi}] from grid scan")
            # the bracket was found on grid charges, so refine on the same ones
            return _refine(lambda x: _grid_charge(sig, sigma, t, x) - THRESHOLD, lo, hi, cfg)
        if s[-1] >= end:
            return None
        start, block = start + block, 2 * block


def _scan_sequential(model: FiringModel, t: float, end: float, cfg: SolveConfig) -> float | None:
    """Grid scan at step h accumulating one segment integral per step."""
    sig, sigma, h = model.input, model.sigma, cfg.scan_step
    steps = max(1, int(math.ceil((end - t) / h)))
    seg_tol = cfg.quad_tol / steps
    total = 0.0
    x = t
    for k in range(1, steps + 1):
        y = min(t + k * h, end)
        gain, _ = weighted_segment(sig, sigma, t, x, y, seg_tol)
        if total + gain >= THRESHOLD:
            base, left = total, x

            def residual(s: float) -> float:
                return base + weighted_segment(sig, sigma, t, left, s, seg_tol)[0] - THRESHOLD

            logger.debug(f"fire({t}): bracket [{x}, {y}] from sequential scan")
            return _refine(residual, x, y, cfg)
        total += gain
        x = y
    return None


def _first_crossing(model: FiringModel, t: float, cfg: SolveConfig) -> float:
    end = t + cfg.effective_horizon
    sig = model.input
    try:
        if sig.pieces(t, min(end, t + cfg.scan_step)) is not None:
            found = _scan_pieces(model, t, end, cfg)
        elif sig.moments_grid(model.sigma, t, np.array([t])) is not None:
            found = _scan_vectorised(model, t, end, cfg)
        else:
            found = _scan_sequential(model, t, end, cfg)
    except OverflowError as exc:
        logger.debug(f"fire({t}): {exc}")
        raise HorizonExceeded(t, end) from exc
    if found is None:
        raise HorizonExceeded(t, end)
    return float(found)


def fire(model: FiringModel, t: float, cfg: SolveConfig | None = None) -> float:
    """Next firing time Phi(t) after a reset at ``t``.

    Args:
        model: LIF model.
        t: Reset time.
        cfg: Solver settings; the horizon bounds Phi(t) - t.

    Returns:
        The first s in (t, t + horizon] with charge(t, s) >= 1, refined to within
        ``cfg.time_tol``.

    Raises:
        HorizonExceeded: If the charge stays below 1 on the whole horizon. This is
            inconclusive; Phi(t) may still exist beyond it.
    """
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    return _first_crossing(model, t, cfg or SolveConfig())


def displacement(model: FiringModel, t: float, cfg: SolveConfig | None = None) -> float:
    """Psi(t) = Phi(t) - t."""
    return fire(model, t, cfg) - t


def trajectory(
    model: FiringModel, t0: float, n: int, cfg: SolveConfig | None = None
) -> FiringTrajectory:
    """The spike train Phi(t0), Phi^2(t0), ..., Phi^n(t0).

    Raises:
        HorizonExceeded: With ``index`` set to the failing spike and ``partial``
            holding the spikes found so far.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    cfg = cfg or SolveConfig()
    traj = FiringTrajectory(t0=t0, time_tol=cfg.time_tol)
    t = t0
    for i in range(n):
        try:
            s = fire(model, t, cfg)
        except HorizonExceeded as exc:
            logger.warning(f"trajectory from {t0} stopped at spike {i + 1}: {exc}")
            raise HorizonExceeded(exc.t, exc.reached, index=i + 1, partial=traj) from exc
        traj.spikes.append(s)
        traj.residuals.append(charge(model, t, s, cfg) - THRESHOLD)
        t = s
    logger.info(f"trajectory from {t0}: {n} spikes, last at {t}")
    return traj


def firing_rate(
    model: FiringModel, t0: float, n: int, cfg: SolveConfig | None = None
) -> tuple[float, list[float]]:
    """Rate estimates k / Phi^k(t0) for k = 1..n; the last one is the estimate."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    spikes = trajectory(model, t0, n, cfg).spikes
    sequence = [(k + 1) / s for k, s in enumerate(spikes)]
    return sequence[-1], sequence


def rotation_number(
    model: FiringModel, t0: float, n: int, cfg: SolveConfig | None = None
) -> float:
    """Average interspike interval (Phi^n(t0) - t0) / n."""
    spikes = trajectory(model, t0, n, cfg).spikes
    return (spikes[-1] - t0) / n


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------


class ProbeVerdict(str, Enum):
    LIKELY_DEFINED = "likely_defined"
    UNKNOWN = "unknown"


@dataclass
class WellDefinedProbe:
    verdict: ProbeVerdict
    log_charge: list[tuple[float, float]]
    mean_limit: float | None = None


def well_defined_probe(
    model: FiringModel,
    t_max: float,
    cfg: SolveConfig | None = None,
    growth_levels: int = 3,
) -> WellDefinedProbe:
    """Heuristic check that the firing map is defined everywhere.

    Tracks log I(T) for the running charge I(T) = integral over [0, T] of
    (f - sigma)*exp(sigma*u) at equally spaced checkpoints. LIKELY_DEFINED when the
    late maximum of log I reaches ``growth_levels`` doublings and beats the early
    maximum, or when the mean of f converges to a value above sigma. Never reports
    undefinedness.
    """
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    cfg = cfg or SolveConfig()
    sigma, sig = model.sigma, model.input
    points = np.linspace(0.0, t_max, PROBE_CHECKPOINTS + 1)
    seg_tol = cfg.quad_tol / PROBE_CHECKPOINTS
    shifted = 0.0
    log_charge: list[tuple[float, float]] = []
    for lo, hi in zip(points, points[1:]):
        lo, hi = float(lo), float(hi)
        gain, _ = weighted_segment(sig, sigma, hi, lo, hi, seg_tol)
        shifted = shifted * math.exp(-sigma * (hi - lo)) + gain
        level = sigma * hi + math.log(shifted) if shifted > 0 else -math.inf
        log_charge.append((hi, level))

    half = len(log_charge) // 2
    early = max(v for _, v in log_charge[:half])
    late = max(v for _, v in log_charge[half:])
    growing = late >= growth_levels * math.log(2.0) and late > early

    estimate = mean_value(sig, [t_max * k / 8 for k in range(1, 9)])
    limit = estimate.verdict.limit if estimate.verdict.kind is VerdictKind.CONVERGED else None
    above = limit is not None and limit > sigma + estimate.verdict.tol

    verdict = ProbeVerdict.LIKELY_DEFINED if growing or above else ProbeVerdict.UNKNOWN
    logger.debug(f"well_defined_probe: late log-charge {late:.3f}, mean {limit}, {verdict.value}")
    return WellDefinedProbe(verdict=verdict, log_charge=log_charge, mean_limit=limit)


def displacement_modulus(
    model: FiringModel,
    deltas: Sequence[float],
    window: Window,
    samples: int = 200,
    cfg: SolveConfig | None = None,
) -> list[tuple[float, float]]:
    """Sampled modulus of continuity max |Psi(t + delta) - Psi(t)| for each delta."""
    cfg = cfg or SolveConfig()
    ts = [float(t) for t in np.linspace(window.a, window.b, samples)]
    base = ordered_map(lambda t: displacement(model, t, cfg), ts)
    out = []
    for delta in deltas:
        moved = ordered_map(lambda t: displacement(model, t + delta, cfg), ts)
        out.append((float(delta), max(abs(x - y) for x, y in zip(moved, base))))
    return out


def firing_map_distance(
    model: FiringModel,
    other: FiringModel,
    ts: Sequence[float],
    cfg: SolveConfig | None = None,
) -> float:
    """max over ``ts`` of |Phi_model(t) - Phi_other(t)|."""
    cfg = cfg or SolveConfig()
    return max(
        ordered_map(lambda t: abs(fire(model, float(t), cfg) - fire(other, float(t), cfg)), ts)
    )
