"""Built-in acceptance checks.

Every check reproduces a worked example or a property of the model with a fixed
seed and prints PASS/FAIL with the observed and expected values. ``verify``
exits 0 only if every selected check passes.
"""

import math
import sys
import time
from collections.abc import Callable
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from loguru import logger

from adapters.cli.presets import LOG3_2, PRESETS
from engine import apnorms, firing, haar
from engine.errors import HorizonExceeded
from engine.signals import (
    Const,
    DyadicSpikes,
    Func,
    SeriesKind,
    TrigPoly,
    Window,
    evaluate,
    integrate,
    integrate_weighted,
)
from utils.schedule_helpers import pow2tower

LN2 = math.log(2.0)
LN3 = math.log(3.0)


@dataclass
class Outcome:
    passed: bool
    observed: str
    expected: str


@dataclass(frozen=True)
class Check:
    id: str
    group: str
    description: str
    run: Callable[[], Outcome]


def _preset_model(name: str, sigma: float | None = None) -> firing.FiringModel:
    preset = PRESETS[name]
    return firing.FiringModel(preset.sigma if sigma is None else sigma, preset.build())


def step_input_phi(t: float) -> float:
    """Closed-form firing map of the 2-periodic input (2 then 1) with sigma = 1."""
    k = math.floor(t / 2.0)
    phase = t - 2.0 * k
    if phase <= 1.0 - LN2:
        return math.log(2.0 * math.exp(t))
    if phase < 1.0:
        return math.log(2.0 * math.exp(t) + math.exp(2 * k + 2) - math.exp(2 * k + 1))
    return math.log(math.exp(t) + math.exp(2 * k + 2))


# ---------------------------------------------------------------------------
# signals
# ---------------------------------------------------------------------------


def check_eval_examples() -> Outcome:
    observed = (
        evaluate(PRESETS["ex4_3"].build(), 0.5),
        evaluate(Const(3.0), 17.2),
        evaluate(DyadicSpikes(SeriesKind.MU_NO_MU), 0.3),
    )
    return Outcome(observed == (2.0, 3.0, 1.0), str(observed), "(2, 3, 1)")


def check_weighted_examples() -> Outcome:
    first, _ = integrate_weighted(PRESETS["ex4_3"].build(), 1.0, 0.0, LN2)
    second, _ = integrate_weighted(Const(2.0), 1.0, 0.0, 1.0)
    passed = abs(first - 1.0) <= 1e-12 and abs(second - (math.e - 1.0)) <= 1e-12
    return Outcome(passed, f"{first:.15g}, {second:.15g}", f"1, {math.e - 1:.15g}")


def check_unbounded_cells() -> Outcome:
    f = DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES)
    worst = math.inf
    for n in range(1, 8):
        for z in (-(3**n), 3**n):
            value, _ = integrate(f, z, z + 1)
            worst = min(worst, value - n)
    return Outcome(worst >= 0.0, f"min(integral - n) = {worst:.6g}", ">= 0")


def check_mu_half_cells() -> Outcome:
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    # odd cells carry the single n = 1 spike and integrate to 3/2 over the first half
    zs = [2 * q for q in range(-10, 11) if q != 0]
    worst = max(abs(integrate(f, z, z + 0.5)[0] - 1.0) for z in zs)
    return Outcome(worst <= 1e-9, f"max |int - 1| = {worst:.3g}", "<= 1e-9")


def check_mu_window_bound() -> Outcome:
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    rng = np.random.default_rng(0)
    us = rng.uniform(-(2.0**20), 2.0**20, 10_000)
    worst = -math.inf
    for m in range(2, 13):
        width = 2.0 ** (1 - m)
        bound = 2.0 ** (3 - m / 2)
        peak = max(integrate(f, float(u), float(u) + width)[0] for u in us)
        worst = max(worst, peak / bound)
    return Outcome(worst <= 1.0, f"max ratio to bound = {worst:.4f}", "<= 1")


# ---------------------------------------------------------------------------
# apnorms
# ---------------------------------------------------------------------------


def check_mean_meanless() -> Outcome:
    f = DyadicSpikes(SeriesKind.MEANLESS_SERIES)
    estimate = apnorms.mean_value(f, pow2tower(4))
    means = dict(estimate.partials)
    passed = estimate.verdict.kind is apnorms.VerdictKind.OSCILLATING
    observed = []
    for n in (2, 3, 4):
        tower = 2.0 ** (2**n)
        low, high = means[tower], means[tower + 1]
        passed &= low <= 2 / 3 and high >= tower / (tower + 1)
        observed.append(f"n={n}: {low:.4f}/{high:.4f}")
    return Outcome(
        passed,
        "; ".join(observed) + f"; {estimate.verdict.kind.value}",
        "M(T) <= 2/3, M(T+1) >= T/(T+1), oscillating",
    )


def check_mean_unbounded() -> Outcome:
    f = DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES)
    target = math.fsum(n / (2 * 3**n) for n in range(1, 80))
    estimate = apnorms.mean_value(f, [2.0 * 3**k for k in range(1, 9)], tol=5e-3)
    observed = estimate.last
    verdict = estimate.verdict.kind
    passed = (
        abs(target - 3 / 8) <= 1e-15
        and abs(observed - 3 / 8) <= 0.02
        and verdict is apnorms.VerdictKind.CONVERGED
    )
    return Outcome(
        passed,
        f"M_T = {observed:.6f} ({verdict.value}), series = {target:.17g}",
        "3/8 within 0.02, converged at tol 5e-3",
    )


def check_antiderivative() -> Outcome:
    f = PRESETS["ex4_3"].build()
    step_residual = apnorms.antiderivative_residual(f, 1.5, Window(-50.0, 50.0), grid=16)
    bound = 2.0 * integrate(f, 0.0, 2.0)[0]
    sine = apnorms.antiderivative_residual(
        TrigPoly(((1.0, 0.0, 1.0),)), 0.0, Window(0.0, 7.0), grid=1000
    )
    passed = step_residual <= bound and abs(sine - 2.0) <= 1e-6
    return Outcome(
        passed, f"{step_residual:.6g} (bound {bound:.6g}), sine {sine:.9f}", "<= 6, sine 2"
    )


def check_stepanov_examples() -> Outcome:
    sine = TrigPoly(((1.0, 0.0, 1.0),))
    params = apnorms.NormParams(Window(0.0, 1.0), p=1.0, r=2 * math.pi, samples_per_unit=4)
    norm = apnorms.stepanov_norm(sine, params)
    f = DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES)
    witnesses = []
    for n in range(1, 5):
        z = -(3.0**n)
        witnesses.append(apnorms.stepanov_norm(f, apnorms.NormParams(Window(z - 1, z + 1))) - n)
    passed = abs(norm - 2 / math.pi) <= 1e-9 and min(witnesses) >= 0
    return Outcome(passed, f"{norm:.12f}, min(norm - n) = {min(witnesses):.4g}", "2/pi, >= 0")


def check_d_measure() -> Outcome:
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    window = Window(-32.0, 32.0)
    observed = []
    passed = True
    for k in range(1, 6):
        d = apnorms.d_measure(f, DyadicSpikes(SeriesKind.MU_NO_MU, max_terms=k), 0.5, window, 4)
        passed &= d <= 2.0**-k
        observed.append(f"{d:.4g}")
    g = DyadicSpikes(SeriesKind.MU_NO_MU, max_terms=2)
    grid = apnorms.d_measure(f, g, 0.5, Window(-8.0, 8.0), 8)
    integer = apnorms.d_measure_integer(f, g, 0.5, -8, 7)
    passed &= integer <= grid <= 2 * integer
    return Outcome(
        passed,
        f"D(g_k) = {', '.join(observed)}; sandwich {integer:.4g} <= {grid:.4g}",
        "D(g_k) <= 2^-k; D_int <= D <= 2 D_int",
    )


def check_scan_periodic() -> Outcome:
    f = PRESETS["ex4_3"].build()
    scan = apnorms.scan_periods(
        f, apnorms.ScanMode.uniform(), 0.1, [2.0, 4.0, 6.0], Window(0.0, 10.0)
    )
    quasi = PRESETS["ex6_4"].build()
    scan2 = apnorms.scan_periods(
        quasi, apnorms.ScanMode.uniform(), 1.0, range(1, 501), Window(0.0, 100.0), 32
    )
    accepted = [tau for tau, _ in scan2.accepted]
    passed = max(scan.deviations) == 0.0 and bool(accepted) and math.isfinite(scan2.max_gap)
    return Outcome(
        passed,
        f"period deviations {scan.deviations}; accepted {accepted[:6]} gap {scan2.max_gap}",
        "zeros; non-empty with finite gap",
    )


def check_truncation() -> Outcome:
    f = DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES)
    t_short, t_long = 2.0 * 3**6, 2.0 * 3**8
    means = [apnorms.mean_value(apnorms.truncate(f, n), [t_short]).last for n in (1, 4, 16)]
    full = apnorms.mean_value(f, [t_long]).last
    gaps = [full - apnorms.mean_value(apnorms.truncate(f, n), [t_long]).last for n in (4, 16, 100)]
    passed = means[0] <= means[1] <= means[2] and gaps[0] > gaps[1] > gaps[2] >= -1e-12
    return Outcome(
        passed,
        f"M(f_N) = {[round(m, 6) for m in means]}; gaps {[round(g, 6) for g in gaps]}",
        "non-decreasing means, decreasing gaps",
    )


def check_positive_mean_probe() -> Outcome:
    excess = DyadicSpikes(SeriesKind.MU_NO_MU) - Const(1.0)
    estimate = apnorms.mean_value(excess, [4.0 * n for n in range(1, 65)])
    low = min(m for _, m in estimate.partials)
    return Outcome(low > 0.0, f"min M_T = {low:.6g}", "> 0")


# ---------------------------------------------------------------------------
# firing
# ---------------------------------------------------------------------------


def check_step_points() -> Outcome:
    model = _preset_model("ex4_3")
    observed = [firing.fire(model, t) for t in (0.0, 1.0, 0.2)]
    expected = [LN2, math.log(math.e + math.e**2), 0.2 + LN2]
    err = max(abs(a - b) for a, b in zip(observed, expected))
    return Outcome(err <= 1e-9, f"max error {err:.3g}", "<= 1e-9")


def check_step_closed_form() -> Outcome:
    model = _preset_model("ex4_3")
    rng = np.random.default_rng(1)
    worst = 0.0
    branches = ((0.0, 1.0 - LN2), (1.0 - LN2, 1.0), (1.0, 2.0))
    for lo, hi in branches:
        for _ in range(100):
            k = int(rng.integers(-3, 4))
            t = 2.0 * k + float(rng.uniform(lo, hi))
            worst = max(worst, abs(firing.fire(model, t) - step_input_phi(t)))
    return Outcome(worst <= 1e-6, f"max error {worst:.3g}", "<= 1e-6")


def check_pi_rate_equals_mean() -> Outcome:
    model = _preset_model("ex6_4")
    rate, _ = firing.firing_rate(model, 0.0, 2000)
    return Outcome(abs(rate - 2.0) <= 2e-3, f"{rate:.6f}", "2 within 2e-3")


def check_equal_means_distinct_rates() -> Outcome:
    f, g = _preset_model("ex6_13_f"), _preset_model("ex6_13_g")
    rate_f, _ = firing.firing_rate(f, 0.0, 200)
    rate_g, _ = firing.firing_rate(g, 0.0, 200)
    span = 1000 * LN3
    mean_f = integrate(f.input, 0.0, span)[0] / span
    mean_g = integrate(g.input, 0.0, span)[0] / span
    expected_g = 1.0 / math.log(1.0 + 1.0 / (2.0 - LOG3_2))
    passed = (
        abs(rate_f - 2 / LN3) <= 1e-6
        and abs(rate_g - expected_g) <= 1e-6
        and abs(mean_f - mean_g) <= 1e-6
        and abs(mean_f - (3 - LOG3_2)) <= 1e-6
    )
    return Outcome(
        passed,
        f"FR_f={rate_f:.9f} FR_g={rate_g:.9f} M_f={mean_f:.9f} M_g={mean_g:.9f}",
        f"FR_f={2 / LN3:.9f} FR_g={expected_g:.9f} M={3 - LOG3_2:.9f}",
    )


def check_displacement_bound() -> Outcome:
    rng = np.random.default_rng(2)
    ts = rng.uniform(-100.0, 100.0, 1000)
    cfg = firing.SolveConfig(varsigma=1.0)
    worst_low, worst_high = math.inf, -math.inf
    for model in (
        _preset_model("ex4_3", sigma=0.0),
        firing.FiringModel(0.0, TrigPoly(((0.0, 2.0, 0.0), (0.0, 1.0, 1.0)))),
    ):
        for t in ts:
            psi = firing.displacement(model, float(t), cfg)
            worst_low, worst_high = min(worst_low, psi), max(worst_high, psi)
    passed = worst_low > 0 and worst_high <= 1.0 + 1e-6
    return Outcome(passed, f"Psi in [{worst_low:.6g}, {worst_high:.9g}]", "(0, 1]")


def check_periodic_covariance() -> Outcome:
    model = _preset_model("ex4_3")
    rng = np.random.default_rng(3)
    worst = max(
        abs(firing.fire(model, t + 2.0) - firing.fire(model, t) - 2.0)
        for t in (float(x) for x in rng.uniform(-20.0, 20.0, 100))
    )
    return Outcome(worst <= 1e-8, f"{worst:.3g}", "<= 1e-8")


def check_mu_no_mu_displacement() -> Outcome:
    model = _preset_model("ex4_12")
    flat = max(abs(firing.displacement(model, t) - 1.0) for t in np.linspace(-0.25, 0.0, 26))
    short = max(
        firing.displacement(model, float(z) + s)
        for z in (-4, -3, -2, -1, 1, 2, 3, 4)
        for s in np.linspace(-0.25, 0.0, 11)
    )
    samples = np.linspace(-1.0, 0.0, 201)
    base = [firing.displacement(model, float(t)) for t in samples]
    fractions = []
    for tau in (1, 2, 4, 8):
        moved = [firing.displacement(model, float(t) + tau) for t in samples]
        fractions.append(sum(abs(a - b) >= 0.25 for a, b in zip(moved, base)) / len(samples))
    passed = flat <= 1e-8 and short <= 0.75 + 1e-9 and min(fractions) >= 0.25 - 0.02
    return Outcome(
        passed,
        f"|Psi-1| {flat:.3g}; max Psi {short:.6g}; fractions {fractions}",
        "<= 1e-8; <= 3/4; >= 0.23",
    )


def check_alternating_jumps() -> Outcome:
    model = _preset_model("ex4_13")
    observed = []
    passed = True
    for n, z in ((3, 1), (4, -3), (5, 5)):
        gap = abs(firing.fire(model, z + 1.0 - 1.0 / (n + 1)) - firing.fire(model, z + 1.0))
        passed &= gap >= 0.5 - 1e-6
        observed.append(f"n={n}: {gap:.6f}")
    return Outcome(passed, "; ".join(observed), ">= 1/2")


def check_undefined_firing() -> Outcome:
    model = firing.FiringModel(0.0, TrigPoly(((0.5, 0.0, 1.0),)))
    try:
        s = firing.fire(model, math.pi / 2)
    except HorizonExceeded as exc:
        return Outcome(True, f"HorizonExceeded up to {exc.reached:.6g}", "HorizonExceeded")
    return Outcome(False, f"fired at {s}", "HorizonExceeded")


def check_well_defined_probe() -> Outcome:
    verdicts = (
        firing.well_defined_probe(firing.FiringModel(0.0, Const(1.0)), 10.0).verdict,
        firing.well_defined_probe(_preset_model("ex4_3"), 20.0).verdict,
        firing.well_defined_probe(
            firing.FiringModel(1.0, Func(lambda t: 1.0 + math.exp(-2.0 * t), "decay")), 20.0
        ).verdict,
    )
    expected = (
        firing.ProbeVerdict.LIKELY_DEFINED,
        firing.ProbeVerdict.LIKELY_DEFINED,
        firing.ProbeVerdict.UNKNOWN,
    )
    return Outcome(
        verdicts == expected,
        ", ".join(v.value for v in verdicts),
        ", ".join(v.value for v in expected),
    )


def check_firing_properties() -> Outcome:
    model = _preset_model("ex4_3")
    rng = np.random.default_rng(4)
    pairs = np.sort(rng.uniform(-50.0, 50.0, (1000, 2)), axis=1)
    monotone = all(
        firing.fire(model, float(a)) < firing.fire(model, float(b)) for a, b in pairs if a < b
    )
    traj = firing.trajectory(model, 0.0, 200)
    residual = max(abs(r) for r in traj.residuals)
    rate_a, _ = firing.firing_rate(model, 0.0, 1000)
    rate_b, _ = firing.firing_rate(model, 0.37, 1000)
    passed = monotone and residual <= 1e-8 and abs(rate_a - rate_b) <= 5e-3
    return Outcome(
        passed,
        f"monotone={monotone} residual={residual:.3g} rates {rate_a:.6f}/{rate_b:.6f}",
        "monotone, residual <= 1e-8, rates within 5e-3",
    )


def check_uniform_continuity() -> Outcome:
    # the step input needs sigma = 0 here: with sigma = 1 the drive vanishes on [1, 2)
    observed = []
    passed = True
    for name, sigma in (("ex4_3", 0.0), ("ex6_4", None)):
        moduli = firing.displacement_modulus(
            _preset_model(name, sigma), [0.1, 0.01, 0.001], Window(0.0, 10.0), samples=100
        )
        values = [w for _, w in moduli]
        passed &= values[0] > values[1] > values[2]
        observed.append(f"{name}: {[round(v, 6) for v in values]}")
    return Outcome(passed, "; ".join(observed), "decreasing moduli")


def check_leaky_step_jump() -> Outcome:
    model = _preset_model("ex4_3")
    edge = 1.0 - math.log(2.0)
    below = firing.displacement(model, edge - 1e-6)
    above = firing.displacement(model, edge + 1e-6)
    gap = above - below
    return Outcome(
        abs(gap - 1.0) <= 1e-4,
        f"Psi {below:.6f} -> {above:.6f} across t = 1 - ln 2",
        "jump of 1",
    )


def check_ap_displacement() -> Outcome:
    model = firing.FiringModel(0.0, TrigPoly(((0.0, 2.0, 0.0), (0.0, 1.0, 1.0))))
    eps, varsigma = 0.5, 1.0
    taus = np.linspace(2 * math.pi - 0.05, 2 * math.pi + 0.05, 21)
    scan = apnorms.scan_periods(
        model.input,
        apnorms.ScanMode.stepanov(1.0),
        varsigma**2 * eps / 4,
        taus,
        Window(0.0, 10.0),
        samples_per_unit=4,
    )
    ts = [float(t) for t in np.linspace(0.0, 20.0, 50)]
    base = [firing.displacement(model, t) for t in ts]
    worst = 0.0
    for tau, _ in scan.accepted:
        moved = [firing.displacement(model, t + tau) for t in ts]
        worst = max(worst, *(abs(a - b) for a, b in zip(moved, base)))
    passed = bool(scan.accepted) and worst < eps
    return Outcome(passed, f"{len(scan.accepted)} accepted, max shift {worst:.4g}", f"< {eps}")


# ---------------------------------------------------------------------------
# haar
# ---------------------------------------------------------------------------


def check_haar_examples() -> Outcome:
    values = (
        haar.haar_fn(haar.HaarIndex(0, 1), 0.5),
        haar.haar_fn(haar.HaarIndex(0, 2), 0.25),
        haar.haar_fn(haar.HaarIndex(0, 2), 0.75),
    )
    table = haar.coefficients(PRESETS["ex4_3"].build(), 0, 0, 8).table[0]
    passed = values == (1.0, 1.0, -1.0) and table[0] == 2.0 and not np.any(table[1:])
    return Outcome(passed, f"{values}; a[0] = {table.tolist()}", "(1, 1, -1); [2, 0, ...]")


def check_haar_convergence() -> Outcome:
    f = PRESETS["ex4_3"].build()
    levels = [2**i for i in range(9)]
    errors = [haar.projection_error(f, n, 1.0, -8, 8) for n in levels]
    holds = all(haar.modulus_bound_check(f, n, 1.0, -8, 8).holds for n in levels)
    constant = haar.projection_error(Const(3.0), 4, 1.0, -8, 8)
    quasi = PRESETS["ex6_4"].build()
    smooth = [haar.projection_error(quasi, n, 1.0, 0, 3) for n in (1, 4, 16, 64)]
    spikes = DyadicSpikes(SeriesKind.MU_NO_MU)
    dyadic = [haar.projection_error(spikes, n, 1.0, -8, 8) for n in (1, 256)]
    passed = (
        errors[-1] <= errors[0] / 5
        and holds
        and constant == 0.0
        and smooth[-1] < smooth[0] / 5
        and dyadic[-1] < dyadic[0] / 5
    )
    return Outcome(
        passed,
        f"ex4_3 {errors[0]:.3g}->{errors[-1]:.3g}, bound holds={holds}, const {constant}, "
        f"trig {smooth[0]:.4g}->{smooth[-1]:.4g}, mu_no_mu {dyadic[0]:.4g}->{dyadic[-1]:.4g}",
        "final <= initial/5, holds, 0",
    )


def check_haar_properties() -> Outcome:
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        j, jj = (int(x) for x in rng.integers(1, 33, 2))
        coeffs = haar.coefficients(haar.HaarIndex(0, j).as_signal(), 0, 0, 32)
        worst = max(worst, abs(coeffs.coeff(0, jj) - (1.0 if j == jj else 0.0)))
    f = PRESETS["ex6_4"].build()
    first = haar.coefficients(f, 0, 2, 16)
    again = haar.coefficients(first.to_signal(), 0, 2, 16)
    drift = float(np.max(np.abs(first.table - again.table)))
    passed = worst <= 1e-12 and drift <= 1e-12
    return Outcome(passed, f"orthonormality {worst:.3g}, idempotence {drift:.3g}", "<= 1e-12")


def check_haar_transfer() -> Outcome:
    ts = [float(t) for t in np.linspace(0.0, 10.0, 50)]
    exact = _preset_model("ex4_3")
    smooth = firing.FiringModel(0.0, TrigPoly(((0.0, 2.0, 0.0), (0.0, 1.0, 1.0))))
    step_gaps, smooth_gaps = [], []
    for n in (2, 8, 32):
        for model, gaps in ((exact, step_gaps), (smooth, smooth_gaps)):
            approx = haar.coefficients(model.input, -1, 13, n).to_signal()
            gaps.append(
                firing.firing_map_distance(model, firing.FiringModel(model.sigma, approx), ts)
            )
    passed = max(step_gaps) <= 1e-9 and smooth_gaps[0] > smooth_gaps[1] > smooth_gaps[2]
    return Outcome(
        passed,
        f"step {[f'{g:.2g}' for g in step_gaps]}, smooth {[f'{g:.3g}' for g in smooth_gaps]}",
        "step ~0, smooth decreasing",
    )


CHECKS: list[Check] = [
    Check(
        "signals.eval",
        "signals",
        "pointwise values of the built-in signals",
        check_eval_examples,
    ),
    Check("signals.weighted", "signals", "closed-form charge integrals", check_weighted_examples),
    Check("signals.unbounded_cells", "signals", "unit-cell integrals >= n", check_unbounded_cells),
    Check("signals.mu_half_cells", "signals", "half-cell integrals equal 1", check_mu_half_cells),
    Check(
        "signals.mu_window_bound",
        "signals",
        "short-window integral bound",
        check_mu_window_bound,
    ),
    Check("apnorms.mean_meanless", "apnorms", "oscillating partial means", check_mean_meanless),
    Check(
        "apnorms.mean_unbounded",
        "apnorms",
        "mean 3/8 of the unbounded series",
        check_mean_unbounded,
    ),
    Check(
        "apnorms.antiderivative",
        "apnorms",
        "bounded antiderivative residual",
        check_antiderivative,
    ),
    Check("apnorms.stepanov", "apnorms", "S^p seminorm values", check_stepanov_examples),
    Check("apnorms.d_measure", "apnorms", "D-convergence and integer sandwich", check_d_measure),
    Check("apnorms.scan", "apnorms", "exact and almost periods", check_scan_periodic),
    Check("apnorms.truncation", "apnorms", "truncated means", check_truncation),
    Check(
        "apnorms.positive_mean",
        "apnorms",
        "positive partial means of a.e. positive signal",
        check_positive_mean_probe,
    ),
    Check("firing.step_points", "firing", "firing times of the piecewise input", check_step_points),
    Check(
        "firing.step_closed_form",
        "firing",
        "closed-form firing map, three branches",
        check_step_closed_form,
    ),
    Check(
        "firing.pi_rate",
        "firing",
        "perfect integrator rate equals mean",
        check_pi_rate_equals_mean,
    ),
    Check(
        "firing.equal_means",
        "firing",
        "equal means, distinct LIF rates",
        check_equal_means_distinct_rates,
    ),
    Check("firing.displacement_bound", "firing", "0 < Psi <= 1/varsigma", check_displacement_bound),
    Check(
        "firing.periodic_covariance",
        "firing",
        "Phi(t + 2) = Phi(t) + 2",
        check_periodic_covariance,
    ),
    Check(
        "firing.mu_no_mu",
        "firing",
        "displacement of the mu-almost periodic series",
        check_mu_no_mu_displacement,
    ),
    Check(
        "firing.alternating_jumps",
        "firing",
        "displacement jumps of at least 1/2",
        check_alternating_jumps,
    ),
    Check(
        "firing.undefined",
        "firing",
        "charge never reaches the threshold",
        check_undefined_firing,
    ),
    Check("firing.probe", "firing", "well-definedness probe verdicts", check_well_defined_probe),
    Check(
        "firing.properties",
        "firing",
        "monotonicity, residuals, start-point independence",
        check_firing_properties,
    ),
    Check(
        "firing.leaky_jump",
        "firing",
        "displacement jump at t = 1 - ln 2",
        check_leaky_step_jump,
    ),
    Check(
        "firing.uniform_continuity",
        "firing",
        "sampled modulus of continuity of Psi",
        check_uniform_continuity,
    ),
    Check(
        "firing.ap_displacement",
        "firing",
        "almost periods carry over to Psi",
        check_ap_displacement,
    ),
    Check("haar.examples", "haar", "wavelet values and coefficients", check_haar_examples),
    Check(
        "haar.convergence",
        "haar",
        "S^1 projection errors and modulus bound",
        check_haar_convergence,
    ),
    Check("haar.properties", "haar", "orthonormality and idempotence", check_haar_properties),
    Check("haar.transfer", "haar", "firing maps of projections", check_haar_transfer),
]


def select_checks(only: list[str] | None = None) -> list[Check]:
    """Checks whose group or id is in ``only`` (all of them when empty)."""
    if not only:
        return list(CHECKS)
    chosen = [c for c in CHECKS if c.group in only or c.id in only]
    if not chosen:
        known = sorted({c.group for c in CHECKS})
        raise ValueError(f"No checks match {only}; groups are {', '.join(known)}")
    return chosen


def cmd_verify(
    only: list[str] | None = None, list_only: bool = False, stream: TextIO | None = None
) -> int:
    stream = stream or sys.stdout
    try:
        checks = select_checks(only)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if list_only:
        for check in checks:
            print(f"{check.id}\t{check.description}", file=stream)
        return 0

    failures = 0
    for check in checks:
        started = time.perf_counter()
        try:
            outcome = check.run()
        except Exception as exc:  # noqa: BLE001
            logger.exception(f"{check.id} raised")
            outcome = Outcome(False, f"{type(exc).__name__}: {exc}", "no error")
        elapsed = time.perf_counter() - started
        status = "PASS" if outcome.passed else "FAIL"
        failures += not outcome.passed
        print(
            f"{status} {check.id} ({elapsed:.1f}s) observed: {outcome.observed} "
            f"expected: {outcome.expected}",
            file=stream,
        )
    logger.info(f"verify: {len(checks) - failures}/{len(checks)} passed")
    return 0 if failures == 0 else 1
