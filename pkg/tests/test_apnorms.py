"""
Test the almost-periodicity metrics and the mean-value estimator.
"""

import math

import numpy as np
import pytest

from engine.apnorms import (
    NormParams,
    ScanMode,
    VerdictKind,
    antiderivative_residual,
    d_distances,
    d_measure,
    d_measure_integer,
    f_norm_prime,
    mean_value,
    scan_periods,
    stepanov_norm,
    stepanov_norm_integer,
    truncate,
)
from engine.signals import (
    Const,
    DyadicSpikes,
    Func,
    PiecewisePeriodic,
    SeriesKind,
    Steps,
    TrigPoly,
    Window,
    shift,
)
from utils.schedule_helpers import pow2tower

STEP_INPUT = PiecewisePeriodic(2.0, ((0.0, 2.0), (1.0, 1.0)))
SINE = TrigPoly(((1.0, 0.0, 1.0),))
QUASI = TrigPoly(((0.0, 2.0, 0.0), (0.0, 1.0, 1.0), (0.0, 1.0, math.sqrt(2.0))))


def test_norm_params_validation():
    with pytest.raises(ValueError):
        NormParams(Window(0.0, 1.0), p=0.5)
    with pytest.raises(ValueError):
        NormParams(Window(0.0, 1.0), r=0.0)
    with pytest.raises(ValueError):
        NormParams(Window(0.0, 1.0), samples_per_unit=0)


def test_stepanov_norm_of_sine_over_its_period():
    """Validate ||sin||_{S^1_{2pi}} = 2/pi."""
    params = NormParams(Window(0.0, 1.0), p=1.0, r=2 * math.pi, samples_per_unit=4)
    assert stepanov_norm(SINE, params) == pytest.approx(2 / math.pi, abs=1e-9)


def test_stepanov_norm_of_step_input():
    params = NormParams(Window(0.0, 4.0), p=2.0)
    assert stepanov_norm(STEP_INPUT, params) == pytest.approx(2.0)
    assert stepanov_norm_integer(STEP_INPUT, 1.0, -3, 3) == pytest.approx(2.0)


def test_unbounded_series_is_not_stepanov_bounded():
    f = DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES)
    for n in range(1, 5):
        z = -(3**n)
        assert stepanov_norm(f, NormParams(Window(z - 1.0, z + 1.0))) >= n


def test_stepanov_norm_integer_rejects_empty_range():
    with pytest.raises(ValueError):
        stepanov_norm_integer(STEP_INPUT, 1.0, 2, 1)


# ---------------------------------------------------------------------------
# Measure deviation
# ---------------------------------------------------------------------------


def test_d_measure_axioms():
    """D is zero on equal signals, symmetric and bounded by the window length."""
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    g = DyadicSpikes(SeriesKind.MU_NO_MU, max_terms=1)
    window = Window(-8.0, 8.0)
    assert d_measure(f, f, 0.5, window, 4) == 0.0
    assert d_measure(f, g, 0.5, window, 4) == pytest.approx(d_measure(g, f, 0.5, window, 4))
    assert d_measure(STEP_INPUT, Const(0.0), 0.5, window, 4) == pytest.approx(1.0)


def test_d_measure_of_sloped_pieces_is_exact():
    f = DyadicSpikes(SeriesKind.MEANLESS_SERIES)
    # the triangle on [4, 5] rises with slope 16 and peaks at 8
    measure = d_measure_integer(f, Const(0.0), 4.0, 4, 4)
    assert measure == pytest.approx(0.5)


def test_d_measure_rejects_non_positive_eta():
    with pytest.raises(ValueError):
        d_measure(STEP_INPUT, STEP_INPUT, 0.0, Window(0.0, 1.0))
    with pytest.raises(ValueError):
        d_measure_integer(STEP_INPUT, STEP_INPUT, -1.0, 0, 1)


def test_partial_sums_converge_in_measure():
    """D(eta; f, g_k) is at most 2^-k for the mu-almost periodic series."""
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    window = Window(-32.0, 32.0)
    for k in range(1, 6):
        g = DyadicSpikes(SeriesKind.MU_NO_MU, max_terms=k)
        assert d_measure(f, g, 0.5, window, 4) <= 2.0**-k


def test_d_measure_sandwich():
    """Integer anchors bound the sliding sup from below and half of it from above."""
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    for k in (1, 2, 3):
        g = DyadicSpikes(SeriesKind.MU_NO_MU, max_terms=k)
        grid = d_measure(f, g, 0.5, Window(-8.0, 8.0), 8)
        integer = d_measure_integer(f, g, 0.5, -8, 7)
        assert integer <= grid <= 2 * integer


def test_d_distances_decrease_along_partial_sums():
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    approximants = [DyadicSpikes(SeriesKind.MU_NO_MU, max_terms=k) for k in (1, 2, 3)]
    rows = d_distances(f, approximants, 0.5, Window(-16.0, 16.0), 2)
    measures = [d for d, _ in rows]
    assert measures[0] > measures[1] > measures[2]
    assert all(0.0 <= norm <= 1.0 for _, norm in rows)


def test_f_norm_prime_of_constant():
    assert f_norm_prime(Const(1.0), Window(0.0, 2.0)) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# Almost periods
# ---------------------------------------------------------------------------


def test_scan_accepts_exact_periods():
    scan = scan_periods(STEP_INPUT, ScanMode.uniform(), 0.1, [1.0, 2.0, 4.0], Window(0.0, 10.0))
    assert scan.deviations[1] == 0.0
    assert scan.deviations[2] == 0.0
    assert scan.deviations[0] == pytest.approx(1.0)
    assert [tau for tau, _ in scan.accepted] == [2.0, 4.0]
    assert scan.max_gap == 2.0
    assert scan.rows()[0] == (1.0, scan.deviations[0], False)


def test_scan_finds_almost_periods_of_quasi_periodic_input():
    scan = scan_periods(QUASI, ScanMode.uniform(), 1.0, range(1, 501), Window(0.0, 100.0), 32)
    accepted = [tau for tau, _ in scan.accepted]
    assert 44.0 in accepted
    assert 333.0 in accepted
    assert math.isfinite(scan.max_gap)


def test_scan_modes_use_their_deviation():
    stepanov = scan_periods(
        STEP_INPUT, ScanMode.stepanov(1.0), 0.5, [1.0, 2.0], Window(0.0, 4.0), 8
    )
    assert stepanov.deviations[0] == pytest.approx(1.0)
    assert stepanov.deviations[1] == pytest.approx(0.0, abs=1e-12)
    measure = scan_periods(STEP_INPUT, ScanMode.mu(0.5), 1.0, [1.0, 2.0], Window(0.0, 4.0), 8)
    # measure deviations accept on equality
    assert [tau for tau, _ in measure.accepted] == [1.0, 2.0]


def test_scan_rejects_bad_parameters():
    with pytest.raises(ValueError):
        scan_periods(STEP_INPUT, ScanMode.uniform(), 0.0, [1.0], Window(0.0, 1.0))
    with pytest.raises(ValueError):
        ScanMode.mu(0.0)
    with pytest.raises(ValueError):
        ScanMode.stepanov(0.5)


def test_shifted_signal_deviates_by_its_shift():
    moved = shift(SINE, math.pi)
    assert moved.eval(0.5) == pytest.approx(-math.sin(0.5))


# ---------------------------------------------------------------------------
# Mean value
# ---------------------------------------------------------------------------


def test_mean_of_periodic_input_converges():
    estimate = mean_value(STEP_INPUT, [2.0 * k for k in range(1, 11)])
    assert estimate.verdict.kind is VerdictKind.CONVERGED
    assert estimate.verdict.limit == pytest.approx(1.5)
    assert estimate.last == pytest.approx(1.5)


def test_meanless_series_oscillates():
    """Partial means along the tower schedule keep jumping between low and high values."""
    f = DyadicSpikes(SeriesKind.MEANLESS_SERIES)
    estimate = mean_value(f, pow2tower(4))
    means = dict(estimate.partials)
    assert means[16.0] == pytest.approx(0.25)
    assert means[17.0] == pytest.approx(20 / 17)
    assert means[256.0] == pytest.approx(0.3125)
    for n in (2, 3, 4):
        tower = 2.0 ** (2**n)
        assert means[tower] <= 2 / 3
        assert means[tower + 1] >= tower / (tower + 1)
    assert estimate.verdict.kind is VerdictKind.OSCILLATING
    assert estimate.verdict.witness is not None


def test_unbounded_series_mean_is_three_eighths():
    f = DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES)
    schedule = [2.0 * 3**k for k in range(1, 9)]
    estimate = mean_value(f, schedule)
    for k, (_, m) in enumerate(estimate.partials, start=1):
        assert m == pytest.approx(math.fsum(n / (2 * 3**n) for n in range(1, k + 1)))
    assert abs(estimate.last - 3 / 8) <= 0.02
    # the partials climb monotonically, which is drift and not oscillation
    assert estimate.verdict.kind is VerdictKind.INCONCLUSIVE
    settled = mean_value(f, schedule, tol=5e-3)
    assert settled.verdict.kind is VerdictKind.CONVERGED
    assert settled.verdict.limit == pytest.approx(3 / 8, abs=1e-3)


def test_monotone_partials_are_not_oscillating():
    """Validate that slowly decaying partial means never get an oscillation witness."""
    decaying = Func(lambda t: 1.0 + math.exp(-2.0 * t), "decay")
    estimate = mean_value(decaying, [20.0 * k / 8 for k in range(1, 9)])
    assert estimate.verdict.kind is VerdictKind.INCONCLUSIVE
    assert estimate.verdict.witness is None


@pytest.mark.parametrize("alpha", [0.0, 0.3, -5.0])
def test_mean_with_offset_start(alpha):
    """The mean of a periodic input does not depend on where averaging starts."""
    estimate = mean_value(STEP_INPUT, [2.0 * k for k in range(1, 11)], alpha=alpha)
    assert estimate.verdict.kind is VerdictKind.CONVERGED
    assert estimate.last == pytest.approx(1.5)
    assert estimate.alpha == alpha


def test_mean_value_validates_schedule():
    with pytest.raises(ValueError):
        mean_value(STEP_INPUT, [2.0], tol=0.0)
    with pytest.raises(ValueError):
        mean_value(STEP_INPUT, [2.0], trailing=0)
    with pytest.raises(ValueError):
        mean_value(STEP_INPUT, [])
    with pytest.raises(ValueError):
        mean_value(STEP_INPUT, [2.0, 1.0])
    with pytest.raises(ValueError):
        mean_value(STEP_INPUT, [0.0, 1.0])


def test_positive_signal_keeps_positive_partial_means():
    """The mu-almost periodic series minus its baseline is non-negative and not a.e. zero."""
    excess = DyadicSpikes(SeriesKind.MU_NO_MU) - Const(1.0)
    estimate = mean_value(excess, [4.0 * n for n in range(1, 33)])
    assert min(m for _, m in estimate.partials) > 0.0


def test_truncation_raises_means_monotonically():
    f = DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES)
    horizon = [2.0 * 3**6]
    means = [mean_value(truncate(f, n), horizon).last for n in (1, 4, 16)]
    assert means[0] <= means[1] <= means[2]
    full = mean_value(f, [2.0 * 3**8]).last
    gaps = [full - mean_value(truncate(f, n), [2.0 * 3**8]).last for n in (4, 16, 100)]
    assert gaps[0] > gaps[1] > gaps[2] >= -1e-12


def test_truncate_clamps_values():
    g = truncate(Steps((0.0, 1.0, 2.0), (5.0, -5.0)), 2.0)
    assert g.eval(0.5) == 2.0
    assert g.eval(1.5) == -2.0
    with pytest.raises(ValueError):
        truncate(STEP_INPUT, 0.0)


# ---------------------------------------------------------------------------
# Antiderivative
# ---------------------------------------------------------------------------


def test_antiderivative_residual_of_periodic_input_is_bounded():
    residual = antiderivative_residual(STEP_INPUT, 1.5, Window(-50.0, 50.0), grid=16)
    assert residual <= 6.0
    assert residual == pytest.approx(0.5)


def test_antiderivative_residual_of_sine():
    residual = antiderivative_residual(SINE, 0.0, Window(0.0, 7.0), grid=1000)
    assert residual == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("seed", [0, 1])
def test_antiderivative_residual_of_zero_mean_series_stays_moderate(seed):
    rng = np.random.default_rng(seed)
    a = float(rng.uniform(-100.0, 0.0))
    series = TrigPoly(tuple((-1.0 / n**2, 0.0, 1.0 / n**2) for n in range(1, 11)))
    residual = antiderivative_residual(series, 0.0, Window(a, a + 100.0), grid=4)
    # |integral of sin(t/n^2)/n^2| <= 2
    assert residual <= 2.0 * 10


MIXED = STEP_INPUT + SINE


@pytest.mark.parametrize("f", [STEP_INPUT, SINE, MIXED], ids=["step", "trig", "mixed"])
def test_d_measure_does_not_grow_with_eta(f):
    """Validate that the level sets {|f - g| >= eta} shrink as eta grows."""
    g = shift(f, 0.3)
    window = Window(0.0, 4.0)
    measures = [d_measure(f, g, eta, window, 4) for eta in (0.05, 0.1, 0.25, 0.5, 1.0, 1.5)]
    assert all(x >= y for x, y in zip(measures, measures[1:]))
    assert measures[0] > 0.0


@pytest.mark.parametrize("p", [1.0, 2.0])
@pytest.mark.parametrize(
    "f, g",
    [(STEP_INPUT, SINE), (SINE, MIXED), (STEP_INPUT, -MIXED)],
    ids=["step+trig", "trig+mixed", "step-mixed"],
)
def test_stepanov_norm_triangle_inequality(f, g, p):
    params = NormParams(Window(0.0, 4.0), p=p, samples_per_unit=4)
    joint = stepanov_norm(f + g, params)
    assert joint <= stepanov_norm(f, params) + stepanov_norm(g, params) + 1e-7


@pytest.mark.parametrize("p", [1.0, 2.0])
@pytest.mark.parametrize("f", [STEP_INPUT, SINE, MIXED], ids=["step", "trig", "mixed"])
def test_stepanov_norm_is_homogeneous(f, p):
    params = NormParams(Window(0.0, 4.0), p=p, samples_per_unit=4)
    base = stepanov_norm(f, params)
    for c in (-2.5, 0.5, 3.0):
        assert stepanov_norm(c * f, params) == pytest.approx(abs(c) * base, rel=1e-7)
