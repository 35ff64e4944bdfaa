"""
Test the symbolic signals and their exact integrals.
"""

import math

import numpy as np
import pytest

from engine.errors import QuadratureError
from engine.signals import (
    Const,
    DyadicSpikes,
    Func,
    PiecewisePeriodic,
    SeriesKind,
    Steps,
    TrigPoly,
    Window,
    active_terms,
    eval_many,
    evaluate,
    integrate,
    integrate_map,
    integrate_weighted,
    pieces,
    scale,
    shift,
    sum_signals,
)
from utils.quadrature import adaptive_simpson

STEP_INPUT = PiecewisePeriodic(2.0, ((0.0, 2.0), (1.0, 1.0)))
SEEDS = [0, 1, 2]


def test_evaluate_examples():
    """Validate point values of the built-in node kinds."""
    assert evaluate(STEP_INPUT, 0.5) == 2.0
    assert evaluate(STEP_INPUT, 1.5) == 1.0
    assert evaluate(STEP_INPUT, -0.5) == 1.0
    assert evaluate(Const(3.0), 17.2) == 3.0
    assert evaluate(DyadicSpikes(SeriesKind.MU_NO_MU), 0.3) == 1.0
    assert evaluate(TrigPoly(((0.0, 2.0, 0.0), (0.0, 1.0, 1.0))), 0.0) == pytest.approx(3.0)


def test_evaluate_rejects_non_finite_time():
    with pytest.raises(ValueError):
        evaluate(Const(1.0), math.inf)


def test_eval_many_matches_pointwise_values():
    ts = np.linspace(-5.0, 5.0, 41)
    for sig in (STEP_INPUT, DyadicSpikes(SeriesKind.MU_NO_MU), TrigPoly(((1.0, 0.5, 2.0),))):
        expected = [evaluate(sig, float(t)) for t in ts]
        assert np.allclose(eval_many(sig, ts), expected)


def test_piecewise_periodic_wraps_first_piece():
    """The last value holds from the last breakpoint up to the first one of the next period."""
    sig = PiecewisePeriodic(3.0, ((1.0, 5.0), (2.0, 7.0)))
    assert evaluate(sig, 0.5) == 7.0
    assert evaluate(sig, 1.5) == 5.0
    assert integrate(sig, 0.0, 3.0)[0] == pytest.approx(7.0 + 5.0 + 7.0)


def test_eval_many_matches_eval_next_to_period_boundaries():
    """Points that round onto a period boundary take the value just after it."""
    ts = [-1e-17, math.nextafter(0.0, -1.0), math.nextafter(2.0, 0.0), -4.0 - 4e-16, 1e3 - 1e-13]
    expected = [evaluate(STEP_INPUT, t) for t in ts]
    assert expected[0] == 2.0
    assert eval_many(STEP_INPUT, ts).tolist() == expected


def test_piecewise_periodic_rejects_bad_breakpoints():
    with pytest.raises(ValueError):
        PiecewisePeriodic(2.0, ((0.0, 1.0), (2.5, 1.0)))
    with pytest.raises(ValueError):
        PiecewisePeriodic(2.0, ((1.0, 1.0), (0.5, 1.0)))
    with pytest.raises(ValueError):
        PiecewisePeriodic(0.0, ((0.0, 1.0),))


def test_integrate_closed_forms_are_exact():
    value, err = integrate(STEP_INPUT, 0.0, 2.0)
    assert value == pytest.approx(3.0, abs=1e-14)
    assert err == 0.0
    value, err = integrate(TrigPoly(((1.0, 0.0, 1.0),)), 0.0, math.pi)
    assert value == pytest.approx(2.0, abs=1e-12)
    assert err == 0.0


def test_integrate_far_from_origin_keeps_precision():
    value, _ = integrate(STEP_INPUT, 1e6, 1e6 + 2.0)
    assert value == pytest.approx(3.0, abs=1e-8)


def test_integrate_rejects_reversed_bounds_and_bad_tol():
    with pytest.raises(ValueError):
        integrate(STEP_INPUT, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(STEP_INPUT, 0.0, 1.0, tol=0.0)


def test_integrate_weighted_examples():
    """Validate the charge integrals with closed-form values."""
    value, _ = integrate_weighted(STEP_INPUT, 1.0, 0.0, math.log(2.0))
    assert value == pytest.approx(1.0, abs=1e-12)
    value, _ = integrate_weighted(Const(2.0), 1.0, 0.0, 1.0)
    assert value == pytest.approx(math.e - 1.0, abs=1e-12)


def test_integrate_weighted_validates_inputs():
    with pytest.raises(ValueError):
        integrate_weighted(STEP_INPUT, 1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        integrate_weighted(STEP_INPUT, -1.0, 0.0, 1.0)


@pytest.mark.parametrize("seed", SEEDS)
def test_weighted_integral_matches_quadrature(seed):
    """The closed forms agree with adaptive quadrature of the same integrand."""
    rng = np.random.default_rng(seed)
    sig = TrigPoly(((1.0, 0.5, 1.3), (0.0, 2.0, 0.0)))
    for _ in range(10):
        sigma = float(rng.uniform(0.0, 1.0))
        t = float(rng.uniform(-10.0, 10.0))
        s = t + float(rng.uniform(0.0, 3.0))
        exact, _ = integrate_weighted(sig, sigma, t, s)
        numeric, _ = adaptive_simpson(
            lambda u: (sig.eval(u) - sigma) * math.exp(sigma * (u - t)), t, s, 1e-11
        )
        assert exact == pytest.approx(numeric, abs=1e-8)


def test_func_node_integrates_by_quadrature():
    value, err = integrate(Func(math.exp, "exp"), 0.0, 1.0)
    assert value == pytest.approx(math.e - 1.0, abs=1e-10)
    assert err >= 0.0


def test_quadrature_failure_raises():
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda u: 1.0 / u if u else 0.0, 0.0, 1.0, 1e-12, max_depth=10)


def test_composites_follow_their_children():
    """Sums, scalings and shifts evaluate and integrate like the expressions they build."""
    sig = sum_signals([STEP_INPUT, scale(Const(1.0), -0.5)])
    assert evaluate(sig, 0.5) == pytest.approx(1.5)
    assert integrate(sig, 0.0, 2.0)[0] == pytest.approx(2.0)
    moved = shift(STEP_INPUT, 1.0)
    assert evaluate(moved, 0.5) == 1.0
    assert integrate(moved, 0.0, 1.0)[0] == pytest.approx(1.0)
    assert evaluate(STEP_INPUT - Const(1.0), 0.5) == 1.0
    assert evaluate(-STEP_INPUT, 0.5) == -2.0
    assert evaluate(2 * STEP_INPUT, 0.5) == 4.0


def test_steps_vanish_outside_their_range():
    sig = Steps((0.0, 1.0, 3.0), (2.0, -1.0))
    assert evaluate(sig, -0.1) == 0.0
    assert evaluate(sig, 3.0) == 0.0
    assert integrate(sig, -5.0, 5.0)[0] == pytest.approx(0.0)


def test_pieces_cover_the_interval():
    part = pieces(DyadicSpikes(SeriesKind.MU_NO_MU), -3.0, 3.0)
    assert part[0].lo == -3.0
    assert part[-1].hi == 3.0
    assert all(a.hi == b.lo for a, b in zip(part, part[1:]))
    assert pieces(TrigPoly(((1.0, 0.0, 1.0),)), 0.0, 1.0) is None


def test_integrate_map_splits_at_breakpoints():
    value, _ = integrate_map(STEP_INPUT - Const(1.5), 0.0, 2.0, abs)
    assert value == pytest.approx(1.0)
    value, _ = integrate_map(TrigPoly(((1.0, 0.0, 1.0),)), 0.0, 2 * math.pi, abs)
    assert value == pytest.approx(4.0, abs=1e-8)


def test_integrate_map_of_step_plus_trig():
    """Validate integrate_map across jumps of an input with no piecewise form."""
    f = STEP_INPUT + TrigPoly(((0.25, 0.0, math.pi),))
    assert pieces(f, 0.0, 2.0) is None
    assert integrate_map(f, 0.0, 2.0, abs)[0] == pytest.approx(3.0, abs=1e-8)
    value, _ = integrate_map(f, 0.0, 2.0, lambda v: v * v)
    assert value == pytest.approx(5.0625 + 1 / math.pi, abs=1e-8)


# ---------------------------------------------------------------------------
# Series constructions
# ---------------------------------------------------------------------------


def test_unbounded_series_cells_exceed_their_index():
    f = DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES)
    for n in range(1, 7):
        for z in (-(3**n), 3**n):
            assert integrate(f, z, z + 1)[0] >= n


def test_mu_no_mu_half_cells_integrate_to_one():
    """Even cells carry at least two spikes per half and integrate to 1 over [z, z + 1/2]."""
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    for z in [2 * q for q in range(-10, 11) if q != 0]:
        assert integrate(f, z, z + 0.5)[0] == pytest.approx(1.0, abs=1e-9)


def test_mu_no_mu_unit_cells_carry_one_unit_of_spikes():
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    for z in (-7, -4, 1, 6, 12, 1024):
        assert integrate(f, z, z + 1)[0] == pytest.approx(2.0, abs=1e-9)
    assert integrate(f, 0.0, 1.0)[0] == pytest.approx(1.0)


@pytest.mark.parametrize("seed", SEEDS)
def test_mu_no_mu_short_window_bound(seed):
    """Short windows of length 2^(1-m) never carry more than 2^(3-m/2)."""
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    rng = np.random.default_rng(seed)
    for u in rng.uniform(-(2.0**12), 2.0**12, 200):
        for m in range(2, 9):
            value, _ = integrate(f, float(u), float(u) + 2.0 ** (1 - m))
            assert value <= 2.0 ** (3 - m / 2)


def test_meanless_series_cells():
    f = DyadicSpikes(SeriesKind.MEANLESS_SERIES)
    assert integrate(f, 4.0, 5.0)[0] == pytest.approx(4.0)
    assert integrate(f, 16.0, 17.0)[0] == pytest.approx(16.0)
    assert evaluate(f, 4.5) == pytest.approx(2 * 4.0)
    assert integrate(f, 0.0, 4.0)[0] == 0.0


def test_alternating_offsets_anchor_cells():
    f = DyadicSpikes(SeriesKind.ALTERNATING_OFFSETS)
    assert evaluate(f, 1.9) == pytest.approx(2.0 + 16.0)
    assert evaluate(f, 1.5) == 2.0
    assert integrate(f, -3.0, -2.0)[0] == pytest.approx(2.0 + 5.0)


def test_truncated_series_keeps_its_first_terms():
    f = DyadicSpikes(SeriesKind.MU_NO_MU, max_terms=2)
    assert integrate(f, 3.0, 4.0)[0] == pytest.approx(2.0)
    assert integrate(f, 4.0, 5.0)[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        DyadicSpikes(SeriesKind.MU_NO_MU, max_terms=-1)


SERIES_GRIDS = [
    (STEP_INPUT, Window(-50.0, 50.0), 1 / 96),
    (DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES), Window(-50.0, 50.0), 1 / 96),
    (DyadicSpikes(SeriesKind.MEANLESS_SERIES), Window(-50.0, 50.0), 1 / 96),
    (DyadicSpikes(SeriesKind.MU_NO_MU), Window(-20.0, 20.0), 2.0**-10),
    (DyadicSpikes(SeriesKind.ALTERNATING_OFFSETS), Window(-20.0, 20.0), 1 / 420),
    (STEP_INPUT + DyadicSpikes(SeriesKind.MU_NO_MU), Window(-20.0, 20.0), 2.0**-10),
]


@pytest.mark.parametrize("sig, window, h", SERIES_GRIDS)
def test_integrate_matches_midpoint_sums(sig, window, h):
    """Validate exact integrals against midpoint sums on a grid aligned with every
    breakpoint, where the midpoint rule is exact for linear pieces."""
    count = round((window.b - window.a) / h)
    mids = window.a + (np.arange(count) + 0.5) * h
    riemann = math.fsum(eval_many(sig, mids)) * h
    assert integrate(sig, window.a, window.b)[0] == pytest.approx(riemann, abs=1e-8)


@pytest.mark.parametrize("kind", list(SeriesKind))
def test_truncation_past_the_active_terms_changes_nothing(kind):
    full = DyadicSpikes(kind)
    window = Window(-50.0, 50.0)
    k = active_terms(full, window)
    assert k >= 1
    ts = np.linspace(window.a, window.b, 801)
    bounds = [(window.a, window.b), (-13.3, 7.9), (3.0, 4.0)]
    for extra in (1, 2):
        cut = DyadicSpikes(kind, max_terms=k + extra)
        assert [cut.eval(float(t)) for t in ts] == [full.eval(float(t)) for t in ts]
        for a, b in bounds:
            assert integrate(cut, a, b) == integrate(full, a, b)


def test_active_terms_counts_cells_meeting_the_window():
    f = DyadicSpikes(SeriesKind.MU_NO_MU)
    assert active_terms(f, Window(0.25, 0.75)) == 0
    assert active_terms(f, Window(-8.0, 8.0)) == 4
    assert active_terms(f, Window(0.5, 1.0)) == 1


def test_window_rejects_empty_interval():
    with pytest.raises(ValueError):
        Window(1.0, 1.0)
    assert len(Window(0.0, 1.0).grid(4)) == 5


def test_integrals_are_additive_and_shift_consistent():
    f = STEP_INPUT + DyadicSpikes(SeriesKind.MU_NO_MU) + TrigPoly(((1.0, 0.5, 1.3),))
    a, b, c = -3.7, 0.4, 5.2
    whole = integrate(f, a, c)[0]
    assert whole == pytest.approx(integrate(f, a, b)[0] + integrate(f, b, c)[0], abs=1e-10)
    for tau in (0.5, -2.25, 7.0):
        moved = integrate(shift(f, tau), a, b)[0]
        assert moved == pytest.approx(integrate(f, a + tau, b + tau)[0], abs=1e-10)
