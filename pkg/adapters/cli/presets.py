"""Built-in input signals and their leak rates.

Presets are compiled in, so ``verify`` needs no data files.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass

from engine.signals import (
    Const,
    DyadicSpikes,
    Func,
    PiecewisePeriodic,
    SeriesKind,
    Signal,
    TrigPoly,
)

LOG3_2 = math.log(2) / math.log(3)


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    build: Callable[[], Signal]
    sigma: float = 0.0


def entier_square(a: float = 1.0, lam: float = 1.0, gamma: float = 0.0) -> PiecewisePeriodic:
    """a * (-1)^[lam*t - gamma]: S^p almost periodic but discontinuous, so not uniformly
    almost periodic."""
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    period = 2.0 / lam
    half = 1.0 / lam
    start = (gamma / lam) % period
    flip = start + half
    if flip < period:
        pieces = ((start, a), (flip, -a))
    else:
        pieces = ((flip - period, -a), (start, a))
    return PiecewisePeriodic(period, pieces)


def appendix_series(terms: int = 50) -> TrigPoly:
    """-sum over n <= terms of sin(t/n^2)/n^2: zero mean, slowly growing antiderivative."""
    return TrigPoly(tuple((-1.0 / n**2, 0.0, 1.0 / n**2) for n in range(1, terms + 1)))


def _mu_not_stepanov(t: float) -> float:
    return 1.0 / (2.0 + math.cos(t) + math.cos(math.sqrt(2.0) * t))


PRESETS: dict[str, Preset] = {
    p.name: p
    for p in (
        Preset(
            "ex4_3",
            "2-periodic input equal to 2 on [2k, 2k+1) and 1 on [2k+1, 2k+2)",
            lambda: PiecewisePeriodic(2.0, ((0.0, 2.0), (1.0, 1.0))),
            sigma=1.0,
        ),
        Preset(
            "ex3_3",
            "series of triangular spikes whose mean value does not exist",
            lambda: DyadicSpikes(SeriesKind.MEANLESS_SERIES),
        ),
        Preset(
            "ex3_4",
            "series with mean 3/8 that is not S^1-bounded",
            lambda: DyadicSpikes(SeriesKind.UNBOUNDED_MEAN_SERIES),
        ),
        Preset(
            "ex4_12",
            "mu-almost periodic input whose displacement is not mu-almost periodic",
            lambda: DyadicSpikes(SeriesKind.MU_NO_MU),
        ),
        Preset(
            "ex4_13",
            "mu-almost periodic input with mu-almost periodic, discontinuous displacement",
            lambda: DyadicSpikes(SeriesKind.ALTERNATING_OFFSETS),
        ),
        Preset(
            "ex6_4",
            "2 + cos t + cos(sqrt(2) t), a perfect integrator with rate equal to the mean 2",
            lambda: TrigPoly(((0.0, 2.0, 0.0), (0.0, 1.0, 1.0), (0.0, 1.0, math.sqrt(2.0)))),
        ),
        Preset(
            "ex6_13_f",
            "ln 3-periodic input equal to 2 then 3, mean 3 - log_3 2",
            lambda: PiecewisePeriodic(math.log(3.0), ((0.0, 2.0), (math.log(2.0), 3.0))),
            sigma=1.0,
        ),
        Preset(
            "ex6_13_g",
            "constant 3 - log_3 2, same mean as ex6_13_f but a different LIF rate",
            lambda: Const(3.0 - LOG3_2),
            sigma=1.0,
        ),
        Preset("entier_square", "(-1)^[t], S^p but not uniformly almost periodic", entier_square),
        Preset(
            "mu_not_stepanov",
            "1/(2 + cos t + cos(sqrt(2) t)), mu-almost periodic but not S^p-almost periodic",
            lambda: Func(_mu_not_stepanov, "mu_not_stepanov"),
        ),
        Preset("appendix_series", "zero-mean trigonometric series", appendix_series),
    )
}
PRESETS["mu_no_mu"] = Preset("mu_no_mu", PRESETS["ex4_12"].description, PRESETS["ex4_12"].build)


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"Unknown preset '{name}'; one of {', '.join(sorted(PRESETS))}") from None
