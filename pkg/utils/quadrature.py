"""Adaptive Simpson quadrature.

Fallback integrator for signal nodes without a closed-form antiderivative.
"""

from collections.abc import Callable

from engine.errors import QuadratureError

MAX_DEPTH = 60


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 3.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = MAX_DEPTH,
) -> tuple[float, float]:
    """Integrate ``f`` over [a, b] by recursive interval halving.

    Args:
        f: Integrand, finite on [a, b].
        a: Lower bound.
        b: Upper bound (may be below ``a``; the sign flips).
        tol: Absolute error budget for the whole interval.
        max_depth: Maximum halving depth of any branch.

    Returns:
        Tuple of (integral_value, error_estimate).

    Raises:
        QuadratureError: If some branch reaches ``max_depth`` before its local
            error estimate meets its share of ``tol``.
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        value, err = adaptive_simpson(f, b, a, tol, max_depth)
        return -value, err

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fm, fb, 0.5 * (b - a))
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    total_err = 0.0
    while stack:
        lo, hi, flo, fmid, fhi, s_whole, local_tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        h = 0.5 * (hi - lo)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = f(lm)
        frm = f(rm)
        s_left = _simpson(flo, flm, fmid, 0.5 * h)
        s_right = _simpson(fmid, frm, fhi, 0.5 * h)
        err = (s_left + s_right - s_whole) / 15.0
        # no representable points left to refine on
        if abs(err) <= local_tol or not lo < lm < mid < rm < hi:
            total += s_left + s_right + err
            total_err += abs(err)
            continue
        if depth >= max_depth:
            raise QuadratureError(lo, hi, local_tol, abs(err))
        stack.append((mid, hi, fmid, frm, fhi, s_right, 0.5 * local_tol, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, s_left, 0.5 * local_tol, depth + 1))
    return total, total_err
