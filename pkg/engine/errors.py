"""Errors raised by the engine.

Every error carries a machine-readable ``code`` (used in the CLI error payload)
and the process exit code the CLI maps it to.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from engine.firing import FiringTrajectory


class ApfireError(Exception):
    code = "apfire_error"
    exit_code = 1


class QuadratureError(ApfireError):
    """Adaptive quadrature hit its depth cap before reaching the tolerance."""

    code = "quadrature_failed"
    exit_code = 3

    def __init__(self, a: float, b: float, tol: float, err: float):
        super().__init__(
            f"quadrature on [{a!r}, {b!r}] stopped at error {err:.3e} > tol {tol:.3e}"
        )
        self.a = a
        self.b = b
        self.tol = tol
        self.err = err


class HorizonExceeded(ApfireError):
    """The charge stayed below the threshold over the whole search horizon.

    This is inconclusive: it does not prove that the firing time is undefined.
    """

    code = "horizon_exceeded"
    exit_code = 2

    def __init__(
        self,
        t: float,
        reached: float,
        index: int | None = None,
        partial: FiringTrajectory | None = None,
    ):
        where = f" at spike {index}" if index is not None else ""
        super().__init__(
            f"no threshold crossing after t={t!r} up to s={reached!r}{where}"
        )
        self.t = t
        self.reached = reached
        self.index = index
        self.partial = partial


class OutOfWindow(ApfireError, ValueError):
    code = "out_of_window"
    exit_code = 1
