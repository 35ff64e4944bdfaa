"""Command-line adapter over the engine.

Each ``cmd_*`` turns a validated RunSpec into a CommandResult (CSV header and
rows plus a JSON payload). ``run`` parses arguments, maps engine errors to exit
codes and writes the result.
"""

import argparse
import math
import sys
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, TextIO

from loguru import logger

from adapters.cli.documents import parse_signal
from adapters.cli.presets import get_preset
from adapters.cli.verify import cmd_verify
from engine import apnorms, firing, haar
from engine.errors import ApfireError
from engine.signals import Signal, Window, eval_many
from utils.csv_helpers import write_json, write_rows
from utils.schedule_helpers import (
    parse_cells,
    parse_float_list,
    parse_schedule,
    parse_window,
)
from utils.settings import (
    APFIRE_LOG_LEVEL,
    DEFAULT_HORIZON,
    DEFAULT_QUAD_TOL,
    DEFAULT_SCAN_STEP,
    DEFAULT_TIME_TOL,
)

EXIT_OK = 0
EXIT_USAGE = 1

FORMATS = ("csv", "json")
SCAN_MODES = ("uniform", "stepanov", "mu")


def _build_error_payload(message: str, code: str | None = None) -> dict[str, Any]:
    payload: dict[str, Any] = {"success": False, "error": message}
    if code:
        payload["error_code"] = code
    return payload


def configure_logging(level: str = APFIRE_LOG_LEVEL) -> None:
    """Route loguru to stderr only, so CSV and JSON on stdout stay clean."""
    logger.remove()
    logger.add(sys.stderr, level=level)


@dataclass
class RunSpec:
    command: str
    signal: Signal
    sigma: float = 0.0
    ts: list[float] = field(default_factory=lambda: [0.0])
    n: int = 10
    eps: float = 0.1
    eta: float = 0.5
    p: float = 1.0
    window: Window | None = None
    mode: str = "uniform"
    schedule: list[float] = field(default_factory=list)
    cells: tuple[int, int] = (0, 0)
    mean_tol: float = apnorms.DEFAULT_MEAN_TOL
    trailing: int = apnorms.DEFAULT_MEAN_TRAILING
    cfg: firing.SolveConfig = field(default_factory=firing.SolveConfig)
    fmt: str = "csv"
    out: Path | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command '{self.command}'")
        if self.fmt not in FORMATS:
            raise ValueError(f"Format must be one of {', '.join(FORMATS)}, got '{self.fmt}'")
        if self.mode not in SCAN_MODES:
            raise ValueError(f"Mode must be one of {', '.join(SCAN_MODES)}, got '{self.mode}'")
        if self.n < 1:
            raise ValueError(f"--n must be >= 1, got {self.n}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"--sigma must be non-negative, got {self.sigma}")
        if not self.mean_tol > 0:
            raise ValueError(f"--mean-tol must be positive, got {self.mean_tol}")
        if self.trailing < 1:
            raise ValueError(f"--trailing must be >= 1, got {self.trailing}")

    @property
    def model(self) -> firing.FiringModel:
        return firing.FiringModel(self.sigma, self.signal)

    def require_window(self) -> Window:
        if self.window is None:
            raise ValueError(f"'{self.command}' needs --window a:b")
        return self.window

    def require_schedule(self) -> list[float]:
        if not self.schedule:
            raise ValueError(f"'{self.command}' needs --schedule")
        return self.schedule


@dataclass
class CommandResult:
    header: list[str]
    rows: list[tuple]
    payload: dict[str, Any]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_eval(spec: RunSpec) -> CommandResult:
    ts = spec.window.grid(1).tolist() if spec.window is not None else spec.ts
    values = eval_many(spec.signal, ts).tolist()
    return CommandResult(
        ["t", "value"], list(zip(ts, values)), {"success": True, "t": ts, "value": values}
    )


def cmd_fire(spec: RunSpec) -> CommandResult:
    phis = [firing.fire(spec.model, t, spec.cfg) for t in spec.ts]
    rows = [(t, phi, phi - t) for t, phi in zip(spec.ts, phis)]
    return CommandResult(
        ["t", "phi", "psi"], rows, {"success": True, "t": spec.ts, "phi": phis}
    )


def cmd_traj(spec: RunSpec) -> CommandResult:
    traj = firing.trajectory(spec.model, spec.ts[0], spec.n, spec.cfg)
    rows = [(k + 1, s, r) for k, (s, r) in enumerate(zip(traj.spikes, traj.residuals))]
    payload = {
        "success": True,
        "t0": traj.t0,
        "spikes": traj.spikes,
        "residuals": traj.residuals,
    }
    return CommandResult(["k", "spike", "residual"], rows, payload)


def cmd_rate(spec: RunSpec) -> CommandResult:
    traj = firing.trajectory(spec.model, spec.ts[0], max(2, spec.n), spec.cfg)
    rates = [(k + 1) / s for k, s in enumerate(traj.spikes)]
    rows = [(k + 1, s, r) for k, (s, r) in enumerate(zip(traj.spikes, rates))]
    payload = {
        "success": True,
        "t0": traj.t0,
        "rate": rates[-1],
        "rotation_number": (traj.spikes[-1] - traj.t0) / len(traj),
        "error_budget": traj.error_budget(),
    }
    return CommandResult(["k", "spike", "rate"], rows, payload)


def cmd_mean(spec: RunSpec) -> CommandResult:
    estimate = apnorms.mean_value(
        spec.signal, spec.require_schedule(), trailing=spec.trailing, tol=spec.mean_tol
    )
    verdict = estimate.verdict
    payload = {
        "success": True,
        "verdict": verdict.kind.value,
        "limit": verdict.limit,
        "witness": list(verdict.witness) if verdict.witness else None,
        "partials": [list(p) for p in estimate.partials],
    }
    if spec.fmt == "csv":
        print(
            f"verdict: {verdict.kind.value} limit={verdict.limit} witness={verdict.witness}",
            file=sys.stderr,
        )
    return CommandResult(["T", "M_T"], estimate.partials, payload)


def cmd_scan(spec: RunSpec) -> CommandResult:
    if spec.mode == "uniform":
        mode = apnorms.ScanMode.uniform()
    elif spec.mode == "stepanov":
        mode = apnorms.ScanMode.stepanov(spec.p)
    else:
        mode = apnorms.ScanMode.mu(spec.eta)
    scan = apnorms.scan_periods(
        spec.signal, mode, spec.eps, spec.require_schedule(), spec.require_window()
    )
    payload = {
        "success": True,
        "mode": spec.mode,
        "eps": spec.eps,
        "accepted": [tau for tau, _ in scan.accepted],
        "max_gap": scan.max_gap,
    }
    return CommandResult(["tau", "deviation", "accepted"], scan.rows(), payload)


def cmd_haar(spec: RunSpec) -> CommandResult:
    k0, k1 = spec.cells
    coeffs = haar.coefficients(spec.signal, k0, k1, spec.n)
    rows = [
        (k, j, float(coeffs.table[k - k0, j - 1]))
        for k in range(k0, k1 + 1)
        for j in range(1, spec.n + 1)
    ]
    payload = {
        "success": True,
        "cells": [k0, k1],
        "n": spec.n,
        "coefficients": coeffs.table.tolist(),
        "projection_error": haar.projection_error(spec.signal, spec.n, spec.p, k0, k1),
    }
    return CommandResult(["k", "j", "coefficient"], rows, payload)


COMMANDS: dict[str, Callable[[RunSpec], CommandResult]] = {
    "eval": cmd_eval,
    "fire": cmd_fire,
    "traj": cmd_traj,
    "rate": cmd_rate,
    "mean": cmd_mean,
    "scan": cmd_scan,
    "haar": cmd_haar,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    source = shared.add_mutually_exclusive_group()
    source.add_argument("--signal", help="JSON signal document or const:c, trig:a,b,l, dyadic:name")
    source.add_argument("--preset", help="built-in signal, e.g. ex4_3")
    shared.add_argument("--sigma", type=float, help="leak rate (defaults to the preset's)")
    shared.add_argument("--t", default="0", help="time or comma-separated times")
    shared.add_argument("--n", type=int, default=10, help="spikes or Haar index count")
    shared.add_argument("--eps", type=float, default=0.1)
    shared.add_argument("--eta", type=float, default=0.5)
    shared.add_argument("--p", type=float, default=1.0)
    shared.add_argument("--window", help="a:b")
    shared.add_argument("--mode", default="uniform", choices=SCAN_MODES)
    shared.add_argument("--schedule", help="linear:a:b:k, geometric:a:r:k, pow2tower:n or list")
    shared.add_argument("--cells", default="0:0", help="K0:K1")
    shared.add_argument(
        "--mean-tol", type=float, default=apnorms.DEFAULT_MEAN_TOL, help="mean convergence tol"
    )
    shared.add_argument(
        "--trailing",
        type=int,
        default=apnorms.DEFAULT_MEAN_TRAILING,
        help="trailing partials that must agree",
    )
    shared.add_argument("--step", type=float, default=DEFAULT_SCAN_STEP)
    shared.add_argument("--tol", type=float, default=DEFAULT_TIME_TOL)
    shared.add_argument("--quad-tol", type=float, default=DEFAULT_QUAD_TOL)
    shared.add_argument("--horizon", type=float, default=DEFAULT_HORIZON)
    shared.add_argument("--varsigma", type=float)
    shared.add_argument("--format", default="csv", choices=FORMATS)
    shared.add_argument("--out", type=Path)

    parser = argparse.ArgumentParser(
        prog="apfire", description="Firing maps of LIF models with almost periodic inputs."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[shared])
    verify = sub.add_parser("verify", help="run the built-in acceptance checks")
    verify.add_argument("--only", action="append", help="run only this group or check id")
    verify.add_argument("--list", action="store_true", help="list check ids without running")
    return parser


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    sigma = args.sigma
    if args.preset:
        preset = get_preset(args.preset)
        signal = preset.build()
        sigma = preset.sigma if sigma is None else sigma
    elif args.signal:
        signal = parse_signal(args.signal)
    else:
        raise ValueError("Give --signal or --preset")
    cfg = firing.SolveConfig(
        scan_step=args.step,
        time_tol=args.tol,
        horizon=args.horizon,
        varsigma=args.varsigma,
        quad_tol=args.quad_tol,
    )
    return RunSpec(
        command=args.command,
        signal=signal,
        sigma=0.0 if sigma is None else sigma,
        ts=parse_float_list(args.t),
        n=args.n,
        eps=args.eps,
        eta=args.eta,
        p=args.p,
        window=parse_window(args.window) if args.window else None,
        mode=args.mode,
        schedule=parse_schedule(args.schedule) if args.schedule else [],
        cells=parse_cells(args.cells),
        mean_tol=args.mean_tol,
        trailing=args.trailing,
        cfg=cfg,
        fmt=args.format,
        out=args.out,
    )


def emit(result: CommandResult, spec: RunSpec, stream: TextIO | None = None) -> None:
    def write(target: TextIO) -> None:
        if spec.fmt == "json":
            write_json(target, result.payload)
        else:
            write_rows(target, result.header, result.rows)

    if spec.out is not None:
        with spec.out.open("w", newline="") as handle:
            write(handle)
        logger.info(f"wrote {len(result.rows)} rows to {spec.out}")
    else:
        write(stream or sys.stdout)


def _report_error(message: str, code: str, fmt: str, stream: TextIO) -> None:
    print(f"error: {message}", file=sys.stderr)
    if fmt == "json":
        write_json(stream, _build_error_payload(message, code))


def run(argv: list[str] | None = None, stream: TextIO | None = None) -> int:
    """Run one command line; returns the process exit code."""
    stream = stream or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    configure_logging()

    if args.command == "verify":
        return cmd_verify(only=args.only, list_only=args.list, stream=stream)

    fmt = args.format
    try:
        spec = spec_from_args(args)
        result = COMMANDS[spec.command](spec)
        emit(result, spec, stream)
    except ApfireError as exc:
        _report_error(str(exc), exc.code, fmt, stream)
        return exc.exit_code
    except ValueError as exc:
        _report_error(str(exc), "usage_error", fmt, stream)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        logger.exception(f"'{args.command}' failed")
        _report_error(str(exc), "internal_error", fmt, stream)
        return EXIT_USAGE
    return EXIT_OK
