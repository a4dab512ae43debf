"""Command-line interface.

Exit codes: 0 ok, 2 usage or invalid input, 3 degenerate selection,
4 output not writable, 5 too few detected photons.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .estimators import WitnessSweep
from .exceptions import DegenerateSelectionError, InsufficientStatisticsError, UndefinedWeakValueError
from .pdo import (
    build_gamma_coherent,
    build_gamma_fixed,
    build_gamma_incoherent,
    build_generalized_two_state,
    build_r_ideal,
    build_three_time_pdo,
)
from .serialize import estimate_to_json, matrix_to_json, pseudo_state_to_json, thermal_to_json, complex_pair
from .thermal import GibbsSpec
from .tomosim import ExperimentLayout, PointerModel, run_ideal_tomography, run_tomography
from .twostate import PolarizerConfig, TwoState, parse_state, polarizer_two_state

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_IO, EXIT_STATISTICS = 0, 2, 3, 4, 5
SWEEP_COLUMNS = ("theta", "phase", "p_up")
LAYOUTS = {"coupled": "coupled_polarizers", "doubled": "doubled_path", "fixed": "fixed_order"}


class UsageError(ValueError):
    pass


def _fmt(x: float) -> str:
    s = f"{x:.10f}"
    return "0.0000000000" if s == "-0.0000000000" else s


def _state(spec: str):
    try:
        return parse_state(spec)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _dump(obj, out) -> None:
    json.dump(obj, out, indent=2, allow_nan=False)
    out.write("\n")


# --- pdo -----------------------------------------------------------------------


def build_from_args(psi, phi, mode: str, p_up: float):
    ts = TwoState(psi, phi)
    if mode == "up":
        return build_gamma_fixed(ts, "up")
    if mode == "down":
        return build_gamma_fixed(ts, "down")
    if mode == "incoherent":
        return build_gamma_incoherent(ts, p_up)
    if mode == "coherent":
        return build_gamma_coherent(ts, p_up)
    if mode == "generalized":
        return build_generalized_two_state(psi, phi)
    return build_r_ideal(ts)


def _pretty(ps) -> str:
    lines = [f"mode: {ps.mode}  (p_up = {ps.p_up:g})", "matrix:"]
    for row in ps.matrix:
        lines.append("  [" + "  ".join(f"{z.real:+.10f}{z.imag:+.10f}j" for z in row) + "]")
    lines.append(f"trace: {ps.trace.real:.10f}{ps.trace.imag:+.10f}j")
    lines.append(f"hermitian: {'yes' if ps.hermitian else 'no'}")
    lines.append("eigenvalues: " + ", ".join(f"{v.real:.10f}{v.imag:+.10f}j" for v in ps.eigenvalues))
    lines.append(f"lambda_minus: {ps.lambda_minus.real:.10f}{ps.lambda_minus.imag:+.10f}j")
    return "\n".join(lines) + "\n"


def cmd_pdo(args, out) -> int:
    ps = build_from_args(_state(args.psi), _state(args.phi), args.mode, args.p_up)
    if args.format == "pretty":
        out.write(_pretty(ps))
    else:
        obj = pseudo_state_to_json(ps)
        obj["lambda_minus"] = complex_pair(ps.lambda_minus)
        _dump(obj, out)
    return EXIT_OK


# --- sweep ---------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """Grid of polarizer angles and order weights for the witness scan."""

    theta_min: float = 0.0
    theta_max: float = 1.4
    theta_steps: int = 141
    phase: float = 0.0
    p_up_min: float = 0.5
    p_up_max: float = 0.5
    p_up_steps: int = 1
    modes: tuple[str, ...] = ("incoherent", "coherent")

    def __post_init__(self):
        if self.theta_steps == 1 and self.theta_min == self.theta_max:
            if not 0.0 <= self.theta_min < math.pi / 2:
                raise UsageError("theta must lie in [0, pi/2)")
        elif not (0.0 <= self.theta_min < self.theta_max < math.pi / 2 and self.theta_steps >= 2):
            raise UsageError("theta range needs 0 <= min < max < pi/2 and steps >= 2")
        if self.p_up_steps == 1 and self.p_up_min == self.p_up_max:
            if not 0.0 <= self.p_up_min <= 1.0:
                raise UsageError("p_up must lie in [0, 1]")
        elif not (0.0 <= self.p_up_min < self.p_up_max <= 1.0 and self.p_up_steps >= 2):
            raise UsageError("p_up range needs 0 <= min < max <= 1 and steps >= 2")
        if not self.modes or set(self.modes) - {"incoherent", "coherent"}:
            raise UsageError(f"modes must be incoherent and/or coherent, got {self.modes}")

    def grid(self) -> np.ndarray:
        thetas = np.linspace(self.theta_min, self.theta_max, self.theta_steps)
        p_ups = np.linspace(self.p_up_min, self.p_up_max, self.p_up_steps)
        return np.array([(t, self.phase, p) for t in thetas for p in p_ups], dtype=float)


def sweep_rows(cfg: SweepConfig) -> tuple[list[str], list[list[str]]]:
    X = cfg.grid()
    lam = WitnessSweep(modes=cfg.modes).fit_transform(X)
    header = [*SWEEP_COLUMNS, *(f"lambda_minus_{m}" for m in cfg.modes)]
    rows = [[_fmt(v) for v in (*x, *l)] for x, l in zip(X, lam)]
    return header, rows


def cmd_sweep(args, out) -> int:
    theta = args.theta_range if args.theta is None else (args.theta, args.theta, 1)
    p_up = args.p_up_range if args.p_up_range is not None else (args.p_up, args.p_up, 1)
    cfg = SweepConfig(
        theta_min=float(theta[0]),
        theta_max=float(theta[1]),
        theta_steps=int(theta[2]),
        phase=args.phase,
        p_up_min=float(p_up[0]),
        p_up_max=float(p_up[1]),
        p_up_steps=int(p_up[2]),
        modes=tuple(m.strip() for m in args.modes.split(",") if m.strip()),
    )
    header, rows = sweep_rows(cfg)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    if args.out is None:
        out.write(buf.getvalue())
        return EXIT_OK
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


# --- three-time ----------------------------------------------------------------


def cmd_three_time(args, out) -> int:
    a, b = _state(args.a), _state(args.b)
    pdo = build_three_time_pdo(a, b, args.order, args.p_forward)
    r_t = build_r_ideal(TwoState(a, b)).matrix
    marginals = {slot: pdo.marginal(slot) for slot in pdo.slots}
    _dump(
        {
            "order": pdo.order,
            "slots": list(pdo.slots),
            "matrix": matrix_to_json(pdo.matrix),
            "marginals": {slot: matrix_to_json(m) for slot, m in marginals.items()},
            "r_t": matrix_to_json(r_t),
            "marginal_check": float(np.max(np.abs(marginals["C"] - r_t))),
        },
        out,
    )
    return EXIT_OK


# --- thermal -------------------------------------------------------------------


def cmd_thermal(args, out) -> int:
    try:
        spec = GibbsSpec(args.e0, args.e1, args.beta1, args.beta2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _dump(thermal_to_json(spec, args.p_up), out)
    return EXIT_OK


# --- simulate ------------------------------------------------------------------


def cmd_simulate(args, out) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    try:
        cfg = PolarizerConfig(args.theta, args.phase)
        if args.ideal:
            est = run_ideal_tomography(polarizer_two_state(cfg), args.n, args.seed, args.threads)
        else:
            layout = ExperimentLayout(LAYOUTS[args.layout], cfg, args.p_up)
            est = run_tomography(layout, PointerModel(args.g, args.delta), args.n, args.seed, args.threads)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (UndefinedWeakValueError, DegenerateSelectionError)):
            raise
        raise UsageError(str(exc)) from None
    _dump(estimate_to_json(est), out)
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-witness",
        description="Single-time pseudo-states of pre/post-selected qubits and their negativity witness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pdo", help="build one pseudo-state")
    p.add_argument("--psi", required=True, help="pre-selected state (V, H, D, A, R, L, bloch:t,p, amp:...)")
    p.add_argument("--phi", required=True, help="post-selected state")
    p.add_argument("--mode", default="incoherent", choices=["up", "down", "incoherent", "coherent", "generalized", "ideal"])
    p.add_argument("--p-up", type=float, default=0.5)
    p.add_argument("--format", default="json", choices=["json", "pretty"])
    p.set_defaults(func=cmd_pdo)

    p = sub.add_parser("sweep", help="witness eigenvalues over a polarizer-angle grid (CSV)")
    p.add_argument("--theta-range", nargs=3, type=float, default=(0.0, 1.4, 141), metavar=("MIN", "MAX", "STEPS"))
    p.add_argument("--theta", type=float, default=None, help="fixed angle instead of a range")
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--p-up", type=float, default=0.5)
    p.add_argument("--p-up-range", nargs=3, type=float, default=None, metavar=("MIN", "MAX", "STEPS"))
    p.add_argument("--modes", default="incoherent,coherent")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("three-time", help="three-time pseudo-density operator and its marginals")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--order", default="forward", choices=["forward", "reversed", "mixed"])
    p.add_argument("--p-forward", type=float, default=0.5)
    p.set_defaults(func=cmd_three_time)

    p = sub.add_parser("thermal", help="effective inverse temperatures of Gibbs-selected pseudo-states")
    p.add_argument("--e0", type=float, required=True)
    p.add_argument("--e1", type=float, required=True)
    p.add_argument("--beta1", type=float, required=True)
    p.add_argument("--beta2", type=float, required=True)
    p.add_argument("--p-up", type=float, default=0.5)
    p.set_defaults(func=cmd_thermal)

    p = sub.add_parser("simulate", help="Monte Carlo pseudo-state tomography")
    p.add_argument("--layout", default="coupled", choices=sorted(LAYOUTS))
    p.add_argument("--theta", type=float, default=math.pi / 6)
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--p-up", type=float, default=0.5)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--g", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--ideal", action="store_true", help="projective instead of weak measurements")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (UndefinedWeakValueError, DegenerateSelectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InsufficientStatisticsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STATISTICS
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
