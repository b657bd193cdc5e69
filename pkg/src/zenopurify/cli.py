"""Command-line front end.

    zenopurify simulate --config run.toml [--csv P.csv] [--json R.json] [--svg P.svg]
    zenopurify spectrum --config run.toml --json S.json
    zenopurify tune --config run.toml --tau-min 4.5 --tau-max 6 --steps 151 --csv T.csv
    zenopurify reproduce-fig1 [--outdir DIR]

Exit codes are listed in :mod:`zenopurify.errors`.
"""

from __future__ import annotations

import argparse
import cmath
import math
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import errors
from .config import InitialState, RunConfig, load_config
from .errors import TruncationInadequate, ZenoError
from .model import CoherentState, ModelParams, coherent_adequate, delta
from .output import (
    SCHEMA_VERSION,
    complex_json,
    fmt,
    fmt_bool,
    svg_chart,
    write_csv,
    write_json,
)
from .protocol import Trajectory, asymptotic_prediction, convergence_step, run_protocol
from .spectral import SpectralDecomposition, SpectralDiagnostics, decompose, dominant
from .tuning import best_tau, resonant_tau, sweep_tau
from .veff import EffectiveOperator, abc_coefficients, beta_fixed_point, effective_operator, verify_truncation

FIG1_REFERENCE_GAP = 0.37
FIG1_DIM = 48
FIG1_NMAX = 20
FIG1_TRUNCATION_GROWTH = 16
FIG1_TRUNCATION_TOL = 1e-8


@dataclass
class Simulation:
    config: RunConfig
    operator: EffectiveOperator
    decomposition: SpectralDecomposition
    diagnostics: SpectralDiagnostics
    trajectory: Trajectory
    record: dict


def check_truncation(config: RunConfig) -> None:
    """Refuse coherent amplitudes that the truncated spaces cannot hold."""
    p, proj = config.model, config.projection
    if isinstance(proj, CoherentState):
        if not coherent_adequate(proj.alpha, p.dimA):
            raise TruncationInadequate(f"dimA={p.dimA} too small for alpha={proj.alpha}")
        try:
            beta = beta_fixed_point(p, proj.alpha)
        except ZenoError:
            beta = None
        if beta is not None and not coherent_adequate(beta, p.dimB):
            raise TruncationInadequate(f"dimB={p.dimB} too small for target amplitude beta={beta:.4g}")
    init = config.initial_state
    if init.kind == "coherent" and not coherent_adequate(init.alpha, p.dimB):
        raise TruncationInadequate(f"dimB={p.dimB} too small for initial alpha={init.alpha}")


def spectrum_record(d: SpectralDecomposition, diag: SpectralDiagnostics) -> dict:
    return {
        "eigenvalues": [
            {"re": float(z.real), "im": float(z.imag), "abs": float(abs(z))} for z in d.eigenvalues
        ],
        "lambda_max": complex_json(diag.lambda_max),
        "gap_ratio": diag.gap_ratio,
        "degenerate": diag.degenerate,
        "condition_estimate": diag.condition_estimate,
        "dominant_right_eigenvector": [complex_json(z) for z in d.u(0)],
    }


def simulate(config: RunConfig) -> Simulation:
    start = time.perf_counter()
    check_truncation(config)
    p = config.model
    rho0 = config.initial_state.realize(p)
    op = effective_operator(p, config.projection)
    d = decompose(op.v)
    diag = dominant(d, config.tol_deg)
    traj = run_protocol(op, rho0, config.n_max, d, config.tol_deg)
    last = traj.points[-1]
    if diag.degenerate or last.n < 1:
        asym = None
    else:
        pred = asymptotic_prediction(d, rho0, last.n, config.tol_deg)
        asym = {
            "n": pred.n,
            "survival_pred": pred.survival_pred,
            "survival_observed": last.survival,
            "relative_error": abs(pred.survival_pred - last.survival) / last.survival,
        }
    record = {
        "schema_version": SCHEMA_VERSION,
        "config": config.describe(),
        "provenance": op.provenance,
        "trajectory": [{"N": pt.n, "P": pt.survival, "F": pt.fid} for pt in traj.points],
        "underflow": traj.underflow,
        "spectrum": spectrum_record(d, diag),
        "asymptotic": asym,
        "duration_seconds": time.perf_counter() - start,
    }
    return Simulation(config, op, d, diag, traj, record)


def trajectory_rows(traj: Trajectory):
    return [(str(pt.n), fmt(pt.survival), fmt(pt.fid)) for pt in traj.points]


def trajectory_svg(traj: Trajectory, title: str = "") -> str:
    xs = [pt.n for pt in traj.points]
    return svg_chart(
        xs,
        [
            ("P (survival)", "#1f77b4", [pt.survival for pt in traj.points]),
            ("F (fidelity)", "#d62728", [pt.fid for pt in traj.points]),
        ],
        title=title,
    )


def cmd_simulate(config: RunConfig) -> Simulation:
    """Run the protocol and write whichever of CSV/JSON/SVG the config names."""
    sim = simulate(config)
    if config.csv:
        write_csv(config.csv, ("N", "P", "F"), trajectory_rows(sim.trajectory))
    if config.json:
        write_json(config.json, sim.record)
    if config.svg:
        Path(config.svg).write_text(trajectory_svg(sim.trajectory), encoding="utf-8")
    return sim


def cmd_spectrum(config: RunConfig, json_path: Path) -> dict:
    check_truncation(config)
    op = effective_operator(config.model, config.projection)
    d = decompose(op.v)
    diag = dominant(d, config.tol_deg)
    record = {
        "schema_version": SCHEMA_VERSION,
        "config": config.describe(),
        "provenance": op.provenance,
        **spectrum_record(d, diag),
    }
    write_json(json_path, record)
    return record


def cmd_tune(config: RunConfig, tau_min: float, tau_max: float, steps: int, weight: float, csv_path: Path):
    """Sweep a uniform tau grid, write it as CSV and return ``(records, best)``."""
    if not tau_min < tau_max:
        raise errors.ConfigInvalid(f"tau-min ({tau_min}) must be below tau-max ({tau_max})")
    if steps < 2:
        raise errors.ConfigInvalid(f"steps must be >= 2, got {steps}")
    if not 0 <= weight <= 1:
        raise errors.ConfigInvalid(f"weight must lie in [0, 1], got {weight}")
    taus = np.linspace(tau_min, tau_max, steps)
    records = sweep_tau(config.model, config.projection, taus, config.tol_deg)
    write_csv(
        csv_path,
        ("tau", "lambda_max_abs", "gap_ratio", "degenerate", "valid"),
        [
            (fmt(r.tau), fmt(r.lambda_max_abs), fmt(r.gap_ratio), fmt_bool(r.degenerate), fmt_bool(r.valid))
            for r in records
        ],
    )
    return records, best_tau(records, weight)


def fig1_config(outdir: Path | None = None) -> RunConfig:
    p = ModelParams(Omega=1.0, omega=1.0, g=0.2, tau=0.0, temperature=1.0, dimA=FIG1_DIM, dimB=FIG1_DIM)
    p = replace(p, tau=resonant_tau(p))
    outdir = Path(".") if outdir is None else Path(outdir)
    return RunConfig(
        model=p,
        projection=CoherentState(0.5),
        initial_state=InitialState("thermal", temperature=1.0),
        n_max=FIG1_NMAX,
        csv=outdir / "fig1.csv",
        json=outdir / "fig1.json",
        svg=outdir / "fig1.svg",
    )


def closed_form_gap(p: ModelParams) -> float:
    """``sqrt(1 - (g/delta)^2 sin^2(delta tau))``, equal to ``|e^C|``."""
    d = delta(p)
    return math.sqrt(1 - (p.g / d) ** 2 * math.sin(d * p.tau) ** 2)


def fig1_summary(sim: Simulation, truncation_change: float) -> str:
    p = sim.config.model
    traj = sim.trajectory
    abc = abc_coefficients(p)
    gap_formula = closed_form_gap(p)
    beta = beta_fixed_point(p, 0.5)
    asym = sim.record["asymptotic"]
    pred10 = asymptotic_prediction(sim.decomposition, sim.config.initial_state.realize(p), 10)
    lines = [
        "Purification with a coherent-state projection, thermal system B",
        f"  Omega={p.Omega!r} omega={p.omega!r} g={p.g!r} T={p.temperature!r} alpha=0.5",
        f"  tau = 2 pi / [(Omega+omega)/2 + delta] = {p.tau!r}",
        f"  dims A,B = {p.dimA},{p.dimB}; interior change on growth by {FIG1_TRUNCATION_GROWTH}: {truncation_change:.3e}",
        "",
        f"  |lambda_max| (numeric)         = {abs(sim.diagnostics.lambda_max)!r}",
        f"  gap ratio |l2/l1| (numeric)    = {sim.diagnostics.gap_ratio!r}",
        f"  gap ratio |e^C| (closed form)  = {gap_formula!r}",
        f"  |e^C| from A,B,C coefficients  = {abs(cmath.exp(abc.C))!r}",
        f"  published reference gap ratio  = {FIG1_REFERENCE_GAP}",
        "  note: with these parameters delta tau = pi/3, so the closed form gives sqrt(1 - 3/4) = 0.5;",
        "        the published reference value 0.37 does not follow from it. Both are reported.",
        "",
        f"  fixed point beta = A alpha/(1 - e^-C) = {beta.real:+.12f}{beta.imag:+.12f}i",
        f"  F(N=2)  = {traj[2].fid!r}",
        f"  F(N=10) = {traj[10].fid!r}",
        f"  first N with F >= 0.95: {convergence_step(traj, 0.05)}",
        f"  P(N=10) = {traj[10].survival!r}; large-N prediction {pred10.survival_pred!r}"
        f" (relative difference {abs(pred10.survival_pred / traj[10].survival - 1):.3e})",
    ]
    if asym is not None:
        lines.append(
            f"  P(N={asym['n']}) = {asym['survival_observed']!r}; prediction {asym['survival_pred']!r}"
        )
    return "\n".join(lines) + "\n"


def cmd_reproduce_fig1(outdir: Path | None = None) -> Simulation:
    config = fig1_config(outdir)
    change = verify_truncation(config.model, config.projection, FIG1_TRUNCATION_GROWTH)
    if not change < FIG1_TRUNCATION_TOL:
        raise TruncationInadequate(f"truncation check failed: interior change {change:.3e}")
    if outdir is not None:
        Path(outdir).mkdir(parents=True, exist_ok=True)
    sim = cmd_simulate(config)
    text = fig1_summary(sim, change)
    (Path(".") if outdir is None else Path(outdir)).joinpath("fig1_summary.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return sim


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zenopurify", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", required=True, type=Path, help="TOML run configuration")
        sp.add_argument(
            "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable); flags win over the file",
        )

    sp = sub.add_parser("simulate", help="run the measurement protocol")
    with_config(sp)
    sp.add_argument("--csv", type=Path)
    sp.add_argument("--json", type=Path)
    sp.add_argument("--svg", type=Path)

    sp = sub.add_parser("spectrum", help="eigenvalues and dominant eigenvector of V")
    with_config(sp)
    sp.add_argument("--json", type=Path, required=True)

    sp = sub.add_parser("tune", help="sweep the measurement interval")
    with_config(sp)
    sp.add_argument("--tau-min", type=float, required=True)
    sp.add_argument("--tau-max", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--weight", type=float, default=0.5)
    sp.add_argument("--csv", type=Path, required=True)

    sp = sub.add_parser("reproduce-fig1", help="coherent-projection example with a thermal start")
    sp.add_argument("--outdir", type=Path)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return errors.EXIT_CONFIG_INVALID if exc.code else errors.EXIT_OK
    try:
        if args.command == "reproduce-fig1":
            sim = cmd_reproduce_fig1(args.outdir)
            return errors.EXIT_PROBABILITY_UNDERFLOW if sim.trajectory.underflow else errors.EXIT_OK
        config = load_config(args.config, args.set)
        if args.command == "simulate":
            flags = {k: getattr(args, k) for k in ("csv", "json", "svg") if getattr(args, k) is not None}
            sim = cmd_simulate(replace(config, **flags))
            if sim.trajectory.underflow:
                print(f"survival probability underflowed after N={sim.trajectory[-1].n}", file=sys.stderr)
                return errors.EXIT_PROBABILITY_UNDERFLOW
        elif args.command == "spectrum":
            cmd_spectrum(config, args.json)
        elif args.command == "tune":
            _, best = cmd_tune(config, args.tau_min, args.tau_max, args.steps, args.weight, args.csv)
            print(
                f"best tau={best.tau!r} lambda_max_abs={best.lambda_max_abs!r} "
                f"gap_ratio={best.gap_ratio!r} score={best.score(args.weight)!r}"
            )
    except ZenoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return errors.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
