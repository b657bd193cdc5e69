"""Choosing the measurement interval.

Two goals pull on tau: the dominant eigenvalue should have magnitude close to
one (keeps the survival probability up) and the remaining eigenvalues should
be small relative to it (fast approach to the target state).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .errors import NoCandidate, ZenoError
from .model import ModelParams, ProjectionSpec, delta
from .spectral import TOL_DEG, decompose, dominant
from .veff import effective_operator


@dataclass(frozen=True)
class TuneRecord:
    tau: float
    lambda_max_abs: float
    gap_ratio: float
    degenerate: bool
    valid: bool = True
    error: str | None = None

    def score(self, weight: float) -> float:
        return weight * self.lambda_max_abs + (1 - weight) * (1 - self.gap_ratio)


def resonant_tau(p: ModelParams) -> float:
    """``2 pi / [(Omega + omega)/2 + delta]``."""
    return 2 * math.pi / ((p.Omega + p.omega) / 2 + delta(p))


def evaluate_tau(p: ModelParams, proj: ProjectionSpec, tau: float, tol_deg: float = TOL_DEG) -> TuneRecord:
    """Spectral summary of V at one interval; failures come back as invalid records."""
    try:
        if not (math.isfinite(tau) and tau >= 0):
            raise ValueError(f"tau must be finite and >= 0, got {tau!r}")
        op = effective_operator(replace(p, tau=tau), proj)
        diag = dominant(decompose(op.v), tol_deg)
    except (ZenoError, ValueError, ArithmeticError) as exc:
        return TuneRecord(tau, math.nan, math.nan, False, valid=False, error=f"{type(exc).__name__}: {exc}")
    return TuneRecord(tau, abs(diag.lambda_max), diag.gap_ratio, diag.degenerate)


def sweep_tau(
    p: ModelParams,
    proj: ProjectionSpec,
    taus: Iterable[float],
    tol_deg: float = TOL_DEG,
    workers: int = 1,
) -> list[TuneRecord]:
    """Evaluate :func:`evaluate_tau` on every tau, preserving input order."""
    taus = [float(t) for t in taus]
    if not taus:
        raise ValueError("taus must be nonempty")
    if workers <= 1:
        return [evaluate_tau(p, proj, t, tol_deg) for t in taus]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: evaluate_tau(p, proj, t, tol_deg), taus))


def best_tau(records: Sequence[TuneRecord], weight: float = 0.5) -> TuneRecord:
    """Highest-scoring valid, nondegenerate record; ties go to the smaller tau.

    The score is ``weight * |lambda_max| + (1 - weight) * (1 - gap_ratio)``.
    """
    if not 0 <= weight <= 1:
        raise ValueError(f"weight must lie in [0, 1], got {weight}")
    candidates = [r for r in records if r.valid and not r.degenerate]
    if not candidates:
        raise NoCandidate("no valid nondegenerate tau in the sweep")
    return max(candidates, key=lambda r: (r.score(weight), -r.tau))
