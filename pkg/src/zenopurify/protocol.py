"""Post-selected repeated-measurement protocol on system B."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import hilbert
from .errors import AsymptoticsUndefined, DimensionMismatch, ProbabilityUnderflow
from .spectral import TOL_DEG, SpectralDecomposition, decompose, dominant, spectral_power
from .veff import EffectiveOperator

UNDERFLOW = 1e-300


@dataclass(frozen=True)
class TrajectoryPoint:
    n: int
    survival: float
    fid: float | None
    state: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Trajectory:
    points: tuple[TrajectoryPoint, ...]
    underflow: bool = False

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def survival(self) -> np.ndarray:
        return np.array([pt.survival for pt in self.points])

    @property
    def fidelity(self) -> np.ndarray:
        return np.array([np.nan if pt.fid is None else pt.fid for pt in self.points])


@dataclass(frozen=True)
class AsymptoticPrediction:
    n: int
    survival_pred: float
    state_pred: np.ndarray = field(repr=False)


def _matrix(v) -> np.ndarray:
    return v.v if isinstance(v, EffectiveOperator) else np.asarray(v, dtype=complex)


def run_protocol(
    v,
    rho0: np.ndarray,
    n_max: int,
    decomposition: SpectralDecomposition | None = None,
    tol_deg: float = TOL_DEG,
    strict: bool = False,
) -> Trajectory:
    """Iterate ``sigma -> V sigma V^+`` from ``rho0`` for ``n_max`` steps.

    The unnormalized state is carried along so that its trace is the survival
    probability. Fidelity is measured against the dominant right eigenvector
    of ``v`` and is ``None`` at every point when that eigenvalue is
    degenerate in magnitude.

    If the survival probability drops below 1e-300 the trajectory stops early
    and is flagged with ``underflow=True``; with ``strict`` a
    :class:`ProbabilityUnderflow` is raised instead.
    """
    vm = _matrix(v)
    rho0 = hilbert.check_density_matrix(rho0)
    if rho0.shape != vm.shape:
        raise DimensionMismatch(f"state shape {rho0.shape} vs operator shape {vm.shape}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    if decomposition is None:
        decomposition = decompose(vm)
    target = None if dominant(decomposition, tol_deg).degenerate else decomposition.u(0)

    def point(k: int, sigma: np.ndarray, tr: float) -> TrajectoryPoint:
        state = sigma / tr
        fid = None if target is None else hilbert.fidelity_pure(state, target)
        return TrajectoryPoint(k, min(tr, 1.0), fid, state)

    vdag = vm.conj().T
    sigma = 0.5 * (rho0 + rho0.conj().T)
    pts = [point(0, sigma, 1.0)]
    for k in range(1, n_max + 1):
        sigma = vm @ sigma @ vdag
        sigma = 0.5 * (sigma + sigma.conj().T)
        tr = float(np.trace(sigma).real)
        if not tr > UNDERFLOW:
            if strict:
                raise ProbabilityUnderflow(f"survival probability underflowed at N={k}")
            return Trajectory(tuple(pts), underflow=True)
        pts.append(point(k, sigma, tr))
    return Trajectory(tuple(pts))


def asymptotic_prediction(
    d: SpectralDecomposition, rho0: np.ndarray, n: int, tol_deg: float = TOL_DEG
) -> AsymptoticPrediction:
    """Large-N survival probability and limiting pure state.

    Raises:
        AsymptoticsUndefined: if the dominant eigenvalue is degenerate in
            magnitude.
    """
    diag = dominant(d, tol_deg)
    if diag.degenerate:
        raise AsymptoticsUndefined("dominant eigenvalue is degenerate; no unique limit")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    u, vl = d.u(0), d.v(0)
    uu = np.vdot(u, u).real
    vrv = np.vdot(vl, np.asarray(rho0) @ vl).real
    surv = abs(diag.lambda_max) ** (2 * n) * uu * vrv
    return AsymptoticPrediction(n, float(surv), hilbert.projector(u))


def survival_from_powers(d: SpectralDecomposition, rho0: np.ndarray, n: int) -> float:
    """``Tr[V^n rho0 (V^+)^n]`` evaluated through the spectral power."""
    vn = spectral_power(d, n)
    return float(np.trace(vn @ rho0 @ vn.conj().T).real)


def convergence_step(t: Trajectory, eps: float) -> int | None:
    """First measurement count whose fidelity reaches ``1 - eps``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    for pt in t.points:
        if pt.fid is not None and pt.fid >= 1 - eps:
            return pt.n
    return None
