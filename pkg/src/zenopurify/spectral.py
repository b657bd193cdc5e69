"""Biorthogonal eigendecomposition of a non-hermitian operator.

Right eigenvectors ``|u_n)`` come from a dense eigensolver; left eigenvectors
``(v_n|`` are the rows of the inverse right-eigenvector matrix, which pins
``(v_n|u_m) = delta_nm``. Left vectors are stored as kets (columns), so
``(v_n| = left[:, n].conj()``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NearDefective

TOL_DEG = 1e-6
COND_MAX = 1e12


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    condition: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def u(self, n: int = 0) -> np.ndarray:
        return self.right[:, n]

    def v(self, n: int = 0) -> np.ndarray:
        return self.left[:, n]

    def reconstruct(self) -> np.ndarray:
        return (self.right * self.eigenvalues) @ self.left.conj().T


@dataclass(frozen=True)
class SpectralDiagnostics:
    lambda_max: complex
    gap_ratio: float
    degenerate: bool
    condition_estimate: float


def _sort_order(lam: np.ndarray) -> np.ndarray:
    # descending |lambda|, then descending real part, then descending imaginary part
    return np.lexsort((-lam.imag, -lam.real, -np.abs(lam)))


def _fix_phases(right: np.ndarray) -> np.ndarray:
    peak = np.argmax(np.abs(right), axis=0)
    ph = right[peak, np.arange(right.shape[1])]
    return right * (np.abs(ph) / ph)[None, :]


def decompose(v: np.ndarray, tol_deg: float = TOL_DEG, cond_max: float = COND_MAX) -> SpectralDecomposition:
    """Right/left eigenvectors of ``v`` sorted by descending eigenvalue magnitude.

    Each right eigenvector has unit norm with its largest-magnitude component
    real and positive; left eigenvectors are normalized by ``(v_n|u_n) = 1``.

    ``tol_deg`` is accepted for signature symmetry with :func:`dominant`;
    degeneracy is only reported there.

    Raises:
        NearDefective: if the right-eigenvector matrix has condition number
            above ``cond_max``.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("matrix has non-finite entries")
    lam, right = np.linalg.eig(v)
    order = _sort_order(lam)
    lam = lam[order]
    right = _fix_phases(right[:, order])
    cond = float(np.linalg.cond(right))
    if not np.isfinite(cond) or cond > cond_max:
        raise NearDefective(
            f"eigenvector matrix condition number {cond:.3g} exceeds {cond_max:.3g}; "
            "operator is numerically defective"
        )
    left_rows = np.linalg.inv(right)
    return SpectralDecomposition(
        eigenvalues=lam,
        right=right,
        left=left_rows.conj().T,
        condition=cond,
    )


def dominant(d: SpectralDecomposition, tol_deg: float = TOL_DEG) -> SpectralDiagnostics:
    lam = d.eigenvalues
    if len(lam) == 0:
        raise ValueError("empty decomposition")
    top = abs(lam[0])
    if len(lam) == 1:
        gap, degenerate = 0.0, False
    elif top == 0.0:
        # every eigenvalue vanishes: no unique dominant term
        gap, degenerate = 1.0, True
    else:
        second = abs(lam[1])
        gap = min(second / top, 1.0)
        degenerate = bool(top - second < tol_deg * top)
    return SpectralDiagnostics(
        lambda_max=complex(lam[0]),
        gap_ratio=float(gap),
        degenerate=degenerate,
        condition_estimate=max(d.condition, 1.0),
    )


def spectral_power(d: SpectralDecomposition, n: int) -> np.ndarray:
    """``sum_k lambda_k^n |u_k)(v_k|``."""
    if n < 0:
        raise ValueError(f"power must be nonnegative, got {n}")
    return (d.right * d.eigenvalues**n) @ d.left.conj().T


def biorthonormality_residual(d: SpectralDecomposition) -> float:
    gram = d.left.conj().T @ d.right
    return float(np.max(np.abs(gram - np.eye(d.dim))))


def completeness_residual(d: SpectralDecomposition) -> float:
    return float(np.max(np.abs(d.right @ d.left.conj().T - np.eye(d.dim))))


def reconstruction_residual(d: SpectralDecomposition, v: np.ndarray) -> float:
    return float(np.max(np.abs(d.reconstruct() - v)))


def rank1_residual(d: SpectralDecomposition, n: int) -> float:
    """Relative distance between ``V^n`` and its dominant rank-1 term."""
    full = spectral_power(d, n)
    lead = d.eigenvalues[0] ** n * np.outer(d.u(0), d.v(0).conj())
    scale = np.linalg.norm(full)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(full - lead) / scale)
