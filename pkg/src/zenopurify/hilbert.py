"""Truncated Fock-space primitives.

Kets are 1-D complex arrays and operators are square 2-D complex arrays; the
dimension is the array length. Joint spaces use the Kronecker convention with
system A as the slow (outer) index and system B as the fast (inner) index, so
the joint index of ``|n_a, n_b>`` is ``n_a * dimB + n_b``.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DegenerateVector,
    DimensionCapExceeded,
    DimensionMismatch,
    InvalidDimension,
    InvalidState,
)

HERMITICITY_TOL = 1e-10
NORMALIZATION_TOL = 1e-12
POSITIVITY_TOL = 1e-10
TRACE_TOL = 1e-10

MAX_DIM_ENV = "ZENOPURIFY_MAX_DIM"
DEFAULT_MAX_DIM = 4096


def max_joint_dim() -> int:
    """Joint-dimension safety cap, read from the environment on every call."""
    raw = os.environ.get(MAX_DIM_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_DIM
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InvalidDimension(f"{MAX_DIM_ENV}={raw!r} is not an integer") from exc
    if cap < 1:
        raise InvalidDimension(f"{MAX_DIM_ENV} must be positive, got {cap}")
    return cap


def check_joint_dim(dim: int) -> None:
    cap = max_joint_dim()
    if dim > cap:
        raise DimensionCapExceeded(
            f"joint dimension {dim} exceeds cap {cap} (set {MAX_DIM_ENV} to raise it)"
        )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def annihilation_op(dim: int) -> np.ndarray:
    """Truncated ladder operator with ``<n-1|a|n> = sqrt(n)``."""
    if dim < 2:
        raise InvalidDimension(f"ladder operators need dim >= 2, got {dim}")
    return _frozen(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex))


def creation_op(dim: int) -> np.ndarray:
    return _frozen(annihilation_op(dim).T.copy())


def number_op(dim: int) -> np.ndarray:
    if dim < 1:
        raise InvalidDimension(f"dim must be positive, got {dim}")
    return _frozen(np.diag(np.arange(dim, dtype=float)).astype(complex))


def identity(dim: int) -> np.ndarray:
    if dim < 1:
        raise InvalidDimension(f"dim must be positive, got {dim}")
    return _frozen(np.eye(dim, dtype=complex))


def tensor_product(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Kronecker product ``x (x) y`` with x as the slow index."""
    x = np.asarray(x)
    y = np.asarray(y)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("tensor_product operands must be finite")
    check_joint_dim(x.shape[0] * y.shape[0])
    return _frozen(np.kron(x, y).astype(complex, copy=False))


def projector(u: np.ndarray) -> np.ndarray:
    """Normalized rank-1 projector ``|u)(u| / (u|u)``."""
    u = np.asarray(u, dtype=complex)
    nrm2 = np.vdot(u, u).real
    if nrm2 == 0.0:
        raise DegenerateVector("cannot project onto the zero vector")
    return np.outer(u, u.conj()) / nrm2


def normalize(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    nrm = np.linalg.norm(u)
    if nrm == 0.0:
        raise DegenerateVector("cannot normalize the zero vector")
    return u / nrm


def is_normalized(u: np.ndarray, tol: float = NORMALIZATION_TOL) -> bool:
    return abs(np.vdot(u, u).real - 1.0) <= tol


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = HERMITICITY_TOL,
    pos_tol: float = POSITIVITY_TOL,
    trace_tol: float = TRACE_TOL,
) -> np.ndarray:
    """Validate and return ``rho`` as a complex density matrix.

    Raises:
        InvalidState: if ``rho`` is not square, not hermitian, has a negative
            eigenvalue below ``-pos_tol`` or a trace off by more than
            ``trace_tol``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidState(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidState("density matrix has non-finite entries")
    herm_err = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if herm_err > herm_tol:
        raise InvalidState(f"density matrix not hermitian (max deviation {herm_err:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise InvalidState(f"density matrix trace is {tr!r}, expected 1")
    lam_min = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam_min < -pos_tol:
        raise InvalidState(f"density matrix has negative eigenvalue {lam_min:.3g}")
    return rho


def _check_same_dim(*arrays: np.ndarray) -> None:
    dims = {a.shape[0] for a in arrays}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")


def fidelity_pure(rho: np.ndarray, u: np.ndarray) -> float:
    """Overlap ``(u|rho|u) / (u|u)`` of a density matrix with a pure state.

    The result does not depend on the norm or global phase of ``u``.
    """
    rho = np.asarray(rho, dtype=complex)
    u = np.asarray(u, dtype=complex)
    _check_same_dim(rho, u)
    nrm2 = np.vdot(u, u).real
    if nrm2 == 0.0:
        raise DegenerateVector("fidelity against the zero vector is undefined")
    val = np.vdot(u, rho @ u).real / nrm2
    return float(min(max(val, 0.0), 1.0))


def trace_distance(r1: np.ndarray, r2: np.ndarray) -> float:
    """Half the trace norm of ``r1 - r2``."""
    r1 = np.asarray(r1, dtype=complex)
    r2 = np.asarray(r2, dtype=complex)
    _check_same_dim(r1, r2)
    return float(0.5 * np.sum(np.linalg.svd(r1 - r2, compute_uv=False)))


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.trace(np.asarray(op) @ np.asarray(rho)))


def hermitian_blocks(h: np.ndarray) -> list[np.ndarray]:
    """Index sets of the decoupled blocks of a hermitian matrix.

    Two basis states share a block when they are linked by a chain of nonzero
    matrix elements. Conserved quantities (such as total excitation number)
    show up as many small blocks.
    """
    mask = csr_matrix(np.abs(h) > 0.0)
    n_comp, labels = connected_components(mask, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.flatnonzero(np.diff(labels[order])) + 1
    return np.split(order, bounds) if n_comp > 1 else [order]


def hermitian_eig_blocks(h: np.ndarray) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Blockwise eigendecomposition of a hermitian matrix.

    Returns ``(indices, eigenvalues, eigenvectors)`` per block, with the
    eigenvectors expressed in the block's own coordinates.
    """
    h = np.asarray(h)
    out = []
    for idx in hermitian_blocks(h):
        w, vecs = np.linalg.eigh(h[np.ix_(idx, idx)])
        out.append((idx, w, vecs))
    return out


def unitary_propagator(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` for hermitian ``h`` via its eigendecomposition."""
    h = np.asarray(h)
    dim = h.shape[0]
    u = np.zeros((dim, dim), dtype=complex)
    for idx, w, vecs in hermitian_eig_blocks(h):
        u[np.ix_(idx, idx)] = (vecs * np.exp(-1j * w * t)) @ vecs.conj().T
    return u
