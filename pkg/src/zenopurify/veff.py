"""The one-step operator ``V = <phi| exp(-i H tau) |phi>`` acting on system B.

Two independent routes are provided: a direct numerical compression of the
joint propagator, and closed forms obtained from the normal-ordered
factorization

    exp(-i H tau) = exp(A a^+ b) exp(B a^+ a) exp(C b^+ b) exp(-A a b^+)

for number-state and coherent-state projections.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import hilbert
from .errors import FactorizationSingular, FixedPointSingular
from .model import (
    CoherentState,
    ModelParams,
    NumberState,
    ProjectionSpec,
    build_hamiltonian,
    delta,
    projection_ket,
)

BRACKET_TOL = 1e-12
FIXED_POINT_TOL = 1e-10
CONTRACTION_TOL = 1e-9

NUMERIC = "numeric"
ANALYTIC_NUMBER = "analytic-number"
ANALYTIC_COHERENT = "analytic-coherent"


@dataclass(frozen=True)
class ABCCoefficients:
    A: complex
    B: complex
    C: complex


@dataclass(frozen=True)
class EffectiveOperator:
    v: np.ndarray
    provenance: str
    params: ModelParams
    projection: ProjectionSpec

    @property
    def dim(self) -> int:
        return self.v.shape[0]

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.v, 2))


def _bracket(p: ModelParams) -> tuple[float, complex]:
    d = delta(p)
    dt = d * p.tau
    return d, complex(math.cos(dt), (p.Omega - p.omega) / (2 * d) * math.sin(dt))


def abc_coefficients(p: ModelParams) -> ABCCoefficients:
    """Factorization coefficients A, B, C for interval ``p.tau``.

    The logarithm takes its principal branch.

    Raises:
        FactorizationSingular: when ``cos(delta tau) + i (Omega-omega)/(2 delta)
            sin(delta tau)`` vanishes, i.e. on resonance at
            ``delta tau = pi/2 + k pi``.
    """
    d, br = _bracket(p)
    if abs(br) < BRACKET_TOL:
        raise FactorizationSingular(
            f"factorization singular at tau={p.tau!r} (|bracket|={abs(br):.3g})"
        )
    half_phase = -0.5j * (p.Omega + p.omega) * p.tau
    log_br = cmath.log(br)
    return ABCCoefficients(
        A=(p.g / d) * math.sin(d * p.tau) / br,
        B=half_phase - log_br,
        C=half_phase + log_br,
    )


def _compress(h: np.ndarray, tau: float, phi: np.ndarray, dim_b: int) -> np.ndarray:
    # V[j, l] = sum_{i,k} conj(phi_i) U[(i,j),(k,l)] phi_k, accumulated block by block
    v = np.zeros((dim_b, dim_b), dtype=complex)
    phi_joint = np.repeat(phi, dim_b)
    b_index = np.tile(np.arange(dim_b), len(phi))
    for idx, w, vecs in hilbert.hermitian_eig_blocks(h):
        weights = phi_joint[idx]
        if not np.any(weights):
            continue
        u_blk = (vecs * np.exp(-1j * w * tau)) @ vecs.conj().T
        contrib = weights.conj()[:, None] * u_blk * weights[None, :]
        rows = b_index[idx]
        np.add.at(v, (rows[:, None], rows[None, :]), contrib)
    return v


def v_numeric(p: ModelParams, proj: ProjectionSpec) -> EffectiveOperator:
    """Compress the exact joint propagator onto the measured state of A.

    The propagator is formed from the hermitian eigendecomposition of the
    joint Hamiltonian, block by block over its decoupled sectors.
    """
    h = build_hamiltonian(p)
    phi = projection_ket(proj, p.dimA)
    if p.tau == 0:
        # U = 1 exactly; phi is normalized, so skip the round-off of e^{0} via eigenvectors
        v = np.eye(p.dimB, dtype=complex)
    else:
        v = _compress(h, p.tau, phi, p.dimB)
    return EffectiveOperator(v, NUMERIC, p, proj)


def number_diagonal(abc: ABCCoefficients, n_a: int, dim_b: int) -> np.ndarray:
    """Diagonal of V for a number-state projection ``|n_a>``.

    Each term of the sum over k is ``C(n_a, k) C(n_b + m, m) e^{kB} x^m`` with
    ``m = n_a - k`` and ``x = -A^2 e^C``; consecutive terms are generated by
    their ratio so no factorial is ever evaluated.
    """
    nb = np.arange(dim_b, dtype=float)
    e_b = cmath.exp(abc.B)
    x = -abc.A**2 * cmath.exp(abc.C)
    term = np.full(dim_b, e_b**n_a, dtype=complex)
    total = term.copy()
    for m in range(n_a):
        term = term * ((n_a - m) / (m + 1)) * ((nb + m + 1) / (m + 1)) * (x / e_b)
        total += term
    return total * np.exp(abc.C * nb)


def v_number_analytic(p: ModelParams, n_a: int, dim_b: int | None = None) -> EffectiveOperator:
    """Closed-form V for a number-state projection; exactly diagonal."""
    dim_b = p.dimB if dim_b is None else dim_b
    abc = abc_coefficients(p)
    v = np.diag(number_diagonal(abc, n_a, dim_b))
    return EffectiveOperator(v, ANALYTIC_NUMBER, replace(p, dimB=dim_b), NumberState(n_a))


def _fixed_point_denominator(abc: ABCCoefficients) -> complex:
    q = 1 - cmath.exp(-abc.C)
    if abs(q) < FIXED_POINT_TOL:
        raise FixedPointSingular(f"|1 - exp(-C)| = {abs(q):.3g} below {FIXED_POINT_TOL}")
    return q


def coherent_exponent(abc: ABCCoefficients) -> complex:
    """``1 - e^B - A^2 / (1 - e^{-C})``; V carries ``exp(-exponent |alpha|^2)``."""
    q = _fixed_point_denominator(abc)
    return 1 - cmath.exp(abc.B) - abc.A**2 / q


def d_operator(abc: ABCCoefficients, alpha: complex, dim_b: int) -> np.ndarray:
    """``C (b^+ + A alpha^* / q)(b - A alpha / q)`` with ``q = 1 - e^{-C}``."""
    q = _fixed_point_denominator(abc)
    b = hilbert.annihilation_op(dim_b)
    eye = np.eye(dim_b)
    left = b.T + (abc.A * np.conj(alpha) / q) * eye
    right = b - (abc.A * alpha / q) * eye
    return abc.C * (left @ right)


def v_coherent_analytic(
    p: ModelParams, alpha: complex, dim_b: int | None = None
) -> EffectiveOperator:
    """Closed-form V for a coherent-state projection ``|alpha>``.

    Raises:
        FixedPointSingular: if ``|1 - exp(-C)| < 1e-10``.
    """
    dim_b = p.dimB if dim_b is None else dim_b
    abc = abc_coefficients(p)
    pref = cmath.exp(-coherent_exponent(abc) * abs(alpha) ** 2)
    v = pref * scipy.linalg.expm(d_operator(abc, alpha, dim_b))
    return EffectiveOperator(v, ANALYTIC_COHERENT, replace(p, dimB=dim_b), CoherentState(alpha))


def beta_fixed_point(p: ModelParams, alpha: complex) -> complex:
    """Coherent amplitude ``A alpha / (1 - e^{-C})`` that system B is driven to."""
    abc = abc_coefficients(p)
    return abc.A * alpha / _fixed_point_denominator(abc)


def effective_operator(p: ModelParams, proj: ProjectionSpec) -> EffectiveOperator:
    """Closed form for number/coherent projections, numerics otherwise.

    At ``1 - e^{-C} = 0`` the coherent closed form is a removable 0/0, so that
    case falls back to the numerical route.
    """
    if isinstance(proj, NumberState):
        return v_number_analytic(p, proj.n_a)
    if isinstance(proj, CoherentState):
        try:
            return v_coherent_analytic(p, proj.alpha)
        except FixedPointSingular:
            return v_numeric(p, proj)
    return v_numeric(p, proj)


def interior_size(dim: int) -> int:
    """Side of the trusted top-left block (a quarter of the matrix area)."""
    return max(dim // 2, 1)


def interior_difference(x: np.ndarray, y: np.ndarray) -> float:
    n = interior_size(min(x.shape[0], y.shape[0]))
    return float(np.max(np.abs(x[:n, :n] - y[:n, :n])))


def verify_truncation(p: ModelParams, proj: ProjectionSpec, growth: int = 16) -> float:
    """Largest interior-block change in numeric V when both dims grow by ``growth``."""
    small = v_numeric(p, proj).v
    big = v_numeric(replace(p, dimA=p.dimA + growth, dimB=p.dimB + growth), proj).v
    return interior_difference(small, big)


def factorized_propagator(p: ModelParams) -> np.ndarray:
    """Joint-space product of the four exponentials, for checking the factorization."""
    abc = abc_coefficients(p)
    a = hilbert.annihilation_op(p.dimA)
    b = hilbert.annihilation_op(p.dimB)
    ea, eb = np.eye(p.dimA), np.eye(p.dimB)
    ad_b = hilbert.tensor_product(a.T, b)
    a_bd = hilbert.tensor_product(a, b.T)
    n_a = hilbert.tensor_product(a.T @ a, eb)
    n_b = hilbert.tensor_product(ea, b.T @ b)
    return (
        scipy.linalg.expm(abc.A * ad_b)
        @ np.diag(np.exp(abc.B * np.diag(n_a)))
        @ np.diag(np.exp(abc.C * np.diag(n_b)))
        @ scipy.linalg.expm(-abc.A * a_bd)
    )


def is_contraction(op: EffectiveOperator, tol: float = CONTRACTION_TOL) -> bool:
    return op.operator_norm() <= 1 + tol

