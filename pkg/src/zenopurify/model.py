"""Two coupled oscillators in the rotating-wave approximation.

Units have hbar = k_B = 1. Oscillator ``a`` is the measured system A,
oscillator ``b`` is system B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import hilbert
from .errors import (
    DegenerateDelta,
    IndexOutOfRange,
    InvalidDimension,
    InvalidParameter,
    InvalidState,
    InvalidTemperature,
    TruncationInadequate,
)


@dataclass(frozen=True)
class ModelParams:
    Omega: float
    omega: float
    g: float
    tau: float
    temperature: float = 0.0
    dimA: int = 32
    dimB: int = 32

    def __post_init__(self):
        for name in ("Omega", "omega", "g", "tau", "temperature"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameter(f"{name} must be finite")
        if self.dimA < 2 or self.dimB < 2:
            raise InvalidDimension(f"dimA and dimB must be >= 2, got {self.dimA}, {self.dimB}")
        if self.tau < 0:
            raise InvalidParameter(f"tau must be >= 0, got {self.tau}")
        if self.temperature < 0:
            raise InvalidTemperature(f"temperature must be >= 0, got {self.temperature}")

    @property
    def delta(self) -> float:
        return delta(self)


def delta(p: ModelParams) -> float:
    """Rabi-like frequency ``sqrt(g^2 + (Omega - omega)^2 / 4)``."""
    d = math.hypot(p.g, (p.Omega - p.omega) / 2)
    if d == 0:
        raise DegenerateDelta("delta vanishes for g = 0 on resonance")
    return d


def build_hamiltonian(p: ModelParams) -> np.ndarray:
    """Joint Hamiltonian ``Omega a^+a + omega b^+b + i g (a^+ b - a b^+)``."""
    dim_a, dim_b = p.dimA, p.dimB
    hilbert.check_joint_dim(dim_a * dim_b)
    na = np.repeat(np.arange(dim_a), dim_b)
    nb = np.tile(np.arange(dim_b), dim_a)
    h = np.zeros((dim_a * dim_b, dim_a * dim_b), dtype=complex)
    h[np.diag_indices_from(h)] = p.Omega * na + p.omega * nb
    # a^+ b : |na, nb> -> sqrt(na+1) sqrt(nb) |na+1, nb-1>
    src = np.flatnonzero((na < dim_a - 1) & (nb > 0))
    dst = src + dim_b - 1
    amp = 1j * p.g * np.sqrt((na[src] + 1) * nb[src])
    h[dst, src] = amp
    h[src, dst] = np.conj(amp)
    return h


def thermal_state(omega: float, temperature: float, dim: int) -> np.ndarray:
    """Gibbs state of one oscillator, renormalized on the truncated space."""
    if temperature < 0:
        raise InvalidTemperature(f"temperature must be >= 0, got {temperature}")
    if omega <= 0:
        raise InvalidParameter(f"thermal state needs omega > 0, got {omega}")
    if dim < 1:
        raise InvalidDimension(f"dim must be positive, got {dim}")
    pops = np.zeros(dim)
    if temperature == 0:
        pops[0] = 1.0
    else:
        pops = np.exp(-omega * np.arange(dim) / temperature)
        pops /= pops.sum()
    return np.diag(pops).astype(complex)


def coherent_adequate(alpha: complex, dim: int) -> bool:
    r = abs(alpha)
    return r * r + 5 * r + 10 <= dim


def coherent_state(alpha: complex, dim: int, check: bool = True) -> np.ndarray:
    """Truncated coherent state ``|alpha>``, renormalized to unit norm.

    Raises:
        TruncationInadequate: if ``|alpha|^2 + 5|alpha| + 10 > dim`` and
            ``check`` is set.
    """
    if dim < 1:
        raise InvalidDimension(f"dim must be positive, got {dim}")
    if check and not coherent_adequate(alpha, dim):
        raise TruncationInadequate(
            f"dim={dim} too small for |alpha|={abs(alpha):.4g}; "
            f"need |alpha|^2 + 5|alpha| + 10 <= dim"
        )
    amp = np.empty(dim, dtype=complex)
    amp[0] = 1.0
    for n in range(1, dim):
        amp[n] = amp[n - 1] * alpha / math.sqrt(n)
    return amp / np.linalg.norm(amp)


def number_state(n: int, dim: int) -> np.ndarray:
    if dim < 1:
        raise InvalidDimension(f"dim must be positive, got {dim}")
    if not 0 <= n < dim:
        raise IndexOutOfRange(f"number state {n} outside truncated space of dim {dim}")
    ket = np.zeros(dim, dtype=complex)
    ket[n] = 1.0
    return ket


@dataclass(frozen=True)
class NumberState:
    n_a: int

    def __post_init__(self):
        if self.n_a < 0:
            raise IndexOutOfRange(f"n_a must be nonnegative, got {self.n_a}")


@dataclass(frozen=True)
class CoherentState:
    alpha: complex


@dataclass(frozen=True)
class Custom:
    phi: np.ndarray = field(compare=False)

    def __post_init__(self):
        phi = np.array(self.phi, dtype=complex)
        if phi.ndim != 1:
            raise InvalidState("custom projection state must be a 1-D amplitude vector")
        if not hilbert.is_normalized(phi):
            raise InvalidState("custom projection state must be normalized")
        phi.flags.writeable = False
        object.__setattr__(self, "phi", phi)


ProjectionSpec = Union[NumberState, CoherentState, Custom]


def projection_ket(proj: ProjectionSpec, dim: int) -> np.ndarray:
    """Realize the measured state of system A on a truncated space of size ``dim``.

    A custom state shorter than ``dim`` is zero-padded; a longer one is
    accepted only if the discarded tail is exactly zero.
    """
    if isinstance(proj, NumberState):
        return number_state(proj.n_a, dim)
    if isinstance(proj, CoherentState):
        return coherent_state(proj.alpha, dim)
    if isinstance(proj, Custom):
        phi = proj.phi
        if len(phi) <= dim:
            out = np.zeros(dim, dtype=complex)
            out[: len(phi)] = phi
            return out
        if np.any(phi[dim:] != 0):
            raise TruncationInadequate(
                f"custom state has weight beyond level {dim - 1}"
            )
        return phi[:dim].copy()
    raise TypeError(f"unknown projection spec {proj!r}")
