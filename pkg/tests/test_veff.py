import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zenopurify import hilbert
from zenopurify.errors import FactorizationSingular, FixedPointSingular
from zenopurify.model import CoherentState, Custom, ModelParams, NumberState, build_hamiltonian, projection_ket
from zenopurify.veff import (
    ANALYTIC_COHERENT,
    NUMERIC,
    abc_coefficients,
    beta_fixed_point,
    coherent_exponent,
    effective_operator,
    factorized_propagator,
    interior_difference,
    v_coherent_analytic,
    v_number_analytic,
    v_numeric,
    verify_truncation,
)

FIG1_TAU = 2 * math.pi / 1.2


def fig1(dim=48, **kw):
    base = dict(Omega=1.0, omega=1.0, g=0.2, tau=FIG1_TAU, temperature=1.0, dimA=dim, dimB=dim)
    base.update(kw)
    return ModelParams(**base)


def number_diagonal_literal(abc, n_a, nb):
    """Number-projection diagonal element with explicit factorials, in 40-digit arithmetic."""
    with mpmath.workdps(40):
        a, b, c = (mpmath.mpc(z) for z in (abc.A, abc.B, abc.C))
        total = mpmath.mpc(0)
        for k in range(n_a + 1):
            m = n_a - k
            coeff = mpmath.factorial(n_a) / (mpmath.factorial(m) ** 2 * mpmath.factorial(k))
            prod = mpmath.fprod(nb + ell for ell in range(1, m + 1))
            total += coeff * mpmath.exp(k * b) * (-a**2 * mpmath.exp(c)) ** m * prod
        return complex(total * mpmath.exp(c * nb))


def dense_compression(p, phi):
    """V from a dense eigendecomposition of the full joint Hamiltonian."""
    h = build_hamiltonian(p)
    w, vecs = np.linalg.eigh(h)
    u = (vecs * np.exp(-1j * w * p.tau)) @ vecs.conj().T
    u4 = u.reshape(p.dimA, p.dimB, p.dimA, p.dimB)
    return np.einsum("i,ijkl,k->jl", phi.conj(), u4, phi)


class TestABC:
    def test_decoupled(self):
        p = ModelParams(1.5, 1.0, 0.0, 0.7)
        abc = abc_coefficients(p)
        assert abc.A == 0
        assert abc.B == pytest.approx(-1.5j * 0.7, abs=1e-15)
        assert abc.C == pytest.approx(-1.0j * 0.7, abs=1e-15)

    @pytest.mark.parametrize("tau", [0.3, 1.1, 4.0])
    def test_resonance(self, tau):
        abc = abc_coefficients(ModelParams(1.0, 1.0, 0.25, tau))
        assert abc.A.imag == 0
        assert abc.A.real == pytest.approx(math.tan(0.25 * tau), rel=1e-14)

    def test_fig1_values(self):
        p = fig1()
        abc = abc_coefficients(p)
        assert abc.A.real == pytest.approx(math.sqrt(3), abs=1e-14)
        assert abc.A.imag == pytest.approx(0, abs=1e-15)
        assert cmath.exp(abc.B) == pytest.approx(2 * cmath.exp(-1j * FIG1_TAU), abs=1e-14)
        assert cmath.exp(abc.C) == pytest.approx(0.5 * cmath.exp(-1j * FIG1_TAU), abs=1e-14)
        assert cmath.exp(abc.B) * cmath.exp(abc.C) == pytest.approx(cmath.exp(-2j * FIG1_TAU), abs=1e-14)

    def test_singular(self):
        with pytest.raises(FactorizationSingular):
            abc_coefficients(ModelParams(1.0, 1.0, 0.2, (math.pi / 2) / 0.2))

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.0, 1.0), st.floats(0.0, 20.0)
    )
    def test_sum_rule_and_bound(self, om_a, om_b, g, tau):
        if g == 0 and om_a == om_b:
            return
        p = ModelParams(om_a, om_b, g, tau)
        try:
            abc = abc_coefficients(p)
        except FactorizationSingular:
            return
        assert abc.B + abc.C == pytest.approx(-1j * (om_a + om_b) * tau, abs=1e-12)
        assert abs(cmath.exp(abc.C)) <= 1 + 1e-12


class TestFactorization:
    @pytest.mark.parametrize(
        "om_a,om_b,g,tau",
        [(1.0, 1.0, 0.2, FIG1_TAU), (1.3, 0.7, 0.35, 1.1), (0.8, 1.5, 0.4, 3.0)],
    )
    def test_matches_propagator_on_low_excitations(self, om_a, om_b, g, tau):
        dim = 12
        p = ModelParams(om_a, om_b, g, tau, dimA=dim, dimB=dim)
        exact = hilbert.unitary_propagator(build_hamiltonian(p), tau)
        fact = factorized_propagator(p)
        na = np.repeat(np.arange(dim), dim)
        nb = np.tile(np.arange(dim), dim)
        low = np.flatnonzero(na + nb < dim // 2)
        assert np.max(np.abs(fact[np.ix_(low, low)] - exact[np.ix_(low, low)])) < 1e-8


class TestNumeric:
    def test_tau_zero(self):
        op = v_numeric(fig1(14, tau=0.0), CoherentState(0.5))
        np.testing.assert_allclose(op.v, np.eye(14), atol=1e-15)
        assert op.provenance == NUMERIC

    def test_decoupled_number(self):
        p = ModelParams(1.3, 0.7, 0.0, 0.9, dimA=6, dimB=6)
        op = v_numeric(p, NumberState(2))
        expected = cmath.exp(-1.3j * 2 * 0.9) * np.diag(np.exp(-0.7j * np.arange(6) * 0.9))
        np.testing.assert_allclose(op.v, expected, atol=1e-14)

    @pytest.mark.parametrize("proj", [NumberState(1), CoherentState(0.5), "custom"])
    def test_blockwise_matches_dense(self, proj):
        p = ModelParams(1.2, 0.9, 0.3, 2.1, dimA=14, dimB=10)
        if proj == "custom":
            rng = np.random.default_rng(4)
            proj = Custom(hilbert.normalize(rng.normal(size=14) + 1j * rng.normal(size=14)))
        ref = dense_compression(p, projection_ket(proj, 14))
        np.testing.assert_allclose(v_numeric(p, proj).v, ref, atol=1e-12)

    def test_fig1_coherent_matches_analytic(self):
        p = fig1()
        num = v_numeric(p, CoherentState(0.5)).v
        ana = v_coherent_analytic(p, 0.5).v
        assert interior_difference(num, ana) < 1e-6


class TestNumberAnalytic:
    def test_n0(self):
        p = fig1(8)
        abc = abc_coefficients(p)
        np.testing.assert_allclose(
            v_number_analytic(p, 0).v, np.diag(np.exp(abc.C * np.arange(8))), atol=1e-15
        )

    def test_n1(self):
        p = ModelParams(1.3, 0.8, 0.3, 1.7, dimB=8)
        abc = abc_coefficients(p)
        n = np.arange(8)
        expected = (cmath.exp(abc.B) - abc.A**2 * cmath.exp(abc.C) * (n + 1)) * np.exp(abc.C * n)
        np.testing.assert_allclose(np.diag(v_number_analytic(p, 1).v), expected, atol=1e-14)

    @pytest.mark.parametrize("n_a", [0, 1, 2, 3, 5, 8])
    def test_ratio_recursion_matches_factorials(self, n_a):
        p = ModelParams(1.1, 0.9, 0.25, 2.3, dimB=15)
        abc = abc_coefficients(p)
        oracle = np.array([number_diagonal_literal(abc, n_a, nb) for nb in range(15)])
        np.testing.assert_allclose(np.diag(v_number_analytic(p, n_a).v), oracle, rtol=1e-11, atol=1e-14)

    @pytest.mark.parametrize("n_a", [0, 1, 2, 3])
    def test_matches_numeric(self, n_a):
        p = fig1(40)
        ana = v_number_analytic(p, n_a, 40).v
        num = v_numeric(p, NumberState(n_a)).v
        assert np.max(np.abs(ana[:20, :20] - num[:20, :20])) < 1e-6

    def test_exactly_diagonal(self):
        v = v_number_analytic(fig1(20), 3).v
        assert np.max(np.abs(v - np.diag(np.diag(v)))) < 1e-14

    def test_large_n_a_finite(self):
        v = v_number_analytic(ModelParams(1.0, 1.0, 0.05, 0.5, dimB=30), 100).v
        assert np.all(np.isfinite(v))


class TestCoherentAnalytic:
    def test_vacuum(self):
        p = fig1(10)
        abc = abc_coefficients(p)
        np.testing.assert_allclose(
            v_coherent_analytic(p, 0).v, np.diag(np.exp(abc.C * np.arange(10))), atol=1e-14
        )

    def test_fig1_exponent_vanishes(self):
        assert abs(coherent_exponent(abc_coefficients(fig1()))) < 1e-12

    def test_fig1_beta(self):
        assert beta_fixed_point(fig1(), 0.5) == pytest.approx(-0.5j, abs=1e-14)

    def test_beta_trivial(self):
        assert beta_fixed_point(fig1(), 0) == 0
        assert beta_fixed_point(ModelParams(1.5, 1.0, 0.0, 0.7), 0.5) == 0

    def test_fixed_point_singular(self):
        with pytest.raises(FixedPointSingular):
            v_coherent_analytic(fig1(10, tau=0.0), 0.5)

    @pytest.mark.parametrize("alpha", [0.3, 0.5j, 0.4 - 0.2j])
    def test_matches_numeric_off_resonance(self, alpha):
        p = ModelParams(1.3, 0.8, 0.3, 1.7, dimA=40, dimB=40)
        ana = v_coherent_analytic(p, alpha).v
        num = v_numeric(p, CoherentState(alpha)).v
        assert interior_difference(ana, num) < 1e-6

    def test_provenance(self):
        assert v_coherent_analytic(fig1(10), 0.5).provenance == ANALYTIC_COHERENT


class TestEffectiveOperator:
    def test_falls_back_at_removable_singularity(self):
        op = effective_operator(fig1(14, tau=0.0), CoherentState(0.5))
        assert op.provenance == NUMERIC
        np.testing.assert_allclose(op.v, np.eye(14), atol=1e-15)

    def test_prefers_closed_form(self):
        assert effective_operator(fig1(10), NumberState(0)).provenance == "analytic-number"


class TestContraction:
    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(0.5, 2.0), st.floats(0.5, 2.0), st.floats(0.0, 0.5), st.floats(0.1, 10.0),
        st.integers(0, 2**32 - 1),
    )
    def test_singular_values_bounded(self, om_a, om_b, g, tau, seed):
        rng = np.random.default_rng(seed)
        phi = hilbert.normalize(rng.normal(size=8) + 1j * rng.normal(size=8))
        op = v_numeric(ModelParams(om_a, om_b, g, tau, dimA=8, dimB=8), Custom(phi))
        assert np.linalg.svd(op.v, compute_uv=False).max() <= 1 + 1e-9


class TestVerifyTruncation:
    def test_decoupled(self):
        p = ModelParams(1.3, 0.7, 0.0, 0.9, dimA=8, dimB=8)
        assert verify_truncation(p, NumberState(1), 4) == 0

    def test_tau_zero(self):
        assert verify_truncation(fig1(14, tau=0.0), CoherentState(0.5), 4) < 1e-14

    def test_fig1(self):
        assert verify_truncation(fig1(32), CoherentState(0.5), 16) < 1e-8
