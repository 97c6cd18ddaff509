"""Assembled Bloch matrix: action, closed-form spectrum, symmetries."""

import numpy as np
import pytest

from stokes_spectra import (
    assemble,
    build_pipeline,
    flat_coefficients,
    flat_spectrum,
    growth_rate,
    predict_lambda,
    spectrum,
)
from stokes_spectra.bloch import matching_distance, reduce_bloch_parameter
from stokes_spectra.fourier import (
    FourierVector,
    StateVector,
    apply_multiplier,
    derivative,
    linear_combination,
    pointwise_product,
)

K = 24


@pytest.fixture(scope="module")
def operator_data():
    return build_pipeline(0.05, K=K)


def apply_by_primitives(coeffs, mu, state):
    """Blockwise action through the coefficient-space primitives."""
    u1, u2 = state.first, state.second
    p = FourierVector(coeffs.p.coeffs, coeffs.K)
    gq = FourierVector(coeffs.gq_over_zp.coeffs, coeffs.K)
    pu1 = pointwise_product(p, u1)
    first = linear_combination(
        [
            (1j * mu, pu1),
            (1.0, derivative(pu1)),
            (1.0, apply_multiplier(np.abs, mu, u2)),
        ]
    )
    pu2 = pointwise_product(p, derivative(u2))
    second = linear_combination(
        [
            (-1.0, pointwise_product(gq, u1)),
            (1j * mu, pointwise_product(p, u2)),
            (1.0, pu2),
        ]
    )
    return StateVector(FourierVector(first.coeffs, coeffs.K), FourierVector(second.coeffs, coeffs.K))


class TestAssembly:
    def test_action_matches_primitives(self, operator_data):
        co = operator_data.coeffs
        m = assemble(0.0125, 0.05, K, co)
        rng = np.random.default_rng(7)
        for _ in range(20):
            arr = rng.normal(size=2 * (2 * K + 1)) + 1j * rng.normal(size=2 * (2 * K + 1))
            state = StateVector.from_array(arr, K)
            direct = m.apply(state).to_array()
            composed = apply_by_primitives(co, 0.0125, state).to_array()
            assert np.max(np.abs(direct - composed)) < 1e-12

    def test_apply_dimension_guard(self, operator_data):
        m = assemble(0.01, 0.05, K, operator_data.coeffs)
        with pytest.raises(ValueError):
            m.apply(StateVector.zero(K + 2))

    def test_hamiltonian_factorization(self, operator_data):
        m = assemble(0.01, 0.05, K, operator_data.coeffs)
        assert np.max(np.abs(m.entries - m.j_factor @ m.k_factor)) <= 1e-13
        assert np.max(np.abs(m.k_factor - m.k_factor.conj().T)) <= 1e-12

    def test_adjoint_identity(self, operator_data):
        m = assemble(0.01, 0.05, K, operator_data.coeffs)
        lhs = m.entries.conj().T
        rhs = m.j_factor @ m.entries @ m.j_factor
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_eps_consistency_guard(self, operator_data):
        with pytest.raises(ValueError):
            assemble(0.01, 0.04, K, operator_data.coeffs)

    def test_truncation_guard(self, operator_data):
        with pytest.raises(ValueError):
            assemble(0.01, 0.05, K + 1, operator_data.coeffs)

    def test_mu_reduction(self):
        red, shift = reduce_bloch_parameter(1.0025)
        assert red == pytest.approx(0.0025) and shift == 1
        red, shift = reduce_bloch_parameter(-0.3)
        assert red == pytest.approx(-0.3) and shift == 0
        co = flat_coefficients(1.0, 8)
        m = assemble(2.125, 0.0, 8, co)
        assert m.mu == pytest.approx(0.125) and m.mu_shift == 2


class TestFlatSpectrum:
    @pytest.mark.parametrize("mu", [0.1, 0.3])
    def test_closed_form_dispersion(self, mu):
        co = flat_coefficients(1.0, K)
        vals = spectrum(assemble(mu, 0.0, K, co)).eigenvalues
        for pred in flat_spectrum(K, mu, 1.0, mode_limit=K - 2):
            assert np.min(np.abs(vals - pred)) < 1e-10

    def test_zero_eigenvalue_multiplicity_four(self):
        co = flat_coefficients(1.0, K)
        vals = spectrum(assemble(0.0, 0.0, K, co)).eigenvalues
        assert np.sum(np.abs(vals) < 1e-6) == 4

    def test_gravity_in_dispersion(self):
        g = 4.0
        co = flat_coefficients(g, 12)
        vals = spectrum(assemble(0.2, 0.0, 12, co)).eigenvalues
        for pred in flat_spectrum(12, 0.2, g, mode_limit=10):
            assert np.min(np.abs(vals - pred)) < 1e-10


class TestSpectrumResult:
    def test_lexicographic_order(self, operator_data):
        vals = spectrum(assemble(0.01, 0.05, K, operator_data.coeffs)).eigenvalues
        keys = list(zip(vals.real, vals.imag))
        assert keys == sorted(keys)

    def test_eigenvector_residuals(self, operator_data):
        m = assemble(0.01, 0.05, K, operator_data.coeffs)
        res = spectrum(m, want_vectors=True)
        assert res.residuals is not None
        assert np.max(res.residuals) <= 1e-8
        # spot-check one pair against the matrix action
        v = res.eigenvectors[5]
        lam = res.eigenvalues[5]
        gap = (m.apply(v) - lam * v).norm() / v.norm()
        assert gap <= 1e-8

    def test_conjugation_against_negative_mu(self, operator_data):
        co = operator_data.coeffs
        vp = spectrum(assemble(0.01, 0.05, K, co)).eigenvalues
        vm = spectrum(assemble(-0.01, 0.05, K, co)).eigenvalues
        assert matching_distance(vp, np.conj(vm)) < 1e-9

    def test_hamiltonian_quadruple(self, operator_data):
        for mu in (0.0025, 0.01):
            vals = spectrum(assemble(mu, 0.05, K, operator_data.coeffs)).eigenvalues
            assert matching_distance(vals, -np.conj(vals)) < 1e-9


class TestGrowthRate:
    def test_flat_water_is_neutral(self):
        max_re, _ = growth_rate(0.1, 0.0, K=16)
        assert max_re <= 1e-10

    def test_headline_growth(self):
        mu, eps = 0.0025, 0.05
        max_re, arg = growth_rate(mu, eps, K=32)
        pred = predict_lambda(mu, eps)
        assert abs(max_re - pred.growth) / pred.growth < 0.15
        assert abs(arg.imag - mu / 2) / (mu / 2) < 0.05

    def test_gravity_doubles_both_parts(self):
        mu, eps = 0.0025, 0.05
        r1, a1 = growth_rate(mu, eps, K=24, g=1.0)
        r4, a4 = growth_rate(mu, eps, K=24, g=4.0)
        assert r4 == pytest.approx(2.0 * r1, rel=1e-9)
        assert a4.imag == pytest.approx(2.0 * a1.imag, rel=1e-9)

    def test_truncation_stability_of_unstable_eigenvalue(self):
        target = predict_lambda(0.0025, 0.05).lambda_plus
        picked = {}
        for Kt in (24, 32):
            data = build_pipeline(0.05, K=Kt)
            vals = spectrum(assemble(0.0025, 0.05, Kt, data.coeffs)).eigenvalues
            picked[Kt] = vals[np.argmin(np.abs(vals - target))]
        assert abs(picked[24] - picked[32]) < 1e-8
