"""Stokes series, velocity traces and steady residuals."""

import numpy as np
import pytest

from stokes_spectra import (
    dn_evaluator,
    solve_riemann_stretch,
    steady_residual,
    stokes_series,
    velocity_traces,
)
from stokes_spectra.fourier import EVEN, ODD


class TestSeries:
    def test_first_order_wave(self):
        w = stokes_series(0.1, 0.0, 1.0, 1)
        assert w.eta.cos_coeff(1) == pytest.approx(0.1)
        assert w.psi.sin_coeff(1) == pytest.approx(0.1)
        assert w.speed == pytest.approx(1.0)
        assert max(abs(w.eta.cos_coeff(k)) for k in (0, 2, 3)) == 0.0

    def test_third_order_harmonics(self):
        a = 0.1
        w = stokes_series(a, 0.0, 1.0, 3)
        assert w.eta.cos_coeff(1) == pytest.approx(a + a**3 / 8)
        assert w.eta.cos_coeff(2) == pytest.approx(a * a / 2)
        assert w.eta.cos_coeff(3) == pytest.approx(3 * a**3 / 8)
        # (1/4)a^3 (3 S C_2 + S) expands to -(1/8) a^3 S + (3/8) a^3 S_3
        assert w.psi.sin_coeff(1) == pytest.approx(a - a**3 / 8)
        assert w.psi.sin_coeff(3) == pytest.approx(3 * a**3 / 8)

    def test_speed_with_gravity(self):
        a = 0.1
        w = stokes_series(a, 0.0, 4.0, 3)
        assert w.speed == pytest.approx(2.0 * (1 + 0.5 * a * a))

    def test_flat_with_bernoulli(self):
        w = stokes_series(0.0, 5.0, 1.0, 3)
        assert w.eta.cos_coeff(0) == pytest.approx(5.0)
        assert w.psi.norm() == 0.0
        assert w.speed == pytest.approx(1.0)

    def test_parity_tags(self):
        w = stokes_series(0.15, 1.0, 2.0, 3)
        assert w.eta.parity == EVEN and w.psi.parity == ODD

    def test_gravity_covariance_exact(self):
        a, P, g = 0.08, 0.7, 2.5
        w = stokes_series(a, P, g, 3)
        base = stokes_series(a, 0.0, 1.0, 3)
        assert np.allclose(w.psi.coeffs, np.sqrt(g) * base.psi.coeffs, atol=1e-16)
        assert w.speed == pytest.approx(np.sqrt(g) * base.speed)
        shifted = w.eta.coeffs.copy()
        shifted[w.eta.K] -= P / g
        assert np.allclose(shifted, base.eta.coeffs, atol=1e-16)

    def test_order_and_amplitude_guards(self):
        with pytest.raises(ValueError):
            stokes_series(0.1, order=4)
        with pytest.raises(ValueError):
            stokes_series(0.1, order=0)
        with pytest.raises(ValueError):
            stokes_series(0.25)


class TestTraces:
    def test_flat_traces_vanish(self):
        t = velocity_traces(stokes_series(0.0))
        assert t.B.norm() == 0.0 and t.V.norm() == 0.0

    def test_leading_harmonics(self):
        a = 0.05
        t = velocity_traces(stokes_series(a))
        assert t.B.sin_coeff(1) == pytest.approx(a, abs=a**3)
        assert t.B.sin_coeff(2) == pytest.approx(a * a / 2)
        assert t.V.cos_coeff(0) == pytest.approx(a * a / 2)
        assert t.V.cos_coeff(2) == pytest.approx(a * a / 2)
        assert t.B.parity == ODD and t.V.parity == EVEN

    def test_gravity_scaling(self):
        t1 = velocity_traces(stokes_series(0.05, 0.0, 1.0, 3))
        t4 = velocity_traces(stokes_series(0.05, 0.0, 4.0, 3))
        assert np.allclose(t4.B.coeffs, 2.0 * t1.B.coeffs, atol=1e-16)

    def test_bernoulli_invariance(self):
        t0 = velocity_traces(stokes_series(0.05, 0.0, 1.0, 3))
        tP = velocity_traces(stokes_series(0.05, 3.0, 1.0, 3))
        assert np.allclose(t0.B.coeffs, tP.B.coeffs, atol=1e-16)
        assert np.allclose(t0.V.coeffs, tP.V.coeffs, atol=1e-16)


class TestResidual:
    def test_flat_wave_residual_zero(self):
        w = stokes_series(0.0, 0.0, 1.0, 3, K=16)
        cm = solve_riemann_stretch(w.eta)
        r1, r2 = steady_residual(w, dn_evaluator(cm))
        assert r1 < 1e-12 and r2 < 1e-12

    def test_flat_shifted_residual_zero(self):
        w = stokes_series(0.0, 2.0, 1.0, 3, K=16)
        cm = solve_riemann_stretch(w.eta)
        r1, r2 = steady_residual(w, dn_evaluator(cm))
        assert r1 < 1e-12 and r2 < 1e-12

    def test_fourth_order_remainder(self):
        K = 64
        res = {}
        for a in (0.04, 0.02):
            w = stokes_series(a, 0.0, 1.0, 3, K=K)
            cm = solve_riemann_stretch(w.eta)
            res[a] = steady_residual(w, dn_evaluator(cm))
        for i in (0, 1):
            ratio = np.log2(res[0.04][i] / res[0.02][i])
            assert 3.5 <= ratio <= 4.5

    def test_bernoulli_shift_invariance(self):
        out = {}
        for P in (0.0, 1.5):
            w = stokes_series(0.03, P, 1.0, 3, K=32)
            cm = solve_riemann_stretch(w.eta)
            out[P] = steady_residual(w, dn_evaluator(cm))
        assert out[0.0][0] == pytest.approx(out[1.5][0], rel=1e-10)
        assert out[0.0][1] == pytest.approx(out[1.5][1], rel=1e-8, abs=1e-14)
