"""Kernel basis, projections, inverse operator, sidebands and roots."""

import numpy as np
import pytest

from stokes_spectra import (
    assemble,
    build_pipeline,
    char_poly,
    check_generalized_kernel,
    fit_characteristic_constants,
    fit_series,
    inner_product,
    invert_reduced,
    kernel_basis,
    predict_lambda,
    project_offkernel,
    reduced_matrices,
    sideband,
    sideband_set,
    spectrum,
    unstable_roots,
)
from stokes_spectra.fourier import FourierVector, StateVector, TrigPolynomial, hilbert_transform

K = 32


def make_basis(eps, refined=True, K=K):
    d = build_pipeline(eps, K=K, refined=refined)
    return d, kernel_basis(d.wave, d.cmap, d.coeffs, traces=d.traces)


@pytest.fixture(scope="module")
def setup_005():
    return make_basis(0.05)


@pytest.fixture(scope="module")
def setup_flat():
    return make_basis(0.0)


def harmonic_state(K, first_sin=None, first_cos=None, second_sin=None, second_cos=None):
    first = TrigPolynomial.from_harmonics(K, cos=first_cos, sin=first_sin)
    second = TrigPolynomial.from_harmonics(K, cos=second_cos, sin=second_sin)
    return StateVector(FourierVector(first.coeffs, K), FourierVector(second.coeffs, K))


class TestBasisLimits:
    def test_flat_basis_is_analytic_limit(self, setup_flat):
        _, basis = setup_flat
        expect = [
            harmonic_state(K, second_cos={0: 1.0}),
            harmonic_state(K, first_sin={1: -1.0}, second_cos={1: 1.0}),
            harmonic_state(K, first_cos={1: 1.0}, second_sin={1: 1.0}),
            harmonic_state(K, first_cos={0: 1.0}),
        ]
        for u, e in zip(basis.vectors(), expect):
            assert np.max(np.abs(u.to_array() - e.to_array())) < 1e-14

    def test_first_order_terms(self):
        # U2 + eps(-2 S_2, C_2), U3 + eps(2 C_2, S_2), U4 + eps(C, -S)
        grid = np.array([0.01, 0.02, 0.03, 0.04])
        rows = {"u2f": [], "u2s": [], "u3f": [], "u3s": [], "u4f": [], "u4s": []}
        for e in grid:
            _, b = make_basis(e, refined=False)
            u2f = TrigPolynomial(b.U2.first.coeffs, K, parity="odd")
            u2s = TrigPolynomial(b.U2.second.coeffs, K, parity="even")
            u3f = TrigPolynomial(b.U3.first.coeffs, K, parity="even")
            u3s = TrigPolynomial(b.U3.second.coeffs, K, parity="odd")
            u4f = TrigPolynomial(b.U4.first.coeffs, K, parity="even")
            u4s = TrigPolynomial(b.U4.second.coeffs, K, parity="odd")
            rows["u2f"].append(u2f.sin_coeff(2))
            rows["u2s"].append(u2s.cos_coeff(2))
            rows["u3f"].append(u3f.cos_coeff(2))
            rows["u3s"].append(u3s.sin_coeff(2))
            rows["u4f"].append(u4f.cos_coeff(1))
            rows["u4s"].append(u4s.sin_coeff(1))
        for key, target in (
            ("u2f", -2.0),
            ("u2s", 1.0),
            ("u3f", 2.0),
            ("u3s", 1.0),
            ("u4f", 1.0),
            ("u4s", -1.0),
        ):
            fit = fit_series(grid, np.array(rows[key]), 2)
            assert np.real(fit.coefficient(1)) == pytest.approx(target, rel=0.01), key

    def test_second_order_amplitude_mode(self):
        # U3 second-order term ((9/2) C_3, -(1/2) S + (3/2) S_3)
        grid = np.array([0.01, 0.02, 0.03, 0.04])
        c3, s1, s3 = [], [], []
        for e in grid:
            _, b = make_basis(e, refined=False)
            u3f = TrigPolynomial(b.U3.first.coeffs, K, parity="even")
            u3s = TrigPolynomial(b.U3.second.coeffs, K, parity="odd")
            c3.append(u3f.cos_coeff(3))
            s1.append(u3s.sin_coeff(1) - 1.0)
            s3.append(u3s.sin_coeff(3))
        assert np.real(fit_series(grid, np.array(c3) / grid, 2).coefficient(1)) == pytest.approx(
            4.5, rel=0.02
        )
        assert np.real(fit_series(grid, np.array(s1) / grid, 2).coefficient(1)) == pytest.approx(
            -0.5, rel=0.02
        )
        assert np.real(fit_series(grid, np.array(s3) / grid, 2).coefficient(1)) == pytest.approx(
            1.5, rel=0.02
        )

    def test_translation_mode_mean_zero(self, setup_005):
        _, basis = setup_005
        assert abs(basis.U2.first.mean()) < 1e-13
        assert abs(basis.U2.second.mean()) < 1e-13

    def test_gram_near_identity(self, setup_005):
        _, basis = setup_005
        gram = basis.gram / (2 * np.pi)
        assert np.max(np.abs(gram - np.diag(np.diag(gram)))) < 5e-3
        assert np.linalg.cond(gram) < 10


class TestKernelIdentities:
    def test_flat_residuals_vanish(self, setup_flat):
        d, basis = setup_flat
        rep = check_generalized_kernel(basis, d.coeffs)
        assert rep.l0_u1 <= 1e-12
        assert rep.l0_u2tilde <= 1e-11
        assert rep.u3_identity <= 1e-11
        assert rep.u4_identity <= 1e-11

    def test_series_residuals_fourth_order(self):
        reports = {}
        for eps in (0.05, 0.025):
            d, basis = make_basis(eps, refined=False)
            reports[eps] = check_generalized_kernel(basis, d.coeffs)
        for attr in ("l0_u2tilde", "u3_identity", "u4_identity"):
            ratio = getattr(reports[0.05], attr) / getattr(reports[0.025], attr)
            assert 12 <= ratio <= 20, (attr, ratio)
        assert reports[0.05].l0_u1 <= 1e-12

    def test_projection_of_amplitude_mode(self):
        d, basis = make_basis(0.05, refined=False)
        rep = check_generalized_kernel(basis, d.coeffs)
        assert abs(rep.proj_u3_on_u2 + 0.05**2) / 0.05**2 < 0.02

    def test_refined_residuals_near_machine(self, setup_005):
        d, basis = setup_005
        rep = check_generalized_kernel(basis, d.coeffs)
        assert rep.l0_u2tilde < 1e-9
        assert rep.u4_identity < 1e-9


class TestProjection:
    def test_annihilates_basis(self, setup_005):
        _, basis = setup_005
        for u in basis.vectors():
            assert project_offkernel(u, basis).norm() < 1e-12

    def test_idempotent(self, setup_005):
        _, basis = setup_005
        rng = np.random.default_rng(3)
        v = StateVector.from_array(
            rng.normal(size=2 * (2 * K + 1)) + 1j * rng.normal(size=2 * (2 * K + 1)), K
        )
        once = project_offkernel(v, basis)
        twice = project_offkernel(once, basis)
        assert (twice - once).norm() < 1e-12 * max(1.0, once.norm())

    def test_preserves_parity(self, setup_005):
        _, basis = setup_005
        v = harmonic_state(K, first_sin={2: 1.0, 3: -0.5}, second_cos={0: 0.2, 2: 1.0})
        out = project_offkernel(v, basis)
        f = out.first.coeffs
        s = out.second.coeffs
        assert np.max(np.abs(f + f[::-1])) < 1e-12  # odd first component
        assert np.max(np.abs(s - s[::-1])) < 1e-12  # even second component


class TestInverse:
    def test_flat_closed_form(self, setup_flat):
        d, basis = setup_flat
        rng = np.random.default_rng(17)
        raw = StateVector.from_array(
            rng.normal(size=2 * (2 * K + 1)) + 1j * rng.normal(size=2 * (2 * K + 1)), K
        )
        F = project_offkernel(raw, basis)
        # closed form on the flat background: modewise solve of
        # v2'' + |D| v2 = f1 + f2', v1 = -H v2 + antiderivative(f1),
        # then project the free constants away
        f1, f2 = F.first, F.second
        modes = np.arange(-K, K + 1)
        v2 = np.zeros(2 * K + 1, dtype=complex)
        for k in range(-K, K + 1):
            if abs(k) >= 2:
                v2[k + K] = (f1.amplitude(k) + 1j * k * f2.amplitude(k)) / (
                    -k * k + abs(k)
                )
        v1 = -hilbert_transform(FourierVector(-v2, K)).coeffs  # +H v2... sign fixed below
        v1 = -(-1j * np.sign(modes)) * v2  # -H v2 has symbol +i sign(k)
        antider = np.zeros(2 * K + 1, dtype=complex)
        for k in range(-K, K + 1):
            if k != 0:
                antider[k + K] = f1.amplitude(k) / (1j * k)
        v1 = v1 + antider
        closed = project_offkernel(
            StateVector(FourierVector(v1, K), FourierVector(v2, K)), basis
        )
        solved = invert_reduced(F, basis, d.coeffs)
        assert (closed - solved).norm() < 1e-10

    def test_inverse_then_forward(self, setup_005):
        d, basis = setup_005
        rng = np.random.default_rng(23)
        F = project_offkernel(
            StateVector.from_array(
                rng.normal(size=2 * (2 * K + 1)) + 1j * rng.normal(size=2 * (2 * K + 1)), K
            ),
            basis,
        )
        V = invert_reduced(F, basis, d.coeffs)
        m0 = assemble(0.0, 0.05, K, d.coeffs)
        back = project_offkernel(m0.apply(V), basis)
        assert (back - F).norm() < 1e-9 * max(1.0, F.norm())
        for u in basis.vectors():
            assert abs(inner_product(V, u)) < 1e-10

    def test_parity_switch(self, setup_005):
        d, basis = setup_005
        F = project_offkernel(
            harmonic_state(K, first_sin={2: 1.0}, second_cos={2: 0.7, 3: -0.2}), basis
        )
        V = invert_reduced(F, basis, d.coeffs)
        f = V.first.coeffs
        s = V.second.coeffs
        assert np.max(np.abs(f - f[::-1])) < 1e-10  # even first component
        assert np.max(np.abs(s + s[::-1])) < 1e-10  # odd second component

    def test_perturbation_mode_display(self):
        # Xi Pi L1 U2 = (i/4)(-C, S) + (i eps/4)(1 - 6 C_2, -3 S_2) + O(eps^2)
        from stokes_spectra.reduction import workspace

        grid = np.array([0.01, 0.02, 0.03, 0.04])
        rows = {k: [] for k in ("f_c1", "s_s1", "f_c0", "f_c2", "s_s2")}
        for e in grid:
            d, basis = make_basis(e, refined=False)
            ws = workspace(basis, d.coeffs)
            u2 = basis.U2.to_array()
            rhs = ws.project(ws.Lmu @ u2)
            out = StateVector.from_array(ws.xi(rhs), K)
            first = out.first.coeffs
            second = out.second.coeffs
            n = K
            rows["f_c1"].append((first[n + 1] + first[n - 1]).imag)
            rows["f_c0"].append(first[n].imag)
            rows["f_c2"].append((first[n + 2] + first[n - 2]).imag)
            rows["s_s1"].append((1j * (second[n + 1] - second[n - 1])).imag)
            rows["s_s2"].append((1j * (second[n + 2] - second[n - 2])).imag)
        # eps^0 terms
        assert fit_series(grid, np.array(rows["f_c1"]), 2).coefficient(0).real == pytest.approx(
            -0.25, abs=2e-3
        )
        assert fit_series(grid, np.array(rows["s_s1"]), 2).coefficient(0).real == pytest.approx(
            0.25, abs=2e-3
        )
        # eps^1 terms
        assert fit_series(grid, np.array(rows["f_c0"]), 2).coefficient(1).real == pytest.approx(
            0.25, rel=0.05
        )
        assert fit_series(grid, np.array(rows["f_c2"]), 2).coefficient(1).real == pytest.approx(
            -1.5, rel=0.05
        )
        assert fit_series(grid, np.array(rows["s_s2"]), 2).coefficient(1).real == pytest.approx(
            -0.75, rel=0.05
        )


class TestSidebands:
    def test_mu_zero_with_refined_basis(self, setup_005):
        # the solve keeps the full right side, so at mu = 0 each W_j carries
        # exactly the basis defect: zero for U1/U2tilde-derived/U4 modes on
        # the polished background, and the O(eps^4) series-derivative
        # remainder for the amplitude mode U3
        d, basis = setup_005
        for j in (1, 2, 4):
            assert sideband(j, 0.0, 0.0, basis, d.coeffs).norm() < 1e-8
        assert sideband(3, 0.0, 0.0, basis, d.coeffs).norm() < 5e-4

    def test_orthogonality(self, setup_005):
        d, basis = setup_005
        wset = sideband_set(0.5j * 0.0025, 0.0025, basis, d.coeffs)
        for w in wset.vectors():
            for u in basis.vectors():
                assert abs(inner_product(w, u)) < 1e-11

    def test_norm_linear_in_mu(self, setup_005):
        d, basis = setup_005
        n1 = sideband(2, 0.5j * 0.01, 0.01, basis, d.coeffs).norm()
        n2 = sideband(2, 0.5j * 0.005, 0.005, basis, d.coeffs).norm()
        assert n1 / n2 == pytest.approx(2.0, rel=0.1)

    def test_first_order_gap_quadratic(self, setup_005):
        from stokes_spectra.reduction import workspace

        d, basis = setup_005
        ws = workspace(basis, d.coeffs)
        gaps = {}
        for mu in (0.01, 0.005):
            w = sideband(2, 0.5j * mu, mu, basis, d.coeffs)
            lead = StateVector.from_array(
                -mu * ws.xi(ws.project(ws.Lmu @ basis.U2.to_array())), K
            )
            gaps[mu] = (w - lead).norm()
        assert gaps[0.01] / gaps[0.005] == pytest.approx(4.0, rel=0.25)

    def test_neumann_matches_direct(self, setup_005):
        d, basis = setup_005
        lam = 0.5j * 0.01
        for j in (1, 2, 3, 4):
            wn = sideband(j, lam, 0.01, basis, d.coeffs, method="neumann", order=6)
            wd = sideband(j, lam, 0.01, basis, d.coeffs, method="direct")
            assert (wn - wd).norm() < 1e-10

    def test_divergent_series_falls_back(self, setup_005):
        d, basis = setup_005
        lam = 1.0  # far outside the contraction region
        with pytest.warns(RuntimeWarning):
            w = sideband(2, lam, 0.0, basis, d.coeffs, method="neumann", order=8)
        wd = sideband(2, lam, 0.0, basis, d.coeffs, method="direct")
        assert (w - wd).norm() < 1e-9

    def test_unknown_method_rejected(self, setup_005):
        d, basis = setup_005
        with pytest.raises(ValueError):
            sideband(1, 0.0, 0.01, basis, d.coeffs, method="magic")


class TestReducedSystem:
    def test_structural_entries(self, setup_005):
        d, basis = setup_005
        mu = 0.0025
        sys = reduced_matrices(0.5j * mu, mu, 0.05, basis, d.coeffs)
        assert abs(sys.A[3, 0] + 1.0) < 1e-12
        assert abs(sys.A[1, 2]) < 1e-12
        assert abs(sys.A[1, 3]) < 1e-12
        assert abs(sys.A[3, 1]) < 1e-12
        assert np.allclose(np.diag(sys.I), 1.0)
        off = sys.I - np.diag(np.diag(sys.I))
        nonzero = np.abs(off) > 1e-10
        # only the (3,4)/(4,3) pair couples at O(eps^2)
        assert set(zip(*np.nonzero(nonzero))) <= {(2, 3), (3, 2)}
        assert np.max(np.abs(off)) < 3 * 0.05**2

    def test_amplitude_row_value(self, setup_005):
        d, basis = setup_005
        sys = reduced_matrices(0.0, 0.0025, 0.05, basis, d.coeffs)
        assert sys.A[2, 1] == pytest.approx(-0.05**2, rel=0.01)

    def test_entry_expansions_over_amplitude(self):
        mu = 1e-3
        grid = np.array([0.02, 0.03, 0.04, 0.05])
        rows = {"a11": [], "a22": [], "a14": []}
        for e in grid:
            d, basis = make_basis(e)
            sys = reduced_matrices(0.5j * mu, mu, e, basis, d.coeffs)
            rows["a11"].append(sys.A[0, 0] / (1j * mu))
            rows["a22"].append(sys.A[1, 1] / (1j * mu))
            rows["a14"].append(sys.A[0, 3] / mu)
        for key, target in (("a11", 1.5), ("a22", -1.25), ("a14", -1.0)):
            fit = fit_series(grid, np.array(rows[key]), 2)
            assert np.real(fit.coefficient(2)) == pytest.approx(target, rel=0.05), key

    def test_characteristic_at_flat_limit(self, setup_flat):
        # the four roots at eps=0 are the frequencies of the collided branches
        d, basis = setup_flat
        mu = 0.05
        preds = [
            1j * (mu + np.sqrt(mu)),
            1j * (mu - np.sqrt(mu)),
            1j * (1 + mu - np.sqrt(1 + mu)),
            1j * (-1 + mu + np.sqrt(1 - mu)),
        ]
        for lam0 in preds:
            # Newton from the prediction on the exact determinant
            lam = lam0
            h = 1e-7 * mu
            for _ in range(30):
                p0 = char_poly(lam, mu, 0.0, basis, d.coeffs)
                dp = (
                    char_poly(lam + h, mu, 0.0, basis, d.coeffs)
                    - char_poly(lam - h, mu, 0.0, basis, d.coeffs)
                ) / (2 * h)
                step = -p0 / dp
                lam = lam + step
                if abs(step) < 1e-13:
                    break
            assert abs(lam - lam0) < 1e-9


class TestRoots:
    def test_unstable_pair_against_direct_spectrum(self, setup_005):
        d, basis = setup_005
        mu, eps = 0.0025, 0.05
        lp, lm = unstable_roots(mu, eps, basis, d.coeffs)
        assert lp.real > 0
        vals = spectrum(assemble(mu, eps, K, d.coeffs)).eigenvalues
        assert np.min(np.abs(vals - lp)) < 1e-9
        assert np.min(np.abs(vals - lm)) < 1e-9

    def test_asymptotic_location(self, setup_005):
        d, basis = setup_005
        mu, eps = 0.0025, 0.05
        lp, _ = unstable_roots(mu, eps, basis, d.coeffs)
        pred = predict_lambda(mu, eps)
        assert abs(lp - pred.lambda_plus) / abs(pred.lambda_plus) < 0.02

    def test_flat_degenerate_pair_reported(self, setup_flat):
        d, basis = setup_flat
        lp, lm = unstable_roots(0.01, 0.0, basis, d.coeffs)
        assert lp == lm == 0.5j * 0.01

    def test_sign_flip_under_amplitude_reflection(self):
        mu = 0.0025
        out = {}
        for eps in (0.05, -0.05):
            d, basis = make_basis(eps)
            out[eps] = unstable_roots(mu, abs(eps) * np.sign(eps), basis, d.coeffs)
        # the unstable pair is the same set for +-eps at this order
        lp_pos, _ = out[0.05]
        lp_neg, _ = out[-0.05]
        assert abs(lp_pos.real - lp_neg.real) / lp_pos.real < 0.05
        assert abs(lp_pos.imag - lp_neg.imag) / lp_pos.imag < 0.05

    def test_characteristic_constants_report(self, setup_005):
        d, basis = setup_005
        fit = fit_characteristic_constants(0.0025, 0.05, basis, d.coeffs)
        assert fit.leading.real == pytest.approx(-0.125, rel=0.05)
        assert abs(fit.leading.imag) < 0.01
