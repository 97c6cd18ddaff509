"""Newton refinement of the steady wave on the truncated Fourier space.

The amplitude series leaves a steady residual O(a^4) (or O(a^5) at fourth
order), which shows up in the assembled operator as a spurious splitting
of the generalized kernel of the same order.  Near the long-wave collision
the physical growth rate is itself O(mu eps), so spectral work at mu ~ eps^2
needs a wave that satisfies the steady equations to solver precision.

refine_wave polishes the series wave by Newton iteration on its cosine/sine
harmonics and speed, holding the first cosine harmonic of the surface fixed
(the amplitude normalization) and using the exact linearization of the
steady equations (shape-derivative form with the numeric velocity traces)
as the Jacobian.  Two steps from the series seed reach residuals near 1e-15.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conformal import dirichlet_neumann, solve_riemann_stretch
from .errors import NonConvergenceError
from .fourier import EVEN, ODD, TrigPolynomial, as_trig, derivative
from .grids import grid_size, project_to_modes, uniform_grid
from .stokes import StokesWave, VelocityTraces

REFINE_TOL = 1e-12
REFINE_MAX_ITER = 8


def refinement_band(eps, K):
    """Highest harmonic worth refining: where the series floor hits 1e-17."""
    if eps == 0.0:
        return 2
    width = -17.0 / np.log10(min(0.5, 2.0 * abs(eps)))
    return int(min(K - 2, max(6, np.ceil(width))))


def numeric_traces(wave, cmap, grid_factor=4):
    """Velocity traces from the numeric Dirichlet-Neumann operator.

    B = (G(eta) psi + psi_x eta_x) / (1 + eta_x^2),  V = psi_x - B eta_x.
    Exact for the given pair (eta, psi), so the lifted traces are harmonic
    conjugates to solver precision (unlike the series traces, whose error
    against the given data is O(a^4)).
    """
    K = wave.K
    x = uniform_grid(grid_size(K, grid_factor))
    eta_x = np.real(derivative(wave.eta).evaluate(x))
    psi_x = np.real(derivative(wave.psi).evaluate(x))
    gpsi = np.real(dirichlet_neumann(cmap, wave.psi, grid_factor=grid_factor).evaluate(x))
    b_vals = (gpsi + psi_x * eta_x) / (1.0 + eta_x**2)
    v_vals = psi_x - b_vals * eta_x
    b = as_trig(project_to_modes(b_vals, K), ODD, tol=1e-8)
    v = as_trig(project_to_modes(v_vals, K), EVEN, tol=1e-8)
    return VelocityTraces(b, v, order=wave.order)


@dataclass(frozen=True)
class RefineInfo:
    iterations: int
    residual_norm: float
    band: int


def _harmonic_rows(F1, F2, band):
    """Stack the F1 sine and F2 cosine harmonics as one real vector."""
    rows = [F1.sin_coeff(k) for k in range(1, band + 1)]
    rows += [F2.cos_coeff(k) for k in range(0, band + 1)]
    return np.array(rows)


def refine_wave(wave, tol=REFINE_TOL, max_iter=REFINE_MAX_ITER, band=None,
                grid_factor=4, return_info=False):
    """Polish a zero-Bernoulli series wave to a near-exact steady solution.

    The unknowns are the surface cosine harmonics {0, 2..band}, the
    potential sine harmonics {1..band} and the speed; the cos x harmonic of
    the surface is held at its seed value as the amplitude normalization.
    Raises NonConvergenceError if the harmonic residual fails to reach tol.
    """
    if wave.bernoulli != 0.0:
        raise ValueError("refinement expects the zero-Bernoulli representative")
    if wave.amplitude == 0.0:
        return (wave, RefineInfo(0, 0.0, 0)) if return_info else wave

    K = wave.K
    g = wave.gravity
    if band is None:
        band = refinement_band(wave.amplitude, K)
    M = grid_size(K, grid_factor)
    x = uniform_grid(M)

    eta_cos = {k: wave.eta.cos_coeff(k) for k in range(0, band + 1)}
    psi_sin = {k: wave.psi.sin_coeff(k) for k in range(1, band + 1)}
    speed = wave.speed
    eta_dirs = [0] + list(range(2, band + 1))  # cos x held fixed

    current = wave
    res_norm = np.inf
    for it in range(1, max_iter + 1):
        cmap = solve_riemann_stretch(current.eta)
        eta_x = np.real(derivative(current.eta).evaluate(x))
        psi_x = np.real(derivative(current.psi).evaluate(x))
        gpsi = np.real(dirichlet_neumann(cmap, current.psi).evaluate(x))
        c = current.speed
        f1 = c * eta_x + gpsi
        f2 = (
            c * psi_x
            - 0.5 * psi_x**2
            + 0.5 * (gpsi + psi_x * eta_x) ** 2 / (1.0 + eta_x**2)
            - g * np.real(current.eta.evaluate(x))
        )
        r = _harmonic_rows(
            as_trig(project_to_modes(f1, K), tol=np.inf),
            as_trig(project_to_modes(f2, K), tol=np.inf),
            band,
        )
        res_norm = float(np.linalg.norm(r))
        if res_norm < tol:
            break

        b_vals = (gpsi + psi_x * eta_x) / (1.0 + eta_x**2)
        v_vals = psi_x - b_vals * eta_x
        dv_vals = np.real(derivative(project_to_modes(v_vals, K)).evaluate(x))

        def dn_grid(values):
            return np.real(
                dirichlet_neumann(cmap, project_to_modes(values, K)).evaluate(x)
            )

        cols = []
        for k in eta_dirs:
            eb = np.cos(k * x)
            gb = dn_grid(-b_vals * eb)
            d1 = np.real(derivative(project_to_modes((c - v_vals) * eb, K)).evaluate(x)) + gb
            d2 = b_vals * gb - b_vals * dv_vals * eb - g * eb
            cols.append((d1, d2))
        for k in range(1, band + 1):
            pb = np.sin(k * x)
            gp = dn_grid(pb)
            d1 = gp
            d2 = (c - v_vals) * k * np.cos(k * x) + b_vals * gp
            cols.append((d1, d2))
        cols.append((eta_x, psi_x))  # speed direction

        J = np.column_stack(
            [
                _harmonic_rows(
                    as_trig(project_to_modes(d1, K), tol=np.inf),
                    as_trig(project_to_modes(d2, K), tol=np.inf),
                    band,
                )
                for d1, d2 in cols
            ]
        )
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise NonConvergenceError(
                f"singular steady-wave Jacobian at iteration {it}", residual=res_norm
            ) from exc
        for j, k in enumerate(eta_dirs):
            eta_cos[k] += step[j]
        for j, k in enumerate(range(1, band + 1)):
            psi_sin[k] += step[len(eta_dirs) + j]
        speed += step[-1]
        current = StokesWave(
            wave.amplitude,
            0.0,
            g,
            wave.order,
            TrigPolynomial.from_harmonics(K, cos=eta_cos, parity=EVEN),
            TrigPolynomial.from_harmonics(K, sin=psi_sin, parity=ODD),
            float(speed),
        )
    else:
        raise NonConvergenceError(
            f"steady-wave refinement stalled at residual {res_norm:.3e}",
            residual=res_norm,
            iterations=max_iter,
        )
    if return_info:
        return current, RefineInfo(it, res_norm, band)
    return current
