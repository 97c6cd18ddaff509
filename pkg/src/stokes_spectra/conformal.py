"""Boundary conformal map (Riemann stretch) and the Dirichlet-Neumann operator.

The fluid domain below a small periodic surface eta is flattened by a
conformal map whose boundary trace zeta satisfies the fixed point

    zeta(x) = x + H(eta o zeta)(x),

with H the periodic Hilbert transform.  On the flattened side the
Dirichlet-Neumann operator becomes explicit,

    G(eta) f = d/dx ( zeta^{-1}_sharp H (zeta_sharp f) ),

where zeta_sharp f = f o zeta and zeta_star f = zeta' (f o zeta).  Only the
boundary trace is ever computed; the interior harmonic extension is not
needed for any of the operators here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, SingularMapError
from .fourier import (
    EVEN,
    ODD,
    FourierVector,
    TrigPolynomial,
    as_trig,
    derivative,
    hilbert_transform,
)
from .grids import grid_size, project_to_modes, uniform_grid
from .stokes import velocity_traces

FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 200
NEWTON_TOL = 1e-13
NEWTON_MAX_STEPS = 50


@dataclass(frozen=True)
class ConformalMap:
    """Boundary trace of the domain-flattening map.

    zeta_offset holds zeta(x) - x (odd), zeta_prime its derivative plus one
    (even).  eta_mean records the removed mean of the input surface
    (G(eta + const) = G(eta)).  iterate_gaps is the sup-norm distance
    between successive fixed-point iterates, kept as the convergence trace.
    """

    zeta_offset: TrigPolynomial
    zeta_prime: TrigPolynomial
    eta_mean: float
    iterations_used: int
    residual: float
    iterate_gaps: tuple

    @property
    def K(self):
        return self.zeta_offset.K

    def boundary_values(self, x):
        """zeta evaluated at points x."""
        return np.asarray(x) + np.real(self.zeta_offset.evaluate(x))

    def derivative_values(self, x):
        return np.real(self.zeta_prime.evaluate(x))


def identity_map(K):
    zero = TrigPolynomial(np.zeros(2 * K + 1, dtype=complex), K, parity=ODD)
    return ConformalMap(zero, TrigPolynomial.constant(1.0, K), 0.0, 1, 0.0, (0.0,))


def solve_riemann_stretch(eta, tol=FIXED_POINT_TOL, max_iter=FIXED_POINT_MAX_ITER,
                          grid_factor=4):
    """Fixed-point solve of zeta = x + H(eta o zeta) from zeta_0 = x.

    The composition eta o zeta is evaluated by sampling on a uniform grid of
    grid_factor*K + 1 >= 4K + 1 points and projecting back to modes -K..K.
    Stops when successive iterates are closer than tol in sup norm; raises
    NonConvergenceError (carrying the last gap) past max_iter.
    """
    K = eta.K
    M = grid_size(K, grid_factor)
    x = uniform_grid(M)
    mean = float(np.real(eta.mean()))
    eta0 = FourierVector(eta.coeffs.copy(), K).coeffs
    eta0[K] = 0.0
    eta0 = FourierVector(eta0, K)

    offset = np.zeros(2 * K + 1, dtype=complex)
    gaps = []
    for it in range(1, max_iter + 1):
        zeta_x = x + np.real(FourierVector(offset, K).evaluate(x))
        composed = project_to_modes(np.real(eta0.evaluate(zeta_x)), K)
        new_offset = hilbert_transform(composed).coeffs
        gap = _sup_norm(new_offset - offset, K, x)
        gaps.append(gap)
        offset = new_offset
        if gap < tol:
            break
    else:
        raise NonConvergenceError(
            f"Riemann stretch fixed point did not contract in {max_iter} iterations",
            residual=gaps[-1],
            iterations=max_iter,
            trace=tuple(gaps),
        )

    try:
        off = as_trig(FourierVector(offset, K), ODD, tol=100 * max(tol, 1e-14))
    except ValueError:
        # non-even surfaces give a boundary trace without definite parity
        off = as_trig(FourierVector(offset, K), tol=100 * max(tol, 1e-14))
    prime_coeffs = derivative(off).coeffs + TrigPolynomial.constant(1.0, K).coeffs
    try:
        prime = as_trig(FourierVector(prime_coeffs, K), EVEN)
    except ValueError:
        prime = as_trig(FourierVector(prime_coeffs, K))
    prime_vals = np.real(prime.evaluate(x))
    if np.min(prime_vals) <= 0.0:
        raise SingularMapError(
            f"zeta' reaches {np.min(prime_vals):.3e}: surface too steep for a "
            "conformal boundary map"
        )
    # final fixed-point residual on the sample grid
    zeta_x = x + np.real(off.evaluate(x))
    composed = project_to_modes(np.real(eta0.evaluate(zeta_x)), K)
    res = _sup_norm(hilbert_transform(composed).coeffs - offset, K, x)
    return ConformalMap(off, prime, mean, len(gaps), res, tuple(gaps))


def _sup_norm(coeffs, K, x):
    return float(np.max(np.abs(FourierVector(coeffs, K).evaluate(x))))


def pushforward(cmap, f, weighted=False, grid_factor=4):
    """Composition with the boundary map: f o zeta, or zeta' (f o zeta).

    The unweighted form is the pullback zeta_sharp, the weighted form the
    density-carrying zeta_star with zeta_star(df/dx) = d/dx(zeta_sharp f).
    """
    K = cmap.K
    M = grid_size(K, grid_factor)
    x = uniform_grid(M)
    zeta_x = cmap.boundary_values(x)
    vals = f.evaluate(zeta_x)
    if weighted:
        vals = vals * cmap.derivative_values(x)
    out = project_to_modes(vals, K)
    if isinstance(f, TrigPolynomial) and f.parity in (EVEN, ODD):
        # zeta odd-offset composition preserves parity
        try:
            return as_trig(out, f.parity)
        except ValueError:
            return out
    return out


def invert_boundary(cmap, targets, tol=NEWTON_TOL, max_steps=NEWTON_MAX_STEPS):
    """Solve zeta(s) = target per grid point by Newton from s = target."""
    s = np.asarray(targets, dtype=float).copy()
    for _ in range(max_steps):
        vals = cmap.boundary_values(s) - targets
        if np.max(np.abs(vals)) < tol:
            return s
        deriv = cmap.derivative_values(s)
        if np.min(deriv) <= 0.0:
            raise SingularMapError("zeta' <= 0 during boundary inversion")
        s = s - vals / deriv
    raise NonConvergenceError(
        f"boundary Newton inversion stalled after {max_steps} steps",
        residual=float(np.max(np.abs(cmap.boundary_values(s) - targets))),
        iterations=max_steps,
    )


def pullback_inverse(cmap, f, grid_factor=4):
    """Composition with the inverse boundary map, f o zeta^{-1}."""
    K = cmap.K
    M = grid_size(K, grid_factor)
    x = uniform_grid(M)
    s = invert_boundary(cmap, x)
    return project_to_modes(f.evaluate(s), K)


def dirichlet_neumann(cmap, f, grid_factor=4):
    """G(eta) f through the conformal identity; output has zero mean."""
    lifted = pushforward(cmap, f, weighted=False, grid_factor=grid_factor)
    transformed = hilbert_transform(lifted)
    lowered = pullback_inverse(cmap, transformed, grid_factor=grid_factor)
    return derivative(lowered)


def dn_evaluator(cmap, grid_factor=4):
    """Callable f -> G(eta) f bound to one converged map."""

    def apply(f):
        return dirichlet_neumann(cmap, f, grid_factor=grid_factor)

    return apply


@dataclass(frozen=True)
class LinearizedCoefficients:
    """Variable coefficients of the flattened linearized operator.

    p = (c - zeta_sharp V) / zeta', q = -p d/dx(zeta_sharp B), and the
    zeroth-order factor (g + q)/zeta', all even and projected to -K..K.
    """

    p: TrigPolynomial
    q: TrigPolynomial
    gq_over_zp: TrigPolynomial
    g: float
    eps: float
    series_order: int
    map_residual: float

    @property
    def K(self):
        return self.p.K


def coefficient_functions(wave, cmap, traces=None, grid_factor=4):
    """Build p, q and (g + q)/zeta' for one wave and its converged map.

    Divisions by zeta' are performed pointwise on the sample grid before
    re-projection.  At eta = 0 this returns p = c = sqrt(g), q = 0 and
    (g + q)/zeta' = g exactly.  traces defaults to the series velocity
    traces of the wave; pass refine.numeric_traces output for a polished
    wave so the coefficients stay consistent with it.
    """
    K = cmap.K
    M = grid_size(K, grid_factor)
    x = uniform_grid(M)
    if traces is None:
        traces = velocity_traces(wave)
    zp = cmap.derivative_values(x)
    if np.min(zp) <= 0.0:
        raise SingularMapError("zeta' <= 0 on the sample grid")

    v_lift = np.real(traces.V.evaluate(cmap.boundary_values(x)))
    p_vals = (wave.speed - v_lift) / zp
    p = as_trig(project_to_modes(p_vals, K), EVEN)

    b_lift = pushforward(cmap, traces.B, grid_factor=grid_factor)
    db_vals = np.real(derivative(b_lift).evaluate(x))
    q = as_trig(project_to_modes(-p_vals * db_vals, K), EVEN)

    q_vals = np.real(q.evaluate(x))
    gq = as_trig(project_to_modes((wave.gravity + q_vals) / zp, K), EVEN)
    return LinearizedCoefficients(
        p, q, gq, wave.gravity, wave.amplitude, wave.order, cmap.residual
    )


def flat_coefficients(g=1.0, K=32):
    """Coefficients of the flat-water operator (eps = 0)."""
    rg = float(np.sqrt(g))
    return LinearizedCoefficients(
        TrigPolynomial.constant(rg, K),
        TrigPolynomial.constant(0.0, K),
        TrigPolynomial.constant(float(g), K),
        float(g),
        0.0,
        3,
        0.0,
    )
