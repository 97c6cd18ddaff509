"""Small-amplitude deep-water Stokes waves as explicit amplitude series.

The family (eta, psi, c) is carried to third order in the amplitude a with
hard-coded rational harmonic coefficients; gravity enters only through
sqrt(g) factors on psi and c and through the mean shift P/g of eta.  The
surface velocity traces follow from the closed-form order-one potential
sqrt(g) a e^y sin x, which is accurate to O(a^4) for this normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier import EVEN, ODD, TrigPolynomial, derivative
from .grids import uniform_grid

MAX_AMPLITUDE = 0.2  # series regime guard
DEFAULT_K = 32


@dataclass(frozen=True)
class StokesWave:
    """One member of the steady wave family at (a, P, g)."""

    amplitude: float
    bernoulli: float
    gravity: float
    order: int
    eta: TrigPolynomial
    psi: TrigPolynomial
    speed: float

    @property
    def K(self):
        return self.eta.K


@dataclass(frozen=True)
class VelocityTraces:
    """Surface traces of the velocity field: B vertical, V horizontal."""

    B: TrigPolynomial
    V: TrigPolynomial
    order: int


def eta_harmonics(a, order):
    """Cosine amplitudes {k: c_k} of the surface profile at P=0, g arbitrary."""
    cos = {1: a}
    if order >= 2:
        cos[2] = 0.5 * a * a
    if order >= 3:
        cos[1] += a**3 / 8.0
        cos[3] = 3.0 * a**3 / 8.0
    return cos


def psi_harmonics(a, g, order):
    """Sine amplitudes of the surface potential; carries the sqrt(g) factor.

    The third-order term (1/4)a^3 (3 sin x cos 2x + sin x) is stored in pure
    harmonics: 3 sin x cos 2x = (3/2)(sin 3x - sin x).
    """
    rg = np.sqrt(g)
    sin = {1: rg * a}
    if order >= 2:
        sin[2] = 0.5 * rg * a * a
    if order >= 3:
        sin[1] += -rg * a**3 / 8.0
        sin[3] = 3.0 * rg * a**3 / 8.0
    return sin


def wave_speed(a, g, order):
    rg = np.sqrt(g)
    if order >= 2:
        return rg * (1.0 + 0.5 * a * a)
    return rg


def stokes_series(a, P=0.0, g=1.0, order=3, K=DEFAULT_K):
    """Build the steady wave at amplitude a, Bernoulli constant P, gravity g.

    Valid in the series regime |a| <= 0.2; order must be 1, 2 or 3.  The
    wave with P != 0 has eta shifted by P/g and identical psi, c.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"series order must be 1, 2 or 3, got {order}")
    if abs(a) > MAX_AMPLITUDE:
        raise ValueError(f"amplitude {a} outside series regime |a| <= {MAX_AMPLITUDE}")
    if g <= 0:
        raise ValueError("gravity must be positive")
    cos = eta_harmonics(a, order)
    cos[0] = P / g
    eta = TrigPolynomial.from_harmonics(K, cos=cos, parity=EVEN)
    psi = TrigPolynomial.from_harmonics(K, sin=psi_harmonics(a, g, order), parity=ODD)
    return StokesWave(a, P, g, order, eta, psi, float(wave_speed(a, g, order)))


def velocity_traces(wave, order=None):
    """Surface traces B = phi_y, V = phi_x of the wave's velocity potential.

    For this normalization the potential is sqrt(g) a e^y sin x through
    third order, so the traces are sqrt(g) a e^eta (sin x, cos x); expanded
    in harmonics and truncated at the requested order (default
    min(wave.order, 3)):

        B = sqrt(g) [a S + (1/2) a^2 S_2 + a^3 (-(1/8) S + (3/8) S_3)]
        V = sqrt(g) [a C + (1/2) a^2 (1 + C_2) + a^3 ((5/8) C + (3/8) C_3)].

    A Bernoulli shift moves the surface and the potential together, so the
    traces do not depend on P.
    """
    if order is None:
        order = min(wave.order, 3)
    if order not in (1, 2, 3):
        raise ValueError(f"trace order must be 1, 2 or 3, got {order}")
    K = wave.K
    a = wave.amplitude
    rg = np.sqrt(wave.gravity)
    sin_b = {1: rg * a}
    cos_v = {1: rg * a}
    if order >= 2:
        sin_b[2] = 0.5 * rg * a * a
        cos_v[0] = 0.5 * rg * a * a
        cos_v[2] = 0.5 * rg * a * a
    if order >= 3:
        sin_b[1] += -rg * a**3 / 8.0
        sin_b[3] = 3.0 * rg * a**3 / 8.0
        cos_v[1] += 5.0 * rg * a**3 / 8.0
        cos_v[3] = 3.0 * rg * a**3 / 8.0
    b = TrigPolynomial.from_harmonics(K, sin=sin_b, parity=ODD)
    v = TrigPolynomial.from_harmonics(K, cos=cos_v, parity=EVEN)
    return VelocityTraces(b, v, order=order)


def steady_residual(wave, dno, grid_factor=8):
    """L2 norms of the two steady equations evaluated with a numeric DN map.

    dno is a callable f -> G(eta) f acting on Fourier data at the wave's
    truncation (build one from conformal.dn_evaluator).  Returns
    (||F1||, ||F2||) with

        F1 = c eta_x + G(eta) psi
        F2 = c psi_x - psi_x^2/2 + (G(eta)psi + psi_x eta_x)^2
             / (2 (1 + eta_x^2)) - g eta + P.
    """
    K = wave.K
    M = grid_factor * K + 1
    x = uniform_grid(M)
    eta = np.real(wave.eta.evaluate(x))
    eta_x = np.real(derivative(wave.eta).evaluate(x))
    psi_x = np.real(derivative(wave.psi).evaluate(x))
    g_psi = np.real(dno(wave.psi).evaluate(x))
    c = wave.speed

    f1 = c * eta_x + g_psi
    f2 = (
        c * psi_x
        - 0.5 * psi_x**2
        + 0.5 * (g_psi + psi_x * eta_x) ** 2 / (1.0 + eta_x**2)
        - wave.gravity * eta
        + wave.bernoulli
    )
    scale = np.sqrt(2.0 * np.pi / M)
    return float(scale * np.linalg.norm(f1)), float(scale * np.linalg.norm(f2))
