"""Closed-form reference values and least-squares series extraction.

The headline prediction: for small mu, eps > 0 the unstable eigenvalue pair
behaves as

    lambda_pm = (sqrt g / 2) i mu +- (sqrt g / (2 sqrt 2)) mu eps + h.o.t.

so the growth rate is (sqrt g/(2 sqrt 2)) |mu eps| and the unstable branch
leaves the origin with slope sqrt(2)/|eps| (sign of mu) in the (Re, Im)
plane.  Flat water carries the exact dispersion i[(mu+k) +- sqrt|mu+k|]
times sqrt(g).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

VANDERMONDE_COND_LIMIT = 1e10


@dataclass(frozen=True)
class AsymptoticPrediction:
    lambda_plus: complex
    lambda_minus: complex
    growth: float
    locus_slope: float
    g: float
    mu: float
    eps: float


def predict_lambda(mu, eps, g=1.0):
    """Leading-order unstable pair, growth rate and locus slope."""
    rg = np.sqrt(g)
    real_part = rg * mu * eps / (2.0 * np.sqrt(2.0))
    imag_part = rg * mu / 2.0
    lam_plus = complex(real_part, imag_part)
    lam_minus = complex(-real_part, imag_part)
    growth = rg * abs(mu * eps) / (2.0 * np.sqrt(2.0))
    slope = np.sign(mu) * np.sqrt(2.0) / abs(eps) if eps != 0.0 else np.inf
    return AsymptoticPrediction(
        lam_plus, lam_minus, float(growth), float(slope), float(g), float(mu), float(eps)
    )


def flat_dispersion(k, mu, g=1.0):
    """Flat-water eigenvalue frequencies (omega_plus, omega_minus).

    The eigenvalues of the flat operator are i omega^pm with
    omega^pm = sqrt(g) [(mu + k) +- sqrt|mu + k|].
    """
    rg = np.sqrt(g)
    base = mu + k
    root = np.sqrt(np.abs(base))
    return float(rg * (base + root)), float(rg * (base - root))


def flat_spectrum(K, mu, g=1.0, mode_limit=None):
    """All flat-water eigenvalues i omega^pm for |k| <= mode_limit (or K)."""
    lim = K if mode_limit is None else mode_limit
    vals = []
    for k in range(-lim, lim + 1):
        wp, wm = flat_dispersion(k, mu, g)
        vals.extend([1j * wp, 1j * wm])
    return np.array(vals)


@dataclass(frozen=True)
class SeriesFit:
    """Least-squares polynomial fit of samples over an amplitude grid."""

    abscissae: np.ndarray
    values: np.ndarray
    degree: int
    coefficients: np.ndarray  # c[j] multiplies x^j
    residual: float
    condition: float

    def coefficient(self, power):
        return complex(self.coefficients[power])

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return sum(self.coefficients[j] * x**j for j in range(self.degree + 1))


def fit_series(abscissae, values, degree):
    """Polynomial least squares on a Vandermonde system scaled to [-1, 1].

    Needs at least degree + 2 samples so the residual is meaningful.  If
    the scaled Vandermonde condition exceeds 1e10 the degree is reduced
    (with a warning) until it is acceptable.
    """
    x = np.asarray(abscissae, dtype=float)
    y = np.asarray(values, dtype=complex)
    if x.size != y.size:
        raise ValueError("abscissae and values must have equal length")
    if x.size < degree + 2:
        raise ValueError(f"need at least {degree + 2} samples for degree {degree}")
    scale = float(np.max(np.abs(x)))
    if scale == 0.0:
        scale = 1.0
    xs = x / scale

    deg = degree
    while True:
        V = np.column_stack([xs**j for j in range(deg + 1)])
        cond = float(np.linalg.cond(V))
        if cond <= VANDERMONDE_COND_LIMIT or deg == 0:
            break
        warnings.warn(
            f"Vandermonde condition {cond:.2e} too large; degrading fit degree "
            f"{deg} -> {deg - 1}",
            RuntimeWarning,
            stacklevel=2,
        )
        deg -= 1

    scaled_coeffs, *_ = np.linalg.lstsq(V, y, rcond=None)
    resid = float(np.linalg.norm(V @ scaled_coeffs - y))
    coeffs = np.array(
        [scaled_coeffs[j] / scale**j for j in range(deg + 1)], dtype=complex
    )
    return SeriesFit(x, y, deg, coeffs, resid, cond)


def halving_order(fit_full, fit_half):
    """log2 of the residual ratio between nested abscissa sets.

    For samples following c0 + .. + c_d x^d + r x^(d+1), fitting degree d on
    a grid and on the same grid halved leaves residuals dominated by the
    x^(d+1) remainder, so the ratio estimates 2^(d+1).
    """
    if fit_half.residual == 0.0:
        return np.inf
    return float(np.log2(fit_full.residual / fit_half.residual))
