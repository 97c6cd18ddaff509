"""Truncated-Fourier matrix of the linearized operator and its spectrum.

On modes -K..K the operator acts on pairs U = (u1, u2) as

    [ p (i mu + d/dx) + p'   |D + mu| ] [u1]
    [ -(g + q)/zeta'          p (i mu + d/dx) ] [u2]

and factors as J K with J the constant skew block and K Hermitian.  The
matrix is assembled from convolution blocks for the variable coefficients
and diagonal blocks for the multipliers, so its action coincides exactly
with the coefficient-space primitives (products truncated back to -K..K).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonConvergenceError
from .fourier import FourierVector, StateVector

DEFAULT_K = 32


def convolution_matrix(f, K):
    """Matrix of u -> truncation of f*u on modes -K..K: M[j,k] = fhat(j-k)."""
    n = 2 * K + 1
    out = np.zeros((n, n), dtype=complex)
    for j in range(-K, K + 1):
        for k in range(-K, K + 1):
            d = j - k
            if abs(d) <= f.K:
                out[j + K, k + K] = f.coeffs[d + f.K]
    return out


def reduce_bloch_parameter(mu):
    """Shift mu by an integer into [-1/2, 1/2); spectra repeat with period 1."""
    shift = int(np.floor(mu + 0.5))
    return mu - shift, shift


@dataclass(frozen=True)
class BlochMatrix:
    """Dense complex matrix of the operator at one (mu, eps) with factors J, K."""

    mu: float
    eps: float
    K: int
    g: float
    entries: np.ndarray
    j_factor: np.ndarray
    k_factor: np.ndarray
    mu_shift: int
    metadata: dict = field(default_factory=dict)

    @property
    def size(self):
        return 2 * (2 * self.K + 1)

    def apply(self, state):
        if state.K != self.K:
            raise ValueError(f"state truncation {state.K} does not match K={self.K}")
        return StateVector.from_array(self.entries @ state.to_array(), self.K)


def assemble(mu, eps, K, coeffs):
    """Assemble the Bloch matrix from the linearized coefficient functions.

    coeffs must come from the same amplitude; mu is reduced mod 1 into
    [-1/2, 1/2) (the shift is recorded).  The diagonal |D + mu| block equals
    the split |D| + mu sign(D) off the mean plus mu on the mean for
    mu in [0, 1/2).
    """
    if coeffs.eps != eps:
        raise ValueError(f"coefficients built at eps={coeffs.eps}, requested {eps}")
    if coeffs.K != K:
        raise ValueError(f"coefficient truncation {coeffs.K} does not match K={K}")
    mu_red, shift = reduce_bloch_parameter(mu)

    n = 2 * K + 1
    modes = np.arange(-K, K + 1)
    P = convolution_matrix(coeffs.p, K)
    GQ = convolution_matrix(coeffs.gq_over_zp, K)
    D = np.diag(1j * modes).astype(complex)
    absDmu = np.diag(np.abs(modes + mu_red)).astype(complex)

    # Hermitian factor: [ (g+q)/zeta'          -i mu p - p d/dx ]
    #                   [ i mu p + d/dx(p .)    |D + mu|        ]
    k_factor = np.zeros((2 * n, 2 * n), dtype=complex)
    k_factor[:n, :n] = GQ
    k_factor[:n, n:] = -1j * mu_red * P - P @ D
    k_factor[n:, :n] = 1j * mu_red * P + D @ P
    k_factor[n:, n:] = absDmu

    eye = np.eye(n)
    j_factor = np.zeros((2 * n, 2 * n), dtype=complex)
    j_factor[:n, n:] = eye
    j_factor[n:, :n] = -eye

    # entries = J @ k_factor, written out blockwise (exact row swap/negation)
    entries = np.zeros((2 * n, 2 * n), dtype=complex)
    entries[:n, :] = k_factor[n:, :]
    entries[n:, :] = -k_factor[:n, :]

    meta = {
        "series_order": coeffs.series_order,
        "map_residual": coeffs.map_residual,
        "mu_requested": mu,
    }
    return BlochMatrix(mu_red, eps, K, coeffs.g, entries, j_factor, k_factor, shift, meta)


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues sorted lexicographically by (Re, Im), optional vectors."""

    eigenvalues: np.ndarray
    eigenvectors: tuple | None
    residuals: np.ndarray | None


def lex_sort(values):
    order = np.lexsort((np.imag(values), np.real(values)))
    return np.asarray(values)[order], order


def match_sort(values):
    """Sort by (Im, Re) for comparing near-imaginary spectra.

    The canonical output order (Re, Im) is unstable under eigensolver noise
    when whole groups share Re ~ 0; imaginary parts separate the spectrum
    here except within an unstable pair, where Re breaks the tie.
    """
    values = np.asarray(values)
    order = np.lexsort((np.real(values), np.imag(values)))
    return values[order]


def matching_distance(a, b):
    """Largest gap of an optimal pairing between two equal-size spectra.

    Plain coordinate sorting mispairs members of a conjugate pair whose
    tie-breaking coordinate sits at roundoff, so the comparison uses a
    minimum-cost assignment instead.
    """
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a)
    b = np.asarray(b)
    if a.size != b.size:
        raise ValueError("spectra of different sizes")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


def spectrum(matrix, want_vectors=False, residual_tol=1e-8):
    """Full spectrum of the assembled matrix with deterministic ordering."""
    A = matrix.entries
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    try:
        if want_vectors:
            vals, vecs = np.linalg.eig(A)
        else:
            vals = np.linalg.eigvals(A)
            vecs = None
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NonConvergenceError(f"eigensolver did not converge: {exc}") from exc

    vals_sorted, order = lex_sort(vals)
    if vecs is None:
        return SpectrumResult(vals_sorted, None, None)

    vecs = vecs[:, order]
    residuals = np.array(
        [
            np.linalg.norm(A @ vecs[:, i] - vals_sorted[i] * vecs[:, i])
            / np.linalg.norm(vecs[:, i])
            for i in range(vecs.shape[1])
        ]
    )
    if np.max(residuals) > residual_tol:
        raise NonConvergenceError(
            f"eigenvector residual {np.max(residuals):.3e} above {residual_tol}",
            residual=float(np.max(residuals)),
        )
    states = tuple(StateVector.from_array(vecs[:, i], matrix.K) for i in range(vecs.shape[1]))
    return SpectrumResult(vals_sorted, states, residuals)


def build_operator_pipeline(eps, g=1.0, K=DEFAULT_K, order=3, refined=True,
                            fixed_point_tol=None):
    """Linearized coefficients for one amplitude (g literal)."""
    from .pipeline import build_pipeline

    return build_pipeline(
        eps, g=g, K=K, order=order, refined=refined, fixed_point_tol=fixed_point_tol
    ).coeffs


def growth_rate(mu, eps, K=DEFAULT_K, g=1.0, order=3, refined=True):
    """Largest spectral real part and an achieving eigenvalue.

    Computed at unit gravity and scaled by sqrt(g); ties in the real part
    are broken toward the larger imaginary part.  The wave is refined on
    the truncated space by default so the steady-series defect does not
    mask the long-wave growth (which is itself only O(mu eps)).
    """
    coeffs = build_operator_pipeline(eps, g=1.0, K=K, order=order, refined=refined)
    m = assemble(mu, eps, K, coeffs)
    vals = spectrum(m).eigenvalues
    re = np.real(vals)
    best = np.flatnonzero(re >= re.max() - 1e-15)
    arg = best[np.argmax(np.imag(vals[best]))]
    scale = float(np.sqrt(g))
    return scale * float(re[arg]), scale * complex(vals[arg])
