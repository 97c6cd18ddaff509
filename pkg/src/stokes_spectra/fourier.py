"""Exact arithmetic on truncated Fourier series of 2pi-periodic functions.

A function is represented by its complex amplitudes c_k on the symmetric
mode window k = -K..K, so that f(x) = sum_k c_k e^{ikx}.  All operations
below are pure coefficient manipulations; products are computed by full
convolution and truncated back to the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EVEN = "even"
ODD = "odd"
NONE = "none"

# tolerance for validating parity / realness tags on construction
TAG_TOL = 1e-13


def sign(x):
    """Sign function with sign(0) = 0, elementwise."""
    return np.sign(x)


@dataclass(frozen=True)
class FourierVector:
    """Complex amplitudes on modes -K..K (index i holds mode i-K)."""

    coeffs: np.ndarray
    K: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size != 2 * self.K + 1:
            raise ValueError(
                f"expected {2 * self.K + 1} coefficients for K={self.K}, got {c.size}"
            )
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, K):
        return cls(np.zeros(2 * K + 1, dtype=complex), K)

    @classmethod
    def from_modes(cls, K, modes):
        """Build from a {mode: amplitude} mapping."""
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, a in modes.items():
            if abs(k) > K:
                raise ValueError(f"mode {k} outside truncation K={K}")
            c[k + K] = a
        return cls(c, K)

    def amplitude(self, k):
        """Amplitude of mode k (0 outside the window)."""
        if abs(k) > self.K:
            return 0.0 + 0.0j
        return self.coeffs[k + self.K]

    @property
    def modes(self):
        return np.arange(-self.K, self.K + 1)

    def mean(self):
        """Mean value (1/2pi) * integral = amplitude of mode 0."""
        return self.coeffs[self.K]

    def norm(self):
        """L2 norm on the torus, sqrt(2 pi sum |c_k|^2)."""
        return float(np.sqrt(2.0 * np.pi * np.sum(np.abs(self.coeffs) ** 2)))

    def evaluate(self, x):
        """Pointwise values sum_k c_k e^{ikx} at arbitrary points x."""
        x = np.asarray(x, dtype=float)
        phases = np.exp(1j * np.outer(x, self.modes))
        vals = phases @ self.coeffs
        return vals if x.ndim else complex(vals)

    def resized(self, K):
        """Embed into (or truncate to) a different mode window."""
        c = np.zeros(2 * K + 1, dtype=complex)
        lo = min(self.K, K)
        c[K - lo : K + lo + 1] = self.coeffs[self.K - lo : self.K + lo + 1]
        return FourierVector(c, K)


def _parity_defect(coeffs, K, parity):
    """Largest coefficient violating the requested parity."""
    c = coeffs
    rev = c[::-1]  # mode k -> mode -k
    if parity == EVEN:
        # cosine series: c_{-k} = c_k
        return float(np.max(np.abs(c - rev)))
    if parity == ODD:
        # sine series: c_{-k} = -c_k (forces c_0 = 0)
        return float(np.max(np.abs(c + rev)))
    return 0.0


@dataclass(frozen=True)
class TrigPolynomial(FourierVector):
    """Real trigonometric series with an advisory parity tag.

    Realness (c_{-k} = conj(c_k)) is always enforced; the parity tag is
    validated on construction with tolerance TAG_TOL on the offending
    coefficients.
    """

    parity: str = NONE

    def __post_init__(self):
        super().__post_init__()
        c = self.coeffs
        real_defect = float(np.max(np.abs(c - np.conj(c[::-1]))))
        if real_defect > TAG_TOL:
            raise ValueError(f"coefficients not real-symmetric (defect {real_defect:.3e})")
        if self.parity not in (EVEN, ODD, NONE):
            raise ValueError(f"unknown parity tag {self.parity!r}")
        defect = _parity_defect(c, self.K, self.parity)
        if defect > TAG_TOL:
            raise ValueError(f"parity tag {self.parity!r} violated (defect {defect:.3e})")

    @classmethod
    def constant(cls, value, K):
        c = np.zeros(2 * K + 1, dtype=complex)
        c[K] = value
        return cls(c, K, parity=EVEN)

    @classmethod
    def from_harmonics(cls, K, cos=None, sin=None, parity=None):
        """Build from {k: a_k} cosine and {k: b_k} sine amplitudes.

        f(x) = cos[0] + sum_k cos[k] cos(kx) + sum_k sin[k] sin(kx).
        """
        cos = cos or {}
        sin = sin or {}
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, a in cos.items():
            if k < 0 or k > K:
                raise ValueError(f"cosine harmonic {k} outside 0..{K}")
            if k == 0:
                c[K] += a
            else:
                c[K + k] += a / 2.0
                c[K - k] += a / 2.0
        for k, b in sin.items():
            if k <= 0 or k > K:
                raise ValueError(f"sine harmonic {k} outside 1..{K}")
            c[K + k] += b / (2.0j)
            c[K - k] -= b / (2.0j)
        if parity is None:
            if not sin:
                parity = EVEN
            elif not cos:
                parity = ODD
            else:
                parity = NONE
        return cls(c, K, parity=parity)

    def cos_coeff(self, k):
        """Coefficient of cos(kx) (of the constant term for k=0)."""
        if k == 0:
            return float(np.real(self.coeffs[self.K]))
        return float(np.real(self.amplitude(k) + self.amplitude(-k)))

    def sin_coeff(self, k):
        """Coefficient of sin(kx)."""
        return float(np.real(1j * (self.amplitude(k) - self.amplitude(-k))))

    def values(self):
        """Real pointwise evaluator is the same as FourierVector's."""
        return self.evaluate


def as_trig(vec, parity=NONE, tol=1e-10):
    """Re-tag a FourierVector as a TrigPolynomial, cleaning tiny defects.

    Symmetrizes the coefficients so the realness/parity invariants hold
    exactly; raises if the cleanup moves any coefficient by more than tol.
    """
    c = vec.coeffs.copy()
    sym = 0.5 * (c + np.conj(c[::-1]))
    if parity == EVEN:
        sym = 0.5 * (sym + sym[::-1])
    elif parity == ODD:
        sym = 0.5 * (sym - sym[::-1])
    moved = float(np.max(np.abs(sym - c)))
    if moved > tol:
        raise ValueError(f"cannot tag as {parity!r} real series (defect {moved:.3e})")
    return TrigPolynomial(sym, vec.K, parity=parity)


def _rewrap(result, K, *inputs, parity=None):
    """Return TrigPolynomial when every input carries a tag, else FourierVector."""
    if parity is not None and all(isinstance(f, TrigPolynomial) for f in inputs):
        try:
            return TrigPolynomial(result, K, parity=parity)
        except ValueError:
            return FourierVector(result, K)
    return FourierVector(result, K)


def _combined_parity(pa, pb):
    if NONE in (pa, pb):
        return NONE
    return EVEN if pa == pb else ODD


def _flipped(p):
    if p == EVEN:
        return ODD
    if p == ODD:
        return EVEN
    return NONE


def apply_multiplier(m, mu, f):
    """Fourier multiplier with Bloch shift: output_k = m(k + mu) * f_k.

    m is a scalar-or-array callable on real arguments; with mu = 0 this is
    the plain multiplier m(D).
    """
    symbols = np.asarray(m(f.modes + mu), dtype=complex)
    if not np.all(np.isfinite(symbols)):
        raise ValueError("multiplier not finite on the shifted mode window")
    out = symbols * f.coeffs
    # an even real symbol preserves parity; no general tag otherwise
    parity = getattr(f, "parity", None)
    sym_rev = np.asarray(m(-(f.modes + mu)), dtype=complex)
    if parity in (EVEN, ODD) and mu == 0 and np.allclose(symbols, sym_rev) and np.allclose(
        symbols.imag, 0.0
    ):
        return _rewrap(out, f.K, f, parity=parity)
    return FourierVector(out, f.K)


def derivative(f):
    """d/dx: multiply mode k by ik (annihilates constants, flips parity)."""
    out = 1j * f.modes * f.coeffs
    parity = getattr(f, "parity", None)
    if parity in (EVEN, ODD):
        return _rewrap(out, f.K, f, parity=_flipped(parity))
    return FourierVector(out, f.K)


def hilbert_transform(f):
    """Periodic Hilbert transform, symbol -i sign(k); kills the mean."""
    out = -1j * sign(f.modes) * f.coeffs
    parity = getattr(f, "parity", None)
    if parity in (EVEN, ODD):
        return _rewrap(out, f.K, f, parity=_flipped(parity))
    return FourierVector(out, f.K)


def pointwise_product(f, g):
    """Product fg: full coefficient convolution truncated back to -K..K."""
    if f.K != g.K:
        raise ValueError(f"truncation mismatch K={f.K} vs K={g.K}")
    K = f.K
    full = np.convolve(f.coeffs, g.coeffs)  # modes -2K..2K
    out = full[K : 3 * K + 1]
    pa = getattr(f, "parity", None)
    pb = getattr(g, "parity", None)
    if pa in (EVEN, ODD) and pb in (EVEN, ODD):
        return _rewrap(out, K, f, g, parity=_combined_parity(pa, pb))
    return FourierVector(out, K)


def linear_combination(coeffs_and_vecs):
    """sum a_i f_i over (a_i, f_i) pairs sharing one truncation."""
    pairs = list(coeffs_and_vecs)
    K = pairs[0][1].K
    acc = np.zeros(2 * K + 1, dtype=complex)
    for a, f in pairs:
        if f.K != K:
            raise ValueError("truncation mismatch in linear combination")
        acc += a * f.coeffs
    return FourierVector(acc, K)


@dataclass(frozen=True)
class StateVector:
    """Pair of Fourier vectors (surface-like, potential-like) sharing K."""

    first: FourierVector
    second: FourierVector

    def __post_init__(self):
        if self.first.K != self.second.K:
            raise ValueError("components must share the same truncation")

    @property
    def K(self):
        return self.first.K

    @classmethod
    def zero(cls, K):
        return cls(FourierVector.zero(K), FourierVector.zero(K))

    @classmethod
    def from_array(cls, arr, K):
        n = 2 * K + 1
        arr = np.asarray(arr, dtype=complex)
        if arr.size != 2 * n:
            raise ValueError(f"expected length {2 * n}, got {arr.size}")
        return cls(FourierVector(arr[:n].copy(), K), FourierVector(arr[n:].copy(), K))

    def to_array(self):
        return np.concatenate([self.first.coeffs, self.second.coeffs])

    def norm(self):
        return float(np.sqrt(abs(inner_product(self, self))))

    def __add__(self, other):
        return StateVector.from_array(self.to_array() + other.to_array(), self.K)

    def __sub__(self, other):
        return StateVector.from_array(self.to_array() - other.to_array(), self.K)

    def __mul__(self, scalar):
        return StateVector.from_array(scalar * self.to_array(), self.K)

    __rmul__ = __mul__


def inner_product(F, G):
    """Complex L2(T)^2 inner product via Parseval.

    integral over T of (F1 conj(G1) + F2 conj(G2)) dx
    = 2 pi sum_k (F1_k conj(G1_k) + F2_k conj(G2_k)).
    """
    if F.K != G.K:
        raise ValueError("truncation mismatch in inner product")
    s = np.vdot(G.first.coeffs, F.first.coeffs) + np.vdot(G.second.coeffs, F.second.coeffs)
    return 2.0 * np.pi * s
