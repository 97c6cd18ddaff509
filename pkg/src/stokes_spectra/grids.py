"""Uniform-grid sampling and spectral projection shared by the solvers."""

from __future__ import annotations

import numpy as np

from .fourier import FourierVector


def uniform_grid(M):
    """M equispaced points on [0, 2pi)."""
    return 2.0 * np.pi * np.arange(M) / M


def grid_size(K, factor=4):
    """Default sampling density for compositions at truncation K."""
    return factor * K + 1


def project_to_modes(values, K):
    """Trapezoid-exact projection of uniform-grid samples onto modes -K..K."""
    values = np.asarray(values, dtype=complex)
    M = values.size
    if M < 2 * K + 2:
        raise ValueError(f"grid of {M} points cannot resolve modes up to {K}")
    spec = np.fft.fft(values) / M
    c = np.empty(2 * K + 1, dtype=complex)
    for k in range(-K, K + 1):
        c[k + K] = spec[k % M]
    return FourierVector(c, K)
