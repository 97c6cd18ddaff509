"""One-call construction of the operator data for a given amplitude."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conformal import (
    ConformalMap,
    LinearizedCoefficients,
    coefficient_functions,
    flat_coefficients,
    identity_map,
    solve_riemann_stretch,
)
from .refine import numeric_traces, refine_wave
from .stokes import StokesWave, VelocityTraces, stokes_series, velocity_traces

DEFAULT_K = 32


@dataclass(frozen=True)
class OperatorData:
    """Wave, boundary map, velocity traces and linearized coefficients."""

    wave: StokesWave
    cmap: ConformalMap
    traces: VelocityTraces
    coeffs: LinearizedCoefficients
    refined: bool


def build_pipeline(eps, g=1.0, K=DEFAULT_K, order=3, refined=True,
                   fixed_point_tol=None, refine_tol=None):
    """Series wave -> conformal map -> coefficients, optionally polished.

    refined=True (the default for spectral work) Newton-polishes the wave
    on the truncated space and uses the numeric velocity traces, driving
    the steady residual to solver precision; refined=False keeps the plain
    series data, whose O(eps^(order+1)) residual is the quantity of
    interest in the series-validation checks.
    """
    map_kwargs = {}
    if fixed_point_tol is not None:
        map_kwargs["tol"] = fixed_point_tol
    if eps == 0.0:
        K_ = K
        flat_wave = stokes_series(0.0, 0.0, g, order, K=K_)
        cmap = identity_map(K_)
        traces = velocity_traces(flat_wave)
        return OperatorData(flat_wave, cmap, traces, flat_coefficients(g, K_), refined)

    wave = stokes_series(eps, 0.0, g, order, K=K)
    if refined:
        kwargs = {} if refine_tol is None else {"tol": refine_tol}
        wave = refine_wave(wave, **kwargs)
        cmap = solve_riemann_stretch(wave.eta, **map_kwargs)
        traces = numeric_traces(wave, cmap)
    else:
        cmap = solve_riemann_stretch(wave.eta, **map_kwargs)
        traces = velocity_traces(wave)
    coeffs = coefficient_functions(wave, cmap, traces=traces)
    return OperatorData(wave, cmap, traces, coeffs, refined)
