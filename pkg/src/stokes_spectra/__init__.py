"""Spectral verification of the long-wave instability of small Stokes waves.

The package builds the steady wave family as explicit amplitude series,
flattens the fluid domain with a boundary conformal map, assembles the
linearized Bloch operator on a truncated Fourier window, and checks its
unstable eigenvalues two independent ways: a dense eigensolve and a
four-dimensional reduction whose characteristic determinant is exact on
the truncated space.
"""

from .asymptotics import (
    AsymptoticPrediction,
    SeriesFit,
    fit_series,
    flat_dispersion,
    flat_spectrum,
    halving_order,
    predict_lambda,
)
from .bloch import (
    BlochMatrix,
    SpectrumResult,
    assemble,
    build_operator_pipeline,
    growth_rate,
    spectrum,
)
from .conformal import (
    ConformalMap,
    LinearizedCoefficients,
    coefficient_functions,
    dirichlet_neumann,
    dn_evaluator,
    flat_coefficients,
    pushforward,
    solve_riemann_stretch,
)
from .errors import (
    IllPosedError,
    NonConvergenceError,
    RootNotFoundError,
    SingularMapError,
)
from .fourier import (
    FourierVector,
    StateVector,
    TrigPolynomial,
    apply_multiplier,
    derivative,
    hilbert_transform,
    inner_product,
    pointwise_product,
)
from .pipeline import OperatorData, build_pipeline
from .refine import numeric_traces, refine_wave
from .reduction import (
    KernelBasis,
    ReducedSystem,
    SidebandSet,
    char_poly,
    check_generalized_kernel,
    fit_characteristic_constants,
    invert_reduced,
    kernel_basis,
    project_offkernel,
    reduced_matrices,
    sideband,
    sideband_set,
    unstable_roots,
)
from .stokes import StokesWave, VelocityTraces, steady_residual, stokes_series, velocity_traces

__version__ = "1.0.0"
