"""ND maps, potential recovery and nonuniqueness for core-shell Schrödinger problems.

The domain is the unit disk (2-D) or ball (3-D) with a concentric core of
radius ``r1``; the potential enters through ``sigma1`` in the core and 1 in
the shell. Everything is diagonal in the Fourier / spherical-harmonic basis.
"""

from .errors import (
    BesselRangeError,
    BracketError,
    DomainError,
    IllPosedModeError,
    InconsistentMeasurementError,
    NoRootError,
    NumericDegeneracyError,
    OracleSingularError,
    ShellReconError,
    TruncationError,
    TruncationWarning,
)
from .forward import BoundaryData, EvaluationGrid, dirichlet_trace, evaluate_wave, solve_coefficients
from .inverse import (
    Measurement,
    find_nonuniq_pair,
    find_nonuniq_pairs,
    nonuniq_determinant,
    potential_report,
    recover_sigma,
    target_from_measurement,
)
from .nd_map import (
    ShellConfig,
    difference_norm,
    nd_symbol,
    norm_sweep,
    operator_norm,
    reference_symbol,
    rho,
    symbol_table,
)
from .oracle import RadialProblem, convergence_study, solve_radial_bvp
from .special_fn import Order, assoc_legendre, bessel_i, bessel_k, bessel_ratio_i

__version__ = "0.1.0"
