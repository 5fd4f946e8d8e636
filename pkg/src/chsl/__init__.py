"""Energy-stable spectral solver for the Cahn-Hilliard equation.

A Legendre-Galerkin discretization on [-1, 1]^2 combined with a stabilized
linear Crank-Nicolson time stepper whose per-step solve is a diagonal scale
in a precomputed tensor eigenbasis.  The scheme conserves the phase mean
exactly and dissipates a discrete energy unconditionally once the two
stabilization coefficients reach their certified thresholds.
"""

from .diagnostics import EnergyRecord, ErrorTriple, convergence_orders, error_norms, record
from .field import (
    Field2D,
    analyze,
    galerkin_load,
    h1_seminorm,
    h_minus1_norm,
    inner,
    l2_norm,
    mean,
    neumann_inv_laplacian,
    synthesize,
)
from .legendre import Basis1D, QuadratureRule, build_basis, gauss_rule, generalized_eig, legendre_eval
from .potential import F_trunc, f_trunc, fprime_trunc, lipschitz_bounds
from .snapshot import snapshot_read, snapshot_write
from .stepper import (
    BlowUpError,
    FactorizedStepOperator,
    SchemeParams,
    StepperState,
    bootstrap_first_step,
    build_stepper,
    discrete_energy,
    energy,
    initial_state,
    stability_thresholds,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "Basis1D",
    "QuadratureRule",
    "build_basis",
    "gauss_rule",
    "generalized_eig",
    "legendre_eval",
    "Field2D",
    "analyze",
    "galerkin_load",
    "h1_seminorm",
    "h_minus1_norm",
    "inner",
    "l2_norm",
    "mean",
    "neumann_inv_laplacian",
    "synthesize",
    "F_trunc",
    "f_trunc",
    "fprime_trunc",
    "lipschitz_bounds",
    "SchemeParams",
    "StepperState",
    "FactorizedStepOperator",
    "BlowUpError",
    "build_stepper",
    "initial_state",
    "bootstrap_first_step",
    "step",
    "energy",
    "discrete_energy",
    "stability_thresholds",
    "EnergyRecord",
    "ErrorTriple",
    "convergence_orders",
    "error_norms",
    "record",
    "snapshot_read",
    "snapshot_write",
]
