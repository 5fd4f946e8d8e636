"""Error norms, convergence-order estimation and energy/mass traces."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .field import Field2D, h1_seminorm, h_minus1_norm, l2_norm, mean
from .potential import lipschitz_bounds
from .stepper import SchemeParams, StepperState, energy

__all__ = [
    "ErrorTriple",
    "EnergyRecord",
    "error_norms",
    "convergence_orders",
    "record",
]

MEAN_MATCH_TOL = 1e-8


@dataclass(frozen=True)
class ErrorTriple:
    """H^-1, L^2 and H^1 norms of a zero-mean error field."""

    h_minus1: float
    l2: float
    h1: float


@dataclass(frozen=True)
class EnergyRecord:
    """Per-step diagnostics: time, energies, mean and step increment norm."""

    t: float
    E: float
    E_cn: float
    mass: float
    dt_norm: float


def error_norms(phi: Field2D, phi_ref: Field2D) -> ErrorTriple:
    """Error norms of ``phi - phi_ref`` (same basis, matching means).

    The two fields must carry the same mean: the H^-1 norm only exists for
    zero-mean differences, and a mean mismatch indicates a conservation bug.
    """
    e = phi - phi_ref
    m = mean(e)
    if abs(m) > MEAN_MATCH_TOL:
        raise ValueError(f"fields do not share the same mean: difference {m:.3e}")
    l2 = l2_norm(e)
    semi = h1_seminorm(e)
    return ErrorTriple(
        h_minus1=h_minus1_norm(e),
        l2=l2,
        h1=math.sqrt(l2 * l2 + semi * semi),
    )


def convergence_orders(errors, taus) -> list[float]:
    """Observed orders log(e_{k-1}/e_k) / log(tau_{k-1}/tau_k)."""
    errors = [float(e) for e in errors]
    taus = [float(t) for t in taus]
    if len(errors) != len(taus) or len(errors) < 2:
        raise ValueError("need equally many errors and taus, at least two of each")
    if any(t2 >= t1 for t1, t2 in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly decreasing")
    if any(e <= 0 for e in errors):
        raise ValueError("errors must be positive")
    return [
        math.log(e1 / e2) / math.log(t1 / t2)
        for (e1, e2), (t1, t2) in zip(zip(errors, errors[1:]), zip(taus, taus[1:]))
    ]


def record(
    state: StepperState,
    params: SchemeParams,
    trace: list[EnergyRecord],
    L: float | None = None,
) -> EnergyRecord:
    """Append an :class:`EnergyRecord` for the state at t = n * tau."""
    if L is None:
        L, _ = lipschitz_bounds()
    phi_n = state.phi_n
    phi_nm1 = state.phi_nm1
    e = energy(phi_n, params)
    dt = l2_norm(phi_n - phi_nm1)
    coeff = L / (4.0 * params.epsilon) + 0.5 * params.B
    rec = EnergyRecord(
        t=state.n * params.tau,
        E=e,
        E_cn=e + coeff * dt * dt,
        mass=mean(phi_n),
        dt_norm=dt,
    )
    trace.append(rec)
    return rec
