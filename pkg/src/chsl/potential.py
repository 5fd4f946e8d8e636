"""Double-well free energy with quadratic truncation outside [-2, 2].

Inside [-2, 2] the potential is the quartic well F = (phi^2 - 1)^2 / 4;
outside it continues quadratically so that F, f = F' and f' all match at
the junctions (C^2).  The truncation makes f globally Lipschitz, which is
what the unconditional-stability thresholds of the time stepper rely on.
The raw quartic is kept available for experiments that opt out of the
safety truncation.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "F_trunc",
    "f_trunc",
    "fprime_trunc",
    "F_quartic",
    "f_quartic",
    "fprime_quartic",
    "f_zero",
    "lipschitz_bounds",
]


def _branches(phi):
    phi = np.asarray(phi, dtype=float)
    hi = phi > 2.0
    lo = phi < -2.0
    return phi, hi, lo


def F_trunc(phi):
    """Truncated double-well energy density; C^2, F(+-1) = 0, F >= 0."""
    phi, hi, lo = _branches(phi)
    mid = 0.25 * (phi * phi - 1.0) ** 2
    t = phi - 2.0
    up = 5.5 * t * t + 6.0 * t + 2.25
    s = phi + 2.0
    down = 5.5 * s * s - 6.0 * s + 2.25
    out = np.where(hi, up, np.where(lo, down, mid))
    return out if out.ndim else float(out)


def f_trunc(phi):
    """Derivative of :func:`F_trunc`; odd, globally 11-Lipschitz."""
    phi, hi, lo = _branches(phi)
    mid = phi * phi * phi - phi
    up = 11.0 * (phi - 2.0) + 6.0
    down = 11.0 * (phi + 2.0) - 6.0
    out = np.where(hi, up, np.where(lo, down, mid))
    return out if out.ndim else float(out)


def fprime_trunc(phi):
    """Second derivative of :func:`F_trunc`; bounded by 11."""
    phi, hi, lo = _branches(phi)
    out = np.where(hi | lo, 11.0, 3.0 * phi * phi - 1.0)
    return out if out.ndim else float(out)


def F_quartic(phi):
    """Raw quartic well (phi^2 - 1)^2 / 4, no truncation (unsafe for stability)."""
    phi = np.asarray(phi, dtype=float)
    out = 0.25 * (phi * phi - 1.0) ** 2
    return out if out.ndim else float(out)


def f_quartic(phi):
    phi = np.asarray(phi, dtype=float)
    out = phi * phi * phi - phi
    return out if out.ndim else float(out)


def fprime_quartic(phi):
    phi = np.asarray(phi, dtype=float)
    out = 3.0 * phi * phi - 1.0
    return out if out.ndim else float(out)


def f_zero(phi):
    """Zero bulk force, for linear-problem test hooks."""
    return np.zeros_like(np.asarray(phi, dtype=float))


def lipschitz_bounds() -> tuple[float, float]:
    """Certified bounds (L, L2) on |f'| and |f''| of the truncated well.

    |f'| = |3 phi^2 - 1| <= 11 on [-2, 2] and equals 11 outside;
    |f''| = |6 phi| <= 12 on [-2, 2] and vanishes outside.
    """
    return 11.0, 12.0
