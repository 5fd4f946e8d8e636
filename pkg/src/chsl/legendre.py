"""One-dimensional Legendre machinery.

Gauss-Legendre quadrature rules, the H^1 Galerkin basis

    phi_0 = L_0,  phi_1 = L_1,
    phi_k = L_k - L_{k+2}   (k = 2, ..., M-3),
    phi_k = L_k             (k = M-2, M-1),

its mass and stiffness matrices assembled by exact quadrature, and the
generalized eigendecomposition ``stiff @ Z = mass @ Z @ diag(lam)`` with
mass-orthonormal eigenvectors.  The eigen data is what turns the constant
coefficient per-step solver into a per-mode diagonal scale.

The two top modes close the L_k - L_{k+2} telescope, so the span is the
full polynomial space of degree M-1.  Extending the difference pattern all
the way to k = M-1 instead would leave a codimension-2 subspace whose best
approximation of smooth functions stalls at the per-cent level near the
boundary; the full span keeps spectral accuracy and lets the doubled (2M
node) quadrature grid integrate cubic nonlinear loads exactly (integrand
degree 4(M-1) <= 4M-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "QuadratureRule",
    "Basis1D",
    "legendre_eval",
    "gauss_rule",
    "build_basis",
    "generalized_eig",
]

_NEWTON_TOL = 1e-15
_NEWTON_MAX_ITER = 100


def legendre_eval(k: int, x):
    """Evaluate the Legendre polynomial ``L_k`` and its derivative at ``x``.

    Uses the three-term recurrence for the values together with
    ``L_k' = L_{k-2}' + (2k-1) L_{k-1}`` for the derivatives, which is
    stable on the whole interval including the endpoints.

    Parameters
    ----------
    k : int
        Polynomial degree, >= 0.
    x : float or ndarray
        Evaluation points in [-1, 1].

    Returns
    -------
    (value, derivative)
        Arrays (or floats for scalar input) of ``L_k(x)`` and ``L_k'(x)``.
    """
    if k < 0:
        raise ValueError(f"degree must be nonnegative, got {k}")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + 1e-12):
        raise ValueError("evaluation point outside [-1, 1]")
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    vals, ders = _legendre_table(k, xa)
    v, d = vals[:, k], ders[:, k]
    if scalar:
        return float(v[0]), float(d[0])
    return v, d


def _legendre_table(kmax: int, x: np.ndarray):
    """Values and derivatives of L_0 .. L_kmax at the points ``x``."""
    n = x.shape[0]
    vals = np.ones((n, kmax + 1))
    ders = np.zeros((n, kmax + 1))
    if kmax >= 1:
        vals[:, 1] = x
        ders[:, 1] = 1.0
    for k in range(2, kmax + 1):
        vals[:, k] = ((2 * k - 1) * x * vals[:, k - 1] - (k - 1) * vals[:, k - 2]) / k
        ders[:, k] = ders[:, k - 2] + (2 * k - 1) * vals[:, k - 1]
    return vals, ders


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]: exact for degree <= 2n - 1."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray


def gauss_rule(n: int) -> QuadratureRule:
    """Gauss-Legendre quadrature rule with ``n`` nodes.

    Nodes are the roots of ``L_n`` found by Newton iteration from
    Chebyshev initial guesses (tolerance 1e-15, at most 100 sweeps);
    weights are ``2 / ((1 - x^2) L_n'(x)^2)``.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    i = np.arange(n)
    x = np.cos(np.pi * (i + 0.75) / (n + 0.5))
    for _ in range(_NEWTON_MAX_ITER):
        vals, ders = _legendre_table(n, x)
        dx = vals[:, n] / ders[:, n]
        x -= dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    else:
        raise RuntimeError(f"Newton iteration for {n}-point rule did not converge")
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])  # enforce exact symmetry about 0
    _, ders = _legendre_table(n, x)
    w = 2.0 / ((1.0 - x * x) * ders[:, n] ** 2)
    w = 0.5 * (w + w[::-1])
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(n=n, nodes=x, weights=w)


@dataclass(frozen=True)
class Basis1D:
    """Per-direction Galerkin basis with quadrature and eigen data.

    Immutable after construction; safe to share across threads.

    Attributes
    ----------
    M : basis dimension (phi_0 .. phi_{M-1}, spanning degree <= M-1).
    quad : dealiasing quadrature rule (2M nodes).
    phi_table : (nquad, M) values of phi_k at the quadrature nodes.
    dphi_table : (nquad, M) values of phi_k' at the quadrature nodes.
    mass : (M, M) SPD Gram matrix (phi_j, phi_k).
    stiff : (M, M) PSD matrix (phi_j', phi_k'); rank M-1, constant null mode.
    eig_vals : ascending generalized eigenvalues; eig_vals[0] == 0.
    eig_vecs : mass-orthonormal eigenvectors, Z.T @ mass @ Z = I.
    """

    M: int
    quad: QuadratureRule
    phi_table: np.ndarray
    dphi_table: np.ndarray
    mass: np.ndarray
    stiff: np.ndarray
    eig_vals: np.ndarray
    eig_vecs: np.ndarray
    # Cholesky factor of mass, cached for nodal -> coefficient projections.
    mass_cho: tuple = field(repr=False, compare=False, default=None)

    @property
    def nquad(self) -> int:
        return self.quad.n

    @property
    def weighted_phi(self) -> np.ndarray:
        """phi_table scaled by quadrature weights (load assembly factor)."""
        return self.quad.weights[:, None] * self.phi_table


def build_basis(M: int) -> Basis1D:
    """Construct the 1D basis of dimension ``M`` on its dealiasing grid.

    Mass and stiffness are assembled by quadrature (exact for the involved
    degrees), then eigendecomposed once.  The smallest eigenvalue is the
    constant mode; it is clamped to exactly zero so that downstream per-mode
    formulas conserve the mean bitwise.
    """
    if M < 3:
        raise ValueError(f"basis dimension must be >= 3, got {M}")
    quad = gauss_rule(2 * M)
    vals, ders = _legendre_table(M - 1, quad.nodes)
    phi = np.empty((quad.n, M))
    dphi = np.empty((quad.n, M))
    phi[:, 0] = vals[:, 0]
    dphi[:, 0] = ders[:, 0]
    phi[:, 1] = vals[:, 1]
    dphi[:, 1] = ders[:, 1]
    for k in range(2, M):
        if k <= M - 3:
            phi[:, k] = vals[:, k] - vals[:, k + 2]
            dphi[:, k] = ders[:, k] - ders[:, k + 2]
        else:
            phi[:, k] = vals[:, k]
            dphi[:, k] = ders[:, k]

    wphi = quad.weights[:, None] * phi
    mass = wphi.T @ phi
    stiff = (quad.weights[:, None] * dphi).T @ dphi
    mass = 0.5 * (mass + mass.T)
    stiff = 0.5 * (stiff + stiff.T)

    lam, Z = generalized_eig(mass, stiff)
    if abs(lam[0]) > 1e-10:
        raise RuntimeError(f"constant mode eigenvalue not numerically zero: {lam[0]}")
    lam[0] = 0.0

    cho = scipy.linalg.cho_factor(mass)
    for a in (phi, dphi, mass, stiff, lam, Z):
        a.flags.writeable = False
    return Basis1D(
        M=M,
        quad=quad,
        phi_table=phi,
        dphi_table=dphi,
        mass=mass,
        stiff=stiff,
        eig_vals=lam,
        eig_vecs=Z,
        mass_cho=cho,
    )


def generalized_eig(mass: np.ndarray, stiff: np.ndarray):
    """Solve ``stiff @ Z = mass @ Z @ diag(lam)`` with ``Z.T @ mass @ Z = I``.

    Eigenvalues are returned in ascending order.  ``mass`` must be symmetric
    positive definite and ``stiff`` symmetric positive semidefinite.
    """
    mass = np.asarray(mass, dtype=float)
    stiff = np.asarray(stiff, dtype=float)
    if mass.shape != stiff.shape or mass.ndim != 2 or mass.shape[0] != mass.shape[1]:
        raise ValueError(f"dimension mismatch: mass {mass.shape}, stiff {stiff.shape}")
    try:
        lam, Z = scipy.linalg.eigh(stiff, mass)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError("mass matrix is not positive definite") from exc
    return lam, Z
