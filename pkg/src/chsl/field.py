"""Two-dimensional tensor-product spectral fields on [-1, 1]^2.

A field is an M x M array of coefficients c[j, k] with respect to
phi_j(x) phi_k(y).  Nonlinear terms are always evaluated pointwise on the
dealiasing grid and projected back through :func:`galerkin_load`; norms are
quadratic forms in the mass/stiffness matrices.  The inverse Neumann
Laplacian and the H^-1 norm act on zero-mean fields through the generalized
eigenbasis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .legendre import Basis1D

__all__ = [
    "Field2D",
    "synthesize",
    "galerkin_load",
    "analyze",
    "inner",
    "l2_norm",
    "h1_seminorm",
    "mean",
    "quad2d",
    "to_eigen",
    "from_eigen",
    "neumann_inv_laplacian",
    "h_minus1_norm",
]

ZERO_MEAN_TOL = 1e-10


@dataclass(frozen=True)
class Field2D:
    """Scalar field stored as M x M Galerkin coefficients (x index first)."""

    coeffs: np.ndarray
    basis: Basis1D

    def __post_init__(self):
        M = self.basis.M
        if self.coeffs.shape != (M, M):
            raise ValueError(
                f"coefficient array shape {self.coeffs.shape} does not match basis M={M}"
            )

    def __add__(self, other: "Field2D") -> "Field2D":
        _check_same_basis(self, other)
        return Field2D(self.coeffs + other.coeffs, self.basis)

    def __sub__(self, other: "Field2D") -> "Field2D":
        _check_same_basis(self, other)
        return Field2D(self.coeffs - other.coeffs, self.basis)

    def __mul__(self, scalar: float) -> "Field2D":
        return Field2D(self.coeffs * float(scalar), self.basis)

    __rmul__ = __mul__


def _check_same_basis(f: Field2D, g: Field2D):
    if f.basis is not g.basis:
        raise ValueError("fields are attached to different bases")


def synthesize(f: Field2D) -> np.ndarray:
    """Nodal values of ``f`` on the tensor dealiasing grid.

    Two successive matrix products: values = P @ C @ P.T with P the
    per-direction table of basis values, cost O(M^3).
    """
    P = f.basis.phi_table
    return P @ f.coeffs @ P.T


def galerkin_load(basis: Basis1D, values: np.ndarray) -> np.ndarray:
    """Inner products ``(g, phi_j phi_k)`` of nodal data against the basis.

    ``values`` must live on the basis dealiasing grid.  Exact for any
    integrand polynomial whose per-direction degree (including the test
    function) stays within the rule, in particular for cubic nonlinearities
    of fields in the approximation space.
    """
    n = basis.nquad
    if values.shape != (n, n):
        raise ValueError(f"grid shape {values.shape}, expected {(n, n)}")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite grid values")
    Pw = basis.weighted_phi
    return Pw.T @ values @ Pw


def analyze(basis: Basis1D, values: np.ndarray) -> Field2D:
    """L^2 projection of nodal data into the approximation space.

    Mass-solve of :func:`galerkin_load`; inverse of :func:`synthesize` on
    members of the space.
    """
    load = galerkin_load(basis, values)
    x = scipy.linalg.cho_solve(basis.mass_cho, load)
    coeffs = scipy.linalg.cho_solve(basis.mass_cho, x.T).T
    return Field2D(coeffs, basis)


def inner(f: Field2D, g: Field2D) -> float:
    """L^2 inner product (f, g) = c_f : (mass C_g mass)."""
    _check_same_basis(f, g)
    m = f.basis.mass
    return float(np.sum(f.coeffs * (m @ g.coeffs @ m)))


def l2_norm(f: Field2D) -> float:
    return float(np.sqrt(max(inner(f, f), 0.0)))


def h1_seminorm(f: Field2D) -> float:
    """Seminorm |f|_1 = ||grad f||, from the stiffness quadratic form."""
    m, s = f.basis.mass, f.basis.stiff
    c = f.coeffs
    val = np.sum(c * (s @ c @ m)) + np.sum(c * (m @ c @ s))
    return float(np.sqrt(max(val, 0.0)))


def mean(f: Field2D) -> float:
    """Spatial mean (f, 1) / |Omega|.

    Equals the constant-mode coefficient exactly: (phi_j, 1) = 2 delta_j0,
    so (f, 1) = 4 c_00 and |Omega| = 4.
    """
    return float(f.coeffs[0, 0])


def quad2d(basis: Basis1D, values: np.ndarray) -> float:
    """Tensor quadrature of nodal data over [-1, 1]^2."""
    w = basis.quad.weights
    return float(w @ values @ w)


def to_eigen(f: Field2D) -> np.ndarray:
    """Coefficients in the mass-orthonormal tensor eigenbasis."""
    Z, m = f.basis.eig_vecs, f.basis.mass
    zm = Z.T @ m
    return zm @ f.coeffs @ zm.T


def from_eigen(basis: Basis1D, fhat: np.ndarray) -> Field2D:
    """Inverse of :func:`to_eigen`: C = Z @ fhat @ Z.T."""
    Z = basis.eig_vecs
    return Field2D(Z @ fhat @ Z.T, basis)


def neumann_inv_laplacian(v: Field2D) -> Field2D:
    """Zero-mean solution of the weak Neumann problem (grad u, grad w) = (v, w).

    Computed by dividing the eigen coefficients by lam_i + lam_j; the
    constant mode of the output is gauged to zero.  Requires mean(v) = 0.
    """
    if abs(mean(v)) > ZERO_MEAN_TOL:
        raise ValueError(f"input must have zero mean, got {mean(v):.3e}")
    lam = v.basis.eig_vals
    lam2d = lam[:, None] + lam[None, :]
    vhat = to_eigen(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        uhat = np.where(lam2d > 0.0, vhat / lam2d, 0.0)
    return from_eigen(v.basis, uhat)


def h_minus1_norm(v: Field2D) -> float:
    """||v||_{-1} = sqrt((v, u)) with u the inverse Neumann Laplacian of v."""
    u = neumann_inv_laplacian(v)
    return float(np.sqrt(max(inner(v, u), 0.0)))
