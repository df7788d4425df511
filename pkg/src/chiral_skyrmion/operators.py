"""Bubble functions and the discrete linear operators around the bubble.

Discretization
--------------
``F = d/dr + hhat/r`` is discretized on the staggered (dual) grid at the
parameter midpoints::

    (F xi)_{j} = (xi_{j+1} - xi_j) / (ds r'_j) + (hhat/r)_j (xi_j + xi_{j+1}) / 2

and ``F*`` is its exact adjoint for the primal trapezoid weights and the
dual midpoint weights.  ``H = F* F`` and ``Hhat = F F*`` are therefore
symmetric positive semidefinite by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import LinearSolveError, ParameterError
from .numerics import RadialGrid, _check_samples

__all__ = [
    "BubbleFunctions",
    "HomogeneousPair",
    "Tridiagonal",
    "bubble",
    "homogeneous_pair",
    "radial_operator",
    "apply_F",
    "apply_Fstar",
    "apply_H",
    "apply_Hhat",
    "H_matrix",
    "Hhat_matrix",
    "hhat_resolvent_solve",
    "g0_apply",
    "hhat_inverse",
]


@dataclass(frozen=True)
class BubbleFunctions:
    """Q = pi - 2 arctan r, h = sin Q, hhat = cos Q and W = 2 h^2 / r^2."""

    r: np.ndarray
    Q: np.ndarray
    h: np.ndarray
    hhat: np.ndarray
    W: np.ndarray


def bubble(r) -> BubbleFunctions:
    r = np.asarray(r, dtype=float)
    r2 = r * r
    return BubbleFunctions(
        r=r,
        Q=math.pi - 2.0 * np.arctan(r),
        h=2.0 * r / (1.0 + r2),
        hhat=(r2 - 1.0) / (r2 + 1.0),
        W=8.0 / (1.0 + r2) ** 2,
    )


@dataclass(frozen=True)
class HomogeneousPair:
    """Positive solutions u = (r^2+1)/r^2 and v = (r^2+1) log(r^2+1)/r^2 - 1
    of the homogeneous equation for Hhat."""

    r: np.ndarray
    u_hom: np.ndarray
    v_hom: np.ndarray


def homogeneous_pair(r) -> HomogeneousPair:
    r = np.asarray(r, dtype=float)
    x = r * r
    u = (x + 1.0) / x
    small = x < 1e-3
    v = np.empty_like(x)
    xs = x[small]
    v[small] = xs / 2 - xs**2 / 6 + xs**3 / 12 - xs**4 / 20
    xl = x[~small]
    v[~small] = (1.0 + 1.0 / xl) * np.log1p(xl) - 1.0
    return HomogeneousPair(r, u, v)


@dataclass(frozen=True)
class Tridiagonal:
    """Tridiagonal matrix; ``lower[i]`` is A[i, i-1], ``upper[i]`` is A[i, i+1]."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray

    @property
    def n(self) -> int:
        return int(self.diag.shape[0])

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[1:] += self.lower[1:] * x[:-1]
        y[:-1] += self.upper[:-1] * x[1:]
        return y

    __matmul__ = matvec

    def solve(self, rhs, return_pivots: bool = False):
        try:
            x, pmin, pmax = _backend.thomas(self.lower, self.diag, self.upper, rhs)
        except ZeroDivisionError as exc:
            raise LinearSolveError(str(exc)) from None
        if not np.all(np.isfinite(x)):
            raise LinearSolveError("non-finite solution in tridiagonal solve")
        if return_pivots:
            return x, pmin, pmax
        return x

    def shifted(self, sigma) -> "Tridiagonal":
        return Tridiagonal(self.lower, self.diag + sigma, self.upper)

    def interior(self) -> "Tridiagonal":
        """Block without the first and last rows/columns (Dirichlet)."""
        lo = self.lower[1:-1].copy()
        up = self.upper[1:-1].copy()
        lo[0] = 0.0
        up[-1] = 0.0
        return Tridiagonal(lo, self.diag[1:-1].copy(), up)

    def to_dense(self) -> np.ndarray:
        n = self.n
        A = np.diag(self.diag)
        A[np.arange(1, n), np.arange(n - 1)] = self.lower[1:]
        A[np.arange(n - 1), np.arange(1, n)] = self.upper[:-1]
        return A


def _half_coefficients(grid: RadialGrid) -> np.ndarray:
    """``r / r'(s)`` at the parameter midpoints (conservative face weights)."""
    sh = 0.5 * (grid.s[1:] + grid.s[:-1])
    rh, jh = grid.map(sh)
    return rh / jh


def radial_operator(grid: RadialGrid, potential=0.0) -> Tridiagonal:
    """Conservative stencil of ``-Delta_r + V`` at interior nodes.

    Uses ``Delta_r u = (r r')^{-1} d/ds((r/r') du/ds)``.  End rows are set
    to the identity (Dirichlet rows).
    """
    n = grid.n
    r, jac, ds = grid.nodes, grid.jac, grid.ds
    c = _half_coefficients(grid)
    V = np.broadcast_to(np.asarray(potential, dtype=float), (n,))
    scale = 1.0 / (r * jac * ds * ds)
    lower = np.zeros(n)
    upper = np.zeros(n)
    diag = np.ones(n)
    lower[1:-1] = -scale[1:-1] * c[:-1]
    upper[1:-1] = -scale[1:-1] * c[1:]
    diag[1:-1] = scale[1:-1] * (c[:-1] + c[1:]) + V[1:-1]
    return Tridiagonal(lower, diag, upper)


def _f_coefficients(grid: RadialGrid):
    dual = grid.dual()
    hr = bubble(dual.nodes).hhat / dual.nodes
    inv = 1.0 / (grid.ds * dual.jac)
    p = -inv + 0.5 * hr
    q = inv + 0.5 * hr
    return p, q, dual.quad_weights, grid.quad_weights


def apply_F(xi, grid: RadialGrid) -> np.ndarray:
    """F xi on the dual grid (length n-1)."""
    xi = _check_samples(xi, grid)
    p, q, _, _ = _f_coefficients(grid)
    return p * xi[:-1] + q * xi[1:]


def apply_Fstar(eta, grid: RadialGrid) -> np.ndarray:
    """Adjoint of :func:`apply_F`: maps dual samples back to the primal grid."""
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (grid.n - 1,):
        raise ParameterError("F* expects samples on the dual grid (length n-1)")
    p, q, m, w = _f_coefficients(grid)
    out = np.zeros(grid.n)
    out[1:] += m * q * eta
    out[:-1] += m * p * eta
    return out / w


def apply_H(xi, grid: RadialGrid) -> np.ndarray:
    """H xi = F*(F xi), the linearization of the harmonic-map equation at Q."""
    return apply_Fstar(apply_F(xi, grid), grid)


def apply_Hhat(eta, grid: RadialGrid) -> np.ndarray:
    """Hhat eta = F(F* eta) on the dual grid of ``grid``."""
    return apply_F(apply_Fstar(eta, grid), grid)


def H_matrix(grid: RadialGrid) -> Tridiagonal:
    """Explicit tridiagonal form of F*F on the primal grid."""
    p, q, m, w = _f_coefficients(grid)
    n = grid.n
    diag = np.zeros(n)
    lower = np.zeros(n)
    upper = np.zeros(n)
    diag[1:] += m * q * q
    diag[:-1] += m * p * p
    lower[1:] = m * q * p
    upper[:-1] = m * p * q
    return Tridiagonal(lower / w, diag / w, upper / w)


def Hhat_matrix(grid: RadialGrid, dirichlet: bool = True) -> Tridiagonal:
    """Explicit tridiagonal form of F F* on the dual grid.

    Without ``dirichlet`` the matrix reproduces :func:`apply_Hhat`.  With
    it, eta is extended by zero ghost cells beyond both ends; F* then uses
    full (not halved) weights at the two primal end nodes, which keeps the
    matrix symmetric positive definite.
    """
    p, q, m, w = _f_coefficients(grid)
    if dirichlet:
        w = grid.nodes * grid.jac * grid.ds
    nd = grid.n - 1
    wl = w[:-1]  # primal node j (left of dual j)
    wr = w[1:]  # primal node j+1
    diag = p * p * m / wl + q * q * m / wr
    lower = np.zeros(nd)
    upper = np.zeros(nd)
    lower[1:] = p[1:] * m[:-1] * q[:-1] / wl[1:]
    upper[:-1] = q[:-1] * m[1:] * p[1:] / wr[:-1]
    return Tridiagonal(lower, diag, upper)


def hhat_resolvent_solve(f, grid: RadialGrid, beta: float) -> np.ndarray:
    """Solve (Hhat + beta^2) eta = f on the dual grid with Dirichlet data."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n - 1,):
        raise ParameterError("right-hand side must live on the dual grid")
    return Hhat_matrix(grid, dirichlet=True).shifted(beta * beta).solve(f)


def _density(f, grid: RadialGrid) -> np.ndarray:
    return f * grid.nodes * grid.jac


def g0_apply(f, grid: RadialGrid, end_correction: bool = True) -> np.ndarray:
    """Free zero-energy resolvent with kernel 1/2 min(s/r, r/s).

    G0 f(r) = (1/2r) int_0^r s^2 f ds + (r/2) int_r^inf f ds, evaluated
    with two prefix-sum passes.
    """
    f = _check_samples(f, grid)
    r = grid.nodes
    zero = np.zeros(grid.n)
    return _backend.separable_sweep(r, 0.5 / r, zero, _density(f, grid), grid.ds, end_correction)


def hhat_inverse(f, grid: RadialGrid) -> np.ndarray:
    """Variation-of-parameters inverse of Hhat.

    Returns (1/2)[u(r) int_0^r v f s ds + v(r) int_r^inf u f s ds]; the
    factor 1/2 is the inverse Wronskian r (u v' - u' v) = 2.  Plain
    trapezoid prefix sums keep the map positivity preserving.
    """
    f = _check_samples(f, grid)
    pair = homogeneous_pair(grid.nodes)
    c = math.sqrt(0.5)
    zero = np.zeros(grid.n)
    return _backend.separable_sweep(
        c * pair.v_hom, c * pair.u_hom, zero, _density(f, grid), grid.ds, False
    )
