"""Free resolvent R0(beta) = (-Delta_r + 1/r^2 + beta^2)^{-1}, its
order-one Hankel representation, and the full resolvent (H + beta^2)^{-1}.

The Green-kernel path is the production one: O(n) per application via
two exponentially scaled prefix sums.  The Hankel path exists to
cross-check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DomainError, ParameterError, ResolutionError
from .numerics import RadialGrid, _check_samples, bessel, build_grid, j1_zeros, quad
from .operators import H_matrix, Tridiagonal, bubble, radial_operator

__all__ = [
    "HankelTable",
    "hankel1",
    "fourier_bessel_nodes",
    "fourier_bessel_coefficients",
    "fourier_bessel_eval",
    "r0_green",
    "r0_hankel",
    "inner_r0_h",
    "log_coefficient",
    "full_resolvent",
]


@dataclass(frozen=True)
class HankelTable:
    """Samples of f~(rho) = int J1(rho r) f(r) r dr."""

    rho_nodes: np.ndarray
    transform_values: np.ndarray


def _significant(f, grid: RadialGrid) -> np.ndarray:
    mag = np.abs(f) * grid.nodes
    top = float(np.max(mag)) if mag.size else 0.0
    return mag > 1e-14 * top if top > 0 else np.zeros(mag.shape, dtype=bool)


def _check_resolution(f, grid: RadialGrid, rho_max: float) -> None:
    sig = _significant(f, grid)
    if not sig.any() or rho_max <= 0:
        return
    dr = np.diff(grid.nodes)
    spacing = np.maximum(np.concatenate([dr, dr[-1:]]), np.concatenate([dr[:1], dr]))
    worst = float(np.max(spacing[sig]))
    if worst > math.pi / (8.0 * rho_max):
        raise ResolutionError(
            f"grid spacing {worst:.3g} cannot resolve rho up to {rho_max:.3g} "
            f"(need <= pi/(8 rho_max) = {math.pi / (8.0 * rho_max):.3g})"
        )


def hankel1(f, grid: RadialGrid, rho_nodes, tail: bool = False,
            check: bool = True) -> HankelTable:
    """Order-one Hankel transform by trapezoid quadrature in the grid parameter.

    With ``tail`` the integrand is continued past r_max as A/r with A fitted
    at the last node (exact contribution A J0(rho L)/rho), and the first
    Euler-Maclaurin term is added at the cut.
    """
    f = _check_samples(f, grid)
    rho = np.atleast_1d(np.asarray(rho_nodes, dtype=float))
    if np.any(rho < 0):
        raise DomainError("Hankel frequencies must be nonnegative")
    if check and rho.size:
        _check_resolution(f, grid, float(np.max(rho)))
    w = grid.quad_weights
    out = _backend.hankel_matvec(grid.nodes, w * f, rho)
    if tail and grid.n >= 3:
        L = grid.r_max
        A = f[-1] * L
        pos = rho > 0
        out[pos] += A * bessel("J0", rho[pos] * L) / rho[pos]
        # endpoint derivative of G(s) = J1(rho r) f r r' at the cut
        r3 = grid.nodes[-3:]
        G = bessel("J1", np.outer(rho, r3)) * (f[-3:] * r3 * grid.jac[-3:])
        dG = (3.0 * G[:, 2] - 4.0 * G[:, 1] + G[:, 0]) / (2.0 * grid.ds)
        out -= grid.ds**2 / 12.0 * dG
    return HankelTable(rho, out)


def fourier_bessel_nodes(L: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies j_{1,k}/L and the Fourier-Bessel weights 2/(L J0(j_{1,k}))^2."""
    if not L > 0:
        raise ParameterError("L must be positive")
    z = j1_zeros(m)
    return z / L, 2.0 / (L * bessel("J0", z)) ** 2


def fourier_bessel_coefficients(f, grid: RadialGrid, L: float, m: int,
                                check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of f on [0, L] in the basis J1(j_{1,k} r / L)."""
    f = _check_samples(f, grid)
    if np.any(_significant(f, grid) & (grid.nodes > L)):
        raise ParameterError("f must vanish beyond L for a Fourier-Bessel expansion")
    rho, wts = fourier_bessel_nodes(L, m)
    inside = grid.nodes <= L
    fi = np.where(inside, f, 0.0)
    return rho, wts * hankel1(fi, grid, rho, check=check).transform_values


def fourier_bessel_eval(coeffs, rho, r) -> np.ndarray:
    """sum_k c_k J1(rho_k r)."""
    return _backend.hankel_matvec(np.asarray(rho, float), np.asarray(coeffs, float),
                                  np.asarray(r, float))


def _require_beta(beta: float) -> None:
    if not (np.isfinite(beta) and beta > 0):
        raise DomainError("free resolvent needs beta > 0 (use g0_apply for beta = 0)")


def r0_green(beta: float, f, grid: RadialGrid, end_correction: bool = True) -> np.ndarray:
    """R0(beta) f through the kernel I1(beta r<) K1(beta r>).

    ``end_correction=False`` gives the plain trapezoid version, whose
    discrete kernel is exactly symmetric in the quadrature inner product.
    """
    _require_beta(beta)
    f = _check_samples(f, grid)
    x = beta * grid.nodes
    pa = bessel("I1e", x)
    pb = bessel("K1e", x)
    dens = f * grid.nodes * grid.jac
    return _backend.separable_sweep(pa, pb, x, dens, grid.ds, end_correction)


def r0_hankel(beta: float, f, grid: RadialGrid, L: float | None = None,
              rho_max: float = 12.0, r_out=None) -> np.ndarray:
    """R0(beta) f by the Fourier-Bessel series on [0, L].

    The coefficients of f are divided by rho^2 + beta^2 and summed back.
    The Dirichlet wall at L perturbs the result by O(exp(-2 beta (L - r))),
    so L should exceed the support of f by several 1/beta.  ``rho_max``
    sets the mode cut-off and must be resolved by the grid on supp f.
    """
    _require_beta(beta)
    L = grid.r_max if L is None else float(L)
    m = max(1, int(math.ceil(rho_max * L / math.pi)))
    rho, c = fourier_bessel_coefficients(f, grid, L, m)
    r = grid.nodes if r_out is None else np.asarray(r_out, float)
    out = fourier_bessel_eval(c / (rho * rho + beta * beta), rho, r)
    return np.where(r <= L, out, 0.0)


def _callable_or_samples(g, grid: RadialGrid) -> np.ndarray:
    if callable(g):
        return np.asarray(g(grid.nodes), dtype=float)
    return _check_samples(g, grid)


def _inner_grid(beta: float, n: int = 4000) -> RadialGrid:
    return build_grid("geometric", n, 1e-6, max(100.0, 40.0 / beta))


def inner_r0_h(g, beta: float, grid: RadialGrid | None = None) -> float:
    """<g, R0(beta) h> with h = 2r/(1+r^2).

    ``g`` is a callable of r or samples on ``grid``.  Without a grid one
    reaching 40/beta is built so the K1 tail is fully captured.
    """
    _require_beta(beta)
    if grid is None:
        if not callable(g):
            raise ParameterError("sampled g needs its grid")
        grid = _inner_grid(beta)
    gv = _callable_or_samples(g, grid)
    Rh = r0_green(beta, bubble(grid.nodes).h, grid)
    return quad(gv * Rh, grid)


def log_coefficient(g, beta_grid, grid_factory=None) -> tuple[float, float]:
    """Fit <g, R0(beta) h> = a log(1/beta) + b over ``beta_grid``.

    Returns the slope a and the spread (max - min) of the fit residuals.
    """
    betas = np.asarray(list(beta_grid), dtype=float)
    if betas.size < 3:
        raise ParameterError("log_coefficient needs at least 3 beta values")
    if np.any(betas <= 0):
        raise DomainError("beta values must be positive")
    factory = grid_factory or _inner_grid
    vals = np.array([inner_r0_h(g, b, factory(b)) for b in betas])
    X = np.log(1.0 / betas)
    slope, intercept = np.polyfit(X, vals, 1)
    resid = vals - (slope * X + intercept)
    return float(slope), float(np.max(resid) - np.min(resid))


def full_resolvent(beta: float, g, grid: RadialGrid, u_background=None) -> np.ndarray:
    """Solve (H + beta^2) xi = g with xi = 0 at both ends of the grid.

    ``H`` is the staggered F*F operator around Q, or, when a background
    profile is given, -Delta_r + cos(2u)/r^2 around that profile.
    """
    if not (np.isfinite(beta) and beta >= 0):
        raise DomainError("beta must be nonnegative")
    g = _check_samples(g, grid)
    if u_background is None:
        T = H_matrix(grid)
    else:
        u = np.asarray(getattr(u_background, "values", u_background), dtype=float)
        if u.shape != grid.nodes.shape:
            raise ParameterError("background profile must live on the same grid")
        T = radial_operator(grid, np.cos(2.0 * u) / grid.nodes**2)
    inner = T.interior().shifted(beta * beta)
    out = np.zeros(grid.n)
    out[1:-1] = inner.solve(g[1:-1])
    return out
