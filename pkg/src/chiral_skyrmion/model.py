"""Reduced micromagnetic energy, topological quantities and test families."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import ParameterError
from .numerics import Profile, RadialGrid, cumulative_integral, quad
from .operators import bubble

__all__ = [
    "ModelParams",
    "EnergyBreakdown",
    "energy_breakdown",
    "exchange_local",
    "skyrmion_number",
    "pohozaev_residual",
    "evaluate_profile",
    "rescale",
    "resample",
    "bubble_profile",
    "cutoff_bubble",
    "piecewise_linear_test",
    "tail_bound",
    "smoothstep_cutoff",
]


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the reduced energy E = E_e + beta k E_DM + beta^2 E^(alpha).

    ``beta = 0`` is accepted so the pure harmonic-map problem can be posed;
    every other use requires ``beta > 0``.
    """

    k: float
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("k", "alpha", "beta"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.beta < 0:
            raise ParameterError("beta must be nonnegative")
        if self.alpha > 1:
            raise ParameterError("alpha must satisfy alpha <= 1")

    def with_beta(self, beta: float) -> "ModelParams":
        return ModelParams(self.k, self.alpha, beta)


@dataclass(frozen=True)
class EnergyBreakdown:
    exchange: float
    dm: float
    aniso: float
    total: float
    charge: float
    pohozaev: float

    def as_dict(self) -> dict:
        return {
            "exchange": self.exchange,
            "dm": self.dm,
            "aniso": self.aniso,
            "total": self.total,
            "charge": self.charge,
            "pohozaev": self.pohozaev,
        }


def _S(u):
    """Antiderivative of sin^2: S(u) = u/2 - sin(2u)/4."""
    return 0.5 * u - 0.25 * np.sin(2.0 * u)


def exchange_density(u: Profile) -> np.ndarray:
    ur = u.derivative(order=4)
    r = u.grid.nodes
    return 0.5 * (ur * ur + np.sin(u.values) ** 2 / (r * r))


def dm_energy(u: Profile) -> float:
    """int sin^2(u) u_r r dr, integrated by parts to avoid differentiating u."""
    g = u.grid
    S = _S(u.values)
    boundary = S[-1] * g.nodes[-1] - S[0] * g.nodes[0]
    return float(boundary - quad(S / g.nodes, g))


def aniso_energy(u: Profile, alpha: float) -> float:
    c = 1.0 - np.cos(u.values)
    return quad(c - 0.5 * alpha * c * c, u.grid)


def skyrmion_number(u: Profile) -> float:
    """N = (cos u(inf) - cos u(0)) / 2 from the profile's limits.

    The end nodes sit O(r_min) and O(1/r_max) away from those limits, so
    they are not used.
    """
    return 0.5 * (math.cos(u.right_limit) - math.cos(u.left_limit))


def energy_breakdown(u: Profile, params: ModelParams) -> EnergyBreakdown:
    exchange = quad(exchange_density(u), u.grid)
    dm = dm_energy(u)
    aniso = aniso_energy(u, params.alpha)
    b, k = params.beta, params.k
    total = exchange + b * k * dm + b * b * aniso
    return EnergyBreakdown(
        exchange=exchange,
        dm=dm,
        aniso=aniso,
        total=total,
        charge=skyrmion_number(u),
        pohozaev=b * k * dm + 2.0 * b * b * aniso,
    )


def pohozaev_residual(u: Profile, params: ModelParams) -> float:
    return energy_breakdown(u, params).pohozaev


def exchange_local(u: Profile, r1: float, r2: float) -> float:
    """Exchange energy restricted to [r1, r2].

    Ends outside the grid are clipped to it; interior ends are handled by
    cubic interpolation of the running integral.
    """
    if not r1 < r2:
        raise ParameterError("exchange_local needs r1 < r2")
    g = u.grid
    dens = exchange_density(u) * g.nodes * g.jac
    running = cumulative_integral(dens, g.ds)
    spline = CubicSpline(g.s, running)

    def at(r):
        if r <= g.r_min:
            return running[0]
        if r >= g.r_max:
            return running[-1]
        s = np.interp(math.log(r), np.log(g.nodes), g.s)
        return float(spline(s))

    return float(at(r2) - at(r1))


def evaluate_profile(u: Profile, x) -> np.ndarray:
    """Evaluate u at radii ``x`` by monotone cubic interpolation in log r.

    Below the grid the regular behaviour u ~ left_limit + c r is used;
    above it the profile is extended by its right limit 0.
    """
    g = u.grid
    x = np.asarray(x, dtype=float)
    lr = np.log(g.nodes)
    out = np.empty_like(x)
    inside = (x >= g.r_min) & (x <= g.r_max)
    if inside.any():
        out[inside] = PchipInterpolator(lr, u.values)(np.log(x[inside]))
    low = x < g.r_min
    if low.any():
        out[low] = u.left_limit + (u.values[0] - u.left_limit) * x[low] / g.r_min
    out[x > g.r_max] = u.right_limit
    return out


def rescale(u: Profile, lam: float) -> Profile:
    """The profile r -> u(lam r) on the same grid."""
    if not lam > 0:
        raise ParameterError("rescale factor must be positive")
    if lam == 1.0:
        return u.with_values(u.values.copy())
    return u.with_values(evaluate_profile(u, lam * u.grid.nodes))


def resample(u: Profile, grid: RadialGrid) -> Profile:
    """Interpolate a profile onto another grid."""
    return Profile(grid, evaluate_profile(u, grid.nodes), u.left_limit, u.right_limit)


def bubble_profile(grid: RadialGrid, s: float = 1.0) -> Profile:
    """The harmonic-map bubble Q(r/s) sampled on ``grid``."""
    return Profile(grid, bubble(grid.nodes / s).Q)


def smoothstep_cutoff(x) -> np.ndarray:
    """C^2 cut-off: 1 on [0,1], 0 on [2,inf), quintic smoothstep between."""
    t = np.clip(np.asarray(x, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t * t)


def cutoff_bubble(R: float, s: float, grid: RadialGrid) -> Profile:
    """Q(r/s) multiplied by the cut-off phi(r/(s R))."""
    if not R > 1:
        raise ParameterError("cut-off scale must satisfy R > 1")
    if not s > 0:
        raise ParameterError("rescale factor must be positive")
    r = grid.nodes
    return Profile(grid, bubble(r / s).Q * smoothstep_cutoff(r / (s * R)))


def piecewise_linear_test(n: int, M: int, t: float, grid: RadialGrid) -> Profile:
    """Three-piece profile rising from n pi with slope t to M pi, then
    falling with slope -1 to 0 and staying there."""
    if int(n) != n or n < 0:
        raise ParameterError("n must be a nonnegative integer")
    if int(M) != M or M % 2 == 0:
        raise ParameterError("M must be an odd integer")
    if not t > 0:
        raise ParameterError("slope t must be positive")
    r = grid.nodes
    r1 = (M - n) * math.pi / t
    r2 = r1 + M * math.pi
    u = np.where(r <= r1, n * math.pi + t * r, np.where(r <= r2, (M * math.pi + r1) - r, 0.0))
    return Profile(grid, u, left_limit=n * math.pi)


def tail_bound(u: Profile, r: float, alpha: float = 0.0) -> tuple[float, float]:
    """Both sides of the pointwise tail bound

    1 - cos u(r) + sin^2 u(r) / 2 <= (4/r) sqrt(E^(alpha)) sqrt(E_e).
    """
    g = u.grid
    if not g.r_min <= r <= g.r_max:
        raise ParameterError("radius outside the grid")
    ur = float(evaluate_profile(u, np.array([r]))[0])
    lhs = 1.0 - math.cos(ur) + 0.5 * math.sin(ur) ** 2
    e_e = quad(exchange_density(u), g)
    e_a = aniso_energy(u, alpha)
    rhs = 4.0 / r * math.sqrt(max(e_a, 0.0)) * math.sqrt(max(e_e, 0.0))
    return lhs, rhs
