"""Perturbative analysis of solved profiles.

A solved profile v at coupling beta_hat is written as v(mu r) = Q(r) + xi(r),
where mu is fixed by the orthogonality condition <W xi, R0(mu beta_hat) h> = 0.
The scaled grid r_i/mu is used for xi so no interpolation enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import OutOfRangeError, ParameterError, RootBracketError
from .model import ModelParams
from .numerics import Profile, RadialGrid, norm_weighted, quad
from .operators import bubble, radial_operator
from .resolvent import r0_green

__all__ = [
    "PerturbationRecord",
    "invert_relation",
    "relation_gap",
    "orthogonality",
    "find_mu",
    "extract_xi",
    "perturbation_record",
    "source_term",
    "nonlinearity",
    "nonlinearity_bound",
    "perturbation_residual",
    "nbound_check",
    "relation_check",
    "energy_deficit_ratio",
    "energy_deficit_check",
    "monotonicity_check",
    "band_ratio",
    "trend_slope",
    "no_growth",
]

MU_BRACKET = (0.5, 2.0)


@dataclass
class PerturbationRecord:
    k: float
    alpha: float
    beta_hat: float
    mu: float
    beta: float
    xi: Profile
    norm_X: float
    norm_Xinf: float
    xi_over_r_sup: float
    orth_residual: float
    orth_scale: float
    relation_gap: float
    energy_deficit: float
    extra: dict = field(default_factory=dict)

    @property
    def energy_deficit_ratio(self) -> float:
        return energy_deficit_ratio(self.energy_deficit, self.k)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "alpha": self.alpha,
            "beta_hat": self.beta_hat,
            "mu": self.mu,
            "beta": self.beta,
            "norm_X": self.norm_X,
            "norm_Xinf": self.norm_Xinf,
            "xi_over_r_sup": self.xi_over_r_sup,
            "orth_residual": self.orth_residual,
            "relation_gap": self.relation_gap,
            "energy_deficit": self.energy_deficit,
            "energy_deficit_ratio": self.energy_deficit_ratio,
        }


def invert_relation(k: float) -> float:
    """The beta in (0, 1/e) with 2 beta log(1/beta) = k, by bisection."""
    if not np.isfinite(k) or k <= 0:
        raise OutOfRangeError("k must be positive")
    if k >= 2.0 / math.e:
        raise OutOfRangeError("k >= 2/e lies outside the range of 2 beta log(1/beta)")
    lo, hi = 0.0, 1.0 / math.e
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if 2.0 * mid * math.log(1.0 / mid) < k:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def relation_gap(k: float, beta: float) -> float:
    return k / beta - 2.0 * math.log(1.0 / beta)


def _xi_on_scaled_grid(v: Profile, mu: float) -> tuple[RadialGrid, np.ndarray]:
    g = v.grid.scaled(1.0 / mu)
    return g, v.values - bubble(g.nodes).Q


def orthogonality(v: Profile, beta_hat: float, mu: float) -> tuple[float, float]:
    """G(mu) = <W xi_mu, R0(mu beta_hat) h> and its natural size
    ||W xi||_{L1} sup|R0 h|."""
    g, xi = _xi_on_scaled_grid(v, mu)
    b = bubble(g.nodes)
    Rh = r0_green(mu * beta_hat, b.h, g)
    Wxi = b.W * xi
    return quad(Wxi * Rh, g), quad(np.abs(Wxi), g) * float(np.max(np.abs(Rh)))


def find_mu(v: Profile, beta_hat: float, bracket=MU_BRACKET) -> tuple[float, float]:
    """Root of the orthogonality condition in ``bracket``; returns (mu, mu beta_hat)."""
    if not beta_hat > 0:
        raise ParameterError("beta_hat must be positive")
    G1, _ = orthogonality(v, beta_hat, 1.0)
    if G1 == 0.0:
        return 1.0, beta_hat
    a, b = bracket
    Ga = orthogonality(v, beta_hat, a)[0]
    Gb = orthogonality(v, beta_hat, b)[0]
    if Ga == 0.0:
        return a, a * beta_hat
    if Gb == 0.0:
        return b, b * beta_hat
    if np.sign(Ga) == np.sign(Gb):
        raise RootBracketError(f"orthogonality condition has no sign change on [{a}, {b}]")
    mu = brentq(lambda m: orthogonality(v, beta_hat, m)[0], a, b, xtol=1e-14, rtol=1e-15)
    return float(mu), float(mu * beta_hat)


def extract_xi(v: Profile, mu: float) -> Profile:
    """xi(r) = v(mu r) - Q(r), sampled on the grid r_i / mu."""
    if not mu > 0:
        raise ParameterError("mu must be positive")
    g, xi = _xi_on_scaled_grid(v, mu)
    return Profile(g, xi, left_limit=v.left_limit - math.pi)


def perturbation_record(v: Profile, params: ModelParams, total_energy: float) -> PerturbationRecord:
    mu, beta = find_mu(v, params.beta)
    xi = extract_xi(v, mu)
    G, scale = orthogonality(v, params.beta, mu)
    r = xi.grid.nodes
    return PerturbationRecord(
        k=params.k,
        alpha=params.alpha,
        beta_hat=params.beta,
        mu=mu,
        beta=beta,
        xi=xi,
        norm_X=norm_weighted(xi.values, xi.grid, "X"),
        norm_Xinf=norm_weighted(xi.values, xi.grid, "Xinf"),
        xi_over_r_sup=float(np.max(np.abs(xi.values / r))),
        orth_residual=G,
        orth_scale=scale,
        relation_gap=relation_gap(params.k, beta),
        energy_deficit=2.0 - total_energy,
    )


def source_term(r, k: float, alpha: float, beta: float) -> np.ndarray:
    """s = -beta^2 h + (k + beta alpha) beta h^2 / r."""
    h = bubble(r).h
    return -beta * beta * h + (k + beta * alpha) * beta * h * h / r


def nonlinearity(xi, r, k: float, alpha: float, beta: float) -> np.ndarray:
    """Everything in the Euler-Lagrange equation for Q + xi beyond (H + beta^2) xi - s."""
    b = bubble(r)
    h, hh, Q = b.h, b.hhat, b.Q
    exch = (2.0 * hh * h * (1.0 - np.cos(2.0 * xi))
            + (2.0 * h * h - 1.0) * (np.sin(2.0 * xi) - 2.0 * xi)) / (2.0 * r * r)
    dm = k * beta * (np.sin(Q + xi) ** 2 - np.sin(Q) ** 2) / r

    def fa(u):
        return (1.0 - alpha + alpha * np.cos(u)) * np.sin(u)

    an = beta * beta * (fa(Q) + xi - fa(Q + xi))
    return exch + dm + an


def nonlinearity_bound(xi, r, k: float, alpha: float, beta: float) -> np.ndarray:
    """Pointwise majorant of |N| up to the constant."""
    h = bubble(r).h
    a = abs(xi)
    return ((h * a * a + a**3) / (r * r)
            + k * beta * (h * a + a * a) / r
            + beta * beta * ((1.0 + abs(alpha)) * (h * a / r + a**3 + h * a * a)
                             + abs(alpha) * h * a**4))


def _laplacian_q(r):
    return 2.0 * (r * r - 1.0) / (r * (1.0 + r * r) ** 2)


def perturbation_residual(record: PerturbationRecord, params: ModelParams | None = None,
                          v: Profile | None = None) -> dict:
    """sup |r^2 ((H + beta^2) xi - s - N(xi))| over interior nodes.

    -Delta xi is formed as the discrete Laplacian of Q + xi minus the exact
    Laplacian of Q, so the identity is tested without differentiating Q
    numerically.  Returns the sup together with sup |r^2 s| for scale.
    """
    k = record.k if params is None else params.k
    alpha = record.alpha if params is None else params.alpha
    beta = record.beta
    g = record.xi.grid
    r = g.nodes
    b = bubble(r)
    xi = record.xi.values
    full = b.Q + xi if v is None else v.values
    lap_v = -radial_operator(g).matvec(full)  # Delta_d of Q + xi
    lap_xi = lap_v - _laplacian_q(r)
    Hxi = -lap_xi + (1.0 / (r * r) - b.W) * xi
    res = Hxi + beta * beta * xi - source_term(r, k, alpha, beta) - nonlinearity(xi, r, k, alpha, beta)
    s = source_term(r, k, alpha, beta)
    inner = slice(1, -1)
    sup_res = float(np.max(np.abs((r * r * res)[inner]))) if g.n > 2 else 0.0
    sup_s = float(np.max(np.abs(r * r * s)))
    return {"residual": sup_res, "source_scale": sup_s,
            "relative": sup_res / sup_s if sup_s > 0 else sup_res}


def nbound_check(record: PerturbationRecord, C: float = 10.0) -> tuple[bool, float]:
    """Is |N(xi)| <= C * bound at every node?  Returns (ok, max |N|/bound)."""
    r = record.xi.grid.nodes
    xi = record.xi.values
    N = np.abs(nonlinearity(xi, r, record.k, record.alpha, record.beta))
    B = nonlinearity_bound(xi, r, record.k, record.alpha, record.beta)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(B > 0, N / B, np.where(N > 0, np.inf, 0.0))
    worst = float(np.max(ratio)) if ratio.size else 0.0
    return worst <= C, worst


def band_ratio(values) -> float:
    v = np.abs(np.asarray(values, dtype=float))
    return float(np.max(v) / np.min(v))


def trend_slope(values, x) -> float:
    return float(np.polyfit(np.asarray(x, float), np.asarray(values, float), 1)[0])


def no_growth(values, factor: float = 3.0) -> bool:
    """No value exceeds ``factor`` times the first one (values ordered by
    decreasing k)."""
    v = np.abs(np.asarray(values, dtype=float))
    return bool(np.all(v <= factor * v[0]))


def _ordered(records):
    return sorted(records, key=lambda rec: -rec.k)


def relation_check(records) -> dict:
    recs = _ordered(records)
    if len({rec.k for rec in recs}) < 3:
        raise ParameterError("relation_check needs at least 3 distinct k")
    gaps = [rec.relation_gap for rec in recs]
    logs = [math.log(1.0 / rec.beta) for rec in recs]
    return {
        "rows": [{"k": rec.k, "beta": rec.beta, "relation_gap": rec.relation_gap} for rec in recs],
        "max_abs_gap": float(np.max(np.abs(gaps))),
        "slope_vs_log": trend_slope(gaps, logs),
    }


def energy_deficit_ratio(deficit: float, k: float) -> float:
    """(2 - E) 2 log(1/k) / k^2; zero at k = 0 by convention."""
    if k == 0:
        return 0.0
    return deficit * 2.0 * math.log(1.0 / k) / (k * k)


def energy_deficit_check(records) -> dict:
    recs = _ordered(records)
    if len(recs) < 3:
        raise ParameterError("energy_deficit_check needs at least 3 records")
    ratios = [rec.energy_deficit_ratio for rec in recs]
    dev = np.abs(np.asarray(ratios) - 1.0)
    return {
        "rows": [{"k": rec.k, "ratio": q} for rec, q in zip(recs, ratios)],
        "all_in_band": bool(all(0.5 <= q <= 1.5 for q in ratios)),
        "deviation_nonincreasing": bool(np.all(np.diff(dev) <= 1e-12)),
    }


def monotonicity_check(u: Profile, tol: float = 1e-8) -> tuple[bool, float]:
    d = np.diff(u.values)
    worst = float(max(np.max(d), 0.0)) if d.size else 0.0
    return worst <= tol, worst
