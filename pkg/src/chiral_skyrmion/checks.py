"""Verification suites behind ``chiral-skyrmion verify``.

Each suite returns a list of :class:`CheckRow`; a suite passes when every
row does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import (
    band_ratio,
    energy_deficit_check,
    invert_relation,
    monotonicity_check,
    no_growth,
    perturbation_record,
    relation_check,
)
from .model import ModelParams
from .numerics import EXACT_INTEGRALS, build_grid, exact_integral, integrand, quad
from .operators import H_matrix, apply_H, bubble, hhat_inverse, radial_operator
from .resolvent import inner_r0_h, log_coefficient, r0_green, r0_hankel
from .solver import SolveOptions, continuation, solve_newton

__all__ = ["CheckRow", "SUITES", "run_suite", "observed_order", "SWEEP_K"]

SWEEP_K = (0.3, 0.2, 0.1, 0.05, 0.02)


@dataclass
class CheckRow:
    name: str
    value: float
    reference: float
    error: float
    tol: float
    passed: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _row(name, value, reference, error, tol, passed=None):
    ok = bool(error <= tol) if passed is None else bool(passed)
    return CheckRow(name, float(value), float(reference), float(error), float(tol), ok)


def observed_order(errors, factor: float = 2.0) -> float:
    """Smallest successive convergence order log(e_i/e_{i+1})/log(factor)."""
    e = np.asarray(errors, dtype=float)
    return float(np.min(np.log(e[:-1] / e[1:]) / math.log(factor)))


def integrals(tol: float = 1e-8, n: int = 4000) -> list[CheckRow]:
    g = build_grid("geometric", n, 1e-8, 1e8)
    rows = []
    for ident in EXACT_INTEGRALS:
        val = quad(integrand(ident, g.nodes), g, tail_correction=True)
        ref = exact_integral(ident)
        rows.append(_row(ident, val, ref, abs(val / ref - 1.0), tol))
    return rows


def _bump(r):
    return r * np.exp(-r * r)


def _hh_error(n):
    g = build_grid("geometric", n, 1e-3, 1e3)
    b = bubble(g.nodes)
    return float(np.max(np.abs((g.nodes**2 * apply_H(b.h, g))[1:-1])))


def _hhat_roundtrip_error(n):
    g = build_grid("geometric", n, 1e-4, 1e4)
    r = g.nodes
    f = r * r * np.exp(-((r - 2.0) ** 2))
    eta = hhat_inverse(f, g)
    A = radial_operator(g, 4.0 / (r * r * (r * r + 1.0)))
    m = (r > 0.05) & (r < 20.0)
    return float(np.max(np.abs((A @ eta - f)[m])))


def operators(tol: float = 1.9) -> list[CheckRow]:
    rows = []
    errs = [_hh_error(n) for n in (500, 1000, 2000)]
    order = observed_order(errs)
    rows.append(_row("H h = 0, observed order", order, 2.0, errs[-1], 0.0, order >= tol))

    g = build_grid("geometric", 300, 1e-3, 1e3)
    H = H_matrix(g).to_dense()
    w = g.quad_weights
    S = w[:, None] * H
    asym = float(np.max(np.abs(S - S.T)) / np.max(np.abs(S)))
    rows.append(_row("H = F*F symmetric", asym, 0.0, asym, 1e-13))
    lam = float(np.min(np.linalg.eigvalsh(0.5 * (S + S.T))))
    rows.append(_row("H = F*F positive semidefinite", lam, 0.0, max(-lam, 0.0),
                     1e-10 * float(np.max(np.abs(S)))))

    errs = [_hhat_roundtrip_error(n) for n in (1000, 2000, 4000)]
    order = observed_order(errs)
    rows.append(_row("Hhat Hhat^-1 = I, observed order", order, 2.0, errs[-1], 0.0, order >= tol))

    rng = np.random.default_rng(7)
    g = build_grid("geometric", 2000, 1e-4, 1e4)
    worst = 0.0
    for _ in range(20):
        f = np.abs(rng.standard_normal(g.n)) * np.exp(-rng.uniform(0.1, 2.0) * g.nodes)
        worst = min(worst, float(np.min(hhat_inverse(f, g))))
    rows.append(_row("Hhat^-1 preserves positivity", worst, 0.0, -worst, 0.0))
    return rows


def resolvent(tol: float = 1e-6) -> list[CheckRow]:
    rows = []
    g = build_grid("geometric", 4000, 1e-4, 1200.0)
    f = _bump(g.nodes)
    inside = g.nodes <= 600.0
    for beta in (0.01, 0.1, 1.0):
        G = r0_green(beta, f, g)
        Hk = r0_hankel(beta, f, g)
        err = float(np.max(np.abs(G - Hk)[inside]) / np.max(np.abs(G)))
        rows.append(_row(f"Green vs Hankel, beta={beta:g}", err, 0.0, err, tol))
    b, c = 0.1, 0.2
    lhs = r0_green(c, f, g) - r0_green(b, f, g)
    rhs = (b * b - c * c) * r0_green(b, r0_green(c, f, g), g)
    err = float(np.max(np.abs(lhs - rhs)))
    rows.append(_row("resolvent identity", err, 0.0, err, 1e-8))

    def Wh(r):
        bb = bubble(r)
        return bb.W * bb.h

    betas = (1e-1, 1e-2, 1e-3, 1e-4)
    for beta in betas:
        val = inner_r0_h(Wh, beta)
        ref = 4.0 * math.log(1.0 / beta)
        rows.append(_row(f"<Wh, R0 h> - 4 log(1/beta), beta={beta:g}", val, ref, abs(val - ref), 3.0))
    slope, _ = log_coefficient(Wh, betas)
    rows.append(_row("log coefficient of <Wh, R0 h>", slope, 4.0, abs(slope / 4.0 - 1.0), 0.05))
    return rows


def sweep_records(k_list=SWEEP_K, alpha: float = 0.0, opts: SolveOptions | None = None):
    reports = continuation(k_list, alpha, opts)
    recs = [perturbation_record(rep.profile, rep.params, rep.energies.total) for rep in reports]
    return reports, recs


def asymptotics(tol: float = 5.0) -> list[CheckRow]:
    rows = []
    reports, recs = sweep_records()
    conv = all(rep.converged for rep in reports)
    rows.append(_row("sweep converged", float(conv), 1.0, 0.0 if conv else 1.0, 0.0))
    rel = relation_check(recs)
    rows.append(_row("max |k/beta - 2 log(1/beta)|", rel["max_abs_gap"], 0.0, rel["max_abs_gap"], tol))
    rows.append(_row("relation gap trend slope", rel["slope_vs_log"], 0.0,
                     abs(rel["slope_vs_log"]), 0.5))
    xb = [rec.norm_X / rec.beta for rec in recs]
    rows.append(_row("||xi||_X / beta band (max/min)", band_ratio(xb), 1.0, band_ratio(xb), 3.0))
    rows.append(_row("||xi||_X / beta no growth", max(xb), xb[0], 0.0, 0.0, no_growth(xb)))
    xi = [rec.norm_Xinf / (rec.beta**2 * math.log(1.0 / rec.beta) ** 2) for rec in recs]
    rows.append(_row("||xi||_Xinf / (beta log(1/beta))^2 bounded", max(xi), xi[0], 0.0, 0.0,
                     no_growth(xi)))
    xr = [rec.xi_over_r_sup / rec.beta for rec in recs]
    rows.append(_row("sup|xi/r| / beta bounded", max(xr), xr[0], 0.0, 0.0, no_growth(xr)))
    en = energy_deficit_check(recs)
    ratios = [row["ratio"] for row in en["rows"]]
    worst = max(abs(q - 1.0) for q in ratios)
    rows.append(_row("energy ratio in [0.5, 1.5]", min(ratios), 1.0, worst, 0.5, en["all_in_band"]))
    rows.append(_row("|energy ratio - 1| non-increasing", ratios[-1], 1.0, abs(ratios[-1] - 1.0), 0.0,
                     en["deviation_nonincreasing"]))
    rep = solve_newton(ModelParams(0.05, 1.0, invert_relation(0.05)))
    mono, viol = monotonicity_check(rep.profile)
    rows.append(_row("alpha=1, k=0.05 profile monotone", viol, 0.0, viol, 1e-8, mono and rep.converged))
    return rows


SUITES = {
    "integrals": integrals,
    "operators": operators,
    "resolvent": resolvent,
    "asymptotics": asymptotics,
}


def run_suite(name: str, tol: float | None = None) -> list[CheckRow]:
    fn = SUITES[name]
    return fn() if tol is None else fn(tol)
