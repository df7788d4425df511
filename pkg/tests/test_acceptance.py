"""Acceptance criteria 1-12.  Each test records one PASS/FAIL line, shown
in the terminal summary and printed with ``-s``."""

import math
import time

import numpy as np
import pytest

import conftest
from chiral_skyrmion.analysis import (
    band_ratio,
    energy_deficit_check,
    invert_relation,
    monotonicity_check,
    no_growth,
    relation_check,
)
from chiral_skyrmion.checks import integrals, observed_order, operators, resolvent
from chiral_skyrmion.model import (
    ModelParams,
    bubble_profile,
    cutoff_bubble,
    energy_breakdown,
    piecewise_linear_test,
    skyrmion_number,
)
from chiral_skyrmion.numerics import build_grid
from chiral_skyrmion.operators import bubble
from chiral_skyrmion.resolvent import inner_r0_h, log_coefficient
from chiral_skyrmion.solver import default_grid, gradient_flow, solve_newton

from conftest import log_inv

SWEEP = (0.3, 0.2, 0.1, 0.05, 0.02)


def verdict(n, ok, detail):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    conftest.ACCEPTANCE[n] = line
    print(line)
    assert ok, line


def test_01_integral_oracle():
    t0 = time.perf_counter()
    rows = integrals()
    dt = time.perf_counter() - t0
    worst = max(r.error for r in rows)
    verdict(1, len(rows) == 8 and all(r.passed for r in rows) and dt < 1.0,
            f"8 integrals, max rel err {worst:.2e}, {dt * 1e3:.0f} ms")


def test_02_bubble_energies():
    p = ModelParams(0.0, 0.0, 1.0)
    errs, dm = [], None
    for r_max in (1e2, 1e3, 1e4):
        Q = bubble_profile(build_grid("geometric", 4000, 1e-6, r_max))
        e = energy_breakdown(Q, p)
        errs.append(abs(e.exchange - 2.0))
        if r_max == 1e3:
            ex3, dm, N = e.exchange, e.dm, skyrmion_number(Q)
    order = observed_order(errs, 10.0)
    ok = abs(ex3 - 2) < 1e-4 and abs(dm + 2) < 1e-4 and abs(N - 1) < 1e-9 and order >= 1.9
    verdict(2, ok, f"E_e-2={ex3 - 2:.1e} E_DM+2={dm + 2:.1e} N-1={N - 1:.1e} order={order:.2f}")


def test_03_solver_correctness():
    worst_res = worst_poho = worst_time = 0.0
    in_band = True
    for k in SWEEP:
        for alpha in (-1.0, 0.0, 1.0):
            t0 = time.perf_counter()
            rep = solve_newton(ModelParams(k, alpha, invert_relation(k)))
            worst_time = max(worst_time, time.perf_counter() - t0)
            e = rep.energies
            if not rep.converged:
                worst_res = math.inf
            worst_res = max(worst_res, rep.residual_sup)
            scale = abs(rep.params.beta * k * e.dm)
            worst_poho = max(worst_poho, abs(e.pohozaev) / scale)
            in_band &= 2 * (1 - k * k) <= e.total < 2
    ok = worst_res < 1e-9 and worst_poho < 1e-4 and in_band and worst_time < 10
    verdict(3, ok, f"15 solves, residual {worst_res:.1e}, Pohozaev {worst_poho:.1e}, "
                   f"energy band {'ok' if in_band else 'violated'}, slowest {worst_time * 1e3:.0f} ms")


def test_04_relation(sweep):
    rel = relation_check(sweep[0.0][1])
    ok = rel["max_abs_gap"] <= 5 and abs(rel["slope_vs_log"]) <= 0.5
    verdict(4, ok, f"max gap {rel['max_abs_gap']:.3f}, slope vs log(1/beta) {rel['slope_vs_log']:.3f}")


def test_05_perturbation_norms(sweep):
    recs = sweep[0.0][1]
    xb = [r.norm_X / r.beta for r in recs]
    xi = [r.norm_Xinf / (r.beta * log_inv(r.beta)) ** 2 for r in recs]
    xr = [r.xi_over_r_sup / r.beta for r in recs]
    ok = band_ratio(xb) <= 3 and no_growth(xb) and no_growth(xi) and no_growth(xr)
    verdict(5, ok, f"X/beta band {band_ratio(xb):.3f}, Xinf ratio max/first {max(xi) / xi[0]:.2f}, "
                   f"xi/r ratio max/first {max(xr) / xr[0]:.2f}")


def test_06_energy_asymptotics(sweep):
    chk = energy_deficit_check(sweep[0.0][1])
    ratios = [row["ratio"] for row in chk["rows"]]
    ok = chk["all_in_band"] and chk["deviation_nonincreasing"]
    verdict(6, ok, "ratios " + ", ".join(f"{q:.3f}" for q in ratios)
            + f"; in [0.5,1.5]: {chk['all_in_band']}; |ratio-1| non-increasing: {chk['deviation_nonincreasing']}")


def test_07_resolvent_cross_validation():
    rows = resolvent()
    green = [r for r in rows if r.name.startswith("Green vs Hankel")]
    ident = next(r for r in rows if r.name == "resolvent identity")
    ok = len(green) == 3 and all(r.error < 1e-6 for r in green) and ident.error < 1e-8
    verdict(7, ok, f"Green vs Hankel max {max(r.error for r in green):.1e}, identity {ident.error:.1e}")


def Wh(r):
    b = bubble(r)
    return b.W * b.h


def test_08_threshold_asymptotics():
    betas = (1e-1, 1e-2, 1e-3, 1e-4)
    gaps = [abs(inner_r0_h(Wh, b) - 4 * log_inv(b)) for b in betas]
    slope, _ = log_coefficient(Wh, betas)
    ok = max(gaps) <= 3 and abs(slope / 4 - 1) <= 0.05
    verdict(8, ok, f"max |<Wh,R0 h> - 4 log(1/beta)| {max(gaps):.3f}, slope {slope:.4f}")


def test_09_operator_identities():
    rows = operators()
    ok = all(r.passed for r in rows)
    verdict(9, ok, "; ".join(f"{r.name}: {r.value:.3g}" for r in rows))


def test_10_monotonicity():
    rep = solve_newton(ModelParams(0.05, 1.0, invert_relation(0.05)))
    mono, worst = monotonicity_check(rep.profile)
    viol = int(np.sum(np.diff(rep.profile.values) > 1e-8))
    verdict(10, rep.converged and mono and viol == 0, f"violations above 1e-8: {viol}, max increase {worst:.1e}")


def test_11_unboundedness():
    k = 5.0
    ratios, energies = [], []
    for t, M in ((10, 101), (20, 401), (40, 1601)):
        r2 = (M - 1) * math.pi / t + M * math.pi
        g = build_grid("uniform", int(r2 / (math.pi / (10 * t))) + 10, 1e-4, 1.05 * r2)
        E = energy_breakdown(piecewise_linear_test(1, M, t, g), ModelParams(k, 0.0, 1.0)).total
        energies.append(E)
        ratios.append(E / (M * M * math.pi**2 / 4))
    ok = (all(E < 0 for E in energies) and energies[0] > energies[1] > energies[2]
          and abs(ratios[-1] / (4 - k) - 1) <= 0.15)
    verdict(11, ok, "E/(M^2 pi^2/4) = " + ", ".join(f"{q:.4f}" for q in ratios) + f" (target {4 - k:g})")


def test_12_empirical_uniqueness():
    worst = 0.0
    for k in SWEEP:
        p = ModelParams(k, 0.0, invert_relation(k))
        g = default_grid(p.beta)
        a = solve_newton(p)
        flowed = gradient_flow(cutoff_bubble(10.0, 1.5, g), p, steps=50)
        b = solve_newton(p, flowed)
        diff = np.max(np.abs(a.profile.values - b.profile.values)) if a.converged and b.converged else math.inf
        worst = max(worst, diff)
    verdict(12, worst <= 1e-6, f"max sup difference over {len(SWEEP)} points {worst:.1e}")
