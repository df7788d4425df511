import math

import numpy as np
import pytest

from chiral_skyrmion.analysis import invert_relation
from chiral_skyrmion.errors import ConvergenceError, ParameterError, StagnationError
from chiral_skyrmion.model import ModelParams, bubble_profile, cutoff_bubble, skyrmion_number
from chiral_skyrmion.numerics import Profile, build_grid
from chiral_skyrmion.solver import (
    SolveOptions,
    continuation,
    default_grid,
    discrete_energy,
    el_jacobian,
    el_residual,
    gradient_flow,
    residual_sup,
    solve_newton,
)

CASES = [(k, a) for k in (0.3, 0.2, 0.1, 0.05, 0.02) for a in (0.0, 1.0, -1.0)]


@pytest.mark.parametrize("k,alpha", CASES)
def test_newton_converges(k, alpha):
    rep = solve_newton(ModelParams(k, alpha, invert_relation(k)))
    assert rep.converged, rep.message
    assert rep.residual_sup <= 1e-9
    assert rep.iterations <= 20
    e = rep.energies
    assert abs(e.pohozaev) <= 1e-6 * max(abs(rep.params.beta * k * e.dm), 1e-300)
    assert e.charge == pytest.approx(1.0, abs=1e-6)
    assert e.total < 2.0


def test_unperturbed_bubble():
    opts = SolveOptions(n=2000, r_min=1e-6)
    rep = solve_newton(ModelParams(0.0, 0.0, 0.0), opts=opts)
    assert rep.converged
    assert rep.iterations <= 2
    Q = bubble_profile(rep.profile.grid).values
    assert np.max(np.abs(rep.profile.values - Q)) < 1e-5


def test_large_k_does_not_raise():
    rep = solve_newton(ModelParams(0.99, 0.0, 0.05))
    assert isinstance(rep.converged, bool)
    assert np.all(np.isfinite(rep.profile.values))


def test_nonconvergence_reported():
    rep = solve_newton(ModelParams(0.1, 0.0, 0.05), opts=SolveOptions(max_iters=1, pin_scale=False))
    assert not rep.converged
    assert rep.message


def test_boundary_values(solved_k01):
    u = solved_k01.profile.values
    assert abs(u[0] - math.pi) <= 1e-5
    assert u[-1] == 0.0


def test_summary_keys(solved_k01):
    assert set(solved_k01.summary()) == {"converged", "iterations", "residual_sup", "condition_estimate", "message"}


def test_residual_functions(solved_k01):
    p = solved_k01.params
    u = solved_k01.profile
    assert residual_sup(u, p) <= 1e-9
    R = el_residual(u, p)
    assert R.shape == u.values.shape
    J = el_jacobian(u, p)
    assert J.n == u.grid.n


def test_jacobian_fd(solved_k01, rng):
    p = solved_k01.params
    u = solved_k01.profile
    g = u.grid
    d = np.zeros(g.n)
    d[1:-1] = rng.standard_normal(g.n - 2) * np.exp(-g.nodes[1:-1] / 10)
    eps = 1e-6
    up = Profile(g, u.values + eps * d, u.left_limit)
    um = Profile(g, u.values - eps * d, u.left_limit)
    fd = (el_residual(up, p, "dirichlet") - el_residual(um, p, "dirichlet")) / (2 * eps)
    Jd = el_jacobian(u, p) @ d
    r2 = g.nodes**2
    inner = slice(1, -1)
    assert np.max(np.abs(r2 * (fd - Jd))[inner]) < 1e-6 * np.max(np.abs(r2 * Jd)[inner])


def test_default_grid():
    g = default_grid(0.01)
    assert g.r_max == pytest.approx(2000.0)
    assert default_grid(0.0).r_max == pytest.approx(1e6)
    with pytest.raises(ParameterError):
        SolveOptions(inner_bc="neumann")
    with pytest.raises(ParameterError):
        SolveOptions(armijo=0.7)


def test_grid_refinement_energy():
    k = 0.1
    p = ModelParams(k, 0.0, invert_relation(k))
    e = [solve_newton(p, opts=SolveOptions(n=n)).energies.total for n in (1000, 2000, 4000)]
    assert abs(e[1] - e[2]) < abs(e[0] - e[1]) or abs(e[1] - e[2]) < 1e-9


class TestContinuation:
    def test_sweep_reports(self, sweep):
        for alpha, (reports, _) in sweep.items():
            assert [r.params.k for r in reports] == [0.3, 0.2, 0.1, 0.05, 0.02]
            assert all(r.converged for r in reports)

    def test_matches_cold_start(self, sweep):
        rep = sweep[0.0][0][2]
        cold = solve_newton(rep.params)
        assert cold.energies.total == pytest.approx(rep.energies.total, abs=1e-9)

    def test_validation(self):
        with pytest.raises(ParameterError):
            continuation([0.1, 0.2, 0.15])
        with pytest.raises(ParameterError):
            continuation([1.5])
        assert continuation([]) == []

    def test_first_failure_raises(self):
        with pytest.raises(ConvergenceError) as ei:
            continuation([0.1], opts=SolveOptions(max_iters=1, pin_scale=False))
        assert ei.value.partial


class TestGradientFlow:
    def test_monotone_and_below_two(self):
        k = 0.3
        p = ModelParams(k, 0.0, invert_relation(k))
        g = default_grid(p.beta, SolveOptions(n=800))
        u = gradient_flow(bubble_profile(g), p, steps=200)
        E = np.array(u.meta["energies"])
        assert np.all(np.diff(E) <= 1e-12)
        assert E[-1] < 2.0
        assert skyrmion_number(u) == pytest.approx(1.0, abs=1e-6)

    def test_from_cutoff_bubble(self):
        k = 0.3
        p = ModelParams(k, 0.0, invert_relation(k))
        g = default_grid(p.beta, SolveOptions(n=800))
        u = gradient_flow(cutoff_bubble(20.0, 1.0, g), p, steps=100)
        E = np.array(u.meta["energies"])
        assert np.all(np.diff(E) <= 1e-12)

    def test_solved_profile_is_stationary(self, solved_k01):
        u = gradient_flow(solved_k01.profile, solved_k01.params, steps=20)
        assert u.meta["accepted_steps"] == 0

    def test_flow_then_newton_agrees(self):
        k = 0.3
        p = ModelParams(k, 0.0, invert_relation(k))
        g = default_grid(p.beta)
        direct = solve_newton(p)
        flowed = gradient_flow(cutoff_bubble(10.0, 1.5, g), p, steps=50)
        rep = solve_newton(p, flowed)
        assert rep.converged
        assert rep.energies.total == pytest.approx(direct.energies.total, abs=1e-8)

    def test_discrete_energy_gradient(self, solved_k01, rng):
        p = solved_k01.params
        g = build_grid("geometric", 200, 1e-3, 300.0)
        U = bubble_profile(g).values
        d = np.zeros(g.n)
        d[1:-1] = rng.standard_normal(g.n - 2)
        eps = 1e-6
        fd = (discrete_energy(U + eps * d, g, p) - discrete_energy(U - eps * d, g, p)) / (2 * eps)
        R = el_residual(Profile(g, U), p, "dirichlet")
        w = g.nodes * g.jac * g.ds
        assert fd == pytest.approx(float(np.sum((w * R * d)[1:-1])), rel=1e-6)

    def test_stagnation(self, monkeypatch):
        import chiral_skyrmion.solver as s

        p = ModelParams(0.3, 0.0, invert_relation(0.3))
        g = default_grid(p.beta, SolveOptions(n=400))
        calls = iter(range(10**6))
        # the initial energy is 0 and every trial step raises it, so tau collapses
        monkeypatch.setattr(s, "discrete_energy", lambda U, grid, params: float(next(calls) > 0))
        with pytest.raises(StagnationError):
            gradient_flow(bubble_profile(g), p, steps=5)
