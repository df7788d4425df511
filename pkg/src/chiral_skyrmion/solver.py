"""Newton continuation and preconditioned gradient flow for the radial
Euler-Lagrange equation

    -Delta_r u + sin(2u)/(2r^2) - k beta sin^2(u)/r + beta^2 f(u) = 0,
    f(u) = (1 - alpha (1 - cos u)) sin u.

Residual norms are measured after multiplying by r^2.  On a geometric
grid that is the natural log-variable form of the equation, and it keeps
the 1/r^2 blow-up of the operator near r_min from swamping the norm.

Inner boundary: ``"dirichlet"`` fixes u(r_min) = left_limit; ``"regular"``
imposes the linear approach u ~ left_limit + c r by eliminating u_0 as
left_limit + (u_1 - left_limit) r_0/r_1.  The outer node is pinned to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError, LinearSolveError, ParameterError, StagnationError
from .model import EnergyBreakdown, ModelParams, bubble_profile, energy_breakdown, rescale, resample
from .numerics import Profile, RadialGrid, build_grid
from .operators import Tridiagonal, radial_operator

__all__ = [
    "SolveOptions",
    "SolveReport",
    "default_grid",
    "el_residual",
    "el_jacobian",
    "residual_sup",
    "solve_newton",
    "continuation",
    "gradient_flow",
    "discrete_energy",
]

INNER_BCS = ("auto", "regular", "dirichlet")


@dataclass(frozen=True)
class SolveOptions:
    """Solver knobs.  ``newton_tol`` bounds the r^2-scaled residual."""

    newton_tol: float = 1e-9
    max_iters: int = 60
    armijo: float = 1e-4
    min_step: float = 1e-10
    step_cap: float = 0.5
    continuation_steps: tuple = ()
    n: int = 2000
    r_min: float = 1e-6
    r_max: float | None = None
    inner_bc: str = "auto"
    pin_scale: bool = True
    flow_steps: int = 500
    flow_tol: float = 1e-8

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ParameterError("newton_tol must be positive")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ParameterError("max_iters must be a positive integer")
        if not 0 < self.armijo < 0.5:
            raise ParameterError("armijo parameter must lie in (0, 1/2)")
        if self.inner_bc not in INNER_BCS:
            raise ParameterError(f"inner_bc must be one of {INNER_BCS}")
        if self.r_max is not None and not self.r_max > self.r_min:
            raise ParameterError("r_max must exceed r_min")
        if self.flow_steps < 0:
            raise ParameterError("flow_steps must be nonnegative")


@dataclass
class SolveReport:
    profile: Profile
    params: ModelParams
    residual_sup: float
    iterations: int
    energies: EnergyBreakdown
    converged: bool
    condition_estimate: float
    message: str = ""
    history: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_sup": self.residual_sup,
            "condition_estimate": self.condition_estimate,
            "message": self.message,
        }


def default_grid(beta: float, opts: SolveOptions | None = None) -> RadialGrid:
    """Geometric grid reaching r_max >= 20/beta (symmetric in log r if beta = 0)."""
    opts = opts or SolveOptions()
    if opts.r_max is not None:
        r_max = opts.r_max
    elif beta > 0:
        r_max = max(50.0, 20.0 / beta)
    else:
        r_max = 1.0 / opts.r_min
    return build_grid("geometric", opts.n, opts.r_min, r_max)


def _resolve_bc(inner_bc: str, params: ModelParams) -> str:
    if inner_bc == "auto":
        return "regular" if params.beta > 0 else "dirichlet"
    return inner_bc


def _f(u, alpha):
    return (1.0 - alpha * (1.0 - np.cos(u))) * np.sin(u)


def _fprime(u, alpha):
    c = np.cos(u)
    return c - alpha * (c - np.cos(2.0 * u))


class _System:
    """Scaled residual and Jacobian in the interior unknowns x = u[1:-1]."""

    def __init__(self, grid: RadialGrid, params: ModelParams, left: float, bc: str):
        self.grid = grid
        self.k = params.k
        self.alpha = params.alpha
        self.left = left
        r = grid.nodes
        self.r = r[1:-1]
        self.r2 = self.r * self.r
        A = radial_operator(grid)
        self.lo = A.lower[1:-1] * self.r2
        self.di = A.diag[1:-1] * self.r2
        self.up = A.upper[1:-1] * self.r2
        self.rho = r[0] / r[1] if bc == "regular" else 0.0
        self.bc = bc
        self.n = grid.n

    def full(self, x, u0=None):
        U = np.empty(self.n)
        U[1:-1] = x
        U[0] = self.left + (x[0] - self.left) * self.rho if u0 is None else u0
        U[-1] = 0.0
        return U

    def residual(self, x, beta, u0=None):
        U = self.full(x, u0)
        lap = self.lo * U[:-2] + self.di * x + self.up * U[2:]
        s = np.sin(x)
        return (lap + 0.5 * np.sin(2.0 * x) - self.k * beta * self.r * s * s
                + beta * beta * self.r2 * _f(x, self.alpha))

    def jacobian(self, x, beta) -> Tridiagonal:
        diag = (self.di + np.cos(2.0 * x) - self.k * beta * self.r * np.sin(2.0 * x)
                + beta * beta * self.r2 * _fprime(x, self.alpha))
        diag[0] += self.lo[0] * self.rho
        lower = self.lo.copy()
        upper = self.up.copy()
        lower[0] = 0.0
        upper[-1] = 0.0
        return Tridiagonal(lower, diag, upper)

    def dbeta(self, x, beta):
        s = np.sin(x)
        return -self.k * self.r * s * s + 2.0 * beta * self.r2 * _f(x, self.alpha)


def el_residual(u: Profile, params: ModelParams, inner_bc: str = "auto") -> np.ndarray:
    """Unscaled Euler-Lagrange residual at every node.

    Interior entries are the left side of the equation; the first and last
    entries hold the boundary-condition defects.
    """
    bc = _resolve_bc(inner_bc, params)
    g = u.grid
    r = g.nodes
    U = u.values
    A = radial_operator(g)
    s = np.sin(U)
    out = A.matvec(U) + 0.5 * np.sin(2.0 * U) / (r * r) - params.k * params.beta * s * s / r \
        + params.beta**2 * _f(U, params.alpha)
    rho = r[0] / r[1] if bc == "regular" else 0.0
    out[0] = U[0] - u.left_limit - (U[1] - u.left_limit) * rho
    out[-1] = U[-1]
    return out


def el_jacobian(u: Profile, params: ModelParams) -> Tridiagonal:
    """Tridiagonal Frechet derivative of :func:`el_residual` (Dirichlet end rows)."""
    r = u.grid.nodes
    U = u.values
    pot = np.cos(2.0 * U) / (r * r) - params.k * params.beta * np.sin(2.0 * U) / r \
        + params.beta**2 * _fprime(U, params.alpha)
    return radial_operator(u.grid, pot)


def residual_sup(u: Profile, params: ModelParams, inner_bc: str = "auto") -> float:
    """sup over interior nodes of |r^2 EL(u)|."""
    bc = _resolve_bc(inner_bc, params)
    sysm = _System(u.grid, params, u.left_limit, bc)
    x = u.values[1:-1]
    R = sysm.residual(x, params.beta, u0=u.values[0])
    return float(np.max(np.abs(R))) if R.size else 0.0


def _line_search(phi0, trial, slope_scale, opts: SolveOptions, cap: float):
    """Armijo backtracking on the merit ``phi``; returns (step, state) or None."""
    lam = cap
    while lam >= opts.min_step:
        out = trial(lam)
        if out is not None and out[0] <= (1.0 - opts.armijo * lam) * phi0:
            return lam, out
        lam *= 0.5
    return None


def _newton(sysm: _System, x, beta, opts: SolveOptions, max_iters: int, history: list):
    """Damped Newton at fixed beta.  Returns (x, iterations, residual, cond, ok)."""
    cond = float("nan")
    for it in range(max_iters + 1):
        R = sysm.residual(x, beta)
        res = float(np.max(np.abs(R)))
        history.append(("newton", res))
        if res <= opts.newton_tol:
            return x, it, res, cond, True, ""
        if it == max_iters:
            break
        try:
            dx, pmin, pmax = sysm.jacobian(x, beta).solve(-R, return_pivots=True)
        except LinearSolveError as exc:
            return x, it, res, cond, False, f"singular Jacobian: {exc}"
        cond = pmax / pmin if pmin > 0 else float("inf")
        phi0 = float(R @ R)

        def trial(lam):
            xn = x + lam * dx
            Rn = sysm.residual(xn, beta)
            return float(Rn @ Rn), xn

        cap = min(1.0, opts.step_cap / max(float(np.max(np.abs(dx))), 1e-300))
        step = _line_search(phi0, trial, 1.0, opts, cap)
        if step is None:
            return x, it, res, cond, False, "line search failed"
        x = step[1][1]
    return x, max_iters, res, cond, False, "iteration limit reached"


def _pinned_newton(sysm: _System, x, beta, opts: SolveOptions, history: list):
    """Newton on (u, beta) with u fixed at one node.

    Scale invariance makes the fixed-beta problem stiff along the dilation
    direction; pinning the core radius removes it.  Returns the solution at
    the beta it lands on.
    """
    p = int(np.argmin(np.abs(x - 0.5 * (sysm.left + 0.0))))
    target = x[p]
    cond = float("nan")
    for it in range(opts.max_iters + 1):
        R = sysm.residual(x, beta)
        g = x[p] - target
        res = float(max(np.max(np.abs(R)), abs(g)))
        history.append(("pinned", res))
        if res <= 0.1 * opts.newton_tol:
            return x, beta, it, cond, True
        if it == opts.max_iters:
            break
        try:
            J = sysm.jacobian(x, beta)
            a, pmin, pmax = J.solve(-R, return_pivots=True)
            b = J.solve(sysm.dbeta(x, beta))
        except LinearSolveError:
            return x, beta, it, cond, False
        cond = pmax / pmin if pmin > 0 else float("inf")
        if b[p] == 0.0:
            return x, beta, it, cond, False
        db = (a[p] + g) / b[p]
        dx = a - db * b
        phi0 = float(R @ R) + g * g

        def trial(lam):
            bn = beta + lam * db
            if not bn > 0:
                return None
            xn = x + lam * dx
            Rn = sysm.residual(xn, bn)
            return float(Rn @ Rn) + (xn[p] - target) ** 2, (xn, bn)

        cap = min(1.0, opts.step_cap / max(float(np.max(np.abs(dx))), 1e-300))
        step = _line_search(phi0, trial, 1.0, opts, cap)
        if step is None:
            return x, beta, it, cond, False
        x, beta = step[1][1]
    return x, beta, opts.max_iters, cond, False


def solve_newton(params: ModelParams, init: Profile | None = None,
                 opts: SolveOptions | None = None) -> SolveReport:
    """Solve the Euler-Lagrange equation starting from ``init`` (default Q).

    For k, beta > 0 a scale-pinned Newton solve is followed by an exact
    rescaling to the requested beta and a fixed-beta polish.  Failure is
    reported through ``converged=False``; no exception escapes for a
    non-convergent iteration.
    """
    opts = opts or SolveOptions()
    if init is None:
        init = bubble_profile(default_grid(params.beta, opts))
    bc = _resolve_bc(opts.inner_bc, params)
    grid = init.grid
    sysm = _System(grid, params, init.left_limit, bc)
    history: list = []
    x0 = init.values[1:-1].copy()
    iters = 0
    message = ""
    x = x0
    if opts.pin_scale and params.k != 0 and params.beta > 0:
        xw, bstar, it, _, ok = _pinned_newton(sysm, x0, params.beta, opts, history)
        iters += it
        if ok:
            w = Profile(grid, sysm.full(xw), init.left_limit)
            x = rescale(w, params.beta / bstar).values[1:-1]
        else:
            message = "scale-pinned stage failed; continuing at fixed beta. "
    x, it, res, cond, ok, msg = _newton(sysm, x, params.beta, opts,
                                         max(opts.max_iters - iters, 1), history)
    iters += it
    message += msg
    profile = Profile(grid, sysm.full(x), init.left_limit,
                      meta={"inner_bc": bc, "beta": params.beta})
    return SolveReport(
        profile=profile,
        params=params,
        residual_sup=res,
        iterations=iters,
        energies=energy_breakdown(profile, params),
        converged=ok,
        condition_estimate=cond,
        message=message.strip(),
        history=history,
    )


def continuation(k_list, alpha: float = 0.0, opts: SolveOptions | None = None,
                 beta_of_k=None) -> list[SolveReport]:
    """Solve along ``k_list``, warm-starting each point from the last.

    ``beta_of_k`` defaults to the inverted asymptotic k-beta relation.
    A failure at the first point raises :class:`ConvergenceError`; later
    failures are kept in the list with ``converged=False``.
    """
    opts = opts or SolveOptions()
    k_list = [float(k) for k in k_list]
    if not k_list:
        return []
    if any(not 0 < k < 1 for k in k_list):
        raise ParameterError("continuation needs every k in (0, 1)")
    diffs = np.diff(k_list)
    if diffs.size and not (np.all(diffs < 0) or np.all(diffs > 0)):
        raise ParameterError("k_list must be strictly monotone")
    if beta_of_k is None:
        from .analysis import invert_relation

        beta_of_k = invert_relation
    reports: list[SolveReport] = []
    prev: Profile | None = None
    for i, k in enumerate(k_list):
        params = ModelParams(k, alpha, beta_of_k(k))
        grid = default_grid(params.beta, opts)
        init = bubble_profile(grid) if prev is None else resample(prev, grid)
        rep = solve_newton(params, init, opts)
        if not rep.converged and prev is not None:
            retry = solve_newton(params, bubble_profile(grid), opts)
            if retry.converged:
                rep = retry
        if not rep.converged:
            if i == 0:
                raise ConvergenceError(f"first continuation point k={k} failed: {rep.message}",
                                       partial=[rep])
            rep.message = (rep.message + " (continuation point failed)").strip()
        reports.append(rep)
        if rep.converged:
            prev = rep.profile
    return reports


def _S(u):
    return 0.5 * u - 0.25 * np.sin(2.0 * u)


def _A(u, alpha):
    c = 1.0 - np.cos(u)
    return c - 0.5 * alpha * c * c


def discrete_energy(U, grid: RadialGrid, params: ModelParams) -> float:
    """Energy whose gradient is (quadrature weight) x (EL residual) at interior nodes."""
    r = grid.nodes
    w = r * grid.jac * grid.ds
    sh = 0.5 * (grid.s[1:] + grid.s[:-1])
    rh, jh = grid.map(sh)
    c = rh / jh
    dU = np.diff(U)
    grad = 0.5 * float(np.sum(c * dU * dU)) / grid.ds
    s = np.sin(U)
    b = params.beta
    local = 0.5 * s * s / (r * r) - params.k * b * _S(U) / r + b * b * _A(U, params.alpha)
    bdry = params.k * b * (_S(U[-1]) * r[-1] - _S(U[0]) * r[0])
    return grad + float(np.sum(w[1:-1] * local[1:-1])) + bdry


def gradient_flow(u0: Profile, params: ModelParams, opts: SolveOptions | None = None,
                  steps: int | None = None) -> Profile:
    """Energy descent with an H^1-type preconditioner.

    Each step moves along -P^{-1} grad E where P is the stiffness matrix
    plus the 1/r^2 mass matrix, so the step is resolution independent.
    The step length is chosen by Armijo backtracking on the discrete
    energy, doubled after each accepted step and halved on rejection.
    Boundary values of ``u0`` are held fixed.  The returned profile
    carries the energy history in ``meta``.
    """
    opts = opts or SolveOptions()
    steps = opts.flow_steps if steps is None else steps
    grid = u0.grid
    r = grid.nodes
    w = (r * grid.jac * grid.ds)[1:-1]
    sysm = _System(grid, params, u0.left_limit, "dirichlet")
    u_left = u0.values[0]
    K = radial_operator(grid).interior()
    P = Tridiagonal(K.lower * w, (K.diag + 1.0 / r[1:-1] ** 2) * w, K.upper * w)
    x = u0.values[1:-1].copy()

    def energy(xx):
        return discrete_energy(sysm.full(xx, u_left), grid, params)

    E = energy(x)
    energies = [E]
    tau = 1.0
    accepted = 0
    for _ in range(steps):
        R = sysm.residual(x, params.beta, u0=u_left)
        if float(np.max(np.abs(R))) <= opts.flow_tol:
            break
        grad = w * R / sysm.r2
        d = -P.solve(grad)
        slope = float(grad @ d)
        if slope >= 0:
            break
        while True:
            xn = x + tau * d
            En = energy(xn)
            if En <= E + opts.armijo * tau * slope:
                break
            tau *= 0.5
            if tau < 1e-14:
                raise StagnationError(
                    "gradient-flow step collapsed",
                    partial=Profile(grid, sysm.full(x, u_left), u0.left_limit,
                                    meta={"energies": energies}),
                )
        x, E = xn, En
        energies.append(E)
        accepted += 1
        tau = min(2.0 * tau, 4.0)
    return Profile(grid, sysm.full(x, u_left), u0.left_limit,
                   meta={"energies": energies, "accepted_steps": accepted})
