"""Radial grids, quadrature, finite differences, weighted norms and Bessel
functions.

All grids are images of a uniform parameter grid ``s_i = s_0 + i*ds``
under a smooth increasing map ``r = c * m(s)``.  Quadrature is the
trapezoid rule in ``s`` for the measure ``r dr = r * r'(s) ds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import DomainError, ParameterError

__all__ = [
    "RadialGrid",
    "Profile",
    "build_grid",
    "quad",
    "differentiate",
    "cumulative_integral",
    "norm_weighted",
    "bessel",
    "j1_zeros",
    "exact_integral",
    "EXACT_INTEGRALS",
    "integrand",
]

MAPPINGS = ("geometric", "uniform", "loglinear")


def _softplus(s):
    s = np.asarray(s, dtype=float)
    return np.maximum(s, 0.0) + np.log1p(np.exp(-np.abs(s)))


def _expit(s):
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _base_map(kind: str, s):
    s = np.asarray(s, dtype=float)
    if kind == "geometric":
        r = np.exp(s)
        return r, r
    if kind == "uniform":
        return s.copy(), np.ones_like(s)
    if kind == "loglinear":
        return _softplus(s), _expit(s)
    raise ParameterError(f"unknown grid mapping {kind!r}")


def _base_inverse(kind: str, y: float) -> float:
    if kind == "geometric":
        return math.log(y)
    if kind == "uniform":
        return y
    # inverse softplus, stable for large y
    return y + math.log(-math.expm1(-y))


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Truncated discretization of (0, inf) with weights for ``int f r dr``.

    ``s`` holds the uniform parameter nodes, ``jac`` the derivative
    ``dr/ds`` at the nodes and ``scale`` the factor ``c`` of the map.
    ``rule`` is ``"trapezoid"`` for primal grids and ``"midpoint"`` for the
    staggered grids returned by :meth:`dual`.
    """

    nodes: np.ndarray
    quad_weights: np.ndarray
    mapping: str
    s: np.ndarray
    ds: float
    jac: np.ndarray
    scale: float = 1.0
    rule: str = "trapezoid"

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def n(self) -> int:
        return int(self.nodes.shape[0])

    def __len__(self) -> int:
        return self.n

    def map(self, s):
        """Return ``(r, dr/ds)`` at parameter values ``s``."""
        m, dm = _base_map(self.mapping, s)
        return self.scale * m, self.scale * dm

    def spacing(self) -> np.ndarray:
        """Local node spacing ``dr`` (first-order estimate ``r'(s) ds``)."""
        return self.jac * self.ds

    def dual(self) -> "RadialGrid":
        """Staggered grid at the parameter midpoints, with midpoint weights."""
        s = 0.5 * (self.s[1:] + self.s[:-1])
        r, jac = self.map(s)
        w = r * jac * self.ds
        return RadialGrid(r, w, self.mapping, s, self.ds, jac, self.scale, "midpoint")

    def scaled(self, factor: float) -> "RadialGrid":
        """The grid with every radius multiplied by ``factor``."""
        if not factor > 0:
            raise ParameterError("scale factor must be positive")
        return RadialGrid(
            self.nodes * factor,
            self.quad_weights * factor * factor,
            self.mapping,
            self.s,
            self.ds,
            self.jac * factor,
            self.scale * factor,
            self.rule,
        )

    def index_near(self, r: float) -> int:
        return int(np.argmin(np.abs(self.nodes - r)))


def build_grid(kind: str = "geometric", n: int = 2000, r_min: float = 1e-6,
               r_max: float = 200.0, scale: float = 1.0) -> RadialGrid:
    """Build a grid of ``n`` nodes from ``r_min`` to ``r_max``.

    ``geometric`` is uniform in log r, ``uniform`` is uniform in r and
    ``loglinear`` is uniform in s for ``r = scale*softplus(s)``, so it is
    geometric in the core and uniform (spacing ``scale*ds``) in the tail.
    """
    if kind not in MAPPINGS:
        raise ParameterError(f"unknown grid mapping {kind!r}; expected one of {MAPPINGS}")
    if not isinstance(n, (int, np.integer)) or n < 4:
        raise ParameterError("grid needs n >= 4 nodes")
    if not (np.isfinite(r_min) and np.isfinite(r_max)) or not 0 < r_min < r_max:
        raise ParameterError("grid bounds must satisfy 0 < r_min < r_max")
    if not scale > 0:
        raise ParameterError("mapping scale must be positive")
    s0 = _base_inverse(kind, r_min / scale)
    s1 = _base_inverse(kind, r_max / scale)
    s = np.linspace(s0, s1, int(n))
    ds = (s1 - s0) / (n - 1)
    m, dm = _base_map(kind, s)
    r = scale * m
    jac = scale * dm
    r[0], r[-1] = r_min, r_max
    w = r * jac * ds
    w[0] *= 0.5
    w[-1] *= 0.5
    return RadialGrid(r, w, kind, s, ds, jac, float(scale), "trapezoid")


def _check_samples(f, grid: RadialGrid) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != grid.nodes.shape:
        raise ParameterError(f"sample length {f.shape} does not match grid ({grid.n},)")
    return f


def _power_tail(F0, F1, r0, r1, side: str) -> float:
    """Integral of a power law through two samples, off one end of the grid."""
    if F0 == 0.0 or F1 == 0.0 or np.sign(F0) != np.sign(F1):
        return 0.0
    expo = math.log(F1 / F0) / math.log(r1 / r0)
    if side == "left":  # F ~ r^q on (0, r0]
        return F0 * r0 / (expo + 1.0) if expo > -1.0 else 0.0
    return -F1 * r1 / (expo + 1.0) if expo < -1.0 else 0.0  # F ~ r^q on [r1, inf)


def quad(f, grid: RadialGrid, tail_correction: bool = False) -> float:
    """Approximate ``int f(r) r dr`` over the grid range.

    With ``tail_correction`` the integrand ``f r`` is extended by power
    laws fitted to the two outermost samples at each end, which removes the
    leading truncation error for algebraically decaying integrands.
    """
    f = _check_samples(f, grid)
    total = float(np.dot(grid.quad_weights, f))
    if tail_correction:
        r = grid.nodes
        F = f * r
        total += _power_tail(F[0], F[1], r[0], r[1], "left")
        total += _power_tail(F[-2], F[-1], r[-2], r[-1], "right")
    return total


def cumulative_integral(G, ds: float, correct: bool = True) -> np.ndarray:
    """Running trapezoid integral of uniformly sampled ``G`` from the first node.

    ``correct`` adds the first Euler-Maclaurin endpoint term with
    second-order difference derivatives, making the result O(ds^4).
    """
    G = np.asarray(G, dtype=float)
    out = np.zeros_like(G)
    out[1:] = np.cumsum(0.5 * ds * (G[1:] + G[:-1]))
    if correct and G.size >= 3:
        dG = np.gradient(G, ds, edge_order=2)
        out -= ds * ds / 12.0 * (dG - dG[0])
    return out


def _lagrange_derivative_weights(x: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Weights w[:, j] with f'(x0) ~ sum_j w[:, j] f(x[:, j]).

    ``x`` has shape (n, m): one m-point stencil per evaluation point.
    """
    n, m = x.shape
    w = np.zeros((n, m))
    for j in range(m):
        denom = np.ones(n)
        for k in range(m):
            if k != j:
                denom *= x[:, j] - x[:, k]
        numer = np.zeros(n)
        for l in range(m):
            if l == j:
                continue
            prod = np.ones(n)
            for k in range(m):
                if k != j and k != l:
                    prod *= x0 - x[:, k]
            numer += prod
        w[:, j] = numer / denom
    return w


def _stencil_index(n: int, width: int) -> np.ndarray:
    half = width // 2
    start = np.clip(np.arange(n) - half, 0, n - width)
    return start[:, None] + np.arange(width)[None, :]


def differentiate(f, grid: RadialGrid, order: int = 2) -> np.ndarray:
    """Derivative df/dr at the nodes.

    ``order=2`` uses 3-point Lagrange stencils (central inside, one-sided
    at the ends); ``order=4`` uses 5-point stencils.
    """
    f = _check_samples(f, grid)
    if order not in (2, 4):
        raise ParameterError("order must be 2 or 4")
    width = order + 1
    if grid.n < width:
        raise ParameterError(f"need at least {width} nodes to differentiate")
    idx = _stencil_index(grid.n, width)
    r = grid.nodes
    w = _lagrange_derivative_weights(r[idx], r)
    # stencil weights sum to zero; differencing against f_i makes constants exact
    return np.einsum("ij,ij->i", w, f[idx] - f[:, None])


def norm_weighted(f, grid: RadialGrid, which: str = "X", p: float | None = None) -> float:
    """Weighted norms on the truncated grid.

    ``X``: ||f_r||_2 + ||f/r||_2; ``Xinf``: sup|f_r| + sup|f/r|;
    ``Lp``: (int |f|^p r dr)^(1/p), ``p=inf`` giving sup|f|;
    ``L1log``: int log(2+r)|f| r dr.
    """
    f = _check_samples(f, grid)
    r = grid.nodes
    if which == "X":
        fr = differentiate(f, grid)
        return math.sqrt(quad(fr * fr, grid)) + math.sqrt(quad((f / r) ** 2, grid))
    if which == "Xinf":
        fr = differentiate(f, grid)
        return float(np.max(np.abs(fr)) + np.max(np.abs(f / r)))
    if which == "Lp":
        if p is None or not p >= 1:
            raise ParameterError("Lp norm needs p >= 1")
        if math.isinf(p):
            return float(np.max(np.abs(f)))
        return quad(np.abs(f) ** p, grid) ** (1.0 / p)
    if which == "L1log":
        return quad(np.log(2.0 + r) * np.abs(f), grid)
    raise ParameterError(f"unknown norm {which!r}")


_KIND_CODES = {
    "J0": (_backend.J0, 0),
    "J1": (_backend.J1, 0),
    "I0e": (_backend.I0E, 0),
    "I1e": (_backend.I1E, 0),
    "K0e": (_backend.K0E, 0),
    "K1e": (_backend.K1E, 0),
    "I0": (_backend.I0E, 1),
    "I1": (_backend.I1E, 1),
    "K0": (_backend.K0E, -1),
    "K1": (_backend.K1E, -1),
}


def bessel(kind: str, x):
    """Bessel functions of order 0 and 1.

    ``kind`` is one of J0, J1, I0, I1, K0, K1 or the exponentially scaled
    I0e, I1e (times e^-x) and K0e, K1e (times e^x).  Accepts scalars or
    arrays.
    """
    try:
        code, expo = _KIND_CODES[kind]
    except KeyError:
        raise ParameterError(f"unknown Bessel kind {kind!r}") from None
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("Bessel argument must be finite")
    if kind[0] == "K" and np.any(xa <= 0):
        raise DomainError(f"{kind} requires x > 0")
    if kind[0] == "I" and np.any(xa < 0):
        raise DomainError(f"{kind} requires x >= 0")
    val = _backend.bessel_array(code, xa.ravel()).reshape(xa.shape)
    if expo == 1:
        with np.errstate(over="ignore"):
            val = val * np.exp(xa)
    elif expo == -1:
        val = val * np.exp(-xa)
    if np.ndim(x) == 0:
        return float(val)
    return val


def j1_zeros(m: int) -> np.ndarray:
    """First ``m`` positive zeros of J1 (McMahon start, Newton polish)."""
    if m < 1:
        raise ParameterError("need m >= 1")
    b = (np.arange(1, m + 1) + 0.25) * np.pi
    z = b - 3.0 / (8.0 * b) + 36.0 / (1536.0 * b**3)
    for _ in range(4):
        j1 = bessel("J1", z)
        dj = bessel("J0", z) - j1 / z
        z = z - j1 / dj
    return z


_PI = math.pi
EXACT_INTEGRALS: dict[str, tuple[float, str]] = {
    # id: (value, integrand f with the measure r dr)
    "h2_over_r2": (2.0, "h^2/r^2"),
    "hhat_h3_over_r": (2.0 / 3.0, "hhat h^3/r"),
    "h4": (8.0 / 3.0, "h^4"),
    "h4_over_r2": (4.0 / 3.0, "h^4/r^2"),
    "h3_over_r2": (_PI / 2.0, "h^3/r^2"),
    "h3_over_r": (2.0, "h^3/r"),
    "h3_over_r3": (2.0, "h^3/r^3"),
    "hhat_h3_over_r3": (-2.0 / 3.0, "hhat h^3/r^3"),
}


def exact_integral(ident: str) -> float:
    """Closed-form value of ``int f r dr`` for a tagged bubble integrand."""
    try:
        return EXACT_INTEGRALS[ident][0]
    except KeyError:
        raise ParameterError(
            f"unknown integral id {ident!r}; expected one of {sorted(EXACT_INTEGRALS)}"
        ) from None


def integrand(ident: str, r) -> np.ndarray:
    """Sample the integrand of a tagged integral at radii ``r``."""
    if ident not in EXACT_INTEGRALS:
        exact_integral(ident)
    r = np.asarray(r, dtype=float)
    h = 2.0 * r / (1.0 + r * r)
    hh = (r * r - 1.0) / (r * r + 1.0)
    table = {
        "h2_over_r2": h**2 / r**2,
        "hhat_h3_over_r": hh * h**3 / r,
        "h4": h**4,
        "h4_over_r2": h**4 / r**2,
        "h3_over_r2": h**3 / r**2,
        "h3_over_r": h**3 / r,
        "h3_over_r3": h**3 / r**3,
        "hhat_h3_over_r3": hh * h**3 / r**3,
    }
    return table[ident]


@dataclass(frozen=True, eq=False)
class Profile:
    """A sampled profile u(r_i) with its limits at r -> 0+ and r -> inf."""

    grid: RadialGrid
    values: np.ndarray
    left_limit: float = math.pi
    right_limit: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ParameterError("profile length does not match its grid")
        if not np.all(np.isfinite(v)):
            raise ParameterError("profile values must be finite")
        ratio = self.left_limit / math.pi
        if abs(ratio - round(ratio)) > 1e-12:
            raise ParameterError("left limit must be an integer multiple of pi")
        if self.right_limit != 0.0:
            raise ParameterError("right limit must be 0")
        object.__setattr__(self, "values", v)

    def derivative(self, order: int = 2) -> np.ndarray:
        return differentiate(self.values, self.grid, order=order)

    def with_values(self, values) -> "Profile":
        return Profile(self.grid, values, self.left_limit, self.right_limit)
