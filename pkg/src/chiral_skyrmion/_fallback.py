"""Pure numpy implementations of the hot kernels.

Every function here has a compiled twin in ``_kernels.pyx`` with the same
signature and the same floating-point algorithm, so the two backends agree
to rounding.  The loops that cannot be vectorized (Thomas elimination,
the scaled Green recursions) are written as plain Python loops.
"""

from __future__ import annotations

import math

import numpy as np

# Kind codes shared with the compiled backend.
J0, J1, I0E, I1E, K0E, K1E = range(6)

_EULER_GAMMA = 0.57721566490153286061
_TINY = 1e-17
_SERIES_J_MAX = 8.0
_ASYMP_J_MIN = 25.0
_SERIES_I_MAX = 30.0
_SERIES_K_MAX = 2.0


def _hankel_pq(x: np.ndarray, nu: int) -> tuple[np.ndarray, np.ndarray]:
    """Asymptotic P, Q sums for J_nu (nu = 0, 1) at large x."""
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    a = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 60):
        a = a * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        mag = np.abs(a)
        active &= (mag < prev) & (mag > _TINY)
        if not active.any():
            break
        sign = -1.0 if (k // 2) % 2 else 1.0
        term = np.where(active, sign * a, 0.0)
        if k % 2:
            q = q + term
        else:
            p = p + term
        prev = np.where(active, mag, prev)
    return p, q


def _j_series(x: np.ndarray, nu: int) -> np.ndarray:
    y = 0.25 * x * x
    term = np.ones_like(x) if nu == 0 else 0.5 * x
    total = term.copy()
    for k in range(1, 80):
        term = -term * y / (k * (k + nu))
        total = total + term
        if np.all(np.abs(term) <= _TINY * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _j_miller(x: np.ndarray, nu: int) -> np.ndarray:
    """Miller backward recurrence normalised by J0 + 2 sum J_2k = 1."""
    out = np.empty_like(x)
    for idx, xv in enumerate(x):
        m = 2 * ((int(xv) + 40) // 2)
        jp1 = 0.0
        j = 1.0
        norm = 2.0 * j
        j1 = 0.0
        for n in range(m, 0, -1):
            jm1 = (2.0 * n / xv) * j - jp1
            jp1 = j
            j = jm1
            if n - 1 == 1:
                j1 = j
            if (n - 1) > 0 and (n - 1) % 2 == 0:
                norm += 2.0 * j
            if abs(j) > 1e250:
                j *= 1e-250
                jp1 *= 1e-250
                norm *= 1e-250
                j1 *= 1e-250
        norm += j
        out[idx] = (j if nu == 0 else j1) / norm
    return out


def _j_asymp(x: np.ndarray, nu: int) -> np.ndarray:
    p, q = _hankel_pq(x, nu)
    c, s = np.cos(x), np.sin(x)
    r2 = math.sqrt(0.5)
    if nu == 0:
        cchi, schi = (c + s) * r2, (s - c) * r2
    else:
        cchi, schi = (s - c) * r2, -(s + c) * r2
    return np.sqrt(2.0 / (np.pi * x)) * (p * cchi - q * schi)


def _bessel_j(x: np.ndarray, nu: int) -> np.ndarray:
    ax = np.abs(x)
    out = np.empty_like(ax)
    lo = ax <= _SERIES_J_MAX
    hi = ax >= _ASYMP_J_MIN
    mid = ~(lo | hi)
    if lo.any():
        out[lo] = _j_series(ax[lo], nu)
    if mid.any():
        out[mid] = _j_miller(ax[mid], nu)
    if hi.any():
        out[hi] = _j_asymp(ax[hi], nu)
    if nu == 1:
        out = np.where(x < 0, -out, out)
    return out


def _i_scaled(x: np.ndarray, nu: int) -> np.ndarray:
    out = np.empty_like(x)
    lo = x <= _SERIES_I_MAX
    if lo.any():
        xl = x[lo]
        y = 0.25 * xl * xl
        term = np.ones_like(xl) if nu == 0 else 0.5 * xl
        total = term.copy()
        for k in range(1, 200):
            term = term * y / (k * (k + nu))
            total = total + term
            if np.all(term <= _TINY * np.maximum(total, 1e-300)):
                break
        out[lo] = total * np.exp(-xl)
    hi = ~lo
    if hi.any():
        xh = x[hi]
        mu = 4.0 * nu * nu
        a = np.ones_like(xh)
        total = np.ones_like(xh)
        for k in range(1, 80):
            a = -a * (mu - (2 * k - 1) ** 2) / (8.0 * k * xh)
            total = total + a
            if np.all(np.abs(a) <= _TINY):
                break
        out[hi] = total / np.sqrt(2.0 * np.pi * xh)
    return out


def _k_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """K0, K1 (unscaled) by the logarithmic power series, x <= 2."""
    y = 0.25 * x * x
    lg = np.log(0.5 * x)
    i0 = np.zeros_like(x)
    i1 = np.zeros_like(x)
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    t0 = np.ones_like(x)  # y^k / (k!)^2
    t1 = np.ones_like(x)  # y^k / (k! (k+1)!)
    psi_k1 = -_EULER_GAMMA  # psi(k+1)
    for k in range(0, 60):
        psi_k2 = psi_k1 + 1.0 / (k + 1)  # psi(k+2)
        i0 = i0 + t0
        i1 = i1 + t1
        s0 = s0 + psi_k1 * t0
        s1 = s1 + (psi_k1 + psi_k2) * t1
        t0 = t0 * y / ((k + 1) * (k + 1))
        t1 = t1 * y / ((k + 1) * (k + 2))
        psi_k1 = psi_k2
        if np.all(t0 <= _TINY * np.abs(i0)):
            break
    i1 = 0.5 * x * i1
    k0 = -lg * i0 + s0
    k1 = 1.0 / x + lg * i1 - 0.25 * x * s1
    return k0, k1


def _k_steed(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scaled K0, K1 by Steed's continued fraction, x > 2."""
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    for idx, xv in enumerate(x):
        b = 2.0 * (1.0 + xv)
        d = 1.0 / b
        h = delh = d
        q1, q2 = 0.0, 1.0
        a1 = 0.25
        q = c = a1
        a = -a1
        s = 1.0 + q * delh
        for i in range(1, 10000):
            a -= 2 * i
            c = -a * c / (i + 1.0)
            qnew = (q1 - b * q2) / a
            q1, q2 = q2, qnew
            q += c * qnew
            b += 2.0
            d = 1.0 / (b + a * d)
            delh = (b * d - 1.0) * delh
            h += delh
            dels = q * delh
            s += dels
            if abs(dels / s) < 1e-17:
                break
        h = a1 * h
        k0v = math.sqrt(math.pi / (2.0 * xv)) / s
        k0[idx] = k0v
        k1[idx] = k0v * (xv + 0.5 - h) / xv
    return k0, k1


def _k_scaled(x: np.ndarray, nu: int) -> np.ndarray:
    out = np.empty_like(x)
    lo = x <= _SERIES_K_MAX
    if lo.any():
        k0, k1 = _k_series(x[lo])
        out[lo] = (k0 if nu == 0 else k1) * np.exp(x[lo])
    hi = ~lo
    if hi.any():
        k0, k1 = _k_steed(x[hi])
        out[hi] = k0 if nu == 0 else k1
    return out


def bessel_array(kind: int, x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if kind == J0:
        return _bessel_j(x, 0)
    if kind == J1:
        return _bessel_j(x, 1)
    if kind == I0E:
        return _i_scaled(x, 0)
    if kind == I1E:
        return _i_scaled(x, 1)
    if kind == K0E:
        return _k_scaled(x, 0)
    if kind == K1E:
        return _k_scaled(x, 1)
    raise ValueError(f"unknown Bessel kind code {kind}")


def thomas(lower, diag, upper, rhs):
    """Tridiagonal solve; returns (x, min |pivot|, max |pivot|).

    ``lower[i]`` multiplies x[i-1] in row i and ``upper[i]`` multiplies
    x[i+1]; ``lower[0]`` and ``upper[-1]`` are ignored.
    """
    a = np.asarray(lower, dtype=np.float64)
    b = np.asarray(diag, dtype=np.float64)
    c = np.asarray(upper, dtype=np.float64)
    d = np.asarray(rhs, dtype=np.float64)
    n = b.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    piv = b[0]
    if piv == 0.0:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    pmin = pmax = abs(piv)
    cp[0] = c[0] / piv
    dp[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i] * cp[i - 1]
        if piv == 0.0:
            raise ZeroDivisionError("zero pivot in tridiagonal solve")
        ap = abs(piv)
        pmin = min(pmin, ap)
        pmax = max(pmax, ap)
        cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i] * dp[i - 1]) / piv
    x = np.empty(n)
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x, pmin, pmax


def separable_sweep(pa, pb, x, g, ds, correct):
    """Apply a separable kernel by two scaled prefix-sum passes.

    Computes ``pb_i * A_i + pa_i * B_i`` where
    ``A_i = int_{s_0}^{s_i} pa e^{x} g ds`` scaled by ``e^{-x_i}`` and
    ``B_i = int_{s_i}^{s_end} pb e^{-x} g ds`` scaled by ``e^{x_i}``.
    ``x`` must be nondecreasing.  With ``correct`` the trapezoid sums get
    the first Euler-Maclaurin endpoint term.
    """
    pa = np.asarray(pa, dtype=np.float64)
    pb = np.asarray(pb, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    n = g.shape[0]
    ga = pa * g
    gb = pb * g
    h = 0.5 * ds
    em = ds * ds / 12.0
    dx = np.diff(x)

    A = np.empty(n)
    B = np.empty(n)
    A[0] = 0.0
    for i in range(1, n):
        e = math.exp(-dx[i - 1])
        A[i] = A[i - 1] * e + h * (ga[i - 1] * e + ga[i])
    B[n - 1] = 0.0
    for i in range(n - 2, -1, -1):
        e = math.exp(-dx[i])
        B[i] = B[i + 1] * e + h * (gb[i + 1] * e + gb[i])

    if correct and n >= 3:
        # derivatives of the scaled integrands, referenced to node i
        da = np.empty(n)
        db = np.empty(n)
        ep = np.exp(dx)  # e^{x_{i+1}-x_i}
        em_ = np.exp(-dx)
        da[1:-1] = (ga[2:] * ep[1:] - ga[:-2] * em_[:-1]) / (2 * ds)
        db[1:-1] = (gb[2:] * em_[1:] - gb[:-2] * ep[:-1]) / (2 * ds)
        e1 = math.exp(dx[0])
        e12 = math.exp(x[2] - x[0])
        da[0] = (-3 * ga[0] + 4 * ga[1] * e1 - ga[2] * e12) / (2 * ds)
        db[0] = (-3 * gb[0] + 4 * gb[1] / e1 - gb[2] / e12) / (2 * ds)
        e1 = math.exp(-dx[-1])
        e12 = math.exp(x[-3] - x[-1])
        da[-1] = (3 * ga[-1] - 4 * ga[-2] * e1 + ga[-3] * e12) / (2 * ds)
        db[-1] = (3 * gb[-1] - 4 * gb[-2] / e1 + gb[-3] / e12) / (2 * ds)
        A -= em * (da - da[0] * np.exp(x[0] - x))
        B -= em * (db[-1] * np.exp(x - x[-1]) - db)
    return pb * A + pa * B


def hankel_matvec(r, g, rho):
    """out_j = sum_i J1(rho_j r_i) g_i."""
    r = np.asarray(r, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    keep = g != 0.0
    r, g = r[keep], g[keep]
    out = np.zeros(rho.shape[0])
    if r.size == 0:
        return out
    block = max(1, 2_000_000 // r.size)
    for j0 in range(0, rho.size, block):
        arg = np.outer(rho[j0:j0 + block], r)
        out[j0:j0 + block] = bessel_array(J1, arg.ravel()).reshape(arg.shape) @ g
    return out
