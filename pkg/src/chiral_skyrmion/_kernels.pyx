# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Bessel arrays, Thomas solve, separable Green
sweeps and the dense J1 matrix-vector product.

Mirrors ``_fallback.py`` algorithm for algorithm.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, log, cos, sin, fabs, M_PI

cnp.import_array()

cdef double TINY = 1e-17
cdef double EULER_GAMMA = 0.57721566490153286061


cdef inline void _hankel_pq(double x, double nu, double* p, double* q) noexcept nogil:
    cdef double mu = 4.0 * nu * nu
    cdef double a = 1.0, mag, prev = 1e308, sign
    cdef int k
    p[0] = 1.0
    q[0] = 0.0
    for k in range(1, 60):
        a = a * (mu - (2 * k - 1) * (2 * k - 1)) / (8.0 * k * x)
        mag = fabs(a)
        if not (mag < prev and mag > TINY):
            break
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q[0] += sign * a
        else:
            p[0] += sign * a
        prev = mag


cdef inline double _j_series(double x, int nu) noexcept nogil:
    cdef double y = 0.25 * x * x
    cdef double term = 1.0 if nu == 0 else 0.5 * x
    cdef double total = term
    cdef int k
    for k in range(1, 80):
        term = -term * y / (k * (k + nu))
        total += term
        if fabs(term) <= TINY * fabs(total):
            break
    return total


cdef inline double _j_miller(double x, int nu) noexcept nogil:
    cdef int m = 2 * ((<int> x + 40) // 2)
    cdef double jp1 = 0.0, j = 1.0, jm1, norm = 2.0, j1 = 0.0
    cdef int n
    for n in range(m, 0, -1):
        jm1 = (2.0 * n / x) * j - jp1
        jp1 = j
        j = jm1
        if n - 1 == 1:
            j1 = j
        if n - 1 > 0 and (n - 1) % 2 == 0:
            norm += 2.0 * j
        if fabs(j) > 1e250:
            j *= 1e-250
            jp1 *= 1e-250
            norm *= 1e-250
            j1 *= 1e-250
    norm += j
    return (j if nu == 0 else j1) / norm


cdef inline double _j_asymp(double x, int nu) noexcept nogil:
    cdef double p, q, c, s, cchi, schi
    cdef double r2 = sqrt(0.5)
    _hankel_pq(x, nu, &p, &q)
    c = cos(x)
    s = sin(x)
    if nu == 0:
        cchi = (c + s) * r2
        schi = (s - c) * r2
    else:
        cchi = (s - c) * r2
        schi = -(s + c) * r2
    return sqrt(2.0 / (M_PI * x)) * (p * cchi - q * schi)


cdef inline double _bessel_j(double x, int nu) noexcept nogil:
    cdef double ax = fabs(x), v
    if ax <= 8.0:
        v = _j_series(ax, nu)
    elif ax < 25.0:
        v = _j_miller(ax, nu)
    else:
        v = _j_asymp(ax, nu)
    if nu == 1 and x < 0:
        v = -v
    return v


cdef inline double _i_scaled(double x, int nu) noexcept nogil:
    cdef double y, term, total, mu, a
    cdef int k
    if x <= 30.0:
        y = 0.25 * x * x
        term = 1.0 if nu == 0 else 0.5 * x
        total = term
        for k in range(1, 200):
            term = term * y / (k * (k + nu))
            total += term
            if term <= TINY * total:
                break
        return total * exp(-x)
    mu = 4.0 * nu * nu
    a = 1.0
    total = 1.0
    for k in range(1, 80):
        a = -a * (mu - (2 * k - 1) * (2 * k - 1)) / (8.0 * k * x)
        total += a
        if fabs(a) <= TINY:
            break
    return total / sqrt(2.0 * M_PI * x)


cdef inline void _k_series(double x, double* k0, double* k1) noexcept nogil:
    cdef double y = 0.25 * x * x
    cdef double lg = log(0.5 * x)
    cdef double i0 = 0.0, i1 = 0.0, s0 = 0.0, s1 = 0.0
    cdef double t0 = 1.0, t1 = 1.0
    cdef double psi1 = -EULER_GAMMA, psi2
    cdef int k
    for k in range(0, 60):
        psi2 = psi1 + 1.0 / (k + 1)
        i0 += t0
        i1 += t1
        s0 += psi1 * t0
        s1 += (psi1 + psi2) * t1
        t0 = t0 * y / ((k + 1) * (k + 1))
        t1 = t1 * y / ((k + 1) * (k + 2))
        psi1 = psi2
        if t0 <= TINY * fabs(i0):
            break
    i1 = 0.5 * x * i1
    k0[0] = -lg * i0 + s0
    k1[0] = 1.0 / x + lg * i1 - 0.25 * x * s1


cdef inline void _k_steed(double x, double* k0, double* k1) noexcept nogil:
    cdef double b = 2.0 * (1.0 + x)
    cdef double d = 1.0 / b
    cdef double h = d, delh = d
    cdef double q1 = 0.0, q2 = 1.0, qnew
    cdef double a1 = 0.25
    cdef double q = a1, c = a1, a = -a1
    cdef double s = 1.0 + q * delh, dels
    cdef int i
    for i in range(1, 10000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if fabs(dels / s) < TINY:
            break
    h = a1 * h
    k0[0] = sqrt(M_PI / (2.0 * x)) / s
    k1[0] = k0[0] * (x + 0.5 - h) / x


cdef inline double _k_scaled(double x, int nu) noexcept nogil:
    cdef double k0, k1
    if x <= 2.0:
        _k_series(x, &k0, &k1)
        return (k0 if nu == 0 else k1) * exp(x)
    _k_steed(x, &k0, &k1)
    return k0 if nu == 0 else k1


cdef inline double _eval(int kind, double x) noexcept nogil:
    if kind == 0:
        return _bessel_j(x, 0)
    if kind == 1:
        return _bessel_j(x, 1)
    if kind == 2:
        return _i_scaled(x, 0)
    if kind == 3:
        return _i_scaled(x, 1)
    if kind == 4:
        return _k_scaled(x, 0)
    return _k_scaled(x, 1)


def bessel_array(int kind, x):
    if kind < 0 or kind > 5:
        raise ValueError(f"unknown Bessel kind code {kind}")
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n)
    cdef double[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _eval(kind, xv[i])
    return out.reshape(np.shape(x))


def thomas(lower, diag, upper, rhs):
    cdef double[::1] a = np.ascontiguousarray(lower, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(diag, dtype=np.float64)
    cdef double[::1] c = np.ascontiguousarray(upper, dtype=np.float64)
    cdef double[::1] d = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0], i
    cdef double[::1] cp = np.empty(n)
    cdef double[::1] dp = np.empty(n)
    x = np.empty(n)
    cdef double[::1] xv = x
    cdef double piv, pmin, pmax, ap
    cdef bint bad = False
    with nogil:
        piv = b[0]
        if piv == 0.0:
            bad = True
        else:
            pmin = fabs(piv)
            pmax = pmin
            cp[0] = c[0] / piv
            dp[0] = d[0] / piv
            for i in range(1, n):
                piv = b[i] - a[i] * cp[i - 1]
                if piv == 0.0:
                    bad = True
                    break
                ap = fabs(piv)
                if ap < pmin:
                    pmin = ap
                if ap > pmax:
                    pmax = ap
                cp[i] = c[i] / piv
                dp[i] = (d[i] - a[i] * dp[i - 1]) / piv
            if not bad:
                xv[n - 1] = dp[n - 1]
                for i in range(n - 2, -1, -1):
                    xv[i] = dp[i] - cp[i] * xv[i + 1]
    if bad:
        raise ZeroDivisionError("zero pivot in tridiagonal solve")
    return x, pmin, pmax


def separable_sweep(pa_in, pb_in, x_in, g_in, double ds, bint correct):
    cdef double[::1] pa = np.ascontiguousarray(pa_in, dtype=np.float64)
    cdef double[::1] pb = np.ascontiguousarray(pb_in, dtype=np.float64)
    cdef double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef double[::1] g = np.ascontiguousarray(g_in, dtype=np.float64)
    cdef Py_ssize_t n = g.shape[0], i
    cdef double[::1] ga = np.empty(n)
    cdef double[::1] gb = np.empty(n)
    cdef double[::1] A = np.empty(n)
    cdef double[::1] B = np.empty(n)
    cdef double[::1] da = np.empty(n)
    cdef double[::1] db = np.empty(n)
    out = np.empty(n)
    cdef double[::1] ov = out
    cdef double h = 0.5 * ds, em = ds * ds / 12.0, e, e1, e12
    with nogil:
        for i in range(n):
            ga[i] = pa[i] * g[i]
            gb[i] = pb[i] * g[i]
        A[0] = 0.0
        for i in range(1, n):
            e = exp(x[i - 1] - x[i])
            A[i] = A[i - 1] * e + h * (ga[i - 1] * e + ga[i])
        B[n - 1] = 0.0
        for i in range(n - 2, -1, -1):
            e = exp(x[i] - x[i + 1])
            B[i] = B[i + 1] * e + h * (gb[i + 1] * e + gb[i])
        if correct and n >= 3:
            for i in range(1, n - 1):
                da[i] = (ga[i + 1] * exp(x[i + 1] - x[i])
                         - ga[i - 1] * exp(x[i - 1] - x[i])) / (2 * ds)
                db[i] = (gb[i + 1] * exp(x[i] - x[i + 1])
                         - gb[i - 1] * exp(x[i] - x[i - 1])) / (2 * ds)
            e1 = exp(x[1] - x[0])
            e12 = exp(x[2] - x[0])
            da[0] = (-3 * ga[0] + 4 * ga[1] * e1 - ga[2] * e12) / (2 * ds)
            db[0] = (-3 * gb[0] + 4 * gb[1] / e1 - gb[2] / e12) / (2 * ds)
            e1 = exp(x[n - 2] - x[n - 1])
            e12 = exp(x[n - 3] - x[n - 1])
            da[n - 1] = (3 * ga[n - 1] - 4 * ga[n - 2] * e1 + ga[n - 3] * e12) / (2 * ds)
            db[n - 1] = (3 * gb[n - 1] - 4 * gb[n - 2] / e1 + gb[n - 3] / e12) / (2 * ds)
            for i in range(n):
                A[i] -= em * (da[i] - da[0] * exp(x[0] - x[i]))
                B[i] -= em * (db[n - 1] * exp(x[i] - x[n - 1]) - db[i])
        for i in range(n):
            ov[i] = pb[i] * A[i] + pa[i] * B[i]
    return out


def hankel_matvec(r_in, g_in, rho_in):
    r_np = np.ascontiguousarray(r_in, dtype=np.float64)
    g_np = np.ascontiguousarray(g_in, dtype=np.float64)
    keep = g_np != 0.0
    cdef double[::1] r = np.ascontiguousarray(r_np[keep])
    cdef double[::1] g = np.ascontiguousarray(g_np[keep])
    cdef double[::1] rho = np.ascontiguousarray(rho_in, dtype=np.float64)
    cdef Py_ssize_t m = rho.shape[0], n = r.shape[0], i, j
    out = np.zeros(m)
    cdef double[::1] ov = out
    cdef double acc
    with nogil:
        for j in range(m):
            acc = 0.0
            for i in range(n):
                acc = acc + _bessel_j(rho[j] * r[i], 1) * g[i]
            ov[j] = acc
    return out
