# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled radial backward-Euler Newton kernel.

Mirrors ``logdiff._kernels_py`` exactly; see that module for the contract.
"""
import numpy as np
from libc.math cimport exp, fabs


cdef double _residual(double[::1] w, const double[::1] u_old, const double[::1] lower,
                      const double[::1] diag, const double[::1] upper, double dt,
                      double[::1] F) noexcept nogil:
    cdef Py_ssize_t m = F.shape[0]
    cdef Py_ssize_t i
    cdef double ew, lap, s, res = 0.0
    for i in range(m):
        ew = exp(w[i])
        lap = diag[i] * w[i] + upper[i] * w[i + 1]
        if i > 0:
            lap += lower[i] * w[i - 1]
        F[i] = ew - u_old[i] - dt * lap
        s = fabs(F[i]) / (ew + u_old[i])
        if s > res:
            res = s
    return res


cdef void _thomas(double[::1] a, double[::1] b, double[::1] c, double[::1] d,
                  double[::1] cp, double[::1] x) noexcept nogil:
    # a: sub-diagonal (a[0] unused), b: diagonal, c: super-diagonal (c[m-1] unused)
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t i
    cdef double denom
    cp[0] = c[0] / b[0]
    x[0] = d[0] / b[0]
    for i in range(1, m):
        denom = b[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / denom if i < m - 1 else 0.0
        x[i] = (d[i] - a[i] * x[i - 1]) / denom
    for i in range(m - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]


def tridiagonal_solve(a, b, c, d):
    cdef double[::1] aa = np.ascontiguousarray(a, dtype=float)
    cdef double[::1] bb = np.ascontiguousarray(b, dtype=float)
    cdef double[::1] cc = np.ascontiguousarray(c, dtype=float)
    cdef double[::1] dd = np.ascontiguousarray(d, dtype=float)
    x = np.empty(bb.shape[0])
    cp = np.empty(bb.shape[0])
    _thomas(aa, bb, cc, dd, cp, x)
    return x


def radial_newton(double[::1] w, const double[::1] u_old, const double[::1] lower,
                  const double[::1] diag, const double[::1] upper, double dt,
                  double tol, int max_iter, int max_halvings):
    cdef Py_ssize_t m = u_old.shape[0]
    cdef Py_ssize_t i
    cdef int it = 0, k
    cdef double res, trial, lam
    cdef bint accepted
    F = np.empty(m)
    a = np.empty(m)
    b = np.empty(m)
    c = np.empty(m)
    rhs = np.empty(m)
    cp = np.empty(m)
    dw = np.empty(m)
    w_try = np.empty(m + 1)
    cdef double[::1] Fv = F, av = a, bv = b, cv = c, rv = rhs, cpv = cp, dwv = dw, wt = w_try

    res = _residual(w, u_old, lower, diag, upper, dt, Fv)
    while res > tol and it < max_iter:
        it += 1
        with nogil:
            for i in range(m):
                av[i] = -dt * lower[i]
                bv[i] = exp(w[i]) - dt * diag[i]
                cv[i] = -dt * upper[i]
                rv[i] = -Fv[i]
            _thomas(av, bv, cv, rv, cpv, dwv)
        lam = 1.0
        accepted = False
        wt[m] = w[m]
        for k in range(max_halvings + 1):
            for i in range(m):
                wt[i] = w[i] + lam * dwv[i]
            trial = _residual(wt, u_old, lower, diag, upper, dt, Fv)
            if trial < res:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            _residual(w, u_old, lower, diag, upper, dt, Fv)
            return it, res, False
        for i in range(m):
            w[i] = wt[i]
        res = trial
    return it, res, res <= tol
