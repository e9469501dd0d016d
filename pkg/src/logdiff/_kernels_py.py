"""Pure numpy/scipy implementation of the radial Newton kernel.

Contract of :func:`radial_newton` (shared with the compiled twin):

``w`` holds ``log u`` at all ``m + 1`` radial nodes; ``w[m]`` is the Dirichlet
value and is never modified. The kernel solves, for ``i < m``,

    exp(w_i) - u_old_i - dt * (L w)_i = 0

by Newton's method with the update halved until the scaled residual
``max_i |F_i| / (exp(w_i) + u_old_i)`` decreases. ``w`` is updated in place.
Returns ``(iterations, residual, converged)``.
"""
import numpy as np
from scipy.linalg import solve_banded


def _residual(w, u_old, lower, diag, upper, dt):
    m = u_old.shape[0]
    ew = np.exp(w[:m])
    lap = diag * w[:m] + upper * w[1:]
    lap[1:] += lower[1:] * w[: m - 1]
    F = ew - u_old - dt * lap
    return F, float(np.max(np.abs(F) / (ew + u_old)))


def tridiagonal_solve(a, b, c, d):
    m = len(b)
    ab = np.zeros((3, m))
    ab[0, 1:] = c[: m - 1]
    ab[1] = b
    ab[2, : m - 1] = a[1:]
    return solve_banded((1, 1), ab, d)


def radial_newton(w, u_old, lower, diag, upper, dt, tol, max_iter, max_halvings):
    m = u_old.shape[0]
    F, res = _residual(w, u_old, lower, diag, upper, dt)
    it = 0
    while res > tol and it < max_iter:
        it += 1
        b = np.exp(w[:m]) - dt * diag
        dw = tridiagonal_solve(-dt * lower, b, -dt * upper, -F)
        lam = 1.0
        for _ in range(max_halvings + 1):
            w_try = w.copy()
            w_try[:m] += lam * dw
            F_try, trial = _residual(w_try, u_old, lower, diag, upper, dt)
            if trial < res:
                break
            lam *= 0.5
        else:
            return it, res, False
        w[:m] = w_try[:m]
        F, res = F_try, trial
    return it, res, res <= tol
