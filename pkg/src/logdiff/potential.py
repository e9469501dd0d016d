"""Potential, Harnack quantity and exponential-integrability audits.

For a flow ``v`` with ``v(0) = v0 >= h`` (equality near the rim) the potential
``psi`` satisfies ``L psi(t) = v(t) - (2t+1) h`` with zero rim trace. It is
built the constructive way: ``psi(0)`` by a Poisson solve, later times by
integrating ``d/dt psi = log(v / ((2t+1) h))`` along the trajectory. From it,

    phi = psi + (t + 1/2) log((2t+1) h),        L phi = v,
    H   = t log(L phi) - (phi(t) - phi(0))
        = t log(v / ((2t+1) h)) - (psi(t) - psi(0)) - log(2t+1) / 2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.sparse.linalg import spsolve

from .discretization import RadialGrid, integrate, laplacian
from .geometry import log_h
from .report import CheckReport

EXP_GUARD = 700.0


def poisson_zero_dirichlet(f, grid, method: Optional[str] = None) -> np.ndarray:
    """Solve ``L psi = f`` with ``psi = 0`` on the boundary nodes.

    Radial grids default to the quadrature of the closed-form solution
    ``psi(r) = -int_r^R F(s)/s ds``, ``F(s) = int_0^s f(tau) tau dtau``;
    ``method="discrete"`` (the only option on disk grids) solves the stencil
    system directly.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.size,):
        raise ValueError("source must be sampled at every node")
    if method is None:
        method = "quadrature" if isinstance(grid, RadialGrid) else "discrete"

    if method == "quadrature":
        if not isinstance(grid, RadialGrid):
            raise ValueError("quadrature Poisson solve needs a radial grid")
        r = grid.r
        F = cumulative_trapezoid(f * r, r, initial=0.0)
        G = np.zeros_like(F)
        G[1:] = F[1:] / r[1:]
        cumG = cumulative_trapezoid(G, r, initial=0.0)
        return -(cumG[-1] - cumG)

    if method != "discrete":
        raise ValueError(f"unknown method {method!r}")
    inner = grid.interior
    L_II = grid.laplacian_matrix[:, inner].tocsc()
    psi = np.zeros(grid.size)
    psi[inner] = spsolve(L_II, f[inner])
    resid = np.max(np.abs(L_II @ psi[inner] - f[inner]))
    scale = max(np.max(np.abs(f[inner])), 1e-300)
    assert resid <= 1e-10 * scale * max(1.0, grid.size ** 0.5), "Poisson solve inaccurate"
    return psi


def log_ratio(traj) -> np.ndarray:
    """``log(v / ((2t+1) h))`` for every snapshot (rows) and node."""
    lh = log_h(traj.grid.r)
    t = traj.times[:, None]
    return np.log(traj.values) - lh[None, :] - np.log(2.0 * t + 1.0)


def evolve_psi(psi0, traj) -> np.ndarray:
    """``psi(t) = psi(0) + int_0^t log(v / ((2s+1) h)) ds`` (trapezoid in time)."""
    g = log_ratio(traj)
    incr = cumulative_trapezoid(g, traj.times, axis=0, initial=0.0)
    return np.asarray(psi0)[None, :] + incr


@dataclass
class PotentialState:
    psi0: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    times: np.ndarray
    trajectory: object

    def laplacian_consistency(self) -> np.ndarray:
        """``max |L psi(t) - (v(t) - (2t+1) h)|`` per snapshot (interior nodes)."""
        traj = self.trajectory
        inner = traj.grid.interior
        hv = np.exp(log_h(traj.grid.r))[inner]
        out = []
        for k, t in enumerate(self.times):
            lap = laplacian(self.psi[k], traj.grid)
            out.append(np.max(np.abs(lap - (traj.values[k][inner] - (2 * t + 1) * hv))))
        return np.array(out)


def potential_state(traj, method: Optional[str] = None) -> PotentialState:
    v0 = traj.values[0]
    psi0 = poisson_zero_dirichlet(v0 - np.exp(log_h(traj.grid.r)), traj.grid, method)
    psi = evolve_psi(psi0, traj)
    t = traj.times[:, None]
    phi = psi + (t + 0.5) * (np.log(2 * t + 1) + log_h(traj.grid.r)[None, :])
    return PotentialState(psi0, psi, phi, traj.times, traj)


@dataclass
class HarnackField:
    H: np.ndarray          # snapshots x nodes
    times: np.ndarray
    form: str


def harnack(traj, psi, form: str = "v", phi: Optional[np.ndarray] = None) -> HarnackField:
    """Evaluate the Harnack quantity on every snapshot.

    ``form="v"`` uses the expression in ``v`` and ``psi``; ``form="potential"``
    uses ``t log(L phi) - (phi(t) - phi(0))`` on interior nodes (boundary nodes
    take the ``v``-form value, where ``L phi`` is not defined).
    """
    t = traj.times[:, None]
    g = log_ratio(traj)
    Hv = t * g - (psi - psi[0][None, :]) - 0.5 * np.log(2 * t + 1)
    if form == "v":
        return HarnackField(Hv, traj.times, "v")
    if form != "potential":
        raise ValueError(f"unknown Harnack form {form!r}")
    if phi is None:
        phi = psi + t * 0 + (t + 0.5) * (np.log(2 * t + 1) + log_h(traj.grid.r)[None, :])
    inner = traj.grid.interior
    H = Hv.copy()
    for k in range(len(traj.times)):
        lphi = laplacian(phi[k], traj.grid)
        if np.any(lphi <= 0):
            raise ValueError(f"L phi is not positive at t={traj.times[k]:.4g}")
        H[k, inner] = traj.times[k] * np.log(lphi) - (phi[k, inner] - phi[0, inner])
    return HarnackField(H, traj.times, "potential")


def harnack_residual(H: HarnackField, traj, v0=None):
    """``dH/dt - (1/v) L H + v0/v`` at interior nodes, snapshots ``1..K-2``.

    Centred differences in time; returns ``(times, residual, drift)`` where
    ``drift = dH/dt - (1/v) L H`` is the quantity that must be ``<= 0``.
    """
    K = len(traj.times)
    if K < 3:
        raise ValueError("need at least three snapshots for centred time differences")
    v0 = traj.values[0] if v0 is None else np.asarray(getattr(v0, "values", v0))
    inner = traj.grid.interior
    times = traj.times
    res, drift = [], []
    for k in range(1, K - 1):
        dH = (H.H[k + 1, inner] - H.H[k - 1, inner]) / (times[k + 1] - times[k - 1])
        v = traj.values[k][inner]
        d = dH - laplacian(H.H[k], traj.grid) / v
        drift.append(d)
        res.append(d + v0[inner] / v)
    return times[1:-1], np.array(res), np.array(drift)


def phi_equation_residual(state: PotentialState) -> np.ndarray:
    """``d phi/dt - log(L phi) - 1`` at interior nodes, centred in time."""
    traj = state.trajectory
    inner = traj.grid.interior
    times = state.times
    out = []
    for k in range(1, len(times) - 1):
        dphi = (state.phi[k + 1, inner] - state.phi[k - 1, inner]) / (times[k + 1] - times[k - 1])
        out.append(dphi - np.log(laplacian(state.phi[k], traj.grid)) - 1.0)
    return np.array(out)


def corollary_bounds(traj, psi, tolerance: float = 1e-6) -> CheckReport:
    """Audit both pointwise bounds on ``v / ((2t+1) h)`` for ``t > 0``.

    Margins are in log form: ``log(rhs) - log(lhs)``, which stays finite where
    ``exp(-psi(0)/t)`` would overflow.
    """
    g = log_ratio(traj)
    sel = traj.times > 0
    t = traj.times[sel][:, None]
    g = g[sel]
    ps, p0 = psi[sel], psi[0][None, :]
    weak = 1.0 - p0 / t
    strong = np.log1p(2 * t) / (2 * t) + (ps - p0) / t
    m_weak = float(np.min(weak - g))
    m_strong = float(np.min(strong - g))
    ordering = float(np.max(strong - weak))
    margin = min(m_weak, m_strong)
    ok = margin >= -tolerance and ordering <= tolerance
    return CheckReport(
        name="corollary_bounds",
        lhs=float(np.max(g)),
        rhs=None,
        margin=margin,
        tolerance=tolerance,
        passed=bool(ok),
        grid=traj.grid.describe(),
        dt=traj.dt,
        eps=traj.grid.eps,
        notes=(f"log-margins: weaker {m_weak:.4g}, stronger {m_strong:.4g}; "
               f"max(stronger - weaker) = {ordering:.3g}"),
        extra={"weaker_margin": m_weak, "stronger_margin": m_strong, "ordering": ordering},
    )


def brezis_merle_audit(eta, f, p: float, grid, tolerance: float = 0.0) -> CheckReport:
    """Compare ``int e^{p|eta|}`` with ``16 pi^2 / (4 pi - p ||f||_1)``.

    Outside the window ``0 < p < 4 pi / ||f||_1`` the inequality says nothing
    and the report is marked inapplicable (not a failure).
    """
    eta = np.asarray(eta, dtype=float)
    f1 = integrate(np.abs(np.asarray(f, dtype=float)), grid)
    window = 4 * np.pi / f1 if f1 > 0 else np.inf
    base = dict(grid=grid.describe(), eps=grid.eps, tolerance=tolerance)
    if not 0 < p < window:
        return CheckReport("brezis_merle", None, None, None, passed=True,
                           notes=f"inapplicable: p={p:.4g} outside (0, 4pi/||f||_1 = {window:.4g})",
                           extra={"p": p, "f_l1": f1, "window": window}, **base)
    expo = p * np.abs(eta)
    rhs = 16 * np.pi**2 / (4 * np.pi - p * f1)
    if expo.max() > EXP_GUARD:
        return CheckReport("brezis_merle", np.inf, rhs, -np.inf, passed=False,
                           notes="unbounded at this resolution (exponent above overflow guard)",
                           extra={"p": p, "f_l1": f1, "window": window}, **base)
    lhs = integrate(np.exp(expo), grid)
    margin = rhs - lhs
    return CheckReport("brezis_merle", lhs, rhs, margin, passed=bool(margin >= -tolerance),
                       notes=f"p={p:.4g}, ||f||_1={f1:.4g}, window (0, {window:.4g})",
                       extra={"p": p, "f_l1": f1, "window": window}, **base)
