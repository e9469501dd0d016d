"""Implicit time stepping for ``u_t = Laplacian(log u)``.

The unknown is ``w = log u``. One backward-Euler step solves

    (exp(w) - u_old) / dt = L w      on interior nodes,
    w = log(trace(t + dt))           on boundary nodes,

by damped Newton iteration, so every accepted state is positive by
construction. Complete flows on the open disk are emulated by prescribing the
trace of a complete comparison solution on the truncated rim.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import kernels
from .discretization import ConformalField, DiskGrid, RadialGrid, write_field_csv
from .exact import ExactSolution
from .geometry import Annulus, FullDisk
from .report import CheckReport

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# boundary strategies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HyperbolicTrace:
    """Rim value ``(2t + alpha) h``: the complete hyperbolic flow's trace."""

    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("HyperbolicTrace needs alpha > 0 for a positive trace at t = 0")

    def log_values(self, grid, t: float) -> np.ndarray:
        return math.log(2.0 * t + self.alpha) + FullDisk().log_factor(grid.r[grid.boundary])

    def scaled(self, lam: float) -> "HyperbolicTrace":
        return HyperbolicTrace(self.alpha * lam)

    def describe(self) -> dict:
        return {"kind": "hyperbolic", "alpha": self.alpha}


@dataclass(frozen=True)
class AnnulusTrace:
    """Rim value ``(2t + 1) h_a`` of the complete flow on ``{a < |x| < 1}``."""

    a: float

    def __post_init__(self):
        Annulus(self.a)

    def log_values(self, grid, t: float) -> np.ndarray:
        return math.log(2.0 * t + 1.0) + Annulus(self.a).log_factor(grid.r[grid.boundary])

    def describe(self) -> dict:
        return {"kind": "annulus", "a": self.a}


@dataclass(frozen=True)
class ExactTrace:
    solution: ExactSolution

    def log_values(self, grid, t: float) -> np.ndarray:
        return np.asarray(self.solution.log(grid.z[grid.boundary], t), dtype=float)

    def describe(self) -> dict:
        return {"kind": "exact", "solution": repr(self.solution)}


BoundaryStrategy = Union[HyperbolicTrace, AnnulusTrace, ExactTrace]


# ---------------------------------------------------------------------------
# single step
# ---------------------------------------------------------------------------

class StepFailure(RuntimeError):
    def __init__(self, t: float, dt: float, iterations: int, residual: float):
        super().__init__(
            f"Newton did not converge at t={t:.6g}, dt={dt:.3g}: "
            f"{iterations} iterations, scaled residual {residual:.3e}"
        )
        self.t, self.dt, self.iterations, self.residual = t, dt, iterations, residual


@dataclass(frozen=True)
class NewtonOptions:
    tol: float = 1e-10
    max_iter: int = 50
    max_halvings: int = 20


def _newton_disk(w, u_old, grid: DiskGrid, dt, opts: NewtonOptions):
    inner, bnd = grid.interior, grid.boundary
    L = grid.laplacian_matrix
    L_II = L[:, inner].tocsc()
    lap_b = L[:, bnd] @ w[bnd]
    wi = w[inner].copy()

    def resid(x):
        ex = np.exp(x)
        F = ex - u_old - dt * (L_II @ x + lap_b)
        return F, float(np.max(np.abs(F) / (ex + u_old)))

    F, res = resid(wi)
    it = 0
    while res > opts.tol and it < opts.max_iter:
        it += 1
        J = (sp.diags(np.exp(wi)) - dt * L_II).tocsc()
        dw = splu(J).solve(-F)
        lam = 1.0
        for _ in range(opts.max_halvings + 1):
            trial_w = wi + lam * dw
            F_try, trial = resid(trial_w)
            if trial < res:
                break
            lam *= 0.5
        else:
            return it, res, False
        wi, F, res = trial_w, F_try, trial
    w[inner] = wi
    return it, res, res <= opts.tol


def _advance(values: np.ndarray, grid, bc: BoundaryStrategy, t: float, dt: float, opts: NewtonOptions):
    """One backward-Euler step from ``(values, t)``; returns new values and diagnostics."""
    inner = grid.interior
    w = np.log(values).copy()
    w[~inner] = bc.log_values(grid, t + dt)
    u_old = np.ascontiguousarray(values[inner])
    if isinstance(grid, RadialGrid):
        lower, diag, upper = grid.stencil
        it, res, ok = kernels.radial_newton(w, u_old, lower, diag, upper, dt, opts.tol, opts.max_iter, opts.max_halvings)
    else:
        it, res, ok = _newton_disk(w, u_old, grid, dt, opts)
    if not ok:
        raise StepFailure(t, dt, it, res)
    new = np.exp(w)
    # log variable makes this impossible; kept as an internal consistency guard
    assert np.all(new > 0) and np.all(np.isfinite(new)), "positivity lost in Newton step"
    return new, it, res


def step(u: ConformalField, bc: BoundaryStrategy, dt: float, newton_tol: float = 1e-10,
         newton_max_iter: int = 50) -> ConformalField:
    """Advance ``u`` by one backward-Euler step of size ``dt``.

    Raises :class:`StepFailure` if Newton does not reach ``newton_tol``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    new, _, _ = _advance(u.values, u.grid, bc, u.t, dt, NewtonOptions(newton_tol, newton_max_iter))
    return ConformalField(u.grid, new, u.t + dt)


# ---------------------------------------------------------------------------
# whole trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowProblem:
    initial: ConformalField
    bc: BoundaryStrategy
    t_end: float
    dt: float
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    save_every: int = 1
    min_dt_fraction: float = 1.0 / 64

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < self.initial.t:
            raise ValueError("t_end precedes the initial time")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.save_every < 1:
            raise ValueError("save_every must be >= 1")


@dataclass
class Trajectory:
    grid: object
    bc: BoundaryStrategy
    dt: float
    times: np.ndarray
    values: np.ndarray
    newton_iters: List[int] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)
    substeps: List[int] = field(default_factory=list)
    aborted: bool = False
    message: str = ""

    def __len__(self):
        return len(self.times)

    def snapshot(self, k: int) -> ConformalField:
        return ConformalField(self.grid, self.values[k], float(self.times[k]))

    @property
    def snapshots(self) -> List[ConformalField]:
        return [self.snapshot(k) for k in range(len(self))]

    @property
    def final(self) -> ConformalField:
        return self.snapshot(len(self) - 1)

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > tol * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t={t}")
        return k

    def at(self, t: float) -> ConformalField:
        return self.snapshot(self.index_of(t))

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def _advance_adaptive(values, grid, bc, t, dt, dt_min, opts, stats):
    try:
        new, it, res = _advance(values, grid, bc, t, dt, opts)
        stats["iters"] += it
        stats["res"] = max(stats["res"], res)
        stats["sub"] += 1
        return new
    except StepFailure:
        if dt / 2 < dt_min * (1 - 1e-12):
            raise
        log.debug("step failed at t=%.6g dt=%.3g; halving", t, dt)
        half = dt / 2
        mid = _advance_adaptive(values, grid, bc, t, half, dt_min, opts, stats)
        return _advance_adaptive(mid, grid, bc, t + half, half, dt_min, opts, stats)


def solve(problem: FlowProblem) -> Trajectory:
    """Integrate ``problem`` at uniform ``dt``.

    A failing step is retried as two half steps, recursively down to
    ``dt * min_dt_fraction``; past that the run stops and the partial
    trajectory is returned with ``aborted`` set.
    """
    u0 = problem.initial
    grid, bc, dt = u0.grid, problem.bc, problem.dt
    t0 = u0.t
    span = problem.t_end - t0
    nsteps = int(round(span / dt))
    if abs(nsteps * dt - span) > 1e-9 * max(1.0, span):
        nsteps = int(math.ceil(span / dt))
    opts = NewtonOptions(problem.newton_tol, problem.newton_max_iter)
    dt_min = dt * problem.min_dt_fraction

    times = [t0]
    saved = [np.array(u0.values)]
    traj = Trajectory(grid, bc, dt, np.array(times), np.array(saved))
    cur = np.array(u0.values)
    for k in range(1, nsteps + 1):
        t_prev = t0 + (k - 1) * dt
        t_next = min(t0 + k * dt, problem.t_end) if k == nsteps else t0 + k * dt
        stats = {"iters": 0, "res": 0.0, "sub": 0}
        try:
            cur = _advance_adaptive(cur, grid, bc, t_prev, t_next - t_prev, dt_min, opts, stats)
        except StepFailure as exc:
            traj.aborted = True
            traj.message = str(exc)
            log.warning("solve aborted: %s", exc)
            break
        traj.newton_iters.append(stats["iters"])
        traj.residuals.append(stats["res"])
        traj.substeps.append(stats["sub"])
        if k % problem.save_every == 0 or k == nsteps:
            times.append(t_next)
            saved.append(cur.copy())
    traj.times = np.array(times)
    traj.values = np.array(saved)
    return traj


def comparison_check(traj_low: Trajectory, traj_high: Trajectory, tolerance: float = 1e-9,
                     region: Optional[tuple] = None) -> CheckReport:
    """Check ``low <= high`` at every recorded time (relative to ``high``).

    ``region=(r_min, r_max)`` restricts the check to nodes with radius in range.
    """
    if traj_low.grid != traj_high.grid or traj_low.values.shape != traj_high.values.shape \
            or not np.allclose(traj_low.times, traj_high.times):
        raise ValueError("comparison needs trajectories on the same grid and times")
    sel = np.ones(traj_low.grid.size, dtype=bool)
    if region is not None:
        r = traj_low.grid.r
        sel = (r >= region[0]) & (r <= region[1])
    rel = (traj_high.values[:, sel] - traj_low.values[:, sel]) / traj_high.values[:, sel]
    margin = float(rel.min())
    return CheckReport(
        name="comparison",
        lhs=float((traj_low.values[:, sel] / traj_high.values[:, sel]).max()),
        rhs=1.0,
        margin=margin,
        tolerance=tolerance,
        passed=bool(margin >= -tolerance),
        grid=traj_low.grid.describe(),
        dt=traj_low.dt,
        eps=traj_low.grid.eps,
        notes=f"min relative gap (high-low)/high = {margin:.3e} over {len(traj_low)} snapshots",
    )


def export_trajectory(traj: Trajectory, outdir) -> Path:
    """One CSV per snapshot plus ``manifest.json``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for k in range(len(traj)):
        name = f"snapshot_{k:05d}.csv"
        write_field_csv(traj.snapshot(k), outdir / name)
        files.append(name)
    manifest = {
        "times": [float(f"{t:.15g}") for t in traj.times],
        "files": files,
        "grid": traj.grid.describe(),
        "bc": traj.bc.describe(),
        "dt": traj.dt,
        "diagnostics": {
            "newton_iters": list(map(int, traj.newton_iters)),
            "max_residual": float(f"{traj.max_residual:.6e}"),
            "substeps": list(map(int, traj.substeps)),
            "aborted": traj.aborted,
            "message": traj.message,
            "backend": kernels.BACKEND,
        },
    }
    path = outdir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path
