"""Named verification checks shared by ``logdiff verify`` and the test suite.

Each check takes a parameter dict (its defaults overridden by the caller) and
returns an :class:`AuditResult`: the reports plus any tables worth writing.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from .discretization import ConformalField, DiskGrid, RadialGrid, integrate, truncated_l1
from .exact import (CigarScaled, CigarUnscaled, Hyperbolic, MobiusPullback, residual)
from .geometry import Annulus, MobiusMap, h, log_h
from .harness import (SolverConfig, audit_theorem_1_1, audit_theorem_1_3, bump_over_h, cigar_initial,
                      delta_mass_check, empirical_spread, find_k_for_time, k_bound, mobius_invariants,
                      sharpness_sweep, smooth_majorant)
from .initial_data import constant_family, harnack_family
from .potential import (brezis_merle_audit, corollary_bounds, harnack, harnack_residual,
                        poisson_zero_dirichlet, potential_state)
from .report import CheckReport
from .solver import AnnulusTrace, ExactTrace, FlowProblem, HyperbolicTrace, solve

FOUR_PI = 4.0 * math.pi


@dataclass
class AuditResult:
    reports: List[CheckReport]
    tables: Dict[str, List[dict]] = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


@dataclass(frozen=True)
class Check:
    name: str
    func: Callable[[dict], AuditResult]
    defaults: dict
    summary: str

    def run(self, overrides: dict = None) -> AuditResult:
        params = dict(self.defaults)
        params.update({k: v for k, v in (overrides or {}).items() if k in self.defaults and v is not None})
        t0 = time.perf_counter()
        res = self.func(params)
        res.seconds = time.perf_counter() - t0
        return res


REGISTRY: Dict[str, Check] = {}


def register(name: str, summary: str, **defaults):
    def deco(func):
        REGISTRY[name] = Check(name, func, defaults, summary)
        return func
    return deco


def _family_runs(n: int, dt: float, seed: int, t_end: float, count: int = 10):
    g = RadialGrid(n)
    out = []
    for v0 in harnack_family(g, seed=seed, count=count):
        traj = solve(FlowProblem(v0, HyperbolicTrace(1.0), t_end, dt))
        if traj.aborted:
            raise RuntimeError(f"solver aborted: {traj.message}")
        out.append((v0, traj, potential_state(traj)))
    return out


# ---------------------------------------------------------------------------

@register("residuals", "closed-form residuals converge at second order", n=128, eps=0.125, t=0.3)
def check_residuals(p):
    cases = [Hyperbolic(a, rho) for a in (0.5, 1.0, 3.0) for rho in (0.5, 1.0)]
    cases += [CigarScaled(1e-1), CigarScaled(1e-3), MobiusPullback(CigarUnscaled(), MobiusMap(0.3 + 0.2j))]
    ns = [p["n"], 2 * p["n"], 4 * p["n"]]
    reports, rows = [], []
    for sol in cases:
        res = []
        for n in ns:
            if sol.radial:
                g = RadialGrid(n, p["eps"], radius=min(sol.domain_radius, 1.0))
            else:
                g = DiskGrid(n, p["eps"])
            res.append(float(residual(sol, g, p["t"], 1e-4).max()))
            rows.append({"case": repr(sol), "n": n, "residual": res[-1]})
        ratios = [a / b for a, b in zip(res, res[1:])]
        reports.append(CheckReport(
            f"residual[{sol!r}]", lhs=3.5, rhs=min(ratios), margin=min(ratios) - 3.5, tolerance=0.0,
            passed=min(ratios) >= 3.5, eps=p["eps"], grid={"n": ns},
            notes="max residuals " + ", ".join(f"{r:.4g}" for r in res)
                  + "; ratios " + ", ".join(f"{r:.3f}" for r in ratios)))
    return AuditResult(reports, {"residuals": rows})


@register("solver", "cigar reproduction and first-order time stepping", n=512, dt=1e-3, mu=0.1, t=0.2)
def check_solver(p):
    mu = p["mu"][0] if isinstance(p["mu"], (list, tuple)) else p["mu"]
    sol = CigarScaled(mu)
    g = RadialGrid(p["n"])
    u0 = ConformalField(g, sol(g.r, 0.0))
    finals = []
    for dt in (p["dt"], p["dt"] / 2, p["dt"] / 4):
        tr = solve(FlowProblem(u0, ExactTrace(sol), p["t"], dt))
        if tr.aborted:
            raise RuntimeError(f"solver aborted: {tr.message}")
        finals.append(tr.values[-1])
    exact = sol(g.r, p["t"])
    err = float(np.max(np.abs(finals[0] / exact - 1)))
    e1 = np.max(np.abs(finals[0] - finals[1]) / exact)
    e2 = np.max(np.abs(finals[1] - finals[2]) / exact)
    ratio = float(e1 / e2)
    return AuditResult([
        CheckReport("solver_fidelity", lhs=err, rhs=5e-3, margin=5e-3 - err, tolerance=0.0,
                    passed=err <= 5e-3, grid=g.describe(), dt=p["dt"], eps=g.eps,
                    notes=f"max relative error vs closed form at t={p['t']}"),
        CheckReport("time_order", lhs=ratio, rhs=None, margin=min(ratio - 1.7, 2.3 - ratio),
                    tolerance=0.0, passed=1.7 <= ratio <= 2.3, grid=g.describe(), dt=p["dt"], eps=g.eps,
                    notes=f"time-error ratio under dt halving (successive differences): {ratio:.4f}"),
    ])


@register("harnack", "H <= 0 on the seeded family, violation shrinking under refinement",
          n=256, dt=1e-3, seed=0, t=0.5)
def check_harnack(p):
    rows, viol, maxes, exact0 = [], [], [], True
    for n, dt in ((p["n"], p["dt"]), (2 * p["n"], p["dt"] / 4)):
        mx = -np.inf
        for _, tr, st in _family_runs(n, dt, p["seed"], p["t"]):
            H = harnack(tr, st.psi).H
            exact0 &= bool(np.all(H[0] == 0.0))
            mx = max(mx, float(H[1:].max()))
        maxes.append(mx)
        viol.append(max(mx, 0.0))
        rows.append({"n": n, "dt": dt, "max_H": mx})
    ok = maxes[0] <= 1e-2 and viol[1] <= viol[0] and exact0
    return AuditResult([CheckReport(
        "harnack_nonpositive", lhs=maxes[0], rhs=1e-2, margin=1e-2 - maxes[0], tolerance=1e-2,
        passed=bool(ok), grid={"n": [r["n"] for r in rows]}, dt=p["dt"], eps=1 / 64,
        notes=(f"max H over family and t in (0,{p['t']}]: " + ", ".join(f"{m:.3e}" for m in maxes)
               + f"; positive part non-increasing: {viol[1] <= viol[0]}; H(.,0) == 0: {exact0}"))],
        {"harnack": rows})


@register("identity", "Harnack evolution identity residual halves under refinement",
          n=128, dt=4e-3, seed=0, t=0.5)
def check_identity(p):
    res = []
    for n, dt in ((p["n"], p["dt"]), (2 * p["n"], p["dt"] / 4)):
        worst = 0.0
        for _, tr, st in _family_runs(n, dt, p["seed"], p["t"]):
            _, r, _ = harnack_residual(harnack(tr, st.psi), tr)
            worst = max(worst, float(np.abs(r).max()))
        res.append(worst)
    ratio = res[0] / res[1]
    return AuditResult([CheckReport(
        "harnack_identity", lhs=ratio, rhs=2.0, margin=ratio - 2.0, tolerance=0.0, passed=ratio >= 2.0,
        grid={"n": [p["n"], 2 * p["n"]]}, dt=p["dt"], eps=1 / 64,
        notes=f"max |dH/dt - L H / v + v0/v|: {res[0]:.4g} -> {res[1]:.4g} (ratio {ratio:.3f})")])


@register("corollary", "pointwise bounds on v/((2t+1)h) from the Harnack estimate",
          n=256, dt=1e-3, seed=0, t=0.5)
def check_corollary(p):
    reps = []
    for i, (_, tr, st) in enumerate(_family_runs(p["n"], p["dt"], p["seed"], p["t"])):
        r = corollary_bounds(tr, st.psi, tolerance=1e-6)
        r.name = f"corollary[{i}]"
        reps.append(r)
    return AuditResult(reps)


@register("sandwich", "boundary sandwich against the annulus metric as eps halves",
          n=256, dt=1e-3, eps=1 / 32, seed=0, t=1.0)
def check_sandwich(p):
    a = 0.5
    gaps, reps, rows = [], [], []
    for j in range(3):
        eps, n = p["eps"] / 2**j, p["n"] * 2**j
        g = RadialGrid(n, eps)
        sel = g.r >= 0.9
        lh = log_h(g.r[sel])
        upper = np.exp(Annulus(a).log_factor(g.r[sel]) - lh)
        lo, hi, gap = np.inf, -np.inf, 0.0
        for v0 in harnack_family(g, seed=p["seed"], count=3):
            ta = solve(FlowProblem(v0, AnnulusTrace(a), p["t"], p["dt"]))
            tb = solve(FlowProblem(v0, HyperbolicTrace(1.0), p["t"], p["dt"]))
            scale = (2 * ta.times[:, None] + 1) * np.exp(lh)[None, :]
            ra, rb = ta.values[:, sel] / scale, tb.values[:, sel] / scale
            lo = min(lo, ra.min() - 1, rb.min() - 1)
            hi = max(hi, (ra - upper).max(), (rb - upper).max())
            gap = max(gap, float(np.abs(ra - rb).max()))
        gaps.append(gap)
        rows.append({"eps": eps, "n": n, "lower": lo, "upper": hi, "gap": gap})
        margin = min(lo + 1e-3, 1e-3 - hi)
        reps.append(CheckReport(
            f"sandwich[eps={eps:g}]", lhs=lo, rhs=hi, margin=margin, tolerance=1e-3, passed=margin >= 0,
            grid=g.describe(), dt=p["dt"], eps=eps,
            notes=f"min(v/((2t+1)h)) - 1 = {lo:.3e}; max(v/((2t+1)h) - h_a/h) = {hi:.3e}; trace gap {gap:.3e}"))
    improving = all(b < a for a, b in zip(gaps, gaps[1:]))
    reps.append(CheckReport("sandwich_improves", lhs=gaps[-1], rhs=gaps[0], margin=None, tolerance=0.0,
                            passed=improving,
                            notes="annulus vs hyperbolic trace gap: " + ", ".join(f"{x:.3e}" for x in gaps)))
    return AuditResult(reps, {"sandwich": rows})


@register("brezis_merle", "exponential integrability of the initial potential",
          n=256, delta=0.5, seed=0)
def check_brezis_merle(p):
    d = p["delta"]
    g = RadialGrid(p["n"])
    hv = h(g.r)
    tt = (1 + d / 2) / FOUR_PI
    reps = []
    for i, v0 in enumerate(harnack_family(g, seed=p["seed"])):
        f = v0.values - hv
        mass = integrate(f, g)
        psi0 = poisson_zero_dirichlet(f, g)
        r = brezis_merle_audit(psi0 / tt, f / tt, 1 + d / 3, g)
        r.name = f"brezis_merle[{i}]"
        if mass > 1 + d / 100:
            r.passed = False
            r.notes += f"; ||v0-h||_1={mass:.4g} exceeds 1+delta/100"
        if r.lhs is None:   # inapplicable is not a pass here: the window must contain p
            r.passed = False
        reps.append(r)
    return AuditResult(reps)


@register("sharpness", "closed-form blow-up before t=1 and boundedness after",
          delta=0.1, mu=[1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8], n=1024)
def check_sharpness(p):
    rep, rows = sharpness_sweep(p["mu"], p["delta"])
    g = RadialGrid(p["n"], eps=0.0)
    errs = {}
    for mu in (1e-1, 1e-2, 1e-3):
        errs[mu] = abs(integrate(CigarScaled(mu)(g.r, 0.0), g) / FOUR_PI - 1)
    worst = max(errs.values())
    quad = CheckReport("cigar_mass_quadrature", lhs=worst, rhs=1e-4, margin=1e-4 - worst, tolerance=0.0,
                       passed=worst <= 1e-4, grid=g.describe(), eps=0.0,
                       notes="relative mass error at t=0: " + ", ".join(f"mu={m:g}: {e:.2e}" for m, e in errs.items()))
    return AuditResult([rep, quad], {"sharpness": rows})


@register("delta_mass", "cigar mass concentrates towards a point mass", mu=[1e-6, 1e-9, 1e-12], t=0.5, r=0.5)
def check_delta_mass(p):
    rep = delta_mass_check(p["mu"], p["t"], p["r"])
    rows = [{"mu": m, "t": p["t"], "value": e} for m, e in zip(rep.extra["mu"], rep.extra["errors"])]
    return AuditResult([rep], {"delta_mass": rows})


@register("uniformity", "empirical constant uniform in mu after the waiting time",
          delta=0.1, mu=[1e-2, 1e-4, 1e-6], n=256, dt=2e-3)
def check_uniformity(p):
    cfg = SolverConfig(n=p["n"], dt=p["dt"])
    g = cfg.make_grid()
    reps = [audit_theorem_1_1(cigar_initial(mu, g), 0.0, p["delta"], cfg) for mu in p["mu"]]
    for mu, r in zip(p["mu"], reps):
        r.name = f"theorem_1_1[mu={mu:g}]"
    spread = empirical_spread(reps)
    pre = [float(CigarScaled(mu)(0.0, 1 - p["delta"])) for mu in p["mu"]]
    span = max(pre) / min(pre)
    rows = [{"mu": mu, "t": r.extra.get("t", float("nan")), "value": r.extra.get("C", float("nan"))}
            for mu, r in zip(p["mu"], reps)]
    rows += [{"mu": mu, "t": 1 - p["delta"], "value": v} for mu, v in zip(p["mu"], pre)]
    reps.append(CheckReport("uniform_C", lhs=spread, rhs=3.0, margin=3.0 - spread, tolerance=0.0,
                            passed=spread <= 3.0, grid=g.describe(), dt=p["dt"], eps=g.eps,
                            notes=f"max C / min C over mu = {spread:.4g}"))
    reps.append(CheckReport("precritical_span", lhs=span, rhs=1e3, margin=span - 1e3, tolerance=0.0,
                            passed=span >= 1e3,
                            notes="closed-form u(0,1-delta): " + ", ".join(f"{v:.4g}" for v in pre)))
    return AuditResult(reps, {"uniformity": rows})


@register("k_bound", "waiting-time level k obeys the L^p bound", seed=0, n=256, count=50)
def check_k_bound(p):
    rng = np.random.default_rng(p["seed"])
    g = RadialGrid(p["n"])
    fam = constant_family(g, seed=p["seed"], count=p["count"])
    violations, worst_res, rows = 0, 0.0, []
    for u0 in fam:
        pp = float(rng.uniform(1.2, 4.0))
        d = float(rng.uniform(0.05, 1.0))
        total = integrate(u0.values, g)
        t = float(rng.uniform(0.02, 1.2)) * total * (1 + d) / FOUR_PI
        k = find_k_for_time(u0, t, d)
        kb = k_bound(u0, pp, t, d)
        violations += int(k > kb)
        if k > 0:
            worst_res = max(worst_res, abs(truncated_l1(u0, k) * (1 + d) / FOUR_PI - t))
        rows.append({"p": pp, "delta": d, "t": t, "k": k, "bound": kb})
    return AuditResult([
        CheckReport("k_bound", lhs=violations, rhs=0, margin=-violations, tolerance=0.0,
                    passed=violations == 0, grid=g.describe(),
                    notes=f"{violations} violations over {len(rows)} tuples"),
        CheckReport("k_bisection", lhs=worst_res, rhs=1e-9, margin=1e-9 - worst_res, tolerance=0.0,
                    passed=worst_res <= 1e-9, grid=g.describe(),
                    notes=f"max |mass(k)(1+delta)/(4pi) - t| = {worst_res:.3e}"),
    ], {"k_bound": rows})


@register("invariance", "parabolic rescaling and Mobius invariance", n=512, dt=2e-3, seed=0, alpha=1.0)
def check_invariance(p):
    g = RadialGrid(256)
    v0 = harnack_family(g, seed=p["seed"], count=1)[0]
    base = solve(FlowProblem(v0, HyperbolicTrace(1.0), 0.2, p["dt"]))
    reps = []
    for lam in (0.5, 2.0):
        tr = solve(FlowProblem(v0 * lam, HyperbolicTrace(lam), 0.2 * lam, p["dt"] * lam))
        err = float(np.max(np.abs(tr.values / (lam * base.values) - 1)))
        tol = 2 * 1e-10
        reps.append(CheckReport(f"rescaling[lambda={lam:g}]", lhs=err, rhs=tol, margin=tol - err,
                                tolerance=tol, passed=err <= tol, grid=g.describe(), dt=p["dt"], eps=g.eps,
                                notes="max relative gap between lambda*u(t/lambda) and the rescaled run"))
    dg = DiskGrid(p["n"])
    m = MobiusMap(0.3 + 0.15j, 0.4)
    inv = mobius_invariants(bump_over_h(), m, p["alpha"], dg)
    for key in ("sup", "mass"):
        a, b, rel = inv[key]
        reps.append(CheckReport(f"mobius_{key}", lhs=rel, rhs=1e-3, margin=1e-3 - rel, tolerance=1e-3,
                                passed=rel <= 1e-3, grid=dg.describe(), eps=dg.eps,
                                notes=f"original {a:.8g}, pulled back {b:.8g}"))
    return AuditResult(reps)


@register("majorant", "smoothed majorant postconditions and mass budget", n=256, seed=0, delta=0.1)
def check_majorant(p):
    g = RadialGrid(p["n"])
    b = h(g.r)
    reps = []
    for i, u0 in enumerate(constant_family(g, seed=p["seed"])):
        v0, mu = smooth_majorant(u0, b, p["delta"])
        u, v = u0.values, v0.values
        x = u - b
        conds = {
            "v0>=barrier": bool(np.all(v >= b)),
            "v0>=u0": bool(np.all(v >= u)),
            "v0=barrier off support": bool(np.all(v[x <= -mu] == b[x <= -mu])),
            "0<=v0-b<=1+u0": bool(np.all(v - b >= 0) and np.all(v - b <= 1 + u)),
        }
        bad = [k for k, c in conds.items() if not c]
        excess = integrate(v - b, g) - truncated_l1(u0, b)
        ok = all(conds.values()) and excess <= p["delta"] / 100
        reps.append(CheckReport(f"majorant[{i}]", lhs=excess, rhs=p["delta"] / 100,
                                margin=p["delta"] / 100 - excess, tolerance=0.0, passed=bool(ok),
                                grid=g.describe(), eps=g.eps,
                                notes=f"mu={mu:.3g}; failed: " + ", ".join(bad) if bad
                                else f"mu={mu:.3g}; all postconditions hold"))
    return AuditResult(reps)


@register("theorem_1_3", "hyperbolic-barrier estimate: empirical constant under refinement",
          n=256, dt=2e-3, seed=0, alpha=1.0, delta=1.0)
def check_theorem_1_3(p):
    reps, cs = [], []
    for j in range(2):
        cfg = SolverConfig(n=p["n"] * 2**j, dt=p["dt"] / 4**j)
        g = cfg.make_grid()
        v0 = harnack_family(g, seed=p["seed"], count=1, mass_range=(1.0, 1.0))[0]
        r = audit_theorem_1_3(v0, p["alpha"], p["delta"], cfg)
        r.name = f"theorem_1_3[n={cfg.n}]"
        reps.append(r)
        cs.append(r.extra.get("C", float("nan")))
    drift = abs(cs[1] / cs[0] - 1)
    reps.append(CheckReport("theorem_1_3_refinement", lhs=drift, rhs=0.05, margin=0.05 - drift,
                            tolerance=0.0, passed=drift <= 0.05,
                            notes="empirical C: " + ", ".join(f"{c:.6g}" for c in cs)))
    return AuditResult(reps)


def run_check(name: str, overrides: dict = None) -> AuditResult:
    if name not in REGISTRY:
        raise KeyError(f"unknown check {name!r}; available: {', '.join(sorted(REGISTRY))}")
    return REGISTRY[name].run(overrides)
