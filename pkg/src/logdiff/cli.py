"""Command line front end: ``logdiff <exact|solve|verify|sweep>``.

Exit codes: 0 success, 1 an audit failed, 2 bad configuration, 3 solver abort.
A JSON config file supplies defaults; explicit flags override it.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np

from .report import reports_to_json, write_table

log = logging.getLogger("logdiff")

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

CONFIG_KEYS = {
    "target": str, "out": str, "n": int, "dt": float, "eps": float, "mu": list, "delta": float,
    "alpha": float, "k": float, "p": float, "seed": int, "workers": int, "svg": bool,
    "t": float, "r": float, "initial": str, "trace": str,
}
EXACT_TARGETS = ("cigar", "cigar-mass", "hyperbolic", "delta-mass")
SWEEP_TARGETS = ("sharpness", "delta-mass", "uniformity")


class ConfigError(ValueError):
    pass


def _mu_list(text: str) -> List[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--mu expects REAL[,REAL...], got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logdiff", description="Logarithmic fast diffusion: closed forms, "
                                "solver runs and smoothing-estimate audits")
    p.add_argument("command", choices=("exact", "solve", "verify", "sweep"))
    p.add_argument("target", nargs="?", help="exact: cigar|cigar-mass|hyperbolic|delta-mass; "
                   "verify: check name or 'all'; sweep: sharpness|delta-mass|uniformity; "
                   "solve: ignored")
    p.add_argument("--config", type=Path, help="JSON file with default parameters")
    p.add_argument("--out", help="output directory (default $LOGDIFF_OUT or ./logdiff-out)")
    p.add_argument("--n", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--mu", type=_mu_list)
    p.add_argument("--delta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--t", type=float, help="time (exact, solve end time, sweeps)")
    p.add_argument("--r", type=float, help="radius for mass evaluations")
    p.add_argument("--initial", choices=("cigar", "hyperbolic", "bumps"), help="solve: initial data")
    p.add_argument("--trace", choices=("exact", "hyperbolic", "annulus"), help="solve: rim condition")
    p.add_argument("--svg", action="store_true", default=None, help="also write SVG plots of tables")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config(path: Optional[Path]) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "mu" in data and not isinstance(data["mu"], list):
        data["mu"] = [data["mu"]]
    return data


def resolve(args: argparse.Namespace) -> dict:
    cfg = load_config(args.config)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    validate(cfg)
    cfg["out"] = cfg.get("out") or os.environ.get("LOGDIFF_OUT") or "logdiff-out"
    return cfg


def validate(cfg: dict):
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    for key, typ in CONFIG_KEYS.items():
        if key not in cfg:
            continue
        v = cfg[key]
        if typ is float:
            need(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v),
                 f"{key} must be a finite number")
        elif typ is int:
            need(isinstance(v, int) and not isinstance(v, bool), f"{key} must be an integer")
        elif typ is list:
            need(all(isinstance(x, (int, float)) and math.isfinite(x) for x in v), "mu must be numbers")
    if "delta" in cfg:
        need(0 < cfg["delta"] <= 1, f"delta must lie in (0, 1], got {cfg['delta']}")
    if "mu" in cfg:
        need(len(cfg["mu"]) > 0 and all(m > 0 for m in cfg["mu"]), "mu values must be positive")
    if "p" in cfg:
        need(cfg["p"] > 1, f"p must exceed 1, got {cfg['p']}")
    for key in ("alpha", "k"):
        if key in cfg:
            need(cfg[key] >= 0, f"{key} must be nonnegative")
    if "n" in cfg:
        need(cfg["n"] >= 16, "n must be at least 16")
    if "dt" in cfg:
        need(cfg["dt"] > 0, "dt must be positive")
    if "eps" in cfg:
        need(0 <= cfg["eps"] <= 0.2, "eps must lie in [0, 0.2]")
    if "workers" in cfg:
        need(cfg["workers"] >= 1, "workers must be at least 1")
    if "t" in cfg:
        need(cfg["t"] >= 0, "t must be nonnegative")
    if "r" in cfg:
        need(0 < cfg["r"] <= 1, "r must lie in (0, 1]")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_exact(cfg: dict, out: Path) -> int:
    from .discretization import RadialGrid
    from .exact import CigarScaled, Hyperbolic, cigar_l1_mass
    from .harness import delta_mass_error

    target = cfg.get("target") or "cigar-mass"
    if target not in EXACT_TARGETS:
        raise ConfigError(f"exact target must be one of {', '.join(EXACT_TARGETS)}")
    mus = cfg.get("mu", [0.1])
    t = cfg.get("t", 0.0)
    if target == "cigar-mass":
        r = cfg.get("r", 1.0)
        rows = [{"mu": m, "t": t, "value": cigar_l1_mass(m, t, r)} for m in mus]
    elif target == "delta-mass":
        r = cfg.get("r", 0.5)
        if not 0 < t < 1:
            raise ConfigError("delta-mass needs 0 < t < 1")
        rows = [{"mu": m, "t": t, "value": delta_mass_error(m, t, r)} for m in mus]
    else:
        g = RadialGrid(cfg.get("n", 256), cfg.get("eps", 1 / 64))
        sols = [CigarScaled(m) for m in mus] if target == "cigar" else [Hyperbolic(cfg.get("alpha", 1.0))]
        rows = []
        for s in sols:
            for r, u in zip(g.r, s(g.r, t)):
                rows.append({"mu": getattr(s, "mu", float("nan")), "t": t, "r": r, "value": u})
        path = write_table(rows, out / f"exact_{target}.csv", columns=("mu", "t", "r", "value"))
        print(f"wrote {path}")
        return EXIT_OK
    for row in rows:
        print(f"{target} mu={row['mu']:g} t={t:g}: {_fmt(row['value'])}")
    write_table(rows, out / f"exact_{target}.csv")
    return EXIT_OK


def cmd_solve(cfg: dict, out: Path) -> int:
    from .discretization import ConformalField, RadialGrid
    from .exact import CigarScaled, Hyperbolic
    from .harness import cigar_initial
    from .initial_data import harnack_family
    from .solver import (AnnulusTrace, ExactTrace, FlowProblem, HyperbolicTrace, export_trajectory,
                         solve)

    g = RadialGrid(cfg.get("n", 256), cfg.get("eps", 1 / 64))
    initial = cfg.get("initial", "cigar")
    mu = cfg.get("mu", [0.1])[0]
    alpha = cfg.get("alpha", 1.0)
    if initial == "cigar":
        sol = CigarScaled(mu)
        u0 = ConformalField(g, sol(g.r, 0.0)) if mu >= 1e-3 else cigar_initial(mu, g)
    elif initial == "hyperbolic":
        if alpha <= 0:
            raise ConfigError("hyperbolic initial data needs alpha > 0")
        sol = Hyperbolic(alpha)
        u0 = ConformalField(g, sol(g.r, 0.0))
    else:
        sol = None
        u0 = harnack_family(g, seed=cfg.get("seed", 0), count=1)[0]
    trace = cfg.get("trace", "exact" if sol is not None else "hyperbolic")
    if trace == "exact":
        if sol is None:
            raise ConfigError("bump data has no closed form; use --trace hyperbolic or annulus")
        bc = ExactTrace(sol)
    elif trace == "hyperbolic":
        if alpha <= 0:
            raise ConfigError("hyperbolic trace needs alpha > 0")
        bc = HyperbolicTrace(alpha)
    else:
        bc = AnnulusTrace(0.5)
    prob = FlowProblem(u0, bc, cfg.get("t", 0.2), cfg.get("dt", 1e-3))
    traj = solve(prob)
    manifest = export_trajectory(traj, out / "trajectory")
    print(f"wrote {len(traj)} snapshots; manifest {manifest}")
    if traj.aborted:
        summary = {"status": "solver_abort", "message": traj.message, "t_reached": float(traj.times[-1])}
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
        return EXIT_SOLVER
    if sol is not None and trace == "exact":
        err = float(np.max(np.abs(traj.values[-1] / sol(g.r, traj.times[-1]) - 1)))
        print(f"max relative error vs closed form at t={traj.times[-1]:g}: {err:.3e}")
    return EXIT_OK


def _run_one(name: str, overrides: dict):
    from .audits import run_check
    return name, run_check(name, overrides)


CHECK_KEYS = ("n", "dt", "eps", "mu", "delta", "alpha", "k", "p", "seed", "t", "r")


def cmd_verify(cfg: dict, out: Path) -> int:
    from .audits import REGISTRY

    target = cfg.get("target") or "all"
    names = sorted(REGISTRY) if target == "all" else [target]
    for n in names:
        if n not in REGISTRY:
            raise ConfigError(f"unknown check {n!r}; available: all, {', '.join(sorted(REGISTRY))}")
    overrides = {k: cfg[k] for k in CHECK_KEYS if k in cfg}
    workers = cfg.get("workers", 1)
    results = {}
    try:
        if workers > 1 and len(names) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for name, res in pool.map(_run_one, names, [overrides] * len(names)):
                    results[name] = res
        else:
            for name in names:
                results[name] = _run_one(name, overrides)[1]
    except RuntimeError as exc:
        if "solver aborted" in str(exc):
            print(json.dumps({"status": "solver_abort", "message": str(exc)}), file=sys.stderr)
            return EXIT_SOLVER
        raise
    reports = []
    for name in names:
        res = results[name]
        reports.extend(res.reports)
        for tname, rows in sorted(res.tables.items()):
            cols = tuple(rows[0].keys()) if rows else ("mu", "t", "value")
            write_table(rows, out / f"{tname}.csv", columns=cols)
            if cfg.get("svg") and rows and {"mu", "t", "value"} <= set(cols):
                from .svg import table_plot
                table_plot(rows, out / f"{tname}.svg", title=tname)
        status = "PASS" if res.passed else "FAIL"
        log.info("%s %s (%.1fs)", status, name, res.seconds)
        print(f"[{status}] {name}")
        for r in res.reports:
            print("    " + r.line())
    out.mkdir(parents=True, exist_ok=True)
    (out / "reports.json").write_text(reports_to_json(reports))
    failed = sorted(r.name for r in reports if not r.passed)
    summary = {"checks": names, "failed": failed, "passed": not failed}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if failed:
        print(json.dumps({"status": "audit_failed", "failed": failed}, sort_keys=True), file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def cmd_sweep(cfg: dict, out: Path) -> int:
    from .audits import run_check

    target = cfg.get("target") or "sharpness"
    if target not in SWEEP_TARGETS:
        raise ConfigError(f"sweep target must be one of {', '.join(SWEEP_TARGETS)}")
    check = {"sharpness": "sharpness", "delta-mass": "delta_mass", "uniformity": "uniformity"}[target]
    res = run_check(check, {k: cfg[k] for k in CHECK_KEYS if k in cfg})
    for tname, rows in sorted(res.tables.items()):
        path = write_table(rows, out / f"{tname}.csv")
        print(f"wrote {path}")
        for r in rows:
            print(f"  mu={r['mu']:g} t={r['t']:g} value={_fmt(r['value'])}")
        if cfg.get("svg"):
            from .svg import table_plot
            print(f"wrote {table_plot(rows, out / f'{tname}.svg', title=tname)}")
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{target}_report.json").write_text(reports_to_json(res.reports))
    for r in res.reports:
        print(r.line())
    return EXIT_OK if res.passed else EXIT_AUDIT


COMMANDS = {"exact": cmd_exact, "solve": cmd_solve, "verify": cmd_verify, "sweep": cmd_sweep}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        out = Path(cfg["out"])
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"logdiff: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"logdiff: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
