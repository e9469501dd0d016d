"""Compare the compiled and pure-Python radial kernels.

    python benchmarks/bench_kernels.py [--sizes 256,1024,4096] [--repeat 5]

Times one Newton solve per size and one full cigar run, and checks that both
backends agree.
"""
import argparse
import time

import numpy as np

from logdiff import kernels
from logdiff.discretization import ConformalField, RadialGrid
from logdiff.exact import CigarScaled
from logdiff.solver import ExactTrace, FlowProblem, solve


def _newton_case(n):
    g = RadialGrid(n)
    lower, diag, upper = g.stencil
    u_old = CigarScaled(0.1)(g.r[:-1], 0.0)
    w0 = np.log(CigarScaled(0.1)(g.r, 0.0))
    return w0, u_old, lower, diag, upper


def time_newton(mod, n, repeat):
    w0, u_old, lower, diag, upper = _newton_case(n)
    best, w = np.inf, None
    for _ in range(repeat):
        w = w0.copy()
        t0 = time.perf_counter()
        mod.radial_newton(w, u_old, lower, diag, upper, 1e-3, 1e-12, 50, 20)
        best = min(best, time.perf_counter() - t0)
    return best, w


def time_run(mod, n, repeat):
    g = RadialGrid(n)
    sol = CigarScaled(0.1)
    prob = FlowProblem(ConformalField(g, sol(g.r, 0.0)), ExactTrace(sol), 0.1, 1e-3)
    orig = kernels.radial_newton
    kernels.radial_newton = mod.radial_newton
    try:
        best = np.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            traj = solve(prob)
            best = min(best, time.perf_counter() - t0)
    finally:
        kernels.radial_newton = orig
    return best, traj.values[-1]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", default="256,1024,4096")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    backends = {"python": kernels.pure}
    if kernels.compiled is not None:
        backends["cython"] = kernels.compiled
    else:
        print("compiled kernel not built; timing the pure-Python backend only")

    print(f"{'case':<22}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for label, fn, rep in (("newton step", time_newton, args.repeat), ("run to t=0.1", time_run, 1)):
        for n in sizes:
            res = {b: fn(m, n, rep) for b, m in backends.items()}
            row = f"{label + f' n={n}':<22}" + "".join(f"{res[b][0] * 1e3:>10.2f}ms" for b in backends)
            if len(res) == 2:
                diff = np.max(np.abs(res["cython"][1] - res["python"][1]) / np.abs(res["python"][1]))
                assert diff < 1e-9, f"backends disagree by {diff:.2e}"
                row += f"{res['python'][0] / res['cython'][0]:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
