import math

import numpy as np
import pytest

from logdiff.discretization import ConformalField, DiskGrid, RadialGrid, integrate, truncated_l1
from logdiff.exact import CigarScaled, Hyperbolic
from logdiff.geometry import MobiusMap, h
from logdiff.harness import (ExperimentConfig, SmoothingGamma, SolverConfig, audit_theorem_1_1, audit_theorem_1_3,
                             audit_theorem_4_1, bootstrap_rescale, build_v0, bump_over_h, cigar_initial,
                             claim2_inequality_check, delta_mass_check, delta_mass_error, empirical_spread,
                             find_k_for_time, gamma_eval, k_bound, mobius_invariants, sharpness_sweep,
                             smooth_majorant)
from logdiff.initial_data import constant_family

FOUR_PI = 4 * math.pi


def test_gamma_values():
    mu = 0.01
    g = SmoothingGamma(mu)
    assert g(-2 * mu) == 0.0
    assert g(0.0) == pytest.approx(mu / 4, rel=1e-15)
    assert g(3 * mu) == 3 * mu
    x = np.linspace(-3 * mu, 3 * mu, 601)
    y = gamma_eval(g, x)
    assert np.all(np.diff(y, 2) >= -1e-15) and np.all(y >= 0) and np.all(y >= x)
    with pytest.raises(ValueError):
        SmoothingGamma(0.0)


def test_build_v0_postconditions():
    g = RadialGrid(256)
    hv = h(g.r)
    for u0 in constant_family(g, seed=2, count=4):
        v0 = build_v0(u0, hv, SmoothingGamma(0.05))
        assert np.all(v0.values >= hv) and np.all(v0.values >= u0.values)
        x = u0.values - hv
        assert np.all(v0.values[x <= -0.05] == hv[x <= -0.05])
        assert np.all(v0.values[x >= 0.05] == u0.values[x >= 0.05])
        assert v0.values[-1] == hv[-1]


def test_build_v0_below_barrier_is_barrier():
    g = RadialGrid(64)
    hv = h(g.r)
    v0 = build_v0(ConformalField(g, hv - 0.2), hv, SmoothingGamma(0.1))
    np.testing.assert_array_equal(v0.values, hv)


def test_smooth_majorant_meets_mass_budget():
    g = RadialGrid(256)
    hv = h(g.r)
    delta = 0.1
    for u0 in constant_family(g, seed=0, count=5):
        m = truncated_l1(u0, hv)
        v0, mu = smooth_majorant(u0, hv, delta, scale=m)
        assert integrate(v0.values - hv, g) <= m * (1 + delta / 100)
        assert 0 < mu <= 1


def test_find_k():
    g = RadialGrid(256)
    u0 = constant_family(g, count=1)[0]
    total = integrate(u0.values, g)
    assert find_k_for_time(u0, total * 1.1 / FOUR_PI, 0.1) == 0.0
    t = 0.3 * total / FOUR_PI
    k = find_k_for_time(u0, t, 0.1)
    assert truncated_l1(u0, k) * 1.1 / FOUR_PI == pytest.approx(t, rel=1e-12)
    assert k <= k_bound(u0, 2.0, t, 0.1)
    with pytest.raises(ValueError):
        find_k_for_time(u0, -1.0, 0.1)


def test_theorem_1_1_cigar_stable_across_mu():
    cfg = SolverConfig(n=256, dt=2e-3)
    g = cfg.make_grid()
    reps = [audit_theorem_1_1(cigar_initial(mu, g), 0.0, 0.1, cfg) for mu in (1e-2, 1e-4, 1e-6)]
    assert all(r.passed for r in reps)
    assert empirical_spread(reps) <= 3.0


def test_theorem_1_1_hyperbolic_data_waits_past_horizon():
    # h has mass of order 1/eps on the truncated disk, so t0 is far beyond the default horizon
    cfg = SolverConfig(n=128, dt=1e-2)
    g = cfg.make_grid()
    rep = audit_theorem_1_1(ConformalField(g, h(g.r)), 0.0, 0.1, cfg)
    assert rep.extra["status"] == "not reached" and rep.extra["t0"] > cfg.t_max
    with pytest.raises(ValueError):
        audit_theorem_1_1(cigar_initial(0.1, g), 0.0, 0.1, cfg, t=0.1)


def test_not_reached_is_failure():
    cfg = SolverConfig(n=64, dt=1e-2, t_max=0.1)
    g = cfg.make_grid()
    rep = audit_theorem_1_1(cigar_initial(0.1, g), 0.0, 0.1, cfg)
    assert not rep.passed and rep.extra["status"] == "not reached"


def test_theorem_1_3_trivial_and_bump():
    cfg = SolverConfig(n=128, dt=5e-3)
    g = cfg.make_grid()
    rep = audit_theorem_1_3(ConformalField(g, 2.0 * h(g.r)), 2.0, 0.1, cfg)
    assert rep.passed and rep.extra["t0"] == 0.0 and rep.extra["C"] == pytest.approx(1.0)
    u0 = ConformalField(g, bump_over_h(center=0j)(g.z))
    c = [audit_theorem_1_3(ConformalField(RadialGrid(n), bump_over_h(center=0j)(RadialGrid(n).z)), 1.0, 1.0,
                           SolverConfig(n=n, dt=dt)).extra["C"] for n, dt in ((128, 4e-3), (256, 1e-3))]
    assert all(np.isfinite(c)) and abs(c[1] / c[0] - 1) < 0.05
    assert audit_theorem_1_3(u0, 1.0, 1.0, cfg).passed


def test_theorem_4_1_branches():
    cfg = SolverConfig(n=128, dt=5e-3)
    g = cfg.make_grid()
    u0 = constant_family(g, seed=4, count=1)[0]
    total = integrate(u0.values, g)
    small = audit_theorem_4_1(u0, 2.0, 0.2, 0.2 * total / FOUR_PI, cfg)
    assert small.passed and small.extra["branch"] == "bisection"
    big = audit_theorem_4_1(u0, 2.0, 0.2, 1.3 * total / FOUR_PI, cfg)
    assert big.passed and big.extra["branch"] == "k=0" and big.lhs == 0.0


def test_sharpness_table():
    rep, rows = sharpness_sweep([1e-2, 1e-4, 1e-6], 0.1)
    pre = [r["value"] for r in rows if r["t"] == pytest.approx(0.9)]
    post = [r["value"] for r in rows if r["t"] == pytest.approx(1.1)]
    assert post[0] > post[1] > post[2]
    assert rep.extra["mass_error"] <= 1e-10
    # growth per decade is 10^delta * L(mu) / L(mu/10) with L(mu) = log(1/mu + 1)
    mus = [1e-2, 1e-4, 1e-6]
    L = lambda m: math.log1p(1 / m)  # noqa: E731
    for m0, m1, a, b in zip(mus, mus[1:], pre, pre[1:]):
        expected = (m0 / m1) ** 0.1 * L(m0) / L(m1) * ((1 + m0) / (1 + m1)) ** 0.9
        assert b / a == pytest.approx(expected, rel=1e-12)


def test_sharpness_blows_up_below_critical_scale():
    # increase sets in once mu^-delta beats log(1/mu), i.e. for mu below exp(-1/delta)
    rep, _ = sharpness_sweep([1e-6, 1e-10, 1e-20, 1e-40, 1e-80], 0.1, growth=1.0)
    assert rep.passed and rep.extra["pre"][-1] > 10 * rep.extra["pre"][0]
    rep, _ = sharpness_sweep([1e-2, 1e-4, 1e-6], 0.5, growth=1.0)
    assert rep.passed
    with pytest.raises(ValueError):
        sharpness_sweep([1e-4, 1e-2], 0.1)


def test_delta_mass():
    assert delta_mass_error(1e-6, 0.5, 0.5) == pytest.approx(0.20, abs=5e-3)
    assert delta_mass_error(1e-12, 0.5, 0.5) == pytest.approx(0.10, abs=5e-3)
    assert delta_mass_check([1e-6, 1e-9, 1e-12], 0.5, 0.5).passed
    assert not delta_mass_check([1e-12, 1e-6], 0.5, 0.5).passed
    with pytest.raises(ValueError):
        delta_mass_error(1e-6, 1.0, 0.5)


def test_bootstrap_rescale():
    g = RadialGrid(257, eps=0.0, radius=0.9)
    v = ConformalField(g, h(g.r))
    assert bootstrap_rescale(v).values[0] == pytest.approx(1.0)
    tt = 0.3
    assert bootstrap_rescale(ConformalField(g, Hyperbolic(1.0)(g.r, tt))).values[0] == pytest.approx(2 * tt + 1)
    d = DiskGrid(32)
    out = bootstrap_rescale(ConformalField(d, h(d.r)))
    np.testing.assert_allclose(out.values, h(d.r / 2) / 4, rtol=1e-2)


def test_claim2():
    rep = claim2_inequality_check(1.0, [0.0, 0.3, 0.9])
    assert rep.passed and rep.margin == 0.0
    rep = claim2_inequality_check(4.0, [0.0, 0.3])
    assert rep.passed and rep.extra["strict"]
    with pytest.raises(ValueError):
        claim2_inequality_check(4.0, [0.6])
    with pytest.raises(ValueError):
        claim2_inequality_check(0.5, [0.1])


def test_mobius_invariants():
    inv = mobius_invariants(bump_over_h(), MobiusMap(0.3 + 0.15j, 0.4), 1.0, DiskGrid(256))
    assert inv["sup"][2] < 1e-3 and inv["mass"][2] < 1e-2


def test_config_validation():
    cfg = ExperimentConfig(mu=1e-3, solver={"n": 64})
    assert cfg.mu == (1e-3,) and cfg.solver.n == 64
    assert cfg.to_dict()["solver"]["n"] == 64
    for bad in ({"delta": 0.0}, {"delta": 2.0}, {"p": 1.0}, {"mu": [-1.0]}, {"k": -1.0}):
        with pytest.raises(ValueError):
            ExperimentConfig(**bad)
    with pytest.raises(ValueError):
        SolverConfig(grid="square")
    assert isinstance(SolverConfig(grid="disk", n=32).make_grid(), DiskGrid)


def test_cigar_initial_pointwise_for_moderate_mu():
    g = RadialGrid(512)
    u = cigar_initial(0.1, g)
    # the last cell is a half cell, so its average sits off the node value
    np.testing.assert_allclose(u.values[:-1], CigarScaled(0.1)(g.r[:-1], 0.0), rtol=1e-4)
