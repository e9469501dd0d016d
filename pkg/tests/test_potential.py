import math

import numpy as np
import pytest

from logdiff.discretization import ConformalField, DiskGrid, RadialGrid, laplacian
from logdiff.geometry import h
from logdiff.initial_data import harnack_family
from logdiff.potential import (brezis_merle_audit, corollary_bounds, harnack, harnack_residual, log_ratio,
                               phi_equation_residual, poisson_zero_dirichlet, potential_state)
from logdiff.solver import FlowProblem, HyperbolicTrace, solve


def _run(n, dt, t_end=0.2, seed=0, member=0):
    g = RadialGrid(n)
    v0 = harnack_family(g, seed=seed, count=member + 1)[member]
    return solve(FlowProblem(v0, HyperbolicTrace(1.0), t_end, dt))


def _self_similar(n=128, t_end=0.2, dt=1e-2):
    g = RadialGrid(n)
    return solve(FlowProblem(ConformalField(g, h(g.r)), HyperbolicTrace(1.0), t_end, dt))


@pytest.mark.parametrize("method", [None, "discrete"])
def test_poisson_trivial_and_quadratic(method):
    g = RadialGrid(257, eps=0.0)
    assert np.all(poisson_zero_dirichlet(np.zeros(g.size), g, method) == 0.0)
    psi = poisson_zero_dirichlet(np.full(g.size, 4.0), g, method)
    np.testing.assert_allclose(psi, g.r**2 - 1, atol=1e-4)
    assert psi[0] == pytest.approx(-1.0, abs=1e-4)


def test_poisson_disk_grid():
    g = DiskGrid(64, eps=0.0)
    psi = poisson_zero_dirichlet(np.full(g.size, 4.0), g)
    assert np.max(np.abs(laplacian(psi, g) - 4.0)) < 1e-8
    assert np.all(psi[g.boundary] == 0.0)
    with pytest.raises(ValueError):
        poisson_zero_dirichlet(np.ones(g.size), g, "quadrature")


def test_poisson_nonnegative_source_gives_nonpositive_potential():
    g = RadialGrid(256)
    v0 = harnack_family(g, count=1)[0]
    for method in (None, "discrete"):
        psi = poisson_zero_dirichlet(v0.values - h(g.r), g, method)
        assert np.max(psi) <= 0.0


def test_potential_of_self_similar_flow_is_static():
    traj = _self_similar()
    st = potential_state(traj)
    # stencil error of log h near the rim keeps the integrand at O(dr^2 h)
    assert np.max(np.abs(log_ratio(traj))) < 1e-2
    assert np.max(np.abs(st.psi - st.psi[0][None, :])) < 2e-3
    assert np.all(st.psi0 == 0.0)


def test_laplacian_consistency_improves():
    errs = []
    for n, dt in ((128, 4e-3), (256, 1e-3)):
        st = potential_state(_run(n, dt))
        errs.append(st.laplacian_consistency()[-1])
    assert errs[1] < errs[0]


def test_harnack_self_similar_closed_form():
    traj = _self_similar()
    st = potential_state(traj)
    H = harnack(traj, st.psi).H
    assert np.all(H[0] == 0.0)
    expected = 0.5 * np.log(1 / (2 * traj.times + 1))
    np.testing.assert_allclose(H, np.broadcast_to(expected[:, None], H.shape), atol=2e-3)
    # the rim carries the boundary trace exactly
    np.testing.assert_allclose(H[:, -1], expected, atol=1e-12)


def test_harnack_forms_agree_and_nonpositive():
    traj = _run(256, 1e-3)
    st = potential_state(traj)
    Hv = harnack(traj, st.psi)
    Hp = harnack(traj, st.psi, form="potential", phi=st.phi)
    assert np.all(Hv.H[0] == 0.0)
    assert np.max(Hv.H) <= 1e-2
    inner = traj.grid.interior
    assert np.max(np.abs(Hv.H[1:, inner] - Hp.H[1:, inner])) < 5e-2
    with pytest.raises(ValueError):
        harnack(traj, st.psi, form="other")


def test_identity_residual_refines():
    peaks = []
    for n, dt in ((128, 4e-3), (256, 1e-3)):
        traj = _run(n, dt)
        st = potential_state(traj)
        _, res, drift = harnack_residual(harnack(traj, st.psi), traj)
        peaks.append(np.max(np.abs(res)))
        assert np.all(drift <= np.abs(res) + 1e-12)  # drift = -v0/v + residual <= residual
    assert peaks[0] / peaks[1] >= 2.0


def test_phi_equation_residual_small():
    traj = _run(256, 1e-3)
    res = phi_equation_residual(potential_state(traj))
    assert np.max(np.abs(res[len(res) // 2:])) < 0.05


def test_harnack_residual_needs_three_snapshots():
    traj = _self_similar(t_end=0.01, dt=1e-2)
    st = potential_state(traj)
    with pytest.raises(ValueError):
        harnack_residual(harnack(traj, st.psi), traj)


def test_corollary_bounds():
    traj = _self_similar()
    rep = corollary_bounds(traj, potential_state(traj).psi)
    assert rep.passed and rep.extra["ordering"] <= 1e-6
    traj = _run(256, 1e-3)
    rep = corollary_bounds(traj, potential_state(traj).psi)
    assert rep.passed and rep.extra["weaker_margin"] > 0 and rep.extra["stronger_margin"] > 0


def test_brezis_merle_examples():
    g = RadialGrid(256, eps=0.0)
    rep = brezis_merle_audit(np.zeros(g.size), np.zeros(g.size), 1.5, g)
    assert rep.passed and rep.lhs == pytest.approx(math.pi) and rep.rhs == pytest.approx(4 * math.pi)
    f = np.full(g.size, 1.0)  # ||f||_1 = pi, so p = 4.2 puts p||f|| at 4.2 pi
    rep = brezis_merle_audit(np.zeros(g.size), f, 4.2, g)
    assert rep.passed and rep.notes.startswith("inapplicable")
    rep = brezis_merle_audit(np.full(g.size, 1e3), np.zeros(g.size), 1.0, g)
    assert not rep.passed and "unbounded" in rep.notes


def test_brezis_merle_family():
    g = RadialGrid(256)
    delta = 0.5
    tt = (1 + delta / 2) / (4 * math.pi)
    for v0 in harnack_family(g, count=3):
        f = v0.values - h(g.r)
        psi0 = poisson_zero_dirichlet(f, g)
        rep = brezis_merle_audit(psi0 / tt, f / tt, 1 + delta / 3, g)
        assert rep.passed and rep.margin > 0
