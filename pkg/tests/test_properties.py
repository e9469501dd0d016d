"""Property-based checks of invariants that hold for all admissible inputs."""
import math

import numpy as np
from hypothesis import given, settings, strategies as st

from logdiff.discretization import ConformalField, RadialGrid, integrate, truncated_l1
from logdiff.exact import CigarScaled, cigar_l1_mass
from logdiff.geometry import Annulus, MobiusMap, Punctured, h
from logdiff.harness import SmoothingGamma, build_v0, find_k_for_time, gamma_eval, k_bound

unit = st.floats(0.0, 0.95)
angle = st.floats(0.0, 2 * math.pi)
mus = st.floats(1e-12, 1.0)

GRID = RadialGrid(128)


def _point(r, a):
    return r * complex(math.cos(a), math.sin(a))


@given(unit, angle, unit, angle, angle)
def test_mobius_maps_disk_to_disk_and_preserves_h(ra, aa, rz, az, theta):
    m = MobiusMap(0.9 * _point(ra, aa), theta)
    z = _point(rz, az)
    w = complex(m(z))
    assert abs(w) < 1.0
    lhs = float(h(abs(w))) * float(m.derivative_factor(z))
    assert math.isclose(lhs, float(h(abs(z))), rel_tol=1e-8)


@given(st.floats(0.05, 0.9), st.floats(0.01, 0.99))
def test_metric_ordering(a, s):
    r = a + s * (1 - a)
    if not a < r < 1:
        return
    assert h(r) < Punctured().factor(r) < Annulus(a).factor(r)


@given(mus, st.floats(0.0, 3.0), st.floats(0.05, 1.0))
def test_cigar_mass_bounded_and_monotone_in_r(mu, t, r):
    m = cigar_l1_mass(mu, t, r)
    assert 0 < m <= 4 * math.pi * (1 + 1e-12)
    assert m <= cigar_l1_mass(mu, t, 1.0) * (1 + 1e-12)


@given(mus, st.floats(0.0, 2.0))
def test_cigar_radially_decreasing(mu, t):
    u = CigarScaled(mu)(np.linspace(0, 1, 11), t)
    assert np.all(np.diff(u) <= 0) and np.all(u > 0)


@given(st.floats(1e-6, 1.0), st.floats(-5.0, 5.0))
def test_gamma_dominates(mu, x):
    g = gamma_eval(SmoothingGamma(mu), x)
    assert g >= 0 and g >= x and g <= max(x, 0) + mu / 4 + 1e-15


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-4, 1.0), st.floats(0.1, 5.0), st.floats(0.0, 0.5), st.floats(0.02, 0.2))
def test_build_v0_postconditions(mu, amp, c, width):
    hv = h(GRID.r)
    u0 = ConformalField(GRID, 0.5 + amp * np.exp(-((GRID.r - c) ** 2) / (2 * width**2)))
    v0 = build_v0(u0, hv, SmoothingGamma(mu)).values
    x = u0.values - hv
    assert np.all(v0 >= hv) and np.all(v0 >= u0.values)
    assert np.all(v0[x <= -mu] == hv[x <= -mu]) and np.all(v0[x >= mu] == u0.values[x >= mu])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.05, 1.0), st.floats(0.02, 0.98), st.floats(1.1, 4.0))
def test_k_solves_mass_equation_and_obeys_bound(amp, delta, frac, p):
    u0 = ConformalField(GRID, 0.3 + amp * np.exp(-(GRID.r**2) / 0.02))
    total = integrate(u0.values, GRID)
    t = frac * total * (1 + delta) / (4 * math.pi)
    k = find_k_for_time(u0, t, delta)
    assert math.isclose(truncated_l1(u0, k) * (1 + delta) / (4 * math.pi), t, rel_tol=1e-9)
    assert k <= k_bound(u0, p, t, delta) * (1 + 1e-12)


@given(st.lists(st.floats(0.1, 10.0), min_size=2, max_size=2))
def test_truncated_l1_monotone(ks):
    u = ConformalField(GRID, 1 + 5 * np.exp(-GRID.r**2 / 0.05))
    lo, hi = sorted(ks)
    assert truncated_l1(u, hi) <= truncated_l1(u, lo)
