import math

import numpy as np
import pytest

from logdiff.discretization import DiskGrid, RadialGrid
from logdiff.exact import (CigarScaled, CigarUnscaled, ConstantSolution, Hyperbolic, MobiusPullback, Rescaled,
                           cigar_l1_mass, evaluate, residual)
from logdiff.geometry import DiskPoint, DomainError, MobiusMap


def test_point_values():
    assert evaluate(CigarUnscaled(), DiskPoint(0, 0), 0.0) == pytest.approx(1.0)
    assert evaluate(Hyperbolic(1.0, 1.0), 0.0, 0.0) == pytest.approx(4.0)
    mu, d = 1e-4, 0.1
    expected = 4 / (math.log(1 / mu + 1) * (1 + mu) ** (1 - d) * mu**d)
    assert evaluate(CigarScaled(mu), 0.0, 1 - d) == pytest.approx(expected, rel=1e-12)


def test_tiny_mu_does_not_underflow():
    u = CigarScaled(1e-300)(np.array([0.0, 0.5]), 0.0)
    assert np.all(np.isfinite(u)) and np.all(u > 0)


def test_domain_and_time_errors():
    with pytest.raises(DomainError):
        evaluate(Hyperbolic(1.0, 0.5), 0.6, 0.0)
    with pytest.raises(ValueError):
        evaluate(CigarUnscaled(), 0.0, -1.0)
    with pytest.raises(ValueError):
        CigarScaled(0.0)
    with pytest.raises(ValueError):
        Hyperbolic(1.0, 1.5)


def test_cigar_mass():
    for mu in (1.0, 1e-4, 1e-12):
        assert cigar_l1_mass(mu, 0.0, 1.0) == pytest.approx(4 * math.pi, rel=1e-13)
    t = 0.3
    c = 2**t
    assert cigar_l1_mass(1.0, t, 1.0) == pytest.approx(4 * math.pi * math.log((c + 1) / c) / math.log(2), rel=1e-13)
    e6 = abs(cigar_l1_mass(1e-6, 0.5, 0.5) - 2 * math.pi)
    e12 = abs(cigar_l1_mass(1e-12, 0.5, 0.5) - 2 * math.pi)
    assert cigar_l1_mass(1e-12, 0.5, 0.5) < 2 * math.pi and e12 < e6
    with pytest.raises(ValueError):
        cigar_l1_mass(0.1, 0.0, 1.5)


def test_mass_concentrates():
    gaps = [cigar_l1_mass(mu, 0.5, 1.0) - cigar_l1_mass(mu, 0.5, 0.5) for mu in (1e-4, 1e-8, 1e-12)]
    assert gaps[0] > gaps[1] > gaps[2] > 0


def _ladder(sol, grid_of, t=0.3, dt=1e-4):
    return [float(np.max(residual(sol, grid_of(n), t, dt))) for n in (128, 256, 512)]


@pytest.mark.parametrize("sol", [Hyperbolic(0.5), Hyperbolic(3.0, 0.5), CigarScaled(0.1), CigarUnscaled(),
                                 Rescaled(CigarScaled(0.1), 2.0), ConstantSolution(2.0)])
def test_radial_residuals_second_order(sol):
    errs = _ladder(sol, lambda n: RadialGrid(n, eps=0.125, radius=min(1.0, getattr(sol, "domain_radius", 1.0))))
    if errs[0] < 1e-9:
        return  # exact on the stencil
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_mobius_pullback_residual_converges():
    sol = MobiusPullback(CigarUnscaled(), MobiusMap(0.3 + 0.2j, 0.4))
    errs = [float(np.max(residual(sol, DiskGrid(n, eps=0.125), 0.3, 1e-4))) for n in (64, 128)]
    assert errs[0] / errs[1] > 3.5


def test_mobius_pullback_requires_whole_disk():
    with pytest.raises(ValueError):
        MobiusPullback(Hyperbolic(1.0, 0.5), MobiusMap(0.1))


def test_rescaling_law():
    base = CigarScaled(0.1)
    lam = 2.0
    r = np.linspace(0, 0.9, 7)
    np.testing.assert_allclose(Rescaled(base, lam)(r, 0.4), lam * base(r, 0.2), rtol=1e-14)
