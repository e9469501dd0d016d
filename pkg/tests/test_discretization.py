import math

import numpy as np
import pytest

from logdiff.discretization import (ConformalField, DiskGrid, RadialGrid, integrate, laplacian, lp_norm,
                                    read_field_csv, sample, sup_region, truncated_l1, write_field_csv)
from logdiff.exact import CigarScaled, cigar_l1_mass
from logdiff.geometry import DomainError, h
from logdiff.harness import cigar_initial


@pytest.fixture(params=["radial", "disk"])
def grid(request):
    return RadialGrid(128) if request.param == "radial" else DiskGrid(64)


def test_grid_validation():
    with pytest.raises(ValueError):
        RadialGrid(8)
    with pytest.raises(ValueError):
        RadialGrid(64, eps=0.5)
    with pytest.raises(ValueError):
        DiskGrid(8)


def test_weights_are_cell_areas():
    g = RadialGrid(100, eps=0.1)
    assert g.weights.sum() == pytest.approx(math.pi * g.R**2, rel=1e-14)
    assert g.region_weights(0.5).sum() == pytest.approx(math.pi * 0.25, rel=1e-14)
    d = DiskGrid(256, eps=0.0)
    assert d.region_weights(0.5).sum() == pytest.approx(math.pi * 0.25, rel=1e-3)


def test_laplacian_of_r_squared(grid):
    lap = laplacian(np.abs(grid.z) ** 2, grid)
    np.testing.assert_allclose(lap, 4.0, rtol=1e-10)


def test_laplacian_of_constant(grid):
    assert np.max(np.abs(laplacian(np.full(grid.size, 2.5), grid))) < 1e-9


def test_laplacian_of_log_h_second_order():
    errs = []
    for n in (64, 128, 256):
        g = RadialGrid(n, eps=0.1)
        errs.append(np.max(np.abs(laplacian(np.log(h(g.r)), g) / (2 * h(g.r[:-1])) - 1)))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_laplacian_needs_boundary(grid):
    inner = np.ones(int(grid.interior.sum()))
    with pytest.raises(ValueError):
        laplacian(inner, grid)
    out = laplacian(inner, grid, boundary=1.0)
    assert np.max(np.abs(out)) < 1e-9


def test_area_and_masses():
    g = RadialGrid(256, eps=0.0)
    assert integrate(np.ones(g.size), g) == pytest.approx(math.pi, rel=1e-14)
    u = cigar_initial(0.01, g)
    assert lp_norm(u, 1) == pytest.approx(4 * math.pi, rel=1e-12)
    g2 = RadialGrid(256)
    u2 = cigar_initial(0.01, g2)
    assert truncated_l1(u2, 0.0) == pytest.approx(cigar_l1_mass(0.01, 0.0, g2.R), rel=1e-12)
    point = ConformalField(g2, CigarScaled(0.1)(g2.r, 0.0))
    assert lp_norm(point, 1) == pytest.approx(cigar_l1_mass(0.1, 0.0, g2.R), rel=1e-3)


def test_lp_norm_scaling_and_errors():
    g = RadialGrid(64)
    u = ConformalField(g, np.full(g.size, 2.0))
    area = g.weights.sum()
    assert lp_norm(u, 3) == pytest.approx(2.0 * area ** (1 / 3), rel=1e-13)
    with pytest.raises(ValueError):
        lp_norm(u, 0.5)


def test_truncated_l1():
    g = RadialGrid(128)
    hv = h(g.r)
    assert truncated_l1(ConformalField(g, hv * 0.5), ConformalField(g, hv)) == 0.0
    assert truncated_l1(ConformalField(g, hv + 1), ConformalField(g, hv)) == pytest.approx(math.pi * g.R**2)
    u = ConformalField(g, 1 + g.r)
    vals = [truncated_l1(u, k) for k in np.linspace(0, 2, 9)]
    assert vals[0] == pytest.approx(lp_norm(u, 1))
    assert all(b <= a for a, b in zip(vals, vals[1:])) and vals[-1] == 0.0


def test_sup_region():
    g = RadialGrid(129, eps=0.0, radius=0.5)
    u = ConformalField(g, h(g.r))
    assert sup_region(u, 0.5) == pytest.approx(64 / 9, rel=1e-14)
    dec = ConformalField(g, 2 - g.r)
    assert sup_region(dec) == 2.0
    with pytest.raises(ValueError):
        sup_region(ConformalField(RadialGrid(16, eps=0.0, radius=1.0), np.ones(16)), region=-1.0)


def test_field_validation():
    g = RadialGrid(16)
    with pytest.raises(ValueError):
        ConformalField(g, np.zeros(16))
    with pytest.raises(ValueError):
        ConformalField(g, np.ones(15))
    u = ConformalField(g, np.ones(16))
    with pytest.raises(ValueError):
        u.values[0] = 2.0
    assert (2 * u).values[0] == 2.0


def test_disk_interpolation(grid):
    if isinstance(grid, RadialGrid):
        with pytest.raises(DomainError):
            grid.interpolate(np.ones(grid.size), [1.0])
        return
    u = sample(grid, lambda z: 4 + z.real + 2 * z.imag)
    pts = np.array([0.1 + 0.2j, -0.3 + 0.05j])
    np.testing.assert_allclose(grid.interpolate(u.values, pts), 4 + pts.real + 2 * pts.imag, rtol=1e-12)
    with pytest.raises(DomainError):
        grid.interpolate(u.values, [0.999 + 0j])


def test_csv_roundtrip(tmp_path, grid):
    u = sample(grid, lambda z: 1 + np.abs(z) ** 2, t=0.0)
    path = write_field_csv(u, tmp_path / "u.csv")
    back = read_field_csv(path, grid=grid)
    np.testing.assert_array_equal(back.values, u.values)
    if isinstance(grid, RadialGrid):
        again = read_field_csv(path)
        assert again.grid.n == grid.n and again.grid.R == pytest.approx(grid.R)
