"""Grids, conformal-factor fields, the shared Laplacian stencil and quadrature.

Two grids are supported:

``RadialGrid``
    uniform nodes on ``[0, R]`` with ``R = radius * (1 - eps)``; radial
    functions only. The Laplacian is the conservative form of
    ``f'' + f'/r`` with the symmetric ghost node at the origin.
``DiskGrid``
    Cartesian cells whose centres satisfy ``|x| <= R``; standard 5-point
    stencil.

On both grids the outermost nodes (the last radial node, or the ring of
active cells touching an inactive neighbour) are *boundary* nodes: the
Laplacian is only formed on interior nodes and uses the boundary values as a
Dirichlet closure. Quadrature weights are exact cell areas.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from .geometry import DomainError


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class RadialGrid:
    def __init__(self, n: int, eps: float = 1.0 / 64, radius: float = 1.0):
        if n < 16:
            raise ValueError(f"radial grids need n >= 16, got {n}")
        # eps = 0 is allowed for closed forms that are smooth up to |x| = radius
        if not 0.0 <= eps <= 0.2:
            raise ValueError(f"eps must lie in [0, 0.2], got {eps}")
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.n = int(n)
        self.eps = float(eps)
        self.radius = float(radius)
        self.R = self.radius * (1.0 - self.eps)
        self.r = _readonly(np.linspace(0.0, self.R, self.n))
        self.dr = self.R / (self.n - 1)

    kind = "radial"

    def __repr__(self):
        return f"RadialGrid(n={self.n}, eps={self.eps}, radius={self.radius})"

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and (self.n, self.eps, self.radius) == (other.n, other.eps, other.radius)

    def __hash__(self):
        return hash(("radial", self.n, self.eps, self.radius))

    def describe(self) -> dict:
        return {"kind": "radial", "n": self.n, "eps": self.eps, "radius": self.radius}

    @property
    def size(self) -> int:
        return self.n

    @cached_property
    def x(self):
        return self.r

    @cached_property
    def y(self):
        return _readonly(np.zeros(self.n))

    @cached_property
    def z(self):
        z = self.r.astype(complex)
        z.setflags(write=False)
        return z

    @cached_property
    def edges(self) -> np.ndarray:
        e = np.empty(self.n + 1)
        e[0] = 0.0
        e[1:-1] = 0.5 * (self.r[1:] + self.r[:-1])
        e[-1] = self.R
        return _readonly(e)

    @cached_property
    def weights(self) -> np.ndarray:
        e = self.edges
        return _readonly(np.pi * (e[1:] ** 2 - e[:-1] ** 2))

    @cached_property
    def interior(self) -> np.ndarray:
        m = np.ones(self.n, dtype=bool)
        m[-1] = False
        m.setflags(write=False)
        return m

    @property
    def boundary(self) -> np.ndarray:
        return ~self.interior

    @cached_property
    def stencil(self):
        """``(lower, diag, upper)`` coefficients of the Laplacian rows 0..n-2."""
        n, dr, r, e = self.n, self.dr, self.r, self.edges
        lower = np.zeros(n - 1)
        diag = np.empty(n - 1)
        upper = np.empty(n - 1)
        diag[0] = -4.0 / dr**2
        upper[0] = 4.0 / dr**2
        ri = r[1:-1]
        lower[1:] = e[1:-2] / (ri * dr**2)
        upper[1:] = e[2:-1] / (ri * dr**2)
        diag[1:] = -(lower[1:] + upper[1:])
        return _readonly(lower), _readonly(diag), _readonly(upper)

    @cached_property
    def laplacian_matrix(self) -> sp.csr_matrix:
        lower, diag, upper = self.stencil
        m = self.n - 1
        rows = np.concatenate([np.arange(1, m), np.arange(m), np.arange(m)])
        cols = np.concatenate([np.arange(0, m - 1), np.arange(m), np.arange(1, m + 1)])
        vals = np.concatenate([lower[1:], diag, upper])
        return sp.csr_matrix((vals, (rows, cols)), shape=(m, self.n))

    def region_weights(self, rho: Optional[float] = None) -> np.ndarray:
        if rho is None or rho >= self.R:
            return self.weights
        e = self.edges
        hi = np.clip(e[1:], 0.0, rho)
        lo = np.clip(e[:-1], 0.0, rho)
        return np.pi * (hi**2 - lo**2)

    def interpolate(self, values, points) -> np.ndarray:
        rr = np.abs(np.asarray(points))
        if np.any(rr > self.R + 1e-14):
            raise DomainError("interpolation point outside the radial grid")
        return np.interp(rr, self.r, values)


class DiskGrid:
    def __init__(self, N: int, eps: float = 1.0 / 64, radius: float = 1.0):
        if N < 16:
            raise ValueError(f"disk grids need N >= 16 cells per axis, got {N}")
        if not 0.0 <= eps <= 0.2:
            raise ValueError(f"eps must lie in [0, 0.2], got {eps}")
        self.N = int(N)
        self.eps = float(eps)
        self.radius = float(radius)
        self.R = self.radius * (1.0 - self.eps)
        self.hx = 2.0 * self.radius / self.N
        self.centers = _readonly(-self.radius + (np.arange(self.N) + 0.5) * self.hx)
        X, Y = np.meshgrid(self.centers, self.centers, indexing="ij")
        mask = np.hypot(X, Y) <= self.R
        _, ncomp = ndimage.label(mask)
        if ncomp != 1:
            raise ValueError("disk mask is not connected")
        self.mask = mask
        self.mask.setflags(write=False)
        index = -np.ones(mask.shape, dtype=np.int64)
        index[mask] = np.arange(mask.sum())
        self.index = index
        self.index.setflags(write=False)
        self.x = _readonly(X[mask])
        self.y = _readonly(Y[mask])
        self.r = _readonly(np.hypot(self.x, self.y))

    kind = "disk"

    def __repr__(self):
        return f"DiskGrid(N={self.N}, eps={self.eps}, radius={self.radius})"

    def __eq__(self, other):
        return isinstance(other, DiskGrid) and (self.N, self.eps, self.radius) == (other.N, other.eps, other.radius)

    def __hash__(self):
        return hash(("disk", self.N, self.eps, self.radius))

    def describe(self) -> dict:
        return {"kind": "disk", "n": self.N, "eps": self.eps, "radius": self.radius}

    @property
    def n(self) -> int:
        return self.N

    @property
    def size(self) -> int:
        return self.x.size

    @cached_property
    def z(self):
        z = self.x + 1j * self.y
        z.setflags(write=False)
        return z

    @cached_property
    def weights(self) -> np.ndarray:
        return _readonly(np.full(self.size, self.hx**2))

    @cached_property
    def _neighbours(self):
        idx = np.pad(self.index, 1, constant_values=-1)
        I, J = np.nonzero(self.mask)
        I, J = I + 1, J + 1
        return np.stack([idx[I - 1, J], idx[I + 1, J], idx[I, J - 1], idx[I, J + 1]], axis=1)

    @cached_property
    def interior(self) -> np.ndarray:
        m = np.all(self._neighbours >= 0, axis=1)
        m.setflags(write=False)
        return m

    @property
    def boundary(self) -> np.ndarray:
        return ~self.interior

    @cached_property
    def laplacian_matrix(self) -> sp.csr_matrix:
        rows_int = np.nonzero(self.interior)[0]
        m = rows_int.size
        nb = self._neighbours[rows_int]
        k = np.arange(m)
        rows = np.concatenate([k, np.repeat(k, 4)])
        cols = np.concatenate([rows_int, nb.ravel()])
        inv = 1.0 / self.hx**2
        vals = np.concatenate([np.full(m, -4.0 * inv), np.full(4 * m, inv)])
        return sp.csr_matrix((vals, (rows, cols)), shape=(m, self.size))

    def region_weights(self, rho: Optional[float] = None, sub: int = 16) -> np.ndarray:
        if rho is None or rho >= self.R + self.hx:
            return self.weights
        half = 0.5 * self.hx * np.sqrt(2.0)
        w = np.where(self.r + half <= rho, self.hx**2, 0.0)
        cut = np.nonzero(np.abs(self.r - rho) < half)[0]
        if cut.size:
            off = (np.arange(sub) + 0.5) / sub - 0.5
            ox, oy = np.meshgrid(off * self.hx, off * self.hx, indexing="ij")
            px = self.x[cut, None] + ox.ravel()[None, :]
            py = self.y[cut, None] + oy.ravel()[None, :]
            frac = np.mean(np.hypot(px, py) <= rho, axis=1)
            w[cut] = frac * self.hx**2
        return w

    def to_image(self, values) -> np.ndarray:
        img = np.full(self.mask.shape, np.nan)
        img[self.mask] = values
        return img

    def interpolate(self, values, points) -> np.ndarray:
        """Bilinear interpolation of an active-cell field at complex ``points``."""
        pts = np.asarray(points, dtype=complex)
        img = self.to_image(values)
        fx = (pts.real + self.radius) / self.hx - 0.5
        fy = (pts.imag + self.radius) / self.hx - 0.5
        i0 = np.floor(fx).astype(int)
        j0 = np.floor(fy).astype(int)
        ok = (i0 >= 0) & (j0 >= 0) & (i0 + 1 < self.N) & (j0 + 1 < self.N)
        if not np.all(ok):
            raise DomainError("interpolation point outside the disk grid support")
        tx, ty = fx - i0, fy - j0
        v = (img[i0, j0] * (1 - tx) * (1 - ty) + img[i0 + 1, j0] * tx * (1 - ty)
             + img[i0, j0 + 1] * (1 - tx) * ty + img[i0 + 1, j0 + 1] * tx * ty)
        if np.any(np.isnan(v)):
            raise DomainError("interpolation stencil leaves the active disk cells")
        return v


Grid = Union[RadialGrid, DiskGrid]


@dataclass(frozen=True, eq=False)
class ConformalField:
    """Positive conformal factor sampled on a grid at time ``t``."""

    grid: Grid
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = _readonly(self.values)
        if v.shape != (self.grid.size,):
            raise ValueError(f"field has shape {v.shape}, grid has {self.grid.size} nodes")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("conformal factor samples must be finite and strictly positive")
        if self.t < 0:
            raise ValueError("time stamp must be nonnegative")
        object.__setattr__(self, "values", v)

    def __mul__(self, c: float) -> "ConformalField":
        return ConformalField(self.grid, self.values * c, self.t)

    __rmul__ = __mul__

    def with_values(self, values, t: Optional[float] = None) -> "ConformalField":
        return ConformalField(self.grid, values, self.t if t is None else t)


def sample(grid: Grid, fn, t: float = 0.0) -> ConformalField:
    """Sample a closed form ``fn(z)`` (complex argument) on ``grid``."""
    return ConformalField(grid, np.asarray(fn(grid.z), dtype=float), t)


def _values(u) -> np.ndarray:
    return np.asarray(u.values if hasattr(u, "values") else u, dtype=float)


# ---------------------------------------------------------------------------
# stencil
# ---------------------------------------------------------------------------

def laplacian(f, grid: Grid, boundary=None) -> np.ndarray:
    """Discrete Laplacian of ``f`` on the interior nodes of ``grid``.

    ``f`` holds values at every node (boundary values close the stencil), or
    only interior values together with ``boundary``.
    """
    f = _values(f)
    if f.shape == (grid.size,):
        full = f
    elif boundary is not None and f.shape == (int(grid.interior.sum()),):
        full = np.empty(grid.size)
        full[grid.interior] = f
        full[grid.boundary] = boundary
    else:
        raise ValueError("laplacian needs boundary values to close the stencil")
    return grid.laplacian_matrix @ full


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def integrate(f, grid: Grid, region: Optional[float] = None) -> float:
    return float(np.dot(grid.region_weights(region), _values(f)))


def lp_norm(u, p: float = 1.0, region: Optional[float] = None, grid: Optional[Grid] = None) -> float:
    if p < 1:
        raise ValueError("lp_norm needs p >= 1")
    grid = grid or u.grid
    a = np.abs(_values(u))
    if p == 1:
        return integrate(a, grid, region)
    # scale out the maximum before powering to avoid overflow
    s = float(a.max()) or 1.0
    return s * integrate((a / s) ** p, grid, region) ** (1.0 / p)


def truncated_l1(u, barrier, region: Optional[float] = None, grid: Optional[Grid] = None) -> float:
    """``int max(u - barrier, 0) dA``; ``barrier`` is a field or a constant."""
    grid = grid or u.grid
    b = _values(barrier) if not np.isscalar(barrier) else float(barrier)
    return integrate(np.maximum(_values(u) - b, 0.0), grid, region)


def sup_region(u, region: Optional[float] = None, grid: Optional[Grid] = None) -> float:
    grid = grid or u.grid
    vals = _values(u)
    sel = np.ones(grid.size, dtype=bool) if region is None else grid.r <= region
    if not np.any(sel):
        raise ValueError(f"no grid node lies in the region |x| <= {region}")
    return float(np.max(vals[sel]))


# ---------------------------------------------------------------------------
# snapshot CSV
# ---------------------------------------------------------------------------

def write_field_csv(u: ConformalField, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    g = u.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if isinstance(g, RadialGrid):
            w.writerow(["r", "u"])
            for r, v in zip(g.r, u.values):
                w.writerow([f"{r:.17g}", f"{v:.17g}"])
        else:
            w.writerow(["x", "y", "u"])
            for x, y, v in zip(g.x, g.y, u.values):
                w.writerow([f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"])
    return path


def read_field_csv(path, grid: Optional[Grid] = None, t: float = 0.0) -> ConformalField:
    """Read a snapshot written by :func:`write_field_csv`.

    For radial files the grid is reconstructed from the node list unless given.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    if header == ["r", "u"]:
        if grid is None:
            r = body[:, 0]
            grid = RadialGrid(len(r), eps=1.0 - r[-1])
        return ConformalField(grid, body[:, 1], t)
    if header == ["x", "y", "u"]:
        if grid is None:
            raise ValueError("disk snapshots need the DiskGrid they were written from")
        return ConformalField(grid, body[:, 2], t)
    raise ValueError(f"unrecognised snapshot header {header}")
