"""Seeded initial data: Gaussian bumps on top of ``h`` or of a constant."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .discretization import ConformalField, RadialGrid, integrate
from .geometry import h


def cutoff(r, r_in: float, r_out: float) -> np.ndarray:
    """Smooth step equal to 1 for ``r <= r_in`` and 0 for ``r >= r_out``."""
    s = np.clip((np.asarray(r, dtype=float) - r_in) / (r_out - r_in), 0.0, 1.0)

    def f(x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = np.exp(-1.0 / x[pos])
        return out

    return f(1.0 - s) / (f(1.0 - s) + f(s))


@dataclass(frozen=True)
class BumpSpec:
    centers: tuple       # radii (radial grid) or complex centres (disk grid)
    widths: tuple
    weights: tuple
    mass: float

    def profile(self, grid) -> np.ndarray:
        out = np.zeros(grid.size)
        for c, s, a in zip(self.centers, self.widths, self.weights):
            if isinstance(grid, RadialGrid):
                # even extension in r, so the ring is smooth through the origin
                c = float(np.real(c))
                out += a * (np.exp(-0.5 * (grid.r - c) ** 2 / s**2) + np.exp(-0.5 * (grid.r + c) ** 2 / s**2))
            else:
                out += a * np.exp(-0.5 * np.abs(grid.z - complex(c)) ** 2 / s**2)
        return out


def random_bumps(rng: np.random.Generator, grid, mass_range=(0.25, 1.0), max_center=0.3,
                 width_range=(0.06, 0.15)) -> BumpSpec:
    k = int(rng.integers(1, 6))
    widths = tuple(rng.uniform(*width_range, size=k))
    weights = tuple(rng.uniform(0.2, 1.0, size=k))
    if isinstance(grid, RadialGrid):
        centers = tuple(rng.uniform(0.0, max_center, size=k))
    else:
        rad = max_center * np.sqrt(rng.uniform(size=k))
        ang = rng.uniform(0, 2 * np.pi, size=k)
        centers = tuple(rad * np.exp(1j * ang))
    return BumpSpec(centers, widths, weights, float(rng.uniform(*mass_range)))


def bumps_field(grid, bumps: BumpSpec, r_in: float = 0.3, r_out: float = 0.5) -> np.ndarray:
    """Bump profile cut off outside ``B_{r_out}``, normalised to ``bumps.mass``."""
    prof = bumps.profile(grid) * cutoff(grid.r, r_in, r_out)
    return prof * (bumps.mass / integrate(prof, grid))


def harnack_family(grid, seed: int = 0, count: int = 10, **kw) -> List[ConformalField]:
    """``v0 = h + bumps`` with ``v0 = h`` outside ``B_{1/2}`` and ``||v0 - h||_1 <= 1``."""
    rng = np.random.default_rng(seed)
    out = []
    hv = h(grid.r)
    for _ in range(count):
        bumps = random_bumps(rng, grid, **kw)
        out.append(ConformalField(grid, hv + bumps_field(grid, bumps)))
    return out


def constant_family(grid, seed: int = 0, count: int = 10, base: Optional[float] = None,
                    mass_range=(0.5, 3.0)) -> List[ConformalField]:
    """``u0 = c + bumps`` (not dominated by ``h``); used for the ``v0`` construction."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = float(rng.uniform(0.2, 2.0)) if base is None else base
        bumps = random_bumps(rng, grid, mass_range=mass_range, width_range=(0.04, 0.12))
        vals = np.maximum(c + bumps_field(grid, bumps, r_in=0.4, r_out=0.7), 1e-12)
        out.append(ConformalField(grid, vals))
    return out
