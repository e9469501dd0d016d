"""Hyperbolic geometry of the unit disk.

Conformal factors of the complete hyperbolic metrics on the disk, on sub-balls,
on the annulus ``a < |x| < 1`` and on the punctured disk, plus disk automorphisms
and the discrete Gauss curvature of a conformal metric ``u (dx^2 + dy^2)``.

Everything here is a pure function of its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


class DomainError(ValueError):
    """A point lies outside the domain on which a metric or solution is defined."""


@dataclass(frozen=True)
class DiskPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.x * self.x + self.y * self.y < 1.0:
            raise DomainError(f"({self.x}, {self.y}) is not in the open unit disk")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @property
    def r(self) -> float:
        return float(np.hypot(self.x, self.y))


def _radius(p) -> np.ndarray:
    if isinstance(p, DiskPoint):
        return np.asarray(p.r)
    p = np.asarray(p)
    if np.iscomplexobj(p):
        return np.abs(p)
    return np.abs(p.astype(float))


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def _check(ok: np.ndarray, what: str):
    if not np.all(ok):
        raise DomainError(f"point outside the domain of the {what} metric")


@dataclass(frozen=True)
class FullDisk:
    def log_factor(self, r: ArrayLike) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        _check(r < 1.0, "full-disk")
        # log((2/(1-r^2))^2); 1-r^2 = (1-r)(1+r) keeps precision near the rim
        return 2.0 * (np.log(2.0) - np.log1p(-r) - np.log1p(r))

    def factor(self, r: ArrayLike) -> np.ndarray:
        return np.exp(self.log_factor(r))


@dataclass(frozen=True)
class SubBall:
    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"sub-ball radius must lie in (0,1), got {self.rho}")

    def log_factor(self, r: ArrayLike) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        _check(r < self.rho, "sub-ball")
        return FullDisk().log_factor(r / self.rho) - 2.0 * np.log(self.rho)

    def factor(self, r: ArrayLike) -> np.ndarray:
        return np.exp(self.log_factor(r))


@dataclass(frozen=True)
class Annulus:
    """Complete hyperbolic metric of ``{a < |x| < 1}``."""

    a: float

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError(f"annulus inner radius must lie in (0,1), got {self.a}")

    def log_factor(self, r: ArrayLike) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        _check((r > self.a) & (r < 1.0), "annulus")
        L = -np.log(self.a)
        x = -np.log(r)             # distance (in log r) to the outer circle
        y = np.log(r / self.a)     # distance to the inner circle; x + y = L
        # sin(pi x / L) == sin(pi y / L); use the smaller argument
        s = np.sin(np.pi * np.minimum(x, y) / L)
        return 2.0 * (np.log(np.pi) - np.log(L) - np.log(r) - np.log(s))

    def factor(self, r: ArrayLike) -> np.ndarray:
        return np.exp(self.log_factor(r))


@dataclass(frozen=True)
class Punctured:
    def log_factor(self, r: ArrayLike) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        _check((r > 0.0) & (r < 1.0), "punctured-disk")
        return -2.0 * (np.log(r) + np.log(-np.log(r)))

    def factor(self, r: ArrayLike) -> np.ndarray:
        return np.exp(self.log_factor(r))


HyperbolicMetric = Union[FullDisk, SubBall, Annulus, Punctured]

#: the Poincare disk metric, used throughout
H = FullDisk()


def h(r: ArrayLike) -> np.ndarray:
    """Conformal factor ``(2/(1-r^2))^2`` of the hyperbolic metric on the disk."""
    return H.factor(r)


def log_h(r: ArrayLike) -> np.ndarray:
    return H.log_factor(r)


def eval_metric(m: HyperbolicMetric, p) -> np.ndarray:
    """Conformal factor of ``m`` at ``p``.

    ``p`` may be a :class:`DiskPoint`, a complex number or array, or an array of
    radii. Points outside the metric's domain raise :class:`DomainError`.
    """
    out = m.factor(_radius(p))
    return out if out.ndim else float(out)


def metric_ordering_check(a: float, r_samples, tolerance: float = 0.0):
    """Check ``h < h_0 < h_a`` at every sample radius in ``(a, 1)``."""
    from .report import CheckReport

    r = np.atleast_1d(np.asarray(r_samples, dtype=float))
    if np.any(r <= a) or np.any(r >= 1.0):
        raise DomainError(f"samples must lie in ({a}, 1)")
    lh = H.log_factor(r)
    l0 = Punctured().log_factor(r)
    la = Annulus(a).log_factor(r)
    gap_low = float(np.min(l0 - lh))
    gap_high = float(np.min(la - l0))
    margin = min(gap_low, gap_high)
    return CheckReport(
        name="metric_ordering",
        lhs=gap_low,
        rhs=gap_high,
        margin=margin,
        tolerance=tolerance,
        passed=bool(margin > -tolerance and gap_low > 0 and gap_high > 0),
        notes=f"min log-gaps: log(h0/h)={gap_low:.6g}, log(ha/h0)={gap_high:.6g}; a={a}, {r.size} samples",
    )


# ---------------------------------------------------------------------------
# Mobius maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MobiusMap:
    """Disk automorphism ``z -> e^{i theta} (z - a) / (1 - conj(a) z)``."""

    a: complex = 0j
    theta: float = 0.0

    def __post_init__(self):
        if not abs(self.a) < 1.0:
            raise ValueError(f"|a| must be < 1, got {abs(self.a)}")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        a = complex(self.a)
        return np.exp(1j * self.theta) * (z - a) / (1.0 - np.conj(a) * z)

    def derivative_factor(self, z):
        """``|phi'(z)|^2``, the factor by which conformal factors are pulled back."""
        z = np.asarray(z, dtype=complex)
        a = complex(self.a)
        return ((1.0 - abs(a) ** 2) / np.abs(1.0 - np.conj(a) * z) ** 2) ** 2

    def inverse(self) -> "MobiusMap":
        # phi^{-1}(w) = e^{-i theta}... written again in (a, theta) form
        return MobiusMap(a=-complex(self.a) * np.exp(1j * self.theta), theta=-self.theta)


def mobius_apply(m: MobiusMap, p):
    """Image of ``p`` and ``|phi'(p)|^2``.

    For a :class:`DiskPoint` returns ``(DiskPoint, float)``; for complex input
    returns arrays.
    """
    if isinstance(p, DiskPoint):
        w = complex(m(p.z))
        return DiskPoint(w.real, w.imag), float(m.derivative_factor(p.z))
    z = np.asarray(p, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise DomainError("Mobius maps act on the open unit disk")
    return m(z), m.derivative_factor(z)


def pullback(f: Callable, m: MobiusMap) -> Callable:
    """Pull back a closed-form conformal factor ``f(z)`` by ``m``: ``(f o phi) |phi'|^2``."""

    def pulled(z):
        z = np.asarray(z, dtype=complex)
        return f(m(z)) * m.derivative_factor(z)

    return pulled


def pullback_conformal(u, m: MobiusMap, grid=None):
    """Pull back a conformal factor by the Mobius map ``m``.

    ``u`` is either a callable of a complex argument (returned pulled back as a
    callable) or a :class:`~logdiff.discretization.ConformalField`. Radial fields
    are resampled onto ``grid`` (a ``DiskGrid``) with linear interpolation in r;
    disk fields are interpolated bilinearly on their own grid. Points whose
    image falls outside the sampled support raise :class:`DomainError`.
    """
    from .discretization import ConformalField, DiskGrid, RadialGrid

    if callable(u) and not isinstance(u, ConformalField):
        return pullback(u, m)

    src = u.grid
    if isinstance(src, RadialGrid):
        if grid is None:
            raise ValueError("pulling back a radial field needs a target DiskGrid")
        z = grid.z
        w, jac = m(z), m.derivative_factor(z)
        rw = np.abs(w)
        if np.any(rw > src.r[-1] + 1e-14):
            raise DomainError("pulled-back sample falls outside the radial grid support")
        vals = np.interp(rw, src.r, u.values) * jac
        return ConformalField(grid, vals, u.t)

    if isinstance(src, DiskGrid):
        target = src if grid is None else grid
        z = target.z
        w, jac = m(z), m.derivative_factor(z)
        vals = src.interpolate(u.values, w) * jac
        return ConformalField(target, vals, u.t)

    raise TypeError(f"cannot pull back {type(u).__name__}")


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def gauss_curvature(u) -> np.ndarray:
    """Discrete Gauss curvature ``-L(log u) / (2u)`` on the interior nodes.

    Uses the same Laplacian stencil as the flow solver. Returned array has the
    length of ``u.values`` with NaN on boundary nodes.
    """
    from .discretization import laplacian

    vals = np.asarray(u.values, dtype=float)
    if np.any(~(vals > 0)):
        raise ValueError("curvature needs a strictly positive conformal factor")
    grid = u.grid
    K = np.full(vals.shape, np.nan)
    inner = grid.interior
    K[inner] = -laplacian(np.log(vals), grid) / (2.0 * vals[inner])
    return K
