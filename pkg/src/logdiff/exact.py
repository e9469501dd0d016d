"""Closed-form solutions of ``u_t = Laplacian(log u)``.

All solutions are callables ``sol(z, t)`` taking complex positions; radial
ones also accept real radii. They serve as boundary traces for the solver and
as oracles for its accuracy.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .discretization import laplacian
from .geometry import DiskPoint, DomainError, FullDisk, MobiusMap, SubBall


def _abs2(z) -> np.ndarray:
    z = np.asarray(z)
    return np.abs(z) ** 2


def _check_t(t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("exact solutions are evaluated for t >= 0")


@dataclass(frozen=True)
class CigarUnscaled:
    """``1 / (e^{4t} + |x|^2)``, the steady cigar soliton on the plane."""

    radial = True
    domain_radius = np.inf

    def log(self, z, t):
        r2 = _abs2(z)
        # log(e^{4t} + r^2) = 4t + log1p(r^2 e^{-4t})
        return -(4.0 * t + np.log1p(r2 * np.exp(-4.0 * t)))

    def __call__(self, z, t):
        _check_t(t)
        return np.exp(self.log(z, t))


@dataclass(frozen=True)
class CigarScaled:
    """Cigar rescaled to total mass ``4 pi`` on the unit disk at ``t = 0``.

    ``u = 4 / (log(1/mu + 1) [(1+mu)^t mu^(1-t) + |x|^2])``, evaluated in log
    form so that tiny ``mu`` neither underflows nor loses digits.
    """

    mu: float

    radial = True
    domain_radius = np.inf

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"cigar scale mu must be positive, got {self.mu}")

    @property
    def log_norm(self) -> float:
        # log(1/mu + 1) = log1p(mu) - log(mu)
        return float(np.log1p(self.mu) - np.log(self.mu))

    def log_c(self, t):
        return t * np.log1p(self.mu) + (1.0 - t) * np.log(self.mu)

    def log(self, z, t):
        lc = self.log_c(t)
        r2 = _abs2(z)
        return np.log(4.0) - np.log(self.log_norm) - (lc + np.log1p(r2 * np.exp(-lc)))

    def __call__(self, z, t):
        _check_t(t)
        return np.exp(self.log(z, t))


@dataclass(frozen=True)
class Hyperbolic:
    """Self-similar hyperbolic flow ``(2t + alpha) h_rho``."""

    alpha: float = 1.0
    rho: float = 1.0

    radial = True

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must lie in (0,1], got {self.rho}")

    @property
    def domain_radius(self) -> float:
        return self.rho

    @property
    def metric(self):
        return FullDisk() if self.rho == 1.0 else SubBall(self.rho)

    def log(self, z, t):
        return np.log(2.0 * t + self.alpha) + self.metric.log_factor(np.abs(np.asarray(z)))

    def __call__(self, z, t):
        _check_t(t)
        return (2.0 * np.asarray(t) + self.alpha) * self.metric.factor(np.abs(np.asarray(z)))


@dataclass(frozen=True)
class ConstantSolution:
    c: float

    radial = True
    domain_radius = np.inf

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("constant solution must be positive")

    def log(self, z, t):
        return np.full(np.shape(z), np.log(self.c))

    def __call__(self, z, t):
        return np.full(np.shape(z), float(self.c))


@dataclass(frozen=True)
class MobiusPullback:
    """``(base o phi)(t) |phi'|^2``; a non-radial exact solution on the disk."""

    base: "ExactSolution"
    map: MobiusMap

    radial = False
    domain_radius = 1.0

    def __post_init__(self):
        if self.base.domain_radius < 1.0:
            raise ValueError("Mobius pullbacks only wrap solutions defined on the whole disk")

    def log(self, z, t):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) >= 1.0):
            raise DomainError("Mobius pullback evaluated outside the unit disk")
        return self.base.log(self.map(z), t) + np.log(self.map.derivative_factor(z))

    def __call__(self, z, t):
        _check_t(t)
        return np.exp(self.log(z, t))


@dataclass(frozen=True)
class Rescaled:
    """Parabolic rescaling ``lam * base(x, t / lam)``."""

    base: "ExactSolution"
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("rescaling factor must be positive")

    @property
    def radial(self):
        return self.base.radial

    @property
    def domain_radius(self):
        return self.base.domain_radius

    def log(self, z, t):
        return np.log(self.lam) + self.base.log(z, np.asarray(t) / self.lam)

    def __call__(self, z, t):
        _check_t(t)
        return np.exp(self.log(z, t))


ExactSolution = Union[CigarUnscaled, CigarScaled, Hyperbolic, ConstantSolution, MobiusPullback, Rescaled]


def evaluate(sol: ExactSolution, p, t: float):
    """Value of ``sol`` at point ``p`` (DiskPoint, complex, or radius) and time ``t``."""
    _check_t(t)
    z = p.z if isinstance(p, DiskPoint) else np.asarray(p)
    if np.any(np.abs(z) >= sol.domain_radius):
        raise DomainError(f"point outside the domain |x| < {sol.domain_radius}")
    out = np.asarray(sol(z, t))
    return out if out.ndim else float(out)


def cigar_l1_mass(mu: float, t: float, r: float = 1.0) -> float:
    """``int_{B_r} u dA`` for the scaled cigar, in closed form."""
    if not mu > 0 or t < 0 or not 0 < r <= 1:
        raise ValueError("need mu > 0, t >= 0, 0 < r <= 1")
    sol = CigarScaled(mu)
    lc = sol.log_c(t)
    return float(4.0 * np.pi * np.log1p(r * r * np.exp(-lc)) / sol.log_norm)


def residual(sol: ExactSolution, grid, t: float, dt: float) -> np.ndarray:
    """``|u_t - L log u|`` on the interior nodes of ``grid``.

    Time derivative by centred difference over ``[t - dt, t + dt]``; space by
    the shared Laplacian stencil.
    """
    if dt <= 0 or t - dt < 0:
        raise ValueError("residual needs 0 < dt <= t")
    z = grid.z
    ut = (sol(z, t + dt) - sol(z, t - dt)) / (2.0 * dt)
    lap = laplacian(sol.log(z, t), grid)
    return np.abs(ut[grid.interior] - lap)
