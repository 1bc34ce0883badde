"""Characteristic exponents ``psi`` of the spatial Levy generators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class PowerBernstein:
    """Bernstein function ``f(x) = x^gamma`` with ``0 < gamma <= 1``."""

    gamma: float

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"Bernstein power must lie in (0, 1], got {self.gamma}")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.gamma == 1.0:
            return z
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(z == 0, 0.0, np.exp(self.gamma * np.log(np.where(z == 0, 1.0, z))))
        return out


class SymbolSpec:
    family: str = "abstract"

    def __call__(self, p):
        return self._evaluate(np.asarray(p, dtype=float))

    def _evaluate(self, p):  # pragma: no cover - abstract
        raise NotImplementedError

    def growth_constant(self) -> float:
        """``C`` with ``|psi(p)| <= C (1 + p^2)``."""
        raise NotImplementedError


@dataclass(frozen=True)
class Brownian(SymbolSpec):
    """``psi(p) = sigma2 p^2 / 2``."""

    sigma2: float = 1.0
    family: str = field(default="brownian", init=False)

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ConfigError("Brownian variance must be positive")

    def _evaluate(self, p):
        return (0.5 * self.sigma2 * p * p).astype(complex)

    def growth_constant(self):
        return 0.5 * self.sigma2


@dataclass(frozen=True)
class FractionalLaplacian(SymbolSpec):
    """``psi(p) = 2^(-gamma/2) |p|^gamma``."""

    gamma: float
    family: str = field(default="fractional_laplacian", init=False)

    def __post_init__(self):
        if not 0 < self.gamma <= 2:
            raise ConfigError(f"fractional Laplacian order must lie in (0, 2], got {self.gamma}")

    def _evaluate(self, p):
        return (2.0 ** (-0.5 * self.gamma) * np.abs(p) ** self.gamma).astype(complex)

    def growth_constant(self):
        return 2.0 ** (-0.5 * self.gamma)


@dataclass(frozen=True)
class StableSkewed(SymbolSpec):
    """``psi(p) = |p|^delta (1 - i rho sign(p) tan(pi delta / 2))``."""

    delta: float
    rho: float = 0.0
    family: str = field(default="stable", init=False)

    def __post_init__(self):
        if not 0 < self.delta <= 2:
            raise ConfigError(f"stability index must lie in (0, 2], got {self.delta}")
        if not -1 <= self.rho <= 1:
            raise ConfigError(f"skewness must lie in [-1, 1], got {self.rho}")
        if self.delta == 1 and self.rho != 0:
            raise ConfigError(
                "delta = 1 requires the symmetric case rho = 0 (tan(pi delta/2) is undefined)"
            )

    @property
    def skew_factor(self) -> float:
        return 0.0 if self.delta == 2 or self.rho == 0 else self.rho * math.tan(0.5 * math.pi * self.delta)

    def _evaluate(self, p):
        return np.abs(p) ** self.delta * (1.0 - 1j * self.skew_factor * np.sign(p))

    def growth_constant(self):
        return math.hypot(1.0, self.skew_factor)


@dataclass(frozen=True)
class BernsteinComposed(SymbolSpec):
    """``psi = f o psi_inner``; keeps both parts for subordinated sampling."""

    inner: SymbolSpec
    bernstein: PowerBernstein
    family: str = field(default="bernstein", init=False)

    def _evaluate(self, p):
        return self.bernstein(self.inner(p))

    def growth_constant(self):
        # |z|^g <= 1 + |z| for 0 < g <= 1
        return 1.0 + self.inner.growth_constant()


def eval_symbol(psi: SymbolSpec, p):
    out = psi(p)
    return complex(out) if np.ndim(out) == 0 else out


def compose_bernstein(psi_tilde: SymbolSpec, f: PowerBernstein) -> SymbolSpec:
    return BernsteinComposed(psi_tilde, f)
