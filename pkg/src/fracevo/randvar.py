"""Nonnegative random scalers with prescribed completely monotone Laplace transforms.

Laws available:

* Mittag-Leffler ``E_beta(-x)``: exact, ``A = S^{-beta}`` with ``S`` positive
  ``beta``-stable (Kanter's representation).
* Prabhakar ``Gamma(l2) E^{l3}_{l1,l2}(-x)``: for ``l1 = 1`` a Beta law; for
  ``l1 < 1`` an inverse-CDF table of ``log A`` recovered by Fourier inversion
  of the Mellin transform ``E[A^{iu}] = Gamma(l2) Gamma(l3+iu) / (Gamma(l3) Gamma(l2+i l1 u))``.
* Power compositions ``LT(x^gamma)``: exact subordination ``A^{1/gamma} S_gamma``.
* Generic CM transforms: the CDF by Talbot inversion of ``LT(s)/s``.

All samplers take an explicit :class:`numpy.random.Generator`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import special as sp

from . import laplace
from .errors import ConfigError, DomainError, InversionFailure
from .specfun import MLParams, mittag_leffler

RandomStream = np.random.Generator


def make_stream(seed: int) -> RandomStream:
    """PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def spawn_streams(seed: int, count: int) -> list[RandomStream]:
    """Independent child streams ``0..count-1`` derived from ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def positive_stable(gamma: float, rng: RandomStream, size=None):
    """Positive stable variable with ``E[e^{-s S}] = e^{-s^gamma}`` (Kanter).

    ``S = sin(g V) / sin(V)^(1/g) * (sin((1-g) V) / W)^((1-g)/g)`` with
    ``V ~ U(0, pi)`` and ``W ~ Exp(1)``, assembled in log space.
    """
    if not 0 < gamma <= 1:
        raise DomainError("stability index of a subordinator must lie in (0, 1]")
    if gamma == 1.0:
        return np.ones(size) if size is not None else 1.0
    v = rng.uniform(0.0, np.pi, size)
    w = rng.standard_exponential(size)
    g = gamma
    log_s = (np.log(np.sin(g * v)) - np.log(np.sin(v)) / g
             + (1.0 - g) / g * (np.log(np.sin((1.0 - g) * v)) - np.log(w)))
    return np.exp(log_s)


class ScalerLaw:
    """A law on ``[0, inf)`` described by its Laplace transform."""

    def laplace(self, x):
        raise NotImplementedError

    def sample(self, rng: RandomStream, size=None):
        raise NotImplementedError


@dataclass(frozen=True)
class PointMass(ScalerLaw):
    value: float = 1.0

    def laplace(self, x):
        return np.exp(-self.value * np.asarray(x, dtype=float))

    def sample(self, rng, size=None):
        return np.full(size, self.value) if size is not None else self.value


@dataclass(frozen=True)
class MittagLefflerLaw(ScalerLaw):
    """Law of ``A_beta``: Laplace transform ``E_beta(-x)``."""

    beta: float

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ConfigError(f"Mittag-Leffler law needs beta in (0, 1], got {self.beta}")

    def laplace(self, x):
        return mittag_leffler(MLParams(self.beta, 1.0, 1.0), -np.asarray(x, dtype=float))

    def sample(self, rng, size=None):
        return sample_ml(self.beta, rng, size)


@dataclass(frozen=True)
class PowerLaw(ScalerLaw):
    """Law with Laplace transform ``base.laplace(x^gamma)``."""

    base: ScalerLaw
    gamma: float

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ConfigError(f"power-law exponent must lie in (0, 1], got {self.gamma}")

    def laplace(self, x):
        return self.base.laplace(np.asarray(x, dtype=float) ** self.gamma)

    def sample(self, rng, size=None):
        return sample_power_law(self.base, self.gamma, rng, size)


def mittag_leffler_power(beta: float, gamma: float) -> PowerLaw:
    """``A_beta^{(gamma)}``: Laplace transform ``E_beta(-x^gamma)``."""
    return PowerLaw(MittagLefflerLaw(beta), gamma)


def prabhakar_power(p: MLParams, gamma: float) -> PowerLaw:
    return PowerLaw(PrabhakarLaw(p), gamma)


@dataclass(frozen=True)
class LogTable:
    """Tabulated CDF of ``L = log A`` on a uniform ``y`` grid."""

    y: np.ndarray
    cdf: np.ndarray
    density: np.ndarray
    atom_at_zero: float = 0.0

    def sample(self, rng, size=None):
        u = rng.uniform(0.0, 1.0, size)
        return np.exp(np.interp(u, self.cdf, self.y))


@dataclass(frozen=True)
class PrabhakarLaw(ScalerLaw):
    """Law with Laplace transform ``Gamma(l2) E^{l3}_{l1,l2}(-x)`` (needs the CM conditions)."""

    params: MLParams
    grid_points: int = 8192

    def __post_init__(self):
        p = self.params
        if not (0 < p.lambda1 <= 1 and 0 < p.lambda3 <= p.lambda2 / p.lambda1 * (1 + 1e-14)):
            raise ConfigError(
                "Prabhakar law needs 0 < lambda1 <= 1 and 0 < lambda3 <= lambda2/lambda1 "
                f"(complete monotonicity); got {p}"
            )

    def laplace(self, x):
        p = self.params
        return math.gamma(p.lambda2) * mittag_leffler(p, -np.asarray(x, dtype=float))

    def mellin(self, u):
        """``E[A^{iu}]`` for real ``u``."""
        p = self.params
        u = np.asarray(u, dtype=float)
        logv = (sp.loggamma(p.lambda3 + 1j * u) - sp.loggamma(p.lambda2 + 1j * p.lambda1 * u)
                + math.lgamma(p.lambda2) - math.lgamma(p.lambda3))
        return np.exp(logv)

    @property
    def table(self) -> LogTable:
        p = self.params
        return _prabhakar_table(p.lambda1, p.lambda2, p.lambda3, self.grid_points)

    def sample(self, rng, size=None):
        p = self.params
        if p.lambda1 == 1.0:
            if abs(p.lambda3 - p.lambda2) <= 1e-14 * p.lambda2:
                return PointMass(1.0).sample(rng, size)
            return rng.beta(p.lambda3, p.lambda2 - p.lambda3, size)
        return self.table.sample(rng, size)


def _log_moments(l1, l2, l3):
    mean = sp.digamma(l3) - l1 * sp.digamma(l2)
    var = sp.polygamma(1, l3) - l1**2 * sp.polygamma(1, l2)
    return float(mean), float(max(var, 1e-12))


def _cdf_fourier(phi_vals, u, du, y_lo, y):
    """Periodised-trapezoid CDF of ``L`` on ``y`` from its characteristic function.

    ``F(y) = du (y - y_lo) / (2 pi) + (du/pi) sum_k Re[phi(u_k)(e^{-i u_k y_lo} - e^{-i u_k y}) / (i u_k)]``
    """
    out = np.empty(y.shape)
    coef = phi_vals / (1j * u)
    base = np.exp(-1j * u * y_lo)
    chunk = 256
    for i in range(0, y.size, chunk):
        yy = y[i:i + chunk]
        ph = base[None, :] - np.exp(-1j * u[None, :] * yy[:, None])
        out[i:i + chunk] = du * (yy - y_lo) / (2 * np.pi) + du / np.pi * np.real(ph @ coef)
    return out


def _density_fourier(phi_vals, u, du, y):
    out = np.empty(y.shape)
    chunk = 256
    for i in range(0, y.size, chunk):
        yy = y[i:i + chunk]
        out[i:i + chunk] = du / (2 * np.pi) + du / np.pi * np.real(np.exp(-1j * yy[:, None] * u[None, :]) @ phi_vals)
    return out


@lru_cache(maxsize=32)
def _prabhakar_table(l1, l2, l3, n_points):
    law = PrabhakarLaw.__new__(PrabhakarLaw)
    object.__setattr__(law, "params", MLParams(l1, l2, l3))
    mean, var = _log_moments(l1, l2, l3)
    sd = math.sqrt(var)
    # |E[A^{iu}]| ~ exp(-pi (1 - l1) |u| / 2): cut where it is below 1e-16
    u_max = 2.0 * 40.0 / (np.pi * (1.0 - l1)) + 20.0
    # left tail of L decays like exp(l3 y); the right tail faster than any exponential
    y_lo = mean - max(12.0 * sd, 40.0 / l3)
    y_hi = mean + 14.0 * sd
    for _ in range(20):
        period = 2.0 * (y_hi - y_lo)
        du = 2.0 * np.pi / period
        u = np.arange(1, int(math.ceil(u_max / du)) + 1) * du
        phi_vals = law.mellin(u)
        y = np.linspace(y_lo, y_hi, n_points)
        cdf = _cdf_fourier(phi_vals, u, du, y_lo, y)
        top = cdf[-1]
        dens = _density_fourier(phi_vals, u, du, y)
        if dens[-1] > 1e-12 * dens.max():
            y_hi += 4.0 * sd
            continue
        if cdf[0] < -1e-10 or dens[0] > 1e-9 * dens.max():
            y_lo -= 10.0 / l3
            continue
        break
    else:
        raise InversionFailure("could not bracket the support of the Prabhakar law")
    if abs(top - 1.0) > 1e-4:
        raise InversionFailure(f"recovered CDF ends at {top:.6g}, not 1")
    if dens.min() < -1e-6 * dens.max():
        raise InversionFailure("recovered density is negative: Laplace transform is not CM")
    cdf = np.maximum.accumulate(np.clip(cdf / top, 0.0, 1.0))
    for arr in (y, cdf, dens):
        arr.setflags(write=False)
    return LogTable(y, cdf, dens)


@dataclass(frozen=True)
class GenericCMLaw(ScalerLaw):
    """Law given only by a CM Laplace transform analytic off the negative axis.

    The CDF ``F(x)`` is the inverse Laplace transform of ``LT(s)/s``; it is
    tabulated on a log grid and sampled by inversion.
    """

    transform: Callable = field(compare=False)
    x_min: float = 1e-8
    x_max: float = 1e8
    n_points: int = 1600

    def laplace(self, x):
        return np.real(np.asarray(self.transform(np.asarray(x, dtype=complex))))

    @property
    def table(self):
        return _generic_table(self)

    def sample(self, rng, size=None):
        x, cdf, atom = self.table
        u = rng.uniform(0.0, 1.0, size)
        out = np.exp(np.interp(u, cdf, np.log(x)))
        return np.where(u < atom, 0.0, out)


@lru_cache(maxsize=16)
def _generic_table(law: GenericCMLaw):
    x = np.logspace(math.log10(law.x_min), math.log10(law.x_max), law.n_points)
    cdf = laplace.invert_laplace(lambda s: law.transform(s) / s, x)
    if np.any(np.diff(cdf) < -1e-6):
        raise InversionFailure("recovered CDF decreases: transform is not completely monotone")
    cdf = np.maximum.accumulate(np.clip(cdf, 0.0, 1.0))
    if cdf[-1] < 1 - 1e-4:
        raise InversionFailure(f"recovered CDF reaches only {cdf[-1]:.6g} by x={law.x_max:g}")
    atom = float(cdf[0])
    return x, cdf, atom


def sample_ml(beta: float, rng: RandomStream, size=None):
    """Draw(s) of ``A_beta = S^{-beta}``; constant 1 for ``beta = 1``."""
    if not 0 < beta <= 1:
        raise DomainError("beta must lie in (0, 1]")
    if beta == 1.0:
        return np.ones(size) if size is not None else 1.0
    return positive_stable(beta, rng, size) ** (-beta)


def sample_prabhakar(p: MLParams, rng: RandomStream, size=None):
    return PrabhakarLaw(p).sample(rng, size)


def sample_power_law(base: ScalerLaw, gamma: float, rng: RandomStream, size=None):
    """Law with transform ``base.laplace(x^gamma)`` as ``A_base^{1/gamma} S_gamma``."""
    if not 0 < gamma <= 1:
        raise DomainError("gamma must lie in (0, 1]")
    a = base.sample(rng, size)
    if gamma == 1.0:
        return a
    return np.asarray(a) ** (1.0 / gamma) * positive_stable(gamma, rng, size)


def empirical_laplace(samples, lambda_grid):
    """Sample means and standard errors of ``exp(-lambda A)``."""
    a = np.asarray(samples, dtype=float).ravel()
    lam = np.asarray(lambda_grid, dtype=float).ravel()
    if a.size == 0:
        raise DomainError("need at least one sample")
    if lam.size == 0:
        return np.empty(0), np.empty(0)
    vals = np.exp(-np.outer(lam, a))
    means = vals.mean(axis=1)
    se = vals.std(axis=1, ddof=1) / math.sqrt(a.size) if a.size > 1 else np.zeros(lam.size)
    se[np.ptp(vals, axis=1) == 0] = 0.0  # constant rows: avoid rounding residue
    return means, se
