"""Single-time marginals of stochastic solutions.

Covers stable Levy motion, fractional Brownian motion, linear fractional
stable motion (Mandelbrot-Van Ness form), inverse stable subordinators and
their random scalings or time changes.  Stable laws use the convention
``E[exp(i p X)] = exp(-scale |p|^delta (1 - i rho sign(p) tan(pi delta / 2)))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import quadrature
from .errors import ConfigError, DomainError, NumericalError
from .kernels import KernelSpec
from .phi import ClosedForm, closed_form_for
from .randvar import (
    MittagLefflerLaw,
    PointMass,
    PowerLaw,
    PrabhakarLaw,
    RandomStream,
    ScalerLaw,
    positive_stable,
)
from .symbols import (
    BernsteinComposed,
    Brownian,
    FractionalLaplacian,
    PowerBernstein,
    StableSkewed,
    SymbolSpec,
)


def _check_stable(delta: float, rho: float):
    if not 0 < delta <= 2:
        raise ConfigError(f"stability index must lie in (0, 2], got {delta}")
    if not -1 <= rho <= 1:
        raise ConfigError(f"skewness must lie in [-1, 1], got {rho}")
    if delta == 1 and rho != 0:
        raise ConfigError("delta = 1 requires the symmetric case rho = 0")


def sample_stable(delta: float, rho: float, scale, rng: RandomStream, size=None):
    """Chambers-Mallows-Stuck draw with characteristic exponent ``scale * psi_{delta,rho}``.

    ``scale`` may be an array broadcastable to ``size``.
    """
    _check_stable(delta, rho)
    scale = np.asarray(scale, dtype=float)
    if np.any(scale < 0):
        raise DomainError("stable scale must be nonnegative")
    if size is None:
        size = scale.shape if scale.ndim else None
    if delta == 2.0:
        return np.sqrt(2.0 * scale) * rng.standard_normal(size)
    v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size)
    w = rng.standard_exponential(size)
    if delta == 1.0:
        x = np.tan(v)
    else:
        skew = rho * math.tan(0.5 * math.pi * delta)
        shift = math.atan(skew) / delta
        factor = (1.0 + skew * skew) ** (0.5 / delta)
        x = (factor * np.sin(delta * (v + shift)) / np.cos(v) ** (1.0 / delta)
             * (np.cos(v - delta * (v + shift)) / w) ** ((1.0 - delta) / delta))
    return scale ** (1.0 / delta) * x


def stable_char(delta: float, rho: float, scale, p):
    """Closed-form characteristic function ``exp(-scale psi_{delta,rho}(p))``."""
    p = np.asarray(p, dtype=float)
    skew = 0.0 if delta == 2 or rho == 0 else rho * math.tan(0.5 * math.pi * delta)
    return np.exp(-scale * np.abs(p) ** delta * (1.0 - 1j * skew * np.sign(p)))


# --------------------------------------------------------------------------
# linear fractional stable motion


def _mvn_integral(delta: float, H: float) -> float:
    """``int_0^inf |(1+x)^e - x^e|^delta dx`` with ``e = H - 1/delta``."""
    e = H - 1.0 / delta

    def near(x, gap):  # x in (0, 1)
        return np.abs(np.expm1(e * np.log1p(1.0 / x))) ** delta * x ** (e * delta)

    def far(u, gap):  # x = 1/u, u in (0, 1)
        return np.abs(np.expm1(e * np.log1p(u))) ** delta * u ** (-e * delta - 2.0)

    left_near = min(e * delta, 0.0)
    left_far = delta * (1.0 - H) - 1.0
    total = quadrature.integrate(near, 1.0, left_near, 0.0)
    total += quadrature.integrate(far, 1.0, min(left_far, 0.0), 0.0)
    if not np.isfinite(total):
        raise quadrature.QuadratureFailure("normalising integral is not finite")
    return float(total)


def _check_flsm(delta: float, H: float):
    if not 0 < delta <= 2:
        raise ConfigError(f"stability index must lie in (0, 2], got {delta}")
    if not 0 < H < 1:
        raise ConfigError(f"Hurst index must lie in (0, 1), got {H}")
    if abs(H - 1.0 / delta) < 1e-12:
        raise ConfigError("H = 1/delta is excluded for linear fractional stable motion")


@lru_cache(maxsize=64)
def k_delta_h(delta: float, H: float) -> float:
    """Normalising constant ``K_{delta,H}`` of the Mandelbrot-Van Ness integral."""
    if delta == 2.0 and H == 0.5:
        return 1.0
    _check_flsm(delta, H)
    return (_mvn_integral(delta, H) + 1.0 / (delta * H)) ** (1.0 / delta)


def rho0(delta: float, rho: float, H: float) -> float:
    """Skewness of the FLSM marginal."""
    _check_flsm(delta, H)
    if H > 1.0 / delta:
        return float(rho)
    if rho == 0:
        return 0.0
    inner = _mvn_integral(delta, H)
    own = 1.0 / (H * delta)
    return float(rho * (own - inner) / (own + inner))


@dataclass(frozen=True)
class FLSMConfig:
    """Linear fractional stable motion with its Riemann-sum discretisation.

    ``mesh`` and ``left_cutoff`` are in units of the largest requested time.
    The part of the integral left of ``-left_cutoff`` is represented by one
    extra stable variable using the far-field expansion of the kernel.
    """

    delta: float
    rho: float = 0.0
    H: float = 0.5
    mesh: float = 1e-3
    left_cutoff: float = 50.0

    def __post_init__(self):
        _check_stable(self.delta, self.rho)
        if not (self.delta == 2.0 and self.H == 0.5):
            _check_flsm(self.delta, self.H)
        if not (self.mesh > 0 and self.left_cutoff > 0):
            raise ConfigError("mesh and left_cutoff must be positive")

    @property
    def is_brownian(self) -> bool:
        return self.delta == 2.0 and self.H == 0.5

    @property
    def exponent(self) -> float:
        return self.H - 1.0 / self.delta


def _cells(mesh: float, cutoff: float, horizon: float):
    """Uniform cells of width ``mesh`` on ``[-cutoff, horizon]`` (midpoints, widths)."""
    n = int(math.ceil((cutoff + horizon) / mesh))
    edges = np.linspace(-cutoff, horizon, n + 1)
    return 0.5 * (edges[1:] + edges[:-1]), np.diff(edges)


def _mvn_weights(e: float, t: float, x):
    """Kernel ``(t-x)_+^e - (-x)_+^e`` at cell midpoints."""
    with np.errstate(divide="ignore", invalid="ignore"):
        right = np.where(x < t, np.abs(t - x) ** e, 0.0)
        left = np.where(x < 0, np.abs(x) ** e, 0.0)
        both = x < 0
        # difference without cancellation where both terms are present
        diff = np.abs(x) ** e * np.expm1(e * np.log1p(t / np.abs(np.where(both, x, -1.0))))
    return np.where(both, diff, right - left)


def _tail_scale(cfg: FLSMConfig, cutoff: float) -> float:
    """Stable scale of ``e int_{-inf}^{-cutoff} |x|^(e-1) M(dx)``."""
    e, d = cfg.exponent, cfg.delta
    return abs(e) ** d * cutoff ** ((e - 1.0) * d + 1.0) / (d * (1.0 - cfg.H))


@lru_cache(maxsize=64)
def _flsm_unit_law(cfg: FLSMConfig):
    """Scale and skew of the discretised ``Y_1`` (one stable variable by stability)."""
    x, h = _cells(cfg.mesh, cfg.left_cutoff, 1.0)
    w = _mvn_weights(cfg.exponent, 1.0, x)
    mass = h * np.abs(w) ** cfg.delta
    tail = _tail_scale(cfg, cfg.left_cutoff)
    tail_sign = math.copysign(1.0, cfg.exponent)
    total = mass.sum() + tail
    signed = np.dot(mass, np.sign(w)) + tail_sign * tail
    k = k_delta_h(cfg.delta, cfg.H)
    return total / k**cfg.delta, signed / total


def flsm_discretisation_law(cfg: FLSMConfig, t: float = 1.0) -> tuple[float, float]:
    """``(scale, skew)`` of the discretised marginal at ``t``; exact values are ``(t^{delta H}, rho0)``."""
    if cfg.is_brownian:
        return t, cfg.rho
    scale, skew = _flsm_unit_law(cfg)
    return scale * t ** (cfg.delta * cfg.H), cfg.rho * skew


def flsm_bias(cfg: FLSMConfig, t: float, p_grid) -> float:
    """Sup over ``p_grid`` of the gap between the discretised and exact marginal characteristic functions."""
    scale, skew = flsm_discretisation_law(cfg, t)
    exact_skew = cfg.rho if cfg.is_brownian else rho0(cfg.delta, cfg.rho, cfg.H)
    exact = stable_char(cfg.delta, exact_skew, t ** (cfg.delta * cfg.H), p_grid)
    return float(np.max(np.abs(stable_char(cfg.delta, skew, scale, p_grid) - exact)))


def sample_flsm_marginal(cfg: FLSMConfig, t: float, rng: RandomStream, size=None):
    """Draws of ``Y_t`` from the Riemann sum of the Mandelbrot-Van Ness integral.

    A weighted sum of independent stable cell masses is itself stable, so the
    discretised marginal is drawn exactly with one stable variable per sample.
    """
    if t < 0:
        raise DomainError("time must be nonnegative")
    if t == 0:
        return np.zeros(size) if size is not None else 0.0
    scale, skew = flsm_discretisation_law(cfg, t)
    return sample_stable(cfg.delta, float(np.clip(skew, -1.0, 1.0)), scale, rng, size)


def sample_flsm_path(cfg: FLSMConfig, times: Sequence[float], rng: RandomStream, size: int,
                     *, chunk: int = 2000) -> np.ndarray:
    """Joint draws of ``(Y_{t_1}, ..., Y_{t_m})`` with explicit cell masses; shape ``(size, m)``."""
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise DomainError("times must be nonnegative")
    horizon = float(times.max()) if times.size else 0.0
    if horizon == 0:
        return np.zeros((size, times.size))
    mesh, cutoff = cfg.mesh * horizon, cfg.left_cutoff * horizon
    x, h = _cells(mesh, cutoff, horizon)
    if cfg.is_brownian:
        weights = np.array([(x < t) & (x > 0) for t in times], dtype=float)
        k, tail_w = 1.0, np.zeros(times.size)
    else:
        weights = np.array([_mvn_weights(cfg.exponent, t, x) if t > 0 else np.zeros_like(x)
                            for t in times])
        k = k_delta_h(cfg.delta, cfg.H)
        tail_w = times  # far field: w(t, x) ~ e t |x|^(e-1)
    tail_scale = 0.0 if cfg.is_brownian else _tail_scale(cfg, cutoff)
    tail_rho = cfg.rho * math.copysign(1.0, cfg.exponent)
    out = np.empty((size, times.size))
    for i in range(0, size, chunk):
        n = min(chunk, size - i)
        masses = sample_stable(cfg.delta, cfg.rho, np.broadcast_to(h, (n, h.size)), rng)
        vals = masses @ weights.T
        if tail_scale > 0:
            vals += np.outer(sample_stable(cfg.delta, tail_rho, tail_scale, rng, n), tail_w)
        out[i:i + n] = vals / k
    return out


# --------------------------------------------------------------------------
# Gaussian and subordinator marginals


def sample_fbm_marginal(H: float, t_grid, rng: RandomStream, size=None) -> np.ndarray:
    """Exact fBm values on ``t_grid`` by Cholesky; shape ``(*size, len(t_grid))``."""
    if not 0 < H <= 1:
        raise DomainError("Hurst index must lie in (0, 1]")
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size > 4096:
        raise DomainError("at most 4096 time points")
    if np.any(np.diff(t) < 0) or np.any(t < 0):
        raise DomainError("t_grid must be sorted and nonnegative")
    shape = (() if size is None else np.atleast_1d(size).tolist()) + [t.size]
    out = np.zeros(shape)
    live = t > 0
    tl = t[live]
    if tl.size:
        tt, ss = np.meshgrid(tl, tl, indexing="ij")
        cov = 0.5 * (tt ** (2 * H) + ss ** (2 * H) - np.abs(tt - ss) ** (2 * H))
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("fBm covariance is not numerically positive definite") from exc
        z = rng.standard_normal(tuple(shape[:-1]) + (tl.size,))
        out[..., live] = z @ chol.T
    return out


def sample_inverse_stable_subordinator(beta: float, t, rng: RandomStream, size=None):
    """Draws of ``E_t = inf{s: eta_s > t}`` for ``h(sigma) = sigma^beta``, as ``(t / S)^beta``."""
    if not 0 < beta < 1:
        raise DomainError("beta must lie in (0, 1)")
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("time must be positive")
    return (t / positive_stable(beta, rng, size)) ** beta


def sample_levy(symbol: SymbolSpec, elapsed, rng: RandomStream, size=None):
    """Draw ``Y_tau`` for the Levy process with exponent ``symbol`` at (random) times ``elapsed``."""
    elapsed = np.asarray(elapsed, dtype=float)
    if size is None and elapsed.ndim:
        size = elapsed.shape
    if isinstance(symbol, Brownian):
        return np.sqrt(symbol.sigma2 * elapsed) * rng.standard_normal(size)
    if isinstance(symbol, FractionalLaplacian):
        if symbol.gamma == 2.0:
            return np.sqrt(elapsed) * rng.standard_normal(size)
        return sample_stable(symbol.gamma, 0.0, elapsed * 2.0 ** (-0.5 * symbol.gamma), rng, size)
    if isinstance(symbol, StableSkewed):
        return sample_stable(symbol.delta, symbol.rho, elapsed, rng, size)
    if isinstance(symbol, BernsteinComposed):
        g = symbol.bernstein.gamma
        inner_time = elapsed ** (1.0 / g) * positive_stable(g, rng, size) if g < 1 else elapsed
        return sample_levy(symbol.inner, inner_time, rng, size)
    raise ConfigError(f"no sampler for symbol {type(symbol).__name__}")


# --------------------------------------------------------------------------
# process recipes


class ProcessModel:
    def sample(self, t: float, rng: RandomStream, size=None):
        raise NotImplementedError


def _zero(size):
    return np.zeros(size) if size is not None else 0.0


@dataclass(frozen=True)
class ScaledLevyTime(ProcessModel):
    """``X_t = Y_{A t^e}``."""

    symbol: SymbolSpec
    scaler: ScalerLaw
    time_exponent: float
    recipe: str = field(default="scaled_levy_time", init=False)

    def sample(self, t, rng, size=None):
        if t == 0:
            return _zero(size)
        a = self.scaler.sample(rng, size)
        return sample_levy(self.symbol, np.asarray(a) * t**self.time_exponent, rng, size)


@dataclass(frozen=True)
class ScaledFLSM(ProcessModel):
    """``X_t = scale A^{1/delta} Y^{(delta,rho,H)}_t``."""

    flsm: FLSMConfig
    scaler: ScalerLaw
    scale: float = 1.0
    recipe: str = field(default="scaled_flsm", init=False)

    def sample(self, t, rng, size=None):
        if t == 0:
            return _zero(size)
        a = np.asarray(self.scaler.sample(rng, size))
        y = sample_flsm_marginal(self.flsm, t, rng, size)
        return self.scale * a ** (1.0 / self.flsm.delta) * y


@dataclass(frozen=True)
class ScaledStableLevy(ProcessModel):
    """``X_t = scale A^{1/delta} Y^{(delta,rho)}_t``."""

    delta: float
    rho: float
    scaler: ScalerLaw
    scale: float = 1.0
    recipe: str = field(default="scaled_stable_levy", init=False)

    def __post_init__(self):
        _check_stable(self.delta, self.rho)

    def sample(self, t, rng, size=None):
        if t == 0:
            return _zero(size)
        a = np.asarray(self.scaler.sample(rng, size))
        return self.scale * a ** (1.0 / self.delta) * sample_stable(self.delta, self.rho, t, rng, size)


@dataclass(frozen=True)
class GGBMProcess(ProcessModel):
    """``X_t = sqrt(A_beta) B^{alpha/2}_t``."""

    alpha: float
    beta: float
    recipe: str = field(default="ggbm", init=False)

    def __post_init__(self):
        if not (0 < self.alpha < 2 and 0 < self.beta <= 1):
            raise ConfigError("GGBM needs 0 < alpha < 2 and 0 < beta <= 1")

    def sample(self, t, rng, size=None):
        if t == 0:
            return _zero(size)
        a = np.asarray(MittagLefflerLaw(self.beta).sample(rng, size))
        return np.sqrt(a) * t ** (0.5 * self.alpha) * rng.standard_normal(size)


@dataclass(frozen=True)
class InverseSubordinated(ProcessModel):
    """``X_t = Y_{E_t}`` with ``E`` the inverse ``beta``-stable subordinator."""

    symbol: SymbolSpec
    beta: float
    recipe: str = field(default="inverse_subordinated", init=False)

    def sample(self, t, rng, size=None):
        if t == 0:
            return _zero(size)
        clock = sample_inverse_stable_subordinator(self.beta, t, rng, size)
        return sample_levy(self.symbol, clock, rng, size)


def sample_marginal(model: ProcessModel, t: float, rng: RandomStream, size=None):
    if t < 0:
        raise DomainError("time must be nonnegative")
    return model.sample(float(t), rng, size)


# --------------------------------------------------------------------------
# builders


def scaler_for_kernel(k: KernelSpec) -> tuple[ScalerLaw, float]:
    """Random scaler with Laplace transform ``Phi_hat(-x)`` and the homogeneity exponent ``b``."""
    closed = closed_form_for(k)
    degree = k.homogeneity_degree
    if not isinstance(closed, ClosedForm) or degree is None:
        raise ConfigError(f"kernel {type(k).__name__} has no scaled-time representation")
    if closed.kind == "exponential":
        law: ScalerLaw = PointMass(1.0)
    elif closed.kind == "mittag_leffler":
        law = MittagLefflerLaw(closed.params.lambda1)
    else:
        law = PrabhakarLaw(closed.params)
    return law, degree + 1.0


def _power(law: ScalerLaw, gamma: float) -> ScalerLaw:
    return law if gamma == 1.0 else PowerLaw(law, gamma)


def scaled_time_model(k: KernelSpec, symbol: SymbolSpec) -> ScaledLevyTime:
    """``Y_{A t^b}``, or ``Ytilde_{A^{(g)} t^{b/g}}`` when ``symbol`` is a power of a simpler one.

    A fractional Laplacian of order ``gamma < 2`` is treated as ``(p^2/2)^{gamma/2}``.
    """
    law, b = scaler_for_kernel(k)
    if isinstance(symbol, FractionalLaplacian) and symbol.gamma < 2:
        symbol = BernsteinComposed(Brownian(1.0), PowerBernstein(0.5 * symbol.gamma))
    if isinstance(symbol, BernsteinComposed):
        g = symbol.bernstein.gamma
        return ScaledLevyTime(symbol.inner, _power(law, g), b / g)
    return ScaledLevyTime(symbol, law, b)


def flsm_model(k: KernelSpec, symbol: SymbolSpec, delta: float, **flsm_kw) -> ProcessModel:
    """``c^{1/gamma} A_{gamma/delta}^{1/delta} Y^{(delta,0,b/gamma)}`` for a symmetric ``gamma``-stable symbol.

    ``c`` is the symbol's constant in ``psi = c |p|^gamma``.  When
    ``delta = gamma / b`` the FLSM degenerates and stable Levy motion is used.
    """
    law, b = scaler_for_kernel(k)
    if isinstance(symbol, FractionalLaplacian):
        gamma, c = symbol.gamma, 2.0 ** (-0.5 * symbol.gamma)
    elif isinstance(symbol, StableSkewed) and symbol.rho == 0:
        gamma, c = symbol.delta, 1.0
    else:
        raise ConfigError("FLSM representation needs a symmetric stable symbol")
    if not b < gamma <= 2:
        raise ConfigError(f"FLSM representation needs b < gamma <= 2 (b={b}, gamma={gamma})")
    if not gamma <= delta <= 2:
        raise ConfigError(f"FLSM representation needs gamma <= delta <= 2 (gamma={gamma}, delta={delta})")
    scaler = _power(law, gamma / delta)
    scale = c ** (1.0 / gamma)
    H = b / gamma
    if abs(delta - gamma / b) < 1e-12:
        return ScaledStableLevy(delta, 0.0, scaler, scale)
    return ScaledFLSM(FLSMConfig(delta, 0.0, H, **flsm_kw), scaler, scale)


def ggbm_model(alpha: float, beta: float) -> GGBMProcess:
    return GGBMProcess(alpha, beta)


def inverse_subordinated_model(symbol: SymbolSpec, beta: float) -> InverseSubordinated:
    return InverseSubordinated(symbol, beta)


def empirical_char(samples, p_grid):
    """Empirical characteristic function and its standard errors (real and imaginary parts)."""
    x = np.asarray(samples, dtype=float).ravel()
    p = np.asarray(p_grid, dtype=float).ravel()
    n = x.size
    ph = p[:, None] * x[None, :]
    c, s = np.cos(ph), np.sin(ph)
    mean = c.mean(axis=1) + 1j * s.mean(axis=1)
    se = (c.std(axis=1, ddof=1) + 1j * s.std(axis=1, ddof=1)) / math.sqrt(n)
    return mean, se
