"""Time kernels ``k(t, s)`` on ``0 < s < t``.

Every kernel is an immutable value that can be called as ``k(t, s, gap)``,
vectorised over ``s``.  ``gap`` is ``t - s``; passing it explicitly keeps
evaluations accurate right next to the diagonal, where forming ``t - s``
in floating point would lose digits.  Kernels also report their algebraic
exponents at ``s -> 0`` and ``s -> t`` so that integrals against them can
use Gauss-Jacobi cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special as sp

from . import quadrature
from .errors import ConfigError, DomainError, QuadratureFailure
from .specfun import saigo_maeda_f3


def _one_minus_ratio_pow(t, gap, c):
    """``1 - ((t - gap)/t)^c`` without cancellation for small ``gap``."""
    with np.errstate(divide="ignore"):  # gap == t gives the exact limit 1
        return -np.expm1(c * np.log1p(-gap / t))


@dataclass(frozen=True)
class PowerStretch:
    """Time-stretching ``g(tau) = tau^c``."""

    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ConfigError(f"stretch power must be positive, got {self.c}")

    def __call__(self, tau):
        return np.asarray(tau, dtype=float) ** self.c

    def derivative(self, tau):
        return self.c * np.asarray(tau, dtype=float) ** (self.c - 1.0)


class KernelSpec:
    """Base class; subclasses are frozen dataclasses."""

    family: str = "abstract"

    def __call__(self, t, s, gap=None):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        gap = t - s if gap is None else np.asarray(gap, dtype=float)
        return self._evaluate(t, s, gap)

    def _evaluate(self, t, s, gap):  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def homogeneity_degree(self) -> Optional[float]:
        return None

    def endpoint_exponents(self) -> tuple[float, float]:
        """Algebraic exponents of ``k(t, .)`` at ``s -> 0`` and ``s -> t``."""
        return (0.0, 0.0)

    @property
    def singularity_aware(self) -> bool:
        return True

    def integrate(self, t: float, func=None, extra_left: float = 0.0):
        """``int_0^t k(t, s) func(s) ds`` on the graded Gauss rule.

        ``func`` is vectorised over ``s``; ``extra_left`` adds to the
        exponent at ``s = 0`` when ``func`` itself vanishes or blows up
        algebraically there.
        """
        if self.singularity_aware:
            left, right = self.endpoint_exponents()
            rule = quadrature.interval_rule(t, left + extra_left, right)
            vals = self(t, rule.nodes, rule.gaps)
            if func is not None:
                vals = vals * func(rule.nodes)
            if not np.all(np.isfinite(vals)):
                raise QuadratureFailure(f"{self.family} kernel produced non-finite values")
            return rule.integrate(vals)
        if func is None:
            return quadrature.integrate_adaptive(lambda s: self(t, s), t)
        return quadrature.integrate_adaptive(lambda s: self(t, s) * func(s), t)


@dataclass(frozen=True)
class Fractional(KernelSpec):
    """``(t - s)^(beta-1) / Gamma(beta)``."""

    beta: float
    family: str = field(default="fractional", init=False)

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ConfigError(f"fractional kernel needs beta in (0, 1], got {self.beta}")

    def _evaluate(self, t, s, gap):
        return gap ** (self.beta - 1.0) / math.gamma(self.beta)

    @property
    def homogeneity_degree(self):
        return self.beta - 1.0

    def endpoint_exponents(self):
        return (0.0, self.beta - 1.0)


@dataclass(frozen=True)
class GGBM(KernelSpec):
    """Time-stretched fractional kernel of generalized grey Brownian motion.

    ``alpha / (beta Gamma(beta)) s^(alpha/beta - 1) (t^(alpha/beta) - s^(alpha/beta))^(beta - 1)``
    """

    alpha: float
    beta: float
    family: str = field(default="ggbm", init=False)

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ConfigError(f"GGBM kernel needs beta in (0, 1], got {self.beta}")
        if not 0 < self.alpha < 2:
            raise ConfigError(f"GGBM kernel needs alpha in (0, 2), got {self.alpha}")

    def _evaluate(self, t, s, gap):
        c = self.alpha / self.beta
        diff = t**c * _one_minus_ratio_pow(t, gap, c)
        return c / math.gamma(self.beta) * s ** (c - 1.0) * diff ** (self.beta - 1.0)

    @property
    def homogeneity_degree(self):
        return self.alpha - 1.0

    def endpoint_exponents(self):
        return (self.alpha / self.beta - 1.0, self.beta - 1.0)


@dataclass(frozen=True)
class SaigoMaeda(KernelSpec):
    """Kernel of the Saigo-Maeda fractional integral.

    ``a / Gamma(b/a) (t^a - s^a)^(b/a - 1) t^(a - nu) s^(nu - 1) F3(...)`` with
    the Appell function at ``(1 - (s/t)^a, 1 - (t/s)^a)``, evaluated through
    :func:`fracevo.specfun.saigo_maeda_f3`.
    """

    a: float
    b: float
    mu: float
    nu: float
    family: str = field(default="saigo_maeda", init=False)

    def __post_init__(self):
        a, b, mu, nu = self.a, self.b, self.mu, self.nu
        if not (a > 0 and b > 0 and mu > -1 and nu > max(-b, -a * mu)):
            raise DomainError(
                "Saigo-Maeda kernel needs a > 0, b > 0, mu > -1 and nu > max(-b, -a*mu); "
                f"got a={a}, b={b}, mu={mu}, nu={nu}"
            )

    @property
    def lambdas(self) -> tuple[float, float, float]:
        """Prabhakar parameters ``(b/a, nu/a + mu, 1 + (nu - a)/b)``."""
        return (self.b / self.a, self.nu / self.a + self.mu, 1.0 + (self.nu - self.a) / self.b)

    def _evaluate(self, t, s, gap):
        a, b, mu, nu = self.a, self.b, self.mu, self.nu
        theta = (s / t) ** a
        one_minus = _one_minus_ratio_pow(t, gap, a)
        f3 = saigo_maeda_f3(a, b, mu, nu, theta)
        pref = a / math.gamma(b / a)
        return pref * (t**a * one_minus) ** (b / a - 1.0) * t ** (a - nu) * s ** (nu - 1.0) * f3

    @property
    def homogeneity_degree(self):
        return self.b - 1.0

    def endpoint_exponents(self):
        a, b, mu, nu = self.a, self.b, self.mu, self.nu
        power = mu if nu == a else min(mu, (b - nu) / a)
        return (nu - 1.0 + a * power, b / a - 1.0)


@dataclass(frozen=True)
class Convolution(KernelSpec):
    """``k(t, s) = K(t - s)`` with ``|K(r)| <= M r^(beta-1) e^(gamma r)``.

    ``func`` receives the lag ``t - s``.  ``laplace`` optionally gives the
    Laplace transform of ``K`` for complex arguments.
    """

    func: Callable = field(compare=False)
    bound_m: float = 1.0
    bound_gamma: float = 0.0
    beta: float = 1.0
    laplace: Optional[Callable] = field(default=None, compare=False)
    name: str = "custom"
    family: str = field(default="convolution", init=False)

    def __post_init__(self):
        if not (self.bound_m >= 0 and self.bound_gamma >= 0 and 0 < self.beta <= 1):
            raise ConfigError("convolution kernel needs M >= 0, gamma >= 0 and beta in (0, 1]")

    def _evaluate(self, t, s, gap):
        return np.asarray(self.func(gap), dtype=float)

    @property
    def homogeneity_degree(self):
        return None

    def endpoint_exponents(self):
        return (0.0, self.beta - 1.0)


def tempered_fractional(beta: float, rate: float) -> Convolution:
    """``K(r) = r^(beta-1) e^(-rate r) / Gamma(beta)`` with transform ``(sigma + rate)^(-beta)``."""
    if not rate >= 0:
        raise ConfigError("tempering rate must be nonnegative")
    g = math.gamma(beta)
    return Convolution(
        func=lambda r: r ** (beta - 1.0) * np.exp(-rate * r) / g,
        bound_m=1.0 / g,
        bound_gamma=0.0,
        beta=beta,
        laplace=lambda sigma: (sigma + rate) ** (-beta),
        name=f"tempered({beta}, {rate})",
    )


@dataclass(frozen=True)
class Custom(KernelSpec):
    """User closure ``func(t, s)`` without endpoint metadata."""

    func: Callable = field(compare=False)
    degree: Optional[float] = None
    name: str = "custom"
    family: str = field(default="custom", init=False)

    def _evaluate(self, t, s, gap):
        return np.asarray(self.func(t, s), dtype=float)

    @property
    def homogeneity_degree(self):
        return None

    @property
    def singularity_aware(self):
        return False


@dataclass(frozen=True)
class Stretched(KernelSpec):
    """``kappa(tau, theta) = k(g(tau), g(theta)) g'(theta)`` for ``g(tau) = tau^c``."""

    inner: KernelSpec
    stretch: PowerStretch
    family: str = field(default="stretched", init=False)

    def __post_init__(self):
        if not isinstance(self.stretch, PowerStretch):
            object.__setattr__(self, "stretch", PowerStretch(float(self.stretch)))

    def _evaluate(self, t, s, gap):
        c = self.stretch.c
        gt, gs = t**c, s**c
        ggap = gt * _one_minus_ratio_pow(t, gap, c)
        return self.inner(gt, gs, ggap) * self.stretch.derivative(s)

    @property
    def homogeneity_degree(self):
        d = self.inner.homogeneity_degree
        if d is None:
            return None
        return self.stretch.c * (d + 1.0) - 1.0

    def endpoint_exponents(self):
        left, right = self.inner.endpoint_exponents()
        c = self.stretch.c
        return (c * left + c - 1.0, right)

    @property
    def singularity_aware(self):
        return self.inner.singularity_aware


def eval_kernel(k: KernelSpec, t: float, s: float) -> float:
    """Scalar evaluation with domain checking."""
    if not 0 < s < t:
        raise DomainError(f"kernel needs 0 < s < t, got s={s}, t={t}")
    return float(k(t, s))


def homogeneity_degree(k: KernelSpec) -> Optional[float]:
    return k.homogeneity_degree


def stretch_kernel(k: KernelSpec, g: PowerStretch) -> KernelSpec:
    """Time-stretched kernel; the identity stretch returns ``k`` itself."""
    if g.c == 1.0:
        return k
    return Stretched(k, g)


@dataclass(frozen=True)
class AssumptionReport:
    k_t: float
    passed: bool
    eps: float
    alpha_star: float


def _lp_norm_unit(k: KernelSpec, t: float, p: float) -> float:
    if k.singularity_aware:
        left, right = k.endpoint_exponents()
        if p * left <= -1 or p * right <= -1:
            raise QuadratureFailure(
                f"|k(t,.)|^{p:g} is not integrable (endpoint exponents {left:g}, {right:g})"
            )
        rule = quadrature.interval_rule(t, p * left, p * right)
        vals = np.abs(k(t, rule.nodes, rule.gaps)) ** p
        if not np.all(np.isfinite(vals)):
            raise QuadratureFailure("kernel not finite on quadrature nodes")
        total = float(rule.integrate(vals))
    else:
        total = float(quadrature.integrate_adaptive(lambda s: np.abs(k(t, s)) ** p, t))
    return total ** (1.0 / p)


def check_assumption(k: KernelSpec, T: float, eps: float = 0.05,
                     alpha_star: Optional[float] = None, n_times: int = 40) -> AssumptionReport:
    """Estimate ``K_T = sup_{t <= T} t^(alpha* - 1/(1+eps)) ||k(t, .)||_{L^(1+eps)(0, t)}``.

    ``alpha_star`` defaults to ``max(0, -degree)`` for homogeneous kernels
    and ``1 - beta`` for convolution kernels.  Non-integrable kernels raise
    :class:`QuadratureFailure`.
    """
    if not (T > 0 and eps > 0):
        raise DomainError("T and eps must be positive")
    if alpha_star is None:
        deg = k.homogeneity_degree
        if deg is not None:
            alpha_star = max(0.0, -deg)
        elif isinstance(k, Convolution):
            alpha_star = 1.0 - k.beta
        else:
            alpha_star = 0.0
    if not 0 <= alpha_star < 1:
        raise DomainError("alpha_star must lie in [0, 1)")
    p = 1.0 + eps
    times = T * np.logspace(-6, 0, n_times)
    vals = [t ** (alpha_star - 1.0 / p) * _lp_norm_unit(k, t, p) for t in times]
    k_t = float(np.max(vals))
    return AssumptionReport(k_t=k_t, passed=bool(np.isfinite(k_t)), eps=eps, alpha_star=alpha_star)
