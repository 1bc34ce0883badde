"""The solution multiplier ``Phi(t, lambda) = sum_n c_n(t) lambda^n``.

Coefficients come from the Picard recursion ``c_n(t) = int_0^t k(t,s) c_{n-1}(s) ds``
(tabulated for general kernels), from moment integrals for homogeneous
kernels, or from the closed gamma-ratio recursion for Saigo-Maeda kernels.
Closed forms (Mittag-Leffler, Prabhakar, exponential, or Laplace inversion
for convolution kernels) are attached where known and serve as the fallback
route when the truncated series is not accurate enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special as sp
from scipy.interpolate import CubicSpline

from . import laplace, quadrature
from .errors import DomainError, QuadratureFailure, TruncationError
from .kernels import (GGBM, Convolution, Fractional, KernelSpec, SaigoMaeda, Stretched,
                      check_assumption)
from .specfun import MLParams, mittag_leffler

DEFAULT_TOL = 1e-10
MAX_DEFAULT_N = 200


# --------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class ClosedForm:
    """``hat Phi(z) = scale * E^{l3}_{l1,l2}(z)``; ``kind`` names the special case."""

    kind: str
    params: MLParams
    scale: float = 1.0

    def __call__(self, z):
        return self.scale * mittag_leffler(self.params, z)

    @staticmethod
    def mittag_leffler(beta: float) -> "ClosedForm":
        if beta == 1.0:
            return ClosedForm.exponential()
        return ClosedForm("mittag_leffler", MLParams(beta, 1.0, 1.0))

    @staticmethod
    def prabhakar(p: MLParams) -> "ClosedForm":
        return ClosedForm("prabhakar", p, math.gamma(p.lambda2))

    @staticmethod
    def exponential() -> "ClosedForm":
        return ClosedForm("exponential", MLParams(1.0, 1.0, 1.0))


@dataclass(frozen=True)
class LaplaceClosedForm:
    """``Phi(t, lambda)`` from inverting ``1 / (sigma (1 - lambda LK(sigma)))``."""

    kernel_laplace: Callable = field(compare=False)
    nodes: int = 32

    def __call__(self, t, lam):
        t, lam = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(lam, dtype=complex))
        out = np.ones(t.shape, dtype=complex)
        pos = t > 0
        if pos.any():
            s, c = laplace.talbot_contour(self.nodes)
            tt = t[pos][:, None]
            ll = lam[pos][:, None]
            sig = s[None, :] / tt
            with np.errstate(all="ignore"):
                vals = 1.0 / (sig * (1.0 - ll * self.kernel_laplace(sig)))
            out[pos] = (c[None, :] * np.exp(s)[None, :] * vals).sum(axis=1) / tt[:, 0]
        return out


# --------------------------------------------------------------------------
# series container


@dataclass(frozen=True)
class TailBound:
    """Parameters ``(K_T, alpha*, eps)`` of the Picard tail bound on ``(0, T]``."""

    k_t: float
    alpha_star: float
    eps: float
    T: float

    def coefficient_bounds(self, n_max: int) -> np.ndarray:
        """``K_T^n T^{n(1-a)} prod_{l<n} (l(1-a)(1+1/eps)+1)^{-eps/(1+eps)}`` for ``n <= n_max``."""
        a, e = self.alpha_star, self.eps
        n = np.arange(n_max + 1)
        logs = n * (math.log(self.k_t) + (1 - a) * math.log(self.T))
        l = np.arange(1, max(n_max, 1))
        steps = -e / (1 + e) * np.log(l * (1 - a) * (1 + 1 / e) + 1.0)
        logs[2:] += np.cumsum(steps)[: max(n_max - 1, 0)]
        return np.exp(logs)

    def tail(self, N: int, lam_abs, n_extra: int = 4000) -> np.ndarray:
        """Bound on ``sum_{n > N} |c_n(t)| |lambda|^n``; ``inf`` when it does not settle."""
        b = self.coefficient_bounds(N + n_extra)[N + 1:]
        lam_abs = np.atleast_1d(np.asarray(lam_abs, dtype=float))
        n = np.arange(N + 1, N + 1 + b.size)
        with np.errstate(all="ignore"):
            terms = np.exp(np.log(b)[None, :] + n[None, :] * np.log(np.maximum(lam_abs, 1e-300))[:, None])
        total = terms.sum(axis=1)
        settled = terms[:, -1] <= 1e-3 * np.maximum(total, 1e-300)
        return np.where(settled & np.isfinite(total), total, np.inf)


@dataclass(frozen=True)
class PhiSeries:
    """Truncated series for ``Phi``.

    ``mode`` is ``"homogeneous"`` (``coeffs`` holds ``hat c_n`` and
    ``Phi(t, l) = hat Phi(l t^degree)``), ``"general"`` (``table`` holds
    ``c_n(t) / t^(n growth)`` on ``t_grid``) or ``"closed"`` (no
    coefficients, only the closed form).
    """

    mode: str
    N: int
    coeffs: Optional[np.ndarray] = None
    degree: Optional[float] = None
    t_grid: Optional[np.ndarray] = None
    table: Optional[np.ndarray] = None
    growth: Optional[float] = None
    closed: Optional[object] = None
    tail_bound: Optional[TailBound] = None
    _splines: Optional[tuple] = field(default=None, compare=False, repr=False)

    def coefficients_at(self, t) -> np.ndarray:
        """Array ``c_n(t)`` of shape ``(N+1,) + t.shape``."""
        t = np.asarray(t, dtype=float)
        n = np.arange(self.N + 1).reshape((-1,) + (1,) * t.ndim)
        if self.mode == "homogeneous":
            with np.errstate(divide="ignore"):
                return self.coeffs.reshape(n.shape) * np.where(n == 0, 1.0, t[None] ** (n * self.degree))
        if self.mode == "general":
            lo, hi = self.t_grid[0], self.t_grid[-1]
            if np.any(t > hi * (1 + 1e-12)) or np.any(t < 0):
                raise DomainError(f"t outside the tabulated range (0, {hi}]")
            x = np.log(np.clip(t, lo, hi))
            norm = np.stack([self._splines[k](x) if k else np.ones_like(x) for k in range(self.N + 1)])
            with np.errstate(divide="ignore"):
                return norm * np.where(n == 0, 1.0, t[None] ** (n * self.growth))
        raise TruncationError("closed-form series has no coefficients")


def _make_general(N, t_grid, table, growth, closed, tail_bound):
    x = np.log(t_grid)
    splines = tuple(CubicSpline(x, table[k]) if k else None for k in range(N + 1))
    return PhiSeries("general", N, t_grid=t_grid, table=table, growth=growth, closed=closed,
                     tail_bound=tail_bound, _splines=splines)


def closed_form_for(k: KernelSpec):
    """Known closed form of ``Phi`` for ``k`` (``None`` when unknown)."""
    if isinstance(k, Fractional):
        return ClosedForm.mittag_leffler(k.beta)
    if isinstance(k, GGBM):
        return ClosedForm.mittag_leffler(k.beta)
    if isinstance(k, SaigoMaeda):
        return ClosedForm.prabhakar(MLParams(*k.lambdas))
    if isinstance(k, Stretched):
        inner = closed_form_for(k.inner)
        return inner if isinstance(inner, ClosedForm) else None
    if isinstance(k, Convolution) and k.laplace is not None:
        return LaplaceClosedForm(k.laplace)
    return None


# --------------------------------------------------------------------------
# coefficient constructors


def _tail_estimate(last: float, ratio: float, z_abs):
    """Geometric tail ``|a_N| q / (1 - q)`` with ``q = ratio |z|``; ``inf`` when ``q >= 1``."""
    q = ratio * np.asarray(z_abs, dtype=float)
    with np.errstate(all="ignore"):
        est = np.abs(last) * np.asarray(z_abs, dtype=float) ** 0 * q / (1.0 - q)
    return np.where(q < 1.0, est, np.inf)


def coeffs_homogeneous(k: KernelSpec, N: Optional[int] = None, *, lam_max: float = 1.0,
                       T: float = 1.0, tol: float = DEFAULT_TOL) -> PhiSeries:
    """``hat c_n = hat c_{n-1} int_0^1 k(1,s) s^(beta(n-1)) ds`` by graded Gauss-Jacobi quadrature.

    Without ``N`` the recursion runs until the geometric tail estimate for
    ``|z| <= lam_max T^beta`` drops below ``tol`` (at most 200 terms).
    """
    deg = k.homogeneity_degree
    if deg is None:
        raise DomainError(f"{k.family} kernel is not homogeneous")
    beta = deg + 1.0
    if N is not None and N < 1:
        raise DomainError("N must be at least 1")
    cap = N if N is not None else MAX_DEFAULT_N
    z_max = lam_max * T**beta
    coeffs = [1.0]
    for n in range(1, cap + 1):
        moment = float(np.real(k.integrate(1.0, lambda s, e=beta * (n - 1): s**e, extra_left=beta * (n - 1))))
        coeffs.append(coeffs[-1] * moment)
        if coeffs[-1] == 0.0 and N is None:
            break
        if N is None and n >= 2 and coeffs[-2] != 0:
            ratio = abs(coeffs[-1] / coeffs[-2])
            with np.errstate(over="ignore"):
                term = coeffs[-1] * np.float64(z_max) ** n
            if float(_tail_estimate(term, ratio, z_max)) < tol:
                break
    arr = np.array(coeffs)
    arr.setflags(write=False)
    return PhiSeries("homogeneous", len(coeffs) - 1, coeffs=arr, degree=beta, closed=closed_form_for(k))


def coeffs_saigo_maeda(a: float, b: float, mu: float, nu: float, N: int) -> PhiSeries:
    """Closed gamma-ratio recursion for the Saigo-Maeda kernel (no quadrature).

    ``hat c_n / hat c_{n-1} = Gamma(((n-1)b+nu)/a + mu) / Gamma((nb+nu)/a + mu) * (n - 1 + lambda3) / n``
    """
    kernel = SaigoMaeda(a, b, mu, nu)  # validates the parameter conditions
    if N < 1:
        raise DomainError("N must be at least 1")
    lam3 = 1.0 + (nu - a) / b
    logc, sign = 0.0, 1.0
    out = [1.0]
    for n in range(1, N + 1):
        g_prev = ((n - 1) * b + nu) / a + mu
        g_next = (n * b + nu) / a + mu
        factor = (n - 1 + lam3) / n
        if factor == 0.0 or sign == 0.0:
            sign = 0.0
            out.append(0.0)
            continue
        logc += math.lgamma(g_prev) - math.lgamma(g_next) + math.log(abs(factor))
        sign *= math.copysign(1.0, factor)
        out.append(sign * math.exp(logc))
    arr = np.array(out)
    arr.setflags(write=False)
    return PhiSeries("homogeneous", N, coeffs=arr, degree=b, closed=closed_form_for(kernel))


def default_growth(k: KernelSpec) -> float:
    deg = k.homogeneity_degree
    if deg is not None:
        return deg + 1.0
    if isinstance(k, Convolution):
        return k.beta
    return 1.0


def coeffs_general(k: KernelSpec, t_grid, N: Optional[int] = None, *, lam_max: float = 1.0,
                   tol: float = DEFAULT_TOL, per_decade: int = 15, t_floor: float = 1e-8,
                   growth: Optional[float] = None, eps: float = 0.05) -> PhiSeries:
    """Tabulate ``c_n(t) = int_0^t k(t,s) c_{n-1}(s) ds`` on a log grid containing ``t_grid``.

    Values between nodes come from cubic splines in ``log t`` of the
    normalised coefficients ``c_n(t) / t^(n growth)``; below the grid the
    normalised value is held constant.  Without ``N`` the recursion stops
    once ``max_t |c_n(t)| lam_max^n`` and the geometric tail fall below
    ``tol`` (at most 200 terms).
    """
    user = np.unique(np.asarray(t_grid, dtype=float))
    if user.size == 0 or np.any(user <= 0):
        raise DomainError("t_grid must contain positive times")
    T = float(user[-1])
    lo = min(t_floor * T, float(user[0]))
    n_dec = max(int(math.ceil(per_decade * math.log10(T / lo))), 2)
    grid = np.unique(np.concatenate([np.logspace(math.log10(lo), math.log10(T), n_dec + 1), user]))
    # drop near-duplicates that would make the spline ill-conditioned
    keep = np.concatenate([[True], np.diff(np.log(grid)) > 1e-6])
    grid = grid[keep]
    growth = default_growth(k) if growth is None else growth

    try:
        report = check_assumption(k, T, eps=eps)
        bound = TailBound(report.k_t, report.alpha_star, eps, T)
    except QuadratureFailure:
        bound = None

    left, right = k.endpoint_exponents() if k.singularity_aware else (0.0, 0.0)
    rules = []
    for t in grid:
        if k.singularity_aware:
            rule = quadrature.interval_rule(t, left, right, left_levels=30, right_levels=30)
            kv = k(t, rule.nodes, rule.gaps)
        else:
            rule = quadrature.interval_rule(t, 0.0, 0.0, left_levels=30, right_levels=30)
            kv = k(t, rule.nodes)
        if not np.all(np.isfinite(kv)):
            raise QuadratureFailure(f"{k.family} kernel not finite on the quadrature nodes")
        rules.append((rule, kv * rule.weights))

    cap = N if N is not None else MAX_DEFAULT_N
    table = [np.ones_like(grid)]
    x = np.log(grid)
    prev_spline = None
    for n in range(1, cap + 1):
        row = np.empty_like(grid)
        for i, (rule, kw) in enumerate(rules):
            # normalised form: c_n(t)/t^(n g) = t^-g sum kw c_{n-1}(s)/s^((n-1)g) (s/t)^((n-1)g)
            s = rule.nodes
            rel = (s / grid[i]) ** ((n - 1) * growth)
            prev = rel if n == 1 else prev_spline(np.log(np.clip(s, grid[0], grid[-1]))) * rel
            row[i] = np.dot(kw, prev) / grid[i] ** growth
        if not np.all(np.isfinite(row)):
            raise QuadratureFailure("Picard recursion produced non-finite coefficients")
        table.append(row)
        prev_spline = CubicSpline(x, row)
        if N is None and n >= 2:
            cur = np.max(np.abs(row) * grid ** (n * growth)) * lam_max**n
            before = np.max(np.abs(table[-2]) * grid ** ((n - 1) * growth)) * lam_max ** (n - 1)
            if before > 0 and cur < before and float(_tail_estimate(cur, cur / before, 1.0)) < tol:
                break
    tab = np.array(table)
    tab.setflags(write=False)
    grid.setflags(write=False)
    return _make_general(len(table) - 1, grid, tab, growth, closed_form_for(k), bound)


def closed_series(k: KernelSpec) -> PhiSeries:
    """Series object carrying only the closed form of ``Phi`` for ``k``."""
    closed = closed_form_for(k)
    if closed is None:
        raise DomainError(f"no closed form known for the {k.family} kernel")
    deg = k.homogeneity_degree
    return PhiSeries("closed", 0, degree=None if deg is None else deg + 1.0, closed=closed)


# --------------------------------------------------------------------------
# evaluation


@np.errstate(all="ignore")  # overflowing terms yield an infinite error estimate
def _series_values(series: PhiSeries, t, lam, rigorous: bool = False):
    """Truncated sum, estimated truncation error and rounding error."""
    if series.mode == "homogeneous":
        z = lam * np.where(t > 0, t, 0.0) ** series.degree
        c = series.coeffs
        nonzero = np.flatnonzero(c)
        # coefficients that underflowed are not a terminating series: estimate the tail
        # from the last representable pair instead
        m = int(nonzero[-1])
        underflow = m < series.N and abs(c[m]) < 1e-250
        c = c[:m + 1] if underflow else c
        n = np.arange(c.size)
        zf = z.ravel()
        # log-domain magnitudes avoid 0 * inf when tiny coefficients meet huge powers
        log_mag = np.log(np.abs(c))[:, None] + n[:, None] * np.log(np.abs(zf))[None, :]
        phase = np.sign(c)[:, None] * np.exp(1j * n[:, None] * np.angle(zf)[None, :])
        terms = np.where(c[:, None] == 0, 0.0, np.exp(log_mag) * phase)
        terms[0] = 1.0
        terms = terms.reshape((c.size,) + z.shape)
        total = terms.sum(axis=0)
        mag = np.abs(terms).sum(axis=0)
        last = np.abs(terms[-1])
        ratio = abs(c[-1] / c[-2]) if c.size >= 2 and c[-2] != 0 else 0.0
        trunc = np.where(last == 0, 0.0, _tail_estimate(last, ratio, np.abs(z)))
        if series.N >= 1 and c[-1] == 0:
            trunc = np.zeros_like(trunc)
        if underflow:
            trunc = np.where(np.abs(z) == 0, 0.0, _tail_estimate(last, ratio, np.abs(z)))
        return total, trunc, 4 * np.finfo(float).eps * mag * c.size ** 0.5
    cn = series.coefficients_at(t)
    n = np.arange(series.N + 1).reshape((-1,) + (1,) * t.ndim)
    terms = cn * lam[None] ** n
    total = terms.sum(axis=0)
    mag = np.abs(terms).sum(axis=0)
    if rigorous and series.tail_bound is not None:
        trunc = series.tail_bound.tail(series.N, np.abs(lam).ravel()).reshape(lam.shape)
    else:
        last, before = np.abs(terms[-1]), np.abs(terms[-2])
        with np.errstate(all="ignore"):
            q = np.where(before > 0, last / before, 0.0)
            trunc = np.where(q < 1, last * q / (1 - q), np.inf)
        trunc = np.where(last == 0, 0.0, trunc)
    return total, trunc, 4 * np.finfo(float).eps * mag * (series.N + 1) ** 0.5


def _closed_values(series: PhiSeries, t, lam):
    closed = series.closed
    if closed is None:
        return None
    if isinstance(closed, LaplaceClosedForm):
        return closed(t, lam)
    if series.degree is None:
        return None
    z = lam * np.where(t > 0, t, 0.0) ** series.degree
    return np.asarray(closed(z), dtype=complex)


def phi_eval_detailed(series: PhiSeries, t, lam, *, method: str = "auto", tol: float = DEFAULT_TOL,
                      rigorous: bool = False):
    """``(value, error_estimate, used_series_mask)`` of ``Phi(t, lam)`` (broadcast).

    ``method`` is ``"auto"`` (series where its estimated error is below
    ``tol``, otherwise the closed form), ``"series"`` or ``"closed"``.  With
    ``rigorous=True`` general-mode series use the Picard tail bound instead
    of the geometric estimate from the last terms.
    """
    t, lam = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(lam, dtype=complex))
    if np.any(t < 0):
        raise DomainError("t must be nonnegative")
    t = np.array(t)
    lam = np.array(lam)
    val = np.ones(t.shape, dtype=complex)
    err = np.zeros(t.shape)
    used = np.ones(t.shape, dtype=bool)
    pos = t > 0
    if not pos.any():
        return val, err, used
    tp, lp = t[pos], lam[pos]
    if method not in ("auto", "series", "closed"):
        raise DomainError(f"unknown method {method!r}")
    if method != "closed" and series.mode != "closed":
        sv, trunc, rnd = _series_values(series, tp, lp, rigorous)
        serr = trunc + rnd
        good = serr <= tol
    else:
        sv = np.zeros(tp.shape, dtype=complex)
        serr = np.full(tp.shape, np.inf)
        good = np.zeros(tp.shape, dtype=bool)
    out = sv.copy()
    oerr = serr.copy()
    if method == "series" and not good.all():
        raise TruncationError(
            f"series truncated at N={series.N} misses tol={tol:g} (worst estimate {np.max(serr):.3g})"
        )
    if not good.all():
        need = ~good
        cv = _closed_values(series, tp[need], lp[need])
        if cv is None:
            raise TruncationError(
                f"series truncated at N={series.N} misses tol={tol:g} and no closed form is available"
            )
        out[need] = cv
        oerr[need] = np.nan
    val[pos], err[pos], used[pos] = out, oerr, good
    return val, err, used


def phi_eval(series: PhiSeries, t, lam, *, method: str = "auto", tol: float = DEFAULT_TOL):
    """``Phi(t, lam)``; scalar inputs give a scalar."""
    val, _, _ = phi_eval_detailed(series, t, lam, method=method, tol=tol)
    if np.ndim(val) == 0:
        return complex(val)
    return val


def volterra_residual(series: PhiSeries, k: KernelSpec, lam: complex, t: float, *,
                      method: str = "auto", tol: float = DEFAULT_TOL) -> float:
    """``|Phi(t,-lam) - 1 + lam int_0^t k(t,s) Phi(s,-lam) ds|``."""
    if not t > 0:
        raise DomainError("t must be positive")
    lhs = phi_eval(series, t, -lam, method=method, tol=tol)

    def f(s):
        return phi_eval(series, s, np.full(np.shape(s), -lam, dtype=complex), method=method, tol=tol)

    integral = k.integrate(t, f)
    return float(abs(lhs - 1.0 + lam * integral))


# --------------------------------------------------------------------------
# Laplace-domain checks


def half_line_rule(sigma: float, left: float = 0.0, cells: int = 45):
    """Nodes/weights for ``int_0^inf e^{-sigma t} f(t) dt`` (the factor is in the weights)."""
    h = 1.0 / sigma
    head = quadrature.interval_rule(h, left, 0.0)
    x, w = np.polynomial.legendre.leggauss(30)
    nodes = [head.nodes]
    weights = [head.weights]
    for j in range(1, cells):
        nodes.append(h * (j + 0.5 * (1 + x)))
        weights.append(0.5 * h * w)
    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights) * np.exp(-sigma * nodes)
    return nodes, weights


def laplace_of_phi(series: PhiSeries, lam: complex, sigma: float, *, method: str = "auto",
                   tol: float = 1e-8) -> complex:
    """``int_0^inf e^{-sigma t} Phi(t, -lam) dt`` by quadrature on the half line."""
    nodes, weights = half_line_rule(sigma)
    if series.mode == "general":
        keep = nodes <= series.t_grid[-1]
        if weights[~keep].sum() > 1e-14 * weights.sum():
            raise DomainError("tabulated range too short for this sigma")
        nodes, weights = nodes[keep], weights[keep]
    vals = phi_eval(series, nodes, np.full(nodes.shape, -lam, dtype=complex), method=method, tol=tol)
    return complex(np.dot(weights, vals))


def double_laplace_target(kernel_laplace: Callable, lam: complex, sigma: float) -> complex:
    """``(1/sigma) / (1 + lam LK(sigma))``."""
    return 1.0 / (sigma * (1.0 + lam * kernel_laplace(sigma)))


# --------------------------------------------------------------------------
# probes


@dataclass(frozen=True)
class CMReport:
    passed: bool
    worst_violation: float
    worst_order: int
    worst_x: float


def cm_probe(phi_hat: Callable, x_max: float, order: int = 8, *, tol: float = 1e-8,
             n_points: int = 60, step: float = 0.1) -> CMReport:
    """Sampled complete-monotonicity check of ``x -> phi_hat(-x)`` on ``(0, x_max]``.

    Forward differences with step ``step * x`` must satisfy
    ``(-1)^n Delta^n f(x) / |f(x)| >= -tol`` for ``n <= order``.  This is
    evidence, not proof.
    """
    if order < 1:
        raise DomainError("order must be at least 1")
    x = np.logspace(math.log10(x_max) - 3, math.log10(x_max), n_points)
    h = step * x
    k = np.arange(order + 1)
    pts = x[:, None] + h[:, None] * k[None, :]
    f = np.real(np.asarray(phi_hat(-pts.ravel()), dtype=complex)).reshape(pts.shape)
    base = np.maximum(np.abs(f[:, 0]), 1e-300)
    worst, w_n, w_x = 0.0, 0, float(x[0])
    for n in range(order + 1):
        binom = sp.comb(n, np.arange(n + 1))
        signs = (-1.0) ** (n - np.arange(n + 1))
        diff = (f[:, : n + 1] * (binom * signs)[None, :]).sum(axis=1)
        scaled = (-1.0) ** n * diff / base
        i = int(np.argmin(scaled))
        if scaled[i] < worst:
            worst, w_n, w_x = float(scaled[i]), n, float(x[i])
    return CMReport(passed=worst >= -tol, worst_violation=-worst, worst_order=w_n, worst_x=w_x)


@dataclass(frozen=True)
class PDReport:
    passed: bool
    min_eigenvalue: float


def pd_probe(f: Callable, p_grid, *, tol: float = 1e-8) -> PDReport:
    """Smallest eigenvalue of the Hermitian part of ``[f(p_i - p_j)]``."""
    p = np.asarray(p_grid, dtype=float)
    if p.size < 2 or np.unique(p).size < p.size:
        raise DomainError("p_grid must contain at least two distinct points")
    diff = p[:, None] - p[None, :]
    mat = np.asarray(f(diff.ravel()), dtype=complex).reshape(diff.shape)
    herm = 0.5 * (mat + mat.conj().T)
    eig = np.linalg.eigvalsh(herm)
    scale = max(1.0, float(np.max(np.abs(eig))))
    return PDReport(passed=bool(eig[0] >= -tol * scale), min_eigenvalue=float(eig[0]))
