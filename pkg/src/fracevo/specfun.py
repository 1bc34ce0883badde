"""Special functions: rising factorials, Gauss and Appell hypergeometric
series, and the Mittag-Leffler family up to Prabhakar's three-parameter
function.

Series are summed in log-gamma space with sign tracking and stopped after
three consecutive negligible terms (cap :data:`MAX_TERMS`).  The
Mittag-Leffler family switches to a contour representation of its Laplace
transform whenever the power series is too ill-conditioned to reach the
requested tolerance (large negative or complex arguments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special as sp

from . import laplace
from .errors import DomainError, NonConvergence

MAX_TERMS = 10_000
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MLParams:
    """Parameters of ``E^{lambda3}_{lambda1, lambda2}``."""

    lambda1: float
    lambda2: float
    lambda3: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lambda1) and self.lambda1 > 0):
            raise DomainError(f"lambda1 must be positive, got {self.lambda1}")
        if not (np.isfinite(self.lambda2) and np.isfinite(self.lambda3)):
            raise DomainError("lambda2 and lambda3 must be finite")

    @property
    def completely_monotone(self) -> bool:
        """Sufficient condition for ``x -> E(-x)`` to be completely monotone."""
        l1, l2, l3 = self.lambda1, self.lambda2, self.lambda3
        return 0 < l1 <= 1 and 0 < l3 <= l2 / l1 * (1 + 1e-14)


@dataclass(frozen=True)
class F3Params:
    """Parameters ``(alpha, alpha', beta, beta', gamma)`` of Appell's F3."""

    alpha: float
    alpha_p: float
    beta: float
    beta_p: float
    gamma: float

    def __post_init__(self):
        g = self.gamma
        if g <= 0 and float(g).is_integer():
            raise DomainError(f"gamma must not be zero or a negative integer, got {g}")


def pochhammer(lam: float, n: int) -> float:
    """Rising factorial ``lam (lam+1) ... (lam+n-1)``; overflow gives ``inf``."""
    if n < 0 or int(n) != n:
        raise DomainError("n must be a nonnegative integer")
    out = 1.0
    for k in range(int(n)):
        out *= lam + k
    return out


# --------------------------------------------------------------------------
# Gauss 2F1


def _f21_series(a, b, c, y, rtol, max_terms):
    """Direct series on 0 <= y < 1 (arrays broadcast)."""
    term = np.ones_like(y)
    total = np.ones_like(y)
    small = np.zeros(y.shape, dtype=int)
    active = np.ones(y.shape, dtype=bool)
    for m in range(max_terms):
        if not active.any():
            return total
        term = np.where(active, term * (a + m) * (b + m) / ((c + m) * (m + 1.0)) * y, 0.0)
        total = total + term
        tiny = np.abs(term) <= rtol * np.abs(total)
        small = np.where(tiny, small + 1, 0)
        active &= small < 3
    raise NonConvergence(f"2F1 series did not converge within {max_terms} terms")


def gauss_2f1(a, b, c, y, *, rtol: float = 1e-13, max_terms: int = MAX_TERMS):
    """Gauss hypergeometric function ``2F1(a, b; c; y)`` for real ``y < 1``.

    Negative arguments go through the Pfaff transformation
    ``(1-y)^{-a} 2F1(a, c-b; c; y/(y-1))``.  The direct series is used on
    ``[0, 0.75]``; closer to 1 the connection formulas of
    :func:`scipy.special.hyp2f1` take over because the series needs
    ``O(1/(1-y))`` terms there.
    """
    a, b, c, y = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, y)))
    if np.any(y >= 1):
        raise DomainError("gauss_2f1 requires y < 1")
    if np.any((c <= 0) & (c == np.round(c))):
        raise DomainError("c must not be zero or a negative integer")
    out = np.empty(y.shape)
    w = np.where(y < 0, y / (y - 1.0), y)
    bb = np.where(y < 0, c - b, b)
    pref = np.where(y < 0, (1.0 - y) ** (-a), 1.0)
    direct = w <= 0.75
    if direct.any():
        out[direct] = pref[direct] * _f21_series(a[direct], bb[direct], c[direct], w[direct], rtol, max_terms)
    far = ~direct
    if far.any():
        out[far] = sp.hyp2f1(a[far], b[far], c[far], y[far])
    return out if out.ndim else float(out)


def gauss_2f1_near_one(a, b, c, w, *, rtol: float = 1e-13):
    """``2F1(a, b; c; 1-w)`` for ``0 < w <= 1`` without forming ``1-w``.

    For ``w < 1/2`` the ``z -> 1-z`` connection formula is used with the
    exact small argument ``w``.  When ``c-a-b`` is within ``2e-5`` of an
    integer the two connection terms cancel catastrophically; the value is
    then interpolated linearly in ``c`` between two regular neighbours.
    """
    a, b, c, w = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, c, w)))
    if np.any((w <= 0) | (w > 1)):
        raise DomainError("w must lie in (0, 1]")
    out = np.empty(w.shape)
    big = w >= 0.5
    if big.any():
        out[big] = gauss_2f1(a[big], b[big], c[big], 1.0 - w[big], rtol=rtol)
    small = ~big
    if small.any():
        aa, bb, cc, ww = a[small], b[small], c[small], w[small]
        m = cc - aa - bb
        k = np.round(m)
        h = 2e-5
        near = np.abs(m - k) < h
        res = np.empty(ww.shape)
        reg = ~near
        if reg.any():
            res[reg] = _connection(aa[reg], bb[reg], cc[reg], ww[reg], rtol)
        if near.any():
            lo = _connection(aa[near], bb[near], cc[near] + (k[near] - h - m[near]), ww[near], rtol)
            hi = _connection(aa[near], bb[near], cc[near] + (k[near] + h - m[near]), ww[near], rtol)
            frac = (m[near] - (k[near] - h)) / (2 * h)
            res[near] = lo + frac * (hi - lo)
        out[small] = res
    return out if out.ndim else float(out)


def _rgamma_ratio(num, den):
    """``prod Gamma(num) / prod Gamma(den)`` with signs, via log-gamma."""
    logv = sum(sp.gammaln(x) for x in num) - sum(sp.gammaln(x) for x in den)
    sign = np.prod([sp.gammasgn(x) for x in num], axis=0) * np.prod([sp.gammasgn(x) for x in den], axis=0)
    return sign * np.exp(logv)


def _connection(a, b, c, w, rtol):
    m = c - a - b
    with np.errstate(all="ignore"):
        first = np.where(
            np.isfinite(sp.gammaln(m)) & (sp.rgamma(c - a) != 0) & (sp.rgamma(c - b) != 0),
            _rgamma_ratio([c, m], [c - a, c - b]),
            0.0,
        )
        second = _rgamma_ratio([c, -m], [a, b])
        second = np.where(np.isfinite(second), second, 0.0)
    term1 = np.where(first != 0, first * _safe_series(a, b, 1.0 - m, w, rtol), 0.0)
    term2 = np.where(second != 0, second * w**m * _safe_series(c - a, c - b, 1.0 + m, w, rtol), 0.0)
    return term1 + term2


def _safe_series(a, b, c, w, rtol):
    # parameters c <= 0 integer only occur together with a vanishing gamma prefactor
    c = np.where((c <= 0) & (c == np.round(c)), c + 0.5, c)
    return _f21_series(a, b, c, w, rtol, MAX_TERMS)


# --------------------------------------------------------------------------
# Appell F3


def appell_f3(p: F3Params, x: float, y: float, *, rtol: float = 1e-11, max_terms: int = MAX_TERMS) -> float:
    """Appell's F3 for real ``x, y < 1``.

    Evaluated as the single sum over ``m`` of
    ``(alpha)_m (beta)_m / ((gamma)_m m!) x^m 2F1(alpha', beta'; gamma+m; y)``,
    which regroups the double series exactly; each inner 2F1 is continued to
    ``y < 0`` by :func:`gauss_2f1`.
    """
    if x >= 1 or y >= 1:
        raise DomainError("appell_f3 requires x < 1 and y < 1")
    total = 0.0
    coef = 1.0
    small = 0
    chunk = 64
    m0 = 0
    while m0 < max_terms:
        ms = np.arange(m0, min(m0 + chunk, max_terms))
        inner = gauss_2f1(p.alpha_p, p.beta_p, p.gamma + ms, np.full(ms.shape, float(y)))
        for m, f21 in zip(ms, np.atleast_1d(inner)):
            term = coef * f21
            total += term
            if abs(term) <= rtol * abs(total) or coef == 0.0:
                small += 1
                if small >= 3:
                    return float(total)
            else:
                small = 0
            coef *= (p.alpha + m) * (p.beta + m) / ((p.gamma + m) * (m + 1.0)) * x
        m0 += chunk
    raise NonConvergence(f"F3 series did not converge within {max_terms} terms (x={x})")


def saigo_maeda_f3(a, b, mu, nu, theta):
    """F3 at the Saigo-Maeda arguments, in closed form.

    For ``theta = (s/t)^a`` the kernel needs
    ``F3(nu/a - 1, b/a, 1, mu, b/a; 1 - theta, 1 - 1/theta)``.  Matching Mellin
    transforms reduces it to
    ``theta^mu [1 + (nu-a)/b (1-theta) 2F1(mu + nu/a, 1; 1 + b/a; 1-theta)]``,
    which stays accurate as ``theta -> 0`` where the double series converges
    arbitrarily slowly.  Agreement with :func:`appell_f3` is part of the tests.
    """
    theta = np.asarray(theta, dtype=float)
    g = b / a
    q = mu + nu / a
    coef = (nu - a) / b
    if coef == 0.0:
        out = theta**mu
    else:
        h = gauss_2f1_near_one(q, 1.0, g + 1.0, theta)
        out = theta**mu * (1.0 + coef * (1.0 - theta) * h)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# Mittag-Leffler family


@lru_cache(maxsize=128)
def _log_coefficients(l1: float, l2: float, l3: float, n_max: int = MAX_TERMS):
    """log|c_n| and sign(c_n) of ``c_n = (l3)_n / (Gamma(l1 n + l2) n!)``."""
    n = np.arange(n_max + 1, dtype=float)
    if l3 == 1.0:
        lpoch = sp.gammaln(n + 1.0)
        spoch = np.ones_like(n)
    else:
        # running product keeps full relative accuracy near the poles of Gamma
        factors = l3 + n[:-1]
        with np.errstate(divide="ignore"):
            lpoch = np.concatenate(([0.0], np.cumsum(np.log(np.abs(factors)))))
        spoch = np.concatenate(([1.0], np.cumprod(np.sign(factors))))
    arg = l1 * n + l2
    lden = sp.gammaln(arg)
    sden = sp.gammasgn(arg)
    pole = (arg <= 0) & (arg == np.round(arg))
    logc = lpoch - lden - sp.gammaln(n + 1.0)
    sign = spoch * sden
    logc[pole] = -np.inf
    sign[pole] = 0.0
    logc[sign == 0] = -np.inf
    logc.setflags(write=False)
    sign.setflags(write=False)
    return logc, sign


def prabhakar_coefficients(p: MLParams, n: int) -> np.ndarray:
    """Series coefficients ``(l3)_k / (Gamma(l1 k + l2) k!)`` for ``k <= n``."""
    logc, sign = _log_coefficients(p.lambda1, p.lambda2, p.lambda3, max(n, 1))
    return (sign * np.exp(logc))[: n + 1]


@lru_cache(maxsize=512)
def _terms_needed(l1, l2, l3, log_r_bucket):
    """(terms, log of the peak term) for radius ``exp(log_r_bucket)``; terms is -1 over the cap."""
    logc, _ = _log_coefficients(l1, l2, l3)
    n = np.arange(logc.size)
    lt = logc + n * log_r_bucket
    finite = np.isfinite(lt)
    if not finite.any():
        return 1, -np.inf
    peak_idx = int(np.argmax(np.where(finite, lt, -np.inf)))
    peak = float(lt[peak_idx])
    below = np.nonzero(~(lt[peak_idx:] > peak - 40.0))[0]
    # require the tail to stay small: three consecutive negligible terms
    for start in below:
        idx = peak_idx + start
        if idx + 3 <= logc.size - 1 and np.all(~(lt[idx : idx + 3] > peak - 40.0)):
            return idx + 3, peak
    return -1, peak


def _series_eval(p: MLParams, z: np.ndarray, max_log_peak: float = np.inf):
    """Vectorised series: returns (value, error estimate, usable mask).

    Arguments whose largest term exceeds ``exp(max_log_peak)`` are skipped
    unless all terms share a sign (no cancellation possible).
    """
    logc, sign = _log_coefficients(p.lambda1, p.lambda2, p.lambda3)
    val = np.zeros(z.shape, dtype=complex)
    err = np.full(z.shape, np.inf)
    ok = np.zeros(z.shape, dtype=bool)
    r = np.abs(z)
    zero = r == 0
    val[zero] = sign[0] * np.exp(logc[0])
    err[zero] = 0.0
    ok[zero] = True
    idx = np.nonzero(~zero)[0]
    if idx.size == 0:
        return val, err, ok
    bucket = np.ceil(np.log(r[idx]) * 16.0) / 16.0
    info = [_terms_needed(p.lambda1, p.lambda2, p.lambda3, float(b)) for b in bucket]
    needed = np.array([i[0] for i in info])
    peaks = np.array([i[1] for i in info])
    same_sign = (z[idx].imag == 0) & (z[idx].real > 0) & np.all(sign >= 0)
    usable = (needed > 0) & ((peaks <= max_log_peak) | same_sign)
    idx, needed = idx[usable], needed[usable]
    order = np.argsort(needed)
    idx, needed = idx[order], needed[order]
    start = 0
    budget = 2_000_000
    while start < idx.size:
        nmax = int(needed[start])
        stop = start
        while stop < idx.size and (stop - start + 1) * int(needed[stop]) <= budget:
            stop += 1
        stop = max(stop, start + 1)
        nmax = int(needed[stop - 1])
        sel = idx[start:stop]
        zz = z[sel]
        n = np.arange(nmax)
        lz = np.log(zz)
        with np.errstate(all="ignore"):
            arg = logc[None, :nmax] + n[None, :] * lz[:, None]
            terms = sign[None, :nmax] * np.exp(arg)
        terms[:, sign[:nmax] == 0] = 0.0
        with np.errstate(all="ignore"):
            mag = np.abs(terms)
            total = terms.sum(axis=1)
            scale = 4.0 * np.abs(np.where(np.isfinite(logc[:nmax]), logc[:nmax], 0.0))[None, :] + n[None, :] * np.abs(np.log(np.abs(zz)))[:, None] + 4.0
            est = _EPS * ((mag * scale).sum(axis=1) + np.log2(nmax + 1) * mag.sum(axis=1))
        good = np.all(np.isfinite(terms), axis=1)
        val[sel] = total
        err[sel] = np.where(good, est, np.inf)
        ok[sel] = good
        start = stop
    return val, err, ok


def _singular_points(p: MLParams, z: complex) -> list[complex]:
    """Zeros of ``s^{l1} - z`` on the principal sheet of ``s^{l1}``."""
    if z == 0:
        return []
    r, phi = abs(z), np.angle(z)
    out = []
    k_lo = math.ceil((-np.pi * p.lambda1 - phi) / (2 * np.pi)) - 1
    k_hi = math.floor((np.pi * p.lambda1 - phi) / (2 * np.pi)) + 1
    for k in range(k_lo, k_hi + 1):
        ang = (phi + 2 * np.pi * k) / p.lambda1
        if -np.pi < ang <= np.pi:
            out.append(r ** (1.0 / p.lambda1) * np.exp(1j * ang))
    return out


# branch points closer than this (in real part) to the contour spoil the rule
_BRANCH_CLEARANCE = 12.0
_BRANCH_COUNTS = (32, 48, 64)


def _branch_node_count(pts: list[complex]) -> int:
    """Smallest node count whose contour keeps every branch point well inside; 0 if none."""
    imag = np.array([q.imag for q in pts])
    real = np.array([q.real for q in pts])
    for n in _BRANCH_COUNTS:
        if np.all(laplace.contour_real_part(imag, n) - real >= _BRANCH_CLEARANCE):
            return n
    return 0


def _contour_eval(p: MLParams, z: np.ndarray, n: int = 32):
    """Contour representation ``(1/2 pi i) int e^s s^{-l2} (1 - z s^{-l1})^{-l3} ds``.

    For ``l3 = 1`` the singular points are simple poles with residues
    ``q^{1-l2} / l1``; their pole parts are subtracted from the integrand and
    added back exactly as ``residue * e^q``, so the rule never sees them.
    Otherwise they are branch points and must sit well inside the contour.
    Returns (value, usable mask).
    """
    l1, l2, l3 = p.lambda1, p.lambda2, p.lambda3
    out = np.zeros(z.shape, dtype=complex)
    ok = np.ones(z.shape, dtype=bool)
    counts = np.full(z.shape, n)
    poles = [_singular_points(p, complex(zi)) for zi in z]
    if l3 != 1.0:
        for i, pts in enumerate(poles):
            if pts:
                counts[i] = _branch_node_count(pts)
        ok &= counts > 0
    for m in np.unique(counts[ok]):
        sel = np.nonzero((counts == m) & ok)[0]
        s, c = laplace.talbot_contour(int(m))
        zz = z[sel][:, None]
        with np.errstate(all="ignore"):
            ls = np.log(s)[None, :]
            w = 1.0 - zz * np.exp(-l1 * ls)
            if l3 == 1.0:
                f = np.exp(-l2 * ls) / w
            else:
                f = np.exp(-l2 * ls - l3 * np.log(w))
            exact = np.zeros(sel.size, dtype=complex)
            if l3 == 1.0:
                for row, i in enumerate(sel):
                    for q in poles[i]:
                        res = q ** (1.0 - l2) / l1
                        f[row] -= res / (s - q)
                        exact[row] += res * np.exp(q)
            out[sel] = (c[None, :] * np.exp(s)[None, :] * f).sum(axis=1) + exact
    ok &= np.isfinite(out)
    return out, ok


def _series_extended(p: MLParams, z: complex) -> complex:
    """Power series in mpmath with enough digits to absorb its cancellation."""
    r = abs(z)
    logc, _ = _log_coefficients(p.lambda1, p.lambda2, p.lambda3)
    n = np.arange(logc.size)
    with np.errstate(all="ignore"):
        lt = logc + n * math.log(r)
    lt = np.where(np.isfinite(lt), lt, -np.inf)
    peak = max(float(lt.max()), 0.0)
    tail = np.nonzero((n > np.argmax(lt)) & (lt < -40.0))[0]
    if tail.size == 0 or peak > 3000.0:
        raise NonConvergence(f"Mittag-Leffler {p} not computable at z={z}")
    count = int(tail[0]) + 10
    with mpmath.workdps(int(peak / 2.3) + 30):
        a1, a2, a3, zz = (mpmath.mpf(p.lambda1), mpmath.mpf(p.lambda2), mpmath.mpf(p.lambda3),
                          mpmath.mpc(z))
        terms = (mpmath.rf(a3, k) * zz**k / (mpmath.gamma(a1 * k + a2) * mpmath.factorial(k))
                 for k in range(count))
        return complex(mpmath.fsum(terms))


def mittag_leffler(p: MLParams, z, *, rtol: float = 1e-12):
    """Prabhakar function ``sum (l3)_n z^n / (Gamma(l1 n + l2) n!)``.

    The power series is used whenever its estimated rounding error is below
    ``rtol`` relative (or ``1e-15`` absolute).  Otherwise the value comes
    from the contour integral of its Laplace transform (about ``1e-13``
    absolute), and where no contour applies, from the series summed in
    extended precision.  Real arguments give real results.  Raises
    :class:`NonConvergence` when the extended series would be too costly.
    """
    real_input = np.isrealobj(z)
    zarr = np.asarray(z, dtype=complex)
    flat = zarr.ravel()
    # a peak term of e^6 already costs ~1e-13 in rounding
    val, err, ok = _series_eval(p, flat, max_log_peak=6.0)
    accept = ok & ((err <= rtol * np.abs(val)) | (err <= 1e-15))
    rest = np.nonzero(~accept)[0]
    if rest.size:
        cval, cok = _contour_eval(p, flat[rest])
        val[rest[cok]] = cval[cok]
        failed = rest[~cok]
        if failed.size:
            fval, ferr, fok = _series_eval(p, flat[failed])
            tight = fok & ((ferr <= rtol * np.abs(fval)) | (ferr <= 1e-15))
            val[failed[tight]] = fval[tight]
            for i in failed[~tight]:
                val[i] = _series_extended(p, complex(flat[i]))
    out = val.reshape(zarr.shape)
    if real_input:
        out = out.real
        return out if out.ndim else float(out)
    return out if out.ndim else complex(out)


def ml_one_param(beta: float, z):
    """One-parameter Mittag-Leffler function ``E_beta(z)``."""
    if not 0 < beta <= 1:
        raise DomainError("beta must lie in (0, 1]")
    return mittag_leffler(MLParams(beta, 1.0, 1.0), z)
