"""Field solvers: Fourier multiplier, Monte Carlo expectation, and cross-checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import quadrature
from .errors import BandwidthError, ConfigError, DomainError, GridMismatch
from .kernels import KernelSpec
from .phi import PhiSeries, pd_probe, phi_eval
from .processes import ProcessModel, sample_marginal
from .randvar import RandomStream
from .symbols import SymbolSpec

MC_BATCH = 16384
_NODE_BLOCK = 4096


@dataclass(frozen=True)
class SpaceGrid:
    """Periodic grid ``x_j = x_min + j dx``, ``dx = (x_max - x_min) / n_points``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if n < 64 or n & (n - 1):
            raise ConfigError(f"n_points must be a power of two >= 64, got {n}")
        if not self.x_max > self.x_min:
            raise ConfigError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def frequencies(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, self.dx)

    @property
    def nyquist(self) -> float:
        return np.pi / self.dx


@dataclass(frozen=True)
class InitialDatum:
    """Rapidly decaying initial condition.

    ``gaussian`` is ``exp(-(x - center)^2 / (2 width^2))``; ``custom`` wraps a
    vectorised callable whose decay the caller vouches for.
    """

    family: str
    center: float = 0.0
    width: float = 1.0
    func: Optional[Callable] = field(default=None, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.family == "gaussian":
            if not self.width > 0:
                raise ConfigError("Gaussian width must be positive")
        elif self.family == "custom":
            if self.func is None:
                raise ConfigError("custom initial datum needs a callable")
        else:
            raise ConfigError(f"unknown initial datum family {self.family!r}")

    @staticmethod
    def gaussian(center: float = 0.0, width: float = 1.0) -> "InitialDatum":
        return InitialDatum("gaussian", center, width)

    @staticmethod
    def custom(func: Callable, label: str = "custom") -> "InitialDatum":
        return InitialDatum("custom", func=func, label=label)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "gaussian":
            return np.exp(-0.5 * ((x - self.center) / self.width) ** 2)
        return np.asarray(self.func(x), dtype=float)


@dataclass(frozen=True)
class FieldEstimate:
    grid: SpaceGrid
    t: float
    values: np.ndarray
    standard_errors: Optional[np.ndarray] = None
    provenance: str = "spectral"
    n_draws: Optional[int] = None
    seed: Optional[int] = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if (self.standard_errors is None) != (self.provenance != "monte_carlo"):
            raise ConfigError("standard errors are present exactly for Monte Carlo estimates")


def multiplier(series: PhiSeries, psi: SymbolSpec, t: float, p) -> np.ndarray:
    """``Phi(t, -psi(p))`` with the value 1 imposed at ``p = 0``."""
    p = np.asarray(p, dtype=float)
    if t == 0:
        return np.ones(p.shape, dtype=complex)
    lam = -np.asarray(psi(p), dtype=complex)
    out = np.asarray(phi_eval(series, t, lam), dtype=complex)
    return np.where(p == 0, 1.0 + 0j, out)


def solve_spectral(u0: InitialDatum, psi: SymbolSpec, series: PhiSeries, t: float,
                   grid: SpaceGrid, *, boundary_tol: float = 1e-12, max_doublings: int = 8,
                   check_pd: bool = False) -> FieldEstimate:
    """``u(t, .) = F^{-1}[F[u0] Phi(t, -psi)]`` on ``grid``.

    The periodic box is doubled (zero-filled, same spacing) until the evolved
    field is below ``boundary_tol`` at the box edge, so heavy tails do not
    wrap around.
    """
    if t < 0:
        raise DomainError("time must be nonnegative")
    base = u0(grid.nodes)
    scale_u0 = max(np.max(np.abs(base)), 1e-300)
    if max(abs(base[0]), abs(base[-1])) > boundary_tol * scale_u0:
        raise BandwidthError("initial datum does not decay to the grid boundary")
    spectrum = np.fft.fft(base) * grid.dx
    nyq = np.abs(spectrum[grid.n_points // 2])
    if nyq > 1e-12 * max(np.abs(spectrum[0]), 1.0):
        raise BandwidthError(f"|F[u0]| = {nyq:.3g} at the Nyquist frequency; refine the grid")
    if t == 0:
        return FieldEstimate(grid, 0.0, base.copy())
    n, left = grid.n_points, 0
    for doubling in range(max_doublings + 1):
        padded = np.zeros(n)
        padded[left:left + grid.n_points] = base
        p = 2.0 * np.pi * np.fft.fftfreq(n, grid.dx)
        m = multiplier(series, psi, t, p)
        field_vals = np.fft.ifft(np.fft.fft(padded) * m)
        edge = max(abs(field_vals[0]), abs(field_vals[-1]))
        if edge <= boundary_tol * scale_u0 or doubling == max_doublings:
            break
        left += n // 2
        n *= 2
    values = field_vals.real[left:left + grid.n_points]
    diagnostics = {"box_points": n, "edge_value": float(edge),
                   "box_mass": float(np.sum(field_vals.real) * grid.dx),
                   "initial_mass": float(np.sum(base) * grid.dx),
                   "imag_max": float(np.max(np.abs(field_vals.imag)))}
    if check_pd:
        probe_p = np.linspace(-grid.nyquist / 4, grid.nyquist / 4, 41)
        diagnostics["positive_definite"] = pd_probe(
            lambda q: multiplier(series, psi, t, q), probe_p).passed
    return FieldEstimate(grid, float(t), values, diagnostics=diagnostics)


def _batch_streams(rng: Union[int, RandomStream], count: int) -> list[RandomStream]:
    if isinstance(rng, np.random.Generator):
        return rng.spawn(count)
    children = np.random.SeedSequence(int(rng)).spawn(count)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def mc_solve(u0: InitialDatum, model: ProcessModel, t: float, grid: SpaceGrid, n_draws: int,
             rng: Union[int, RandomStream], *, batch: int = MC_BATCH) -> FieldEstimate:
    """``u(t, x) ~ mean_i u0(x + X_t^(i))`` with one draw set shared by all nodes.

    ``rng`` is a seed or a generator; batch ``j`` uses child stream ``j``.
    """
    if n_draws < 100:
        raise DomainError("need at least 100 draws")
    x = grid.nodes
    seed = None if isinstance(rng, np.random.Generator) else int(rng)
    if t == 0:
        return FieldEstimate(grid, 0.0, u0(x), np.zeros(x.size), "monte_carlo", n_draws, seed)
    n_batches = math.ceil(n_draws / batch)
    streams = _batch_streams(rng, n_batches)
    sums = np.empty((n_batches, x.size))
    squares = np.empty((n_batches, x.size))
    for j, stream in enumerate(streams):
        size = min(batch, n_draws - j * batch)
        draws = np.asarray(sample_marginal(model, t, stream, size), dtype=float)
        s1 = np.zeros(x.size)
        s2 = np.zeros(x.size)
        for i in range(0, size, _NODE_BLOCK):
            vals = u0(x[:, None] + draws[None, i:i + _NODE_BLOCK])
            s1 += vals.sum(axis=1)
            s2 += (vals * vals).sum(axis=1)
        sums[j], squares[j] = s1, s2
    mean = np.sum(sums, axis=0) / n_draws
    var = np.maximum(np.sum(squares, axis=0) / n_draws - mean * mean, 0.0) * n_draws / (n_draws - 1)
    return FieldEstimate(grid, float(t), mean, np.sqrt(var / n_draws), "monte_carlo", n_draws, seed)


@dataclass(frozen=True)
class FieldComparison:
    sup_diff: float
    l2_diff: float
    nodes_outside_band: int
    n_nodes: int

    @property
    def fraction_outside(self) -> float:
        return self.nodes_outside_band / self.n_nodes


def compare_fields(a: FieldEstimate, b: FieldEstimate, *, sigmas: float = 4.0,
                   floor: Optional[float] = None) -> FieldComparison:
    """Norms of ``a - b``; with standard errors, the count of nodes outside the band.

    The band is ``sigmas`` standard errors plus ``floor``.  By default the
    floor is ``sigmas * sup|u| / n_draws``: a contribution of probability
    below ``1/n_draws`` is usually never sampled, so its standard error reads
    as zero although the mean may differ by that much.
    """
    if a.grid != b.grid or a.t != b.t:
        raise GridMismatch("fields live on different grids or times")
    diff = a.values - b.values
    sup = float(np.max(np.abs(diff)))
    l2 = float(math.sqrt(a.grid.dx * np.sum(diff * diff)))
    se2 = np.zeros(diff.shape)
    for f in (a, b):
        if f.standard_errors is not None:
            se2 = se2 + f.standard_errors**2
    draws = [f.n_draws for f in (a, b) if f.n_draws]
    if floor is None:
        peak = max(np.max(np.abs(a.values)), np.max(np.abs(b.values)))
        floor = sigmas * peak / min(draws) if draws else 0.0
    floor = max(floor, 1e-12)
    outside = 0
    if np.any(se2 > 0) or a.standard_errors is not None or b.standard_errors is not None:
        outside = int(np.sum(np.abs(diff) > sigmas * np.sqrt(se2) + floor))
    return FieldComparison(sup, l2, outside, diff.size)


@dataclass(frozen=True)
class RelationReport:
    p_grid: np.ndarray
    residuals: np.ndarray
    bands: np.ndarray
    max_residual: float
    band: float

    @property
    def passed(self) -> bool:
        return bool(np.all(np.abs(self.residuals) <= self.bands))


def check_general_relation(model: ProcessModel, psi: SymbolSpec, k: KernelSpec, t: float, p_grid,
                           n_draws: int, rng: Union[int, RandomStream], *, sigmas: float = 4.0,
                           levels: int = 8, order: int = 10) -> RelationReport:
    """Monte Carlo residual of ``1 - phi_t(p) = psi(p) int_0^t k(t,s) phi_s(p) ds``.

    Each quadrature time gets its own independent stream, so the variance of
    the right side is ``|psi|^2 sum_j |c_j|^2 Var_j / n`` rather than the
    square of the summed weights; the band is ``sigmas`` standard errors.
    """
    if not t > 0:
        raise DomainError("time must be positive")
    if not k.singularity_aware:
        raise ConfigError("the relation check needs a kernel with known endpoint exponents")
    left, right = k.endpoint_exponents()
    rule = quadrature.interval_rule(t, left, right, left_levels=levels, right_levels=levels,
                                    order=order)
    coef = k(t, rule.nodes, rule.gaps) * rule.weights
    p = np.asarray(p_grid, dtype=float).ravel()
    sym = np.asarray(psi(p), dtype=complex)
    streams = _batch_streams(rng, rule.nodes.size + 1)

    def moments(time, stream):
        x = np.asarray(sample_marginal(model, time, stream, n_draws), dtype=float)
        ph = np.outer(p, x)
        c, s = np.cos(ph), np.sin(ph)
        return (c.mean(axis=1) + 1j * s.mean(axis=1),
                (c.var(axis=1, ddof=1) + 1j * s.var(axis=1, ddof=1)) / n_draws)

    phi_t, var_t = moments(t, streams[0])
    lhs = 1.0 - phi_t
    integral = np.zeros(p.size, dtype=complex)
    var_int = np.zeros(p.size, dtype=complex)
    for s_node, c_j, stream in zip(rule.nodes, coef, streams[1:]):
        mean_j, var_j = moments(s_node, stream)
        integral += c_j * mean_j
        var_int += c_j * c_j * var_j
    mean = lhs - sym * integral
    # real and imaginary parts of psi * phi mix; bound each part's variance
    sym2 = np.abs(sym) ** 2
    var_re = var_t.real + sym2 * (var_int.real + var_int.imag)
    var_im = var_t.imag + sym2 * (var_int.real + var_int.imag)
    bands = sigmas * np.sqrt(var_re + var_im) + 1e-12
    worst = int(np.argmax(np.abs(mean)))
    return RelationReport(p, mean, bands, float(np.abs(mean[worst])), float(bands[worst]))
