"""Solvers for evolution equations with homogeneous and convolution memory kernels.

The solution of ``u(t) = u0 + int_0^t k(t,s) L u(s) ds`` is computed two ways:
as a Fourier multiplier ``Phi(t, -psi(p))`` and as the expectation
``E[u0(x + X_t)]`` over a randomly scaled or time-changed Levy-type process.
"""

from . import cli, kernels, laplace, phi, processes, quadrature, randvar, solvers, specfun, symbols
from .errors import (
    BandwidthError,
    ConfigError,
    DomainError,
    FracEvoError,
    GridMismatch,
    InversionFailure,
    NonConvergence,
    NumericalError,
    QuadratureFailure,
    TruncationError,
)
from .kernels import (
    GGBM,
    Convolution,
    Custom,
    Fractional,
    PowerStretch,
    SaigoMaeda,
    Stretched,
    check_assumption,
    stretch_kernel,
    tempered_fractional,
)
from .phi import (
    closed_series,
    cm_probe,
    coeffs_general,
    coeffs_homogeneous,
    coeffs_saigo_maeda,
    pd_probe,
    phi_eval,
    volterra_residual,
)
from .processes import FLSMConfig, sample_marginal
from .solvers import InitialDatum, SpaceGrid, check_general_relation, compare_fields, mc_solve, solve_spectral
from .specfun import MLParams, mittag_leffler
from .symbols import Brownian, FractionalLaplacian, StableSkewed, compose_bernstein

__version__ = "0.1.0"
