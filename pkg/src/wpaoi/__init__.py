"""Age of information and peak AoI of wireless-powered direct, DF and AF relaying.

The package has three layers:

* :mod:`wpaoi.system`, :mod:`wpaoi.specfun`, :mod:`wpaoi.charging`: physical
  parameters, success probabilities, special functions and charging-time laws.
* :mod:`wpaoi.analysis`: closed-form age metrics, the DF queue bound and the
  special-case table.
* :mod:`wpaoi.simulator`: a slot-level Monte Carlo that reproduces all of it.

:mod:`wpaoi.cli` drives experiments and writes CSV.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ConvergenceError,
    Diverged,
    DivideByZeroProb,
    DomainError,
    InvalidParam,
    RelayPowerInfeasible,
    UnstableQueue,
    WpaoiError,
)
from .specfun import Tolerance, bessel_k1, log_factorial, regularized_gamma_q  # noqa: E402
from .system import DerivedParams, SystemParams, db_to_linear, derive, validate  # noqa: E402
from .charging import AfWaitDist, ChargeTimeDist  # noqa: E402
from .analysis import (  # noqa: E402
    CycleMoments,
    PaoiResult,
    SpecialCaseSpec,
    analyze_scheme,
    aoi_onehop,
    cycle_moments,
    paoi_df_upper,
    paoi_onehop,
    special_case,
)
from .simulator import AgeStats, SimConfig, run, validate_against_analysis  # noqa: E402

__all__ = [
    "__version__",
    "WpaoiError", "InvalidParam", "RelayPowerInfeasible", "DivideByZeroProb", "DomainError",
    "ConvergenceError", "UnstableQueue", "Diverged", "ConfigError",
    "Tolerance", "bessel_k1", "log_factorial", "regularized_gamma_q",
    "SystemParams", "DerivedParams", "db_to_linear", "derive", "validate",
    "ChargeTimeDist", "AfWaitDist",
    "CycleMoments", "PaoiResult", "SpecialCaseSpec", "analyze_scheme", "aoi_onehop", "cycle_moments",
    "paoi_df_upper", "paoi_onehop", "special_case",
    "AgeStats", "SimConfig", "run", "validate_against_analysis",
]
