"""Control charts for fractions and proportions.

Monitors (0, 1)-valued quality characteristics with quantile control limits
from a beta regression in which both the mean and the dispersion follow
their own regression structures. The classical constant-limit beta chart
and the normal-theory regression chart are included as comparators, along
with Monte Carlo average run length evaluation.
"""

__version__ = "0.1.0"

from ._backend import BACKEND_NAME
from .betadist import MuSigma, ShapePair, to_musigma, to_shape
from .charts import (
    ChartResult,
    alpha_from_arl0,
    bcc_limits,
    brcc_limits,
    detect_signals,
    rcc_limits,
)
from .errors import (
    BetaChartError,
    ConvergenceError,
    DataError,
    DesignError,
    DomainError,
    SimulationError,
)
from .fit import (
    Dataset,
    FittedBetaReg,
    FittedOLS,
    LrTestResult,
    ModelSpec,
    fit_betareg,
    fit_ols,
    inference,
    lr_constant_dispersion,
)
from .arl import (
    ArlEstimate,
    Scenario,
    ShiftSpec,
    arl_curve,
    gen_covariates,
    make_scenario,
    scenario_characteristics,
    simulate_arl,
)

__all__ = [
    "__version__",
    "BACKEND_NAME",
    "MuSigma",
    "ShapePair",
    "to_musigma",
    "to_shape",
    "ChartResult",
    "alpha_from_arl0",
    "bcc_limits",
    "brcc_limits",
    "rcc_limits",
    "detect_signals",
    "BetaChartError",
    "ConvergenceError",
    "DataError",
    "DesignError",
    "DomainError",
    "SimulationError",
    "Dataset",
    "FittedBetaReg",
    "FittedOLS",
    "LrTestResult",
    "ModelSpec",
    "fit_betareg",
    "fit_ols",
    "inference",
    "lr_constant_dispersion",
    "ArlEstimate",
    "Scenario",
    "ShiftSpec",
    "arl_curve",
    "gen_covariates",
    "make_scenario",
    "scenario_characteristics",
    "simulate_arl",
]
