"""rumorsim - simulation and limit theory for non-Markovian rumor spreading with contestants.

Usage::

    from rumorsim import ExperimentConfig, run

    report = run(ExperimentConfig(experiment="verify-flln", n=(100, 1000, 10000)))
    print(report.to_text())
"""

from .config import Experiment, ExperimentConfig, Model, default_contestant_laws, default_lmr_laws
from .errors import (
    ERR_CONFIG_INVALID,
    ERR_CONSERVATION,
    ERR_DEGENERATE,
    ERR_EMPTY_ENSEMBLE,
    ERR_EVENT_ORDER,
    ERR_HORIZON,
    ERR_INDEFINITE,
    ERR_INSUFFICIENT_DATA,
    ERR_LAW_INVALID,
    ERR_MISSING_MARKS,
    ERR_OUT_OF_RANGE,
    ERR_OUTPUT,
    ERR_PICARD,
    ERR_QUADRATURE,
    ERR_STEP_REJECTED,
    ERR_UNKNOWN_PAIR,
    ConfigurationError,
    DegenerateEnsembleError,
    DegenerateEnsembleWarning,
    DomainError,
    InsufficientDataError,
    InvariantViolation,
    NumericalError,
    OutputError,
    RangeError,
    RumorSimError,
    is_rumorsim_error,
)
from .fclt import (
    NOISE_NAMES,
    CovarianceForm,
    CovarianceModel,
    LimitFluctuation,
    LimitNoiseSampler,
    NoiseName,
    NoisePath,
    cov_table,
    empirical_cov,
    estimate_QB,
    extract_noise,
    sample_limit_noise,
    solve_linear_svie,
)
from .flln import FllnSolution, residual, solve_contestant, solve_lmr
from .harness import ExperimentRunner, StatReport, run
from .kernels import KernelKind, kernel_eval, kernel_on_grid
from .laws import ConditionalDelayLaw, ConditionalMode, DelayLaw, LawKind, LmrLaws, ModelLaws, RateFunction
from .lmr import LMR_NOISE_NAMES, LmrCovarianceModel, estimate_QC, extract_lmr_noise, lmr_cov_table, simulate_lmr
from .simulator import compensator, counts_at, counts_on_grid, simulate, time_rescaled_interarrivals
from .stats import ks_exp1, zscore
from .types import (
    EventKind,
    EventRecord,
    Grid,
    LmrSimConfig,
    LmrState,
    Process,
    Side,
    SimConfig,
    StateCounts,
    Trajectory,
)

__all__ = [
    # Config
    "Experiment",
    "ExperimentConfig",
    "Model",
    "default_contestant_laws",
    "default_lmr_laws",
    # Errors
    "RumorSimError",
    "ConfigurationError",
    "RangeError",
    "DomainError",
    "NumericalError",
    "InsufficientDataError",
    "DegenerateEnsembleError",
    "DegenerateEnsembleWarning",
    "InvariantViolation",
    "OutputError",
    "is_rumorsim_error",
    # Error codes
    "ERR_CONFIG_INVALID",
    "ERR_CONSERVATION",
    "ERR_DEGENERATE",
    "ERR_EMPTY_ENSEMBLE",
    "ERR_EVENT_ORDER",
    "ERR_HORIZON",
    "ERR_INDEFINITE",
    "ERR_INSUFFICIENT_DATA",
    "ERR_LAW_INVALID",
    "ERR_MISSING_MARKS",
    "ERR_OUT_OF_RANGE",
    "ERR_OUTPUT",
    "ERR_PICARD",
    "ERR_QUADRATURE",
    "ERR_STEP_REJECTED",
    "ERR_UNKNOWN_PAIR",
    # Laws and kernels
    "RateFunction",
    "LawKind",
    "DelayLaw",
    "ConditionalMode",
    "ConditionalDelayLaw",
    "ModelLaws",
    "LmrLaws",
    "KernelKind",
    "kernel_eval",
    "kernel_on_grid",
    # Types
    "Grid",
    "StateCounts",
    "LmrState",
    "Side",
    "EventKind",
    "Process",
    "EventRecord",
    "SimConfig",
    "LmrSimConfig",
    "Trajectory",
    # Simulation
    "simulate",
    "simulate_lmr",
    "counts_at",
    "counts_on_grid",
    "compensator",
    "time_rescaled_interarrivals",
    # Fluid limit
    "FllnSolution",
    "solve_contestant",
    "solve_lmr",
    "residual",
    # Fluctuations
    "NOISE_NAMES",
    "LMR_NOISE_NAMES",
    "NoiseName",
    "NoisePath",
    "CovarianceForm",
    "CovarianceModel",
    "LmrCovarianceModel",
    "LimitNoiseSampler",
    "LimitFluctuation",
    "extract_noise",
    "extract_lmr_noise",
    "cov_table",
    "lmr_cov_table",
    "estimate_QB",
    "estimate_QC",
    "sample_limit_noise",
    "solve_linear_svie",
    "empirical_cov",
    # Statistics and harness
    "ks_exp1",
    "zscore",
    "ExperimentRunner",
    "StatReport",
    "run",
]
