"""Duration-severity backtesting of VaR and Expected Shortfall.

A reported PIT series is transformed into inter-violation durations
(geometric under a correct model) and violation severities (uniform
under a correct model); orthonormal polynomial moment conditions on
the two sequences feed a Wald test with finite-sample exact
Monte-Carlo p-values. Includes simulation DGPs, competitor tests, an
AR(1)-GARCH(1,1)-t estimation/forecasting pipeline, an adapter for
Marginal Expected Shortfall, and an experiment harness.
"""

from ._accel import BACKEND_NAME
from .dgplab import CALIBRATED, DgpKind, GarchParams
from .errors import (
    BacktestError,
    DomainError,
    InputError,
    NonConvergenceError,
    NoViolationsError,
    SampleTooSmallError,
)
from .mctest import TestOutcome, mc_pvalue, run_test, size_corrected_critical, wald_statistic
from .mesx import BivariatePitSeries, mes_sample
from .momentengine import MomentFamily, MomentSpec, enumerate_conditions, evaluate, preset
from .orthopoly import legendre, meixner
from .riskmodels import FitResult, ForecastSeries, fit, forecast, ljung_box, loglik
from .sampletx import (
    CumulativeViolationSeries,
    DurationSeveritySample,
    PitSeries,
    ViolationSeries,
    cumulative_violations,
    extract_sample,
    violations,
)
from .xharness import ExperimentConfig, power_experiment, rival_power_experiment, size_experiment

__all__ = [
    "BACKEND_NAME",
    "BacktestError",
    "BivariatePitSeries",
    "CALIBRATED",
    "CumulativeViolationSeries",
    "DgpKind",
    "DomainError",
    "DurationSeveritySample",
    "ExperimentConfig",
    "FitResult",
    "ForecastSeries",
    "GarchParams",
    "InputError",
    "MomentFamily",
    "MomentSpec",
    "NonConvergenceError",
    "NoViolationsError",
    "PitSeries",
    "SampleTooSmallError",
    "TestOutcome",
    "ViolationSeries",
    "cumulative_violations",
    "enumerate_conditions",
    "evaluate",
    "extract_sample",
    "fit",
    "forecast",
    "legendre",
    "ljung_box",
    "loglik",
    "mc_pvalue",
    "meixner",
    "mes_sample",
    "power_experiment",
    "preset",
    "rival_power_experiment",
    "run_test",
    "size_corrected_critical",
    "size_experiment",
    "violations",
    "wald_statistic",
]
