"""Alpha-skew-normal distribution, seven estimators and a Monte Carlo harness."""

from .distribution import AsnParams, cdf, delta1, delta2, delta3, log_pdf, pdf, quantile, sample, survival
from .errors import AsnError, ConvergenceError, DataError, DegenerateDataError, DomainError
from .estimators import FitResult, Method, OrderedSample, fit, initialize
from .gof import GofReport, ks_pvalue, ks_statistic, ks_test
from .montecarlo import SimConfig, SimulationReport, bias_mse, run_study

__version__ = "0.1.0"

__all__ = [
    "AsnParams", "pdf", "log_pdf", "cdf", "survival", "quantile", "sample",
    "delta1", "delta2", "delta3",
    "Method", "OrderedSample", "FitResult", "fit", "initialize",
    "GofReport", "ks_statistic", "ks_pvalue", "ks_test",
    "SimConfig", "SimulationReport", "run_study", "bias_mse",
    "AsnError", "DomainError", "DegenerateDataError", "DataError", "ConvergenceError",
]
