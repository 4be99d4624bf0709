"""Probabilistic regional solar power forecasting.

Hourly production forecasts up to 72 hours ahead from gridded irradiance
ensembles: Bayesian log-scale regression with banded Gaussian graphical
residual structure, Gaussian-copula temporal coupling, and a verification
suite (CRPS, PIT, interval coverage, band depth).
"""

from .bayes import (
    BetaPrior,
    ModelVariant,
    PosteriorDraws,
    PredictiveTrajectory,
    RegressionData,
    build_regression_data,
    gibbs_fit,
    predict_trajectory,
)
from .copula import ResidualArchive, couple_samples, estimate_correlation, normal_scores
from .errors import DataError, InputError, NumericalError, UnsupportedStructureError
from .graphs import GWishartSpec, PrecisionGraph, build_graph, gwishart_posterior, sample_gwishart
from .orchestrate import RunConfig, run_forecast, run_report, run_window_sweep
from .verification import (
    aggregate_scores,
    band_depth_rank,
    crps_gaussian,
    crps_sample,
    interval_score,
    pit,
)

__version__ = "0.1.0"
