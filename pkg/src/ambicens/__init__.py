"""Parameter estimation for batches with ambiguously censored lifetimes.

Units of a batch have a random installation delay ``X`` and a random
operating life ``T``. By a fixed calendar horizon ``T0`` only the units with
``X + T <= T0`` are seen, with both times recorded; for every other unit it
is unknown whether it was never installed or is installed and still
working. The package estimates the parameters of ``X`` and ``T`` by
iterative proportional imputation, and provides the exact-likelihood
baseline, a batch simulator and failure-count forecasts.
"""

from .data import BatchDataset
from .distributions import (
    CensoredSample,
    Exponential,
    Weibull,
    evaluate,
    fit_censored_exponential,
    fit_censored_weibull,
    fit_truncated_exponential,
    fit_truncated_weibull,
    make_distribution,
    sample_in_interval,
)
from .errors import (
    DatasetError,
    DegenerateIntervalError,
    EstimationError,
    MLENotFoundError,
    NoEventsError,
    NonConvergenceError,
    NoRootError,
)
from .estimator import EstimatorConfig, FitResult, check_convergence, fit, initial_estimates
from .exact import exact_loglik, exact_mle_iid_exponential, loglik_surface
from .forecast import expected_failures, rescale_dataset, rolling_refit_forecast
from .imputation import ImputationPlan, build_plan
from .simulate import ExperimentSpec, run_experiment, simulate_batch

__version__ = "0.1.0"
