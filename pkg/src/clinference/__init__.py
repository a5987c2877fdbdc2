"""Finite-sample valid inference from composite likelihoods.

Split and swap composite likelihood ratio statistics give confidence sets
and tests whose validity holds at every sample size and for any plug-in
estimator. The package ships two bivariate models with intractable joint
normalizers (exponential and log-normal conditionals), their estimators,
and a Monte Carlo harness for coverage and power sweeps.
"""

from .core import ConditionalModel, cl_log_likelihood, icl_log_density, icl_log_terms
from .estimation import EstimateResult, OptimizerSettings, constant_estimate, fit, mcle_lognorm, mcle_scalar
from .indexing import (
    DivisionIndex,
    SubsetIndex,
    WeightScheme,
    enumerate_divisions,
    enumerate_subsets,
    full_conditional_scheme,
    joint_scheme,
    total_weight,
)
from .inference import (
    ConfidenceSet1D,
    SplitSample,
    TestResult,
    confidence_set_1d,
    fit_halves,
    log_u_split,
    log_u_swap,
    member,
    ratio_statistic,
    ratio_test,
    split,
)
from .models import ExpConditionalModel, LogNormalConditionalModel, get_model

__all__ = [
    "cl_log_likelihood",
    "ConditionalModel",
    "confidence_set_1d",
    "ConfidenceSet1D",
    "constant_estimate",
    "DivisionIndex",
    "enumerate_divisions",
    "enumerate_subsets",
    "EstimateResult",
    "ExpConditionalModel",
    "fit",
    "fit_halves",
    "full_conditional_scheme",
    "get_model",
    "icl_log_density",
    "icl_log_terms",
    "joint_scheme",
    "log_u_split",
    "log_u_swap",
    "LogNormalConditionalModel",
    "mcle_lognorm",
    "mcle_scalar",
    "member",
    "OptimizerSettings",
    "ratio_statistic",
    "ratio_test",
    "split",
    "SplitSample",
    "SubsetIndex",
    "TestResult",
    "total_weight",
    "WeightScheme",
]

__version__ = "0.1.0"
