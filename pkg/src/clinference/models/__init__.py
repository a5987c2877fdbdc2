"""The two bivariate conditionally specified models and their registry."""

from __future__ import annotations

from .exponential import (
    ExpConditionalModel,
    ExpCondParams,
    exp_conditional_logpdf,
    exp_joint_logpdf,
    exp_sample,
)
from .lognormal import (
    LogNormalConditionalModel,
    LogNormCondParams,
    lognorm_conditional_logpdf,
    lognorm_joint_logpdf,
    lognorm_sample,
)
from .quadrature import exp_kappa, hyperu, lognorm_kappa

MODELS = {
    ExpConditionalModel.name: ExpConditionalModel,
    LogNormalConditionalModel.name: LogNormalConditionalModel,
}


def get_model(name: str):
    """Instantiate a model from its identifier (``"exp-cond"`` or ``"lognorm-cond"``)."""
    try:
        return MODELS[name]()
    except KeyError:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None


__all__ = [
    "MODELS",
    "get_model",
    "ExpConditionalModel",
    "ExpCondParams",
    "exp_conditional_logpdf",
    "exp_joint_logpdf",
    "exp_kappa",
    "exp_sample",
    "hyperu",
    "LogNormalConditionalModel",
    "LogNormCondParams",
    "lognorm_conditional_logpdf",
    "lognorm_joint_logpdf",
    "lognorm_kappa",
    "lognorm_sample",
]
