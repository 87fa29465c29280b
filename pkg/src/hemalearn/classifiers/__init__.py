"""Supervised learners behind one fit/predict contract."""

from .base import (FittedModel, MARGIN, PROB, VOTE_STRICT, load_model,
                   predict, predict_score, save_model)
from .bayes import fit_gaussian_nb
from .boosting import BoostConfig, PRESETS, fit_adaboost, fit_gbdt
from .linear import fit_glm, fit_logistic
from .margin import fit_fast_large_margin, fit_svc
from .neighbors import fit_knn
from .trees import fit_decision_tree, fit_random_forest

__all__ = [
    "FittedModel", "MARGIN", "PROB", "VOTE_STRICT",
    "predict", "predict_score", "save_model", "load_model",
    "fit_decision_tree", "fit_random_forest", "fit_adaboost", "fit_gbdt",
    "BoostConfig", "PRESETS", "fit_knn", "fit_gaussian_nb", "fit_logistic",
    "fit_glm", "fit_svc", "fit_fast_large_margin",
]
