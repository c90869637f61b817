"""Binary classifiers trained on fixed-length feature vectors."""
from .base import (
    DimensionError,
    LabeledDataset,
    Scaler,
    apply_scaler,
    fit_scaler,
)
from .boost import BoostModel, BoostParams, boost_fit, boost_predict, boost_proba, boost_raw_score
from .forest import ForestModel, ForestParams, forest_fit, forest_predict, forest_proba
from .grid import (
    DEFAULT_GRIDS,
    KINDS,
    GridSearchResult,
    fit_model,
    grid_search,
    kind_of_model,
    learner_factory,
    make_params,
    model_scores,
)
from .svm import ConvergenceWarning, SvmModel, SvmParams, svm_decision, svm_fit, svm_predict
from .tree import ClassificationTree, RegressionTree

__all__ = [
    "DimensionError",
    "LabeledDataset",
    "Scaler",
    "apply_scaler",
    "fit_scaler",
    "ConvergenceWarning",
    "SvmParams",
    "SvmModel",
    "svm_fit",
    "svm_decision",
    "svm_predict",
    "ClassificationTree",
    "RegressionTree",
    "ForestParams",
    "ForestModel",
    "forest_fit",
    "forest_proba",
    "forest_predict",
    "BoostParams",
    "BoostModel",
    "boost_fit",
    "boost_proba",
    "boost_predict",
    "boost_raw_score",
    "KINDS",
    "DEFAULT_GRIDS",
    "GridSearchResult",
    "make_params",
    "fit_model",
    "model_scores",
    "kind_of_model",
    "learner_factory",
    "grid_search",
]
