"""Regression forests and parametric regression for outcomes in (0,1).

The headline estimator is a random forest whose splits maximize the
beta log-likelihood at node-wise moment estimates; MSE forests on raw
or transformed outcomes and logit-link parametric beta regression are
included as baselines, together with a seeded simulation harness.
"""

from .betadist import BetaParams, estimate_node_params, fit_phi_given_means, log_density, moments, sample
from .dataset import ColumnKind, ColumnSchema, Dataset
from .forest import ForestModel, default_mtry, predict, predict_oob, train, variable_importance
from .glm import BetaGlmFit, DesignSpec
from .kernels import BACKEND
from .scoring import predictive_loglik
from .simulate import METHODS, EvalRecord, ScenarioSpec, generate_dataset, run_replication, run_study
from .special import Transform, digamma, log_gamma
from .tree import GrowthConfig, SplitRule, TreeNode, best_split, grow, predict_mean, split_gain

__version__ = "0.1.0"
