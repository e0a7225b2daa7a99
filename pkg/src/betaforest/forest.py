"""Bootstrap ensembles of regression trees.

Each tree is grown on an n-out-of-n bootstrap sample with a random
stream derived from (master_seed, tree index), so training results do
not depend on scheduling order or thread count. Transformed baselines
(logit / arcsine MSE forests) grow their trees on the transformed
outcome; the beta criterion always works on the original scale.
"""

import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .betadist import fit_phi_given_means
from .dataset import Dataset
from .scoring import pointwise_loglik
from .special import Transform, inverse_transform, transform
from .tree import GrowthConfig, grow, predict_batch

__all__ = ["ForestModel", "OOBResult", "ForestPredictions", "train", "predict", "predict_oob", "variable_importance", "default_mtry"]


def default_mtry(p):
    """ceil(sqrt(p)), the forest default."""
    return max(1, math.ceil(math.sqrt(p)))


@dataclass
class ForestModel:
    trees: list
    config: GrowthConfig
    ntree: int
    transform: Transform
    inbag: np.ndarray  # (ntree, n_train) bootstrap multiplicities
    scale: float  # phi (beta criterion) or sigma^2 on the working scale
    schema: list
    master_seed: int
    n_train: int

    @property
    def family(self):
        if self.config.criterion == "beta_loglik":
            return "beta"
        return {
            Transform.IDENTITY: "gaussian_identity",
            Transform.LOGIT: "logit_normal",
            Transform.ARCSINE_SQRT: "arcsine_normal",
        }[self.transform]


@dataclass
class ForestPredictions:
    working: np.ndarray  # tree-average on the model's working scale
    response: np.ndarray  # back-transformed convenience output


@dataclass
class OOBResult:
    working: np.ndarray  # nan where a row was never out of bag
    response: np.ndarray
    has_oob: np.ndarray  # bool mask


def _train_one_tree(X, z, schema, config, seed_seq, bootstrap):
    rng = np.random.default_rng(seed_seq)
    n = X.shape[0]
    if bootstrap:
        bag = rng.integers(0, n, size=n)
    else:
        bag = np.arange(n)
    tree = grow(Dataset(X[bag], z[bag], schema), config, rng)
    return tree, np.bincount(bag, minlength=n)


def train(data: Dataset, config: GrowthConfig, ntree=500, transform_kind=Transform.IDENTITY,
          master_seed=0, n_jobs=1, bootstrap=True):
    """Train a forest; bitwise deterministic for fixed inputs and seed.

    bootstrap=False is a test hook that replaces every bootstrap sample
    with the identity sample (all rows in bag, so no OOB rows exist).
    """
    transform_kind = Transform(transform_kind)
    if data.n < 1:
        raise ValueError("empty training data")
    if ntree < 1:
        raise ValueError("ntree must be >= 1")
    y = data.y
    if np.any(y <= 0.0) or np.any(y >= 1.0):
        raise ValueError("outcomes must lie strictly inside (0, 1)")
    if config.criterion == "beta_loglik" and transform_kind is not Transform.IDENTITY:
        raise ValueError("the beta criterion is defined on the original scale; use transform=identity")
    z = np.asarray(transform(y, transform_kind), dtype=np.float64)
    seqs = np.random.SeedSequence(master_seed).spawn(ntree)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_train_one_tree)(data.X, z, data.schema, config, seqs[i], bootstrap)
        for i in range(ntree)
    )
    trees = [t for t, _ in results]
    inbag = np.stack([c for _, c in results]).astype(np.int64)
    model = ForestModel(
        trees=trees,
        config=config,
        ntree=ntree,
        transform=transform_kind,
        inbag=inbag,
        scale=1.0,
        schema=list(data.schema),
        master_seed=int(master_seed),
        n_train=data.n,
    )
    model.scale = _fit_scale(model, data, z)
    return model


def _fit_scale(model, data, z):
    oob = predict_oob(model, data)
    if oob.has_oob.any():
        mask = oob.has_oob
        preds = oob.working[mask]
        y_ref = data.y[mask]
        z_ref = z[mask]
    else:
        # degenerate case (e.g. ntree=1 with the identity-bag hook):
        # fall back to in-sample ensemble predictions
        preds = predict(model, data.X).working
        y_ref = data.y
        z_ref = z
    if model.config.criterion == "beta_loglik":
        return fit_phi_given_means(y_ref, preds, model.config.phi_bounds)
    resid = z_ref - preds
    return float(np.mean(resid * resid))


def predict(model: ForestModel, X):
    """Average of all trees' leaf predictions, per row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(model.schema):
        raise ValueError("feature matrix does not match the training schema")
    acc = np.zeros(X.shape[0])
    for tree in model.trees:
        acc += predict_batch(tree, X)
    working = acc / model.ntree
    return ForestPredictions(working=working, response=np.asarray(inverse_transform(working, model.transform)))


def predict_oob(model: ForestModel, data: Dataset):
    """Out-of-bag prediction: average only over trees omitting the row."""
    if data.n != model.n_train or data.p != len(model.schema):
        raise ValueError("predict_oob requires the training dataset")
    sums = np.zeros(data.n)
    counts = np.zeros(data.n, dtype=np.int64)
    for t, tree in enumerate(model.trees):
        oob_mask = model.inbag[t] == 0
        if not oob_mask.any():
            continue
        preds = predict_batch(tree, data.X[oob_mask])
        sums[oob_mask] += preds
        counts[oob_mask] += 1
    has = counts > 0
    working = np.full(data.n, np.nan)
    working[has] = sums[has] / counts[has]
    response = np.full(data.n, np.nan)
    response[has] = inverse_transform(working[has], model.transform)
    return OOBResult(working=working, response=response, has_oob=has)


def variable_importance(model: ForestModel, data: Dataset, seed=None):
    """Permutation importance on the OOB predictive log-likelihood.

    For each feature, its column is permuted within the OOB rows of each
    tree; the importance is the per-observation drop in log-likelihood
    (scored with the model's family and fitted scale), averaged over
    trees. Larger values mean more important features.
    """
    if data.n != model.n_train or data.p != len(model.schema):
        raise ValueError("variable_importance requires the training dataset")
    if seed is None:
        seed_seq = np.random.SeedSequence((model.master_seed, 0x1A7E))
    else:
        seed_seq = np.random.SeedSequence(seed)
    rng = np.random.default_rng(seed_seq)
    z = np.asarray(transform(data.y, model.transform))
    family = model.family
    imp = np.zeros(data.p)
    used = 0
    for t, tree in enumerate(model.trees):
        oob_idx = np.flatnonzero(model.inbag[t] == 0)
        if oob_idx.size == 0:
            continue
        used += 1
        X_oob = data.X[oob_idx]
        y_oob = data.y[oob_idx]
        base = _mean_score(y_oob, predict_batch(tree, X_oob), model.scale, family)
        perm = rng.permutation(oob_idx.size)
        for j in range(data.p):
            col = X_oob[:, j]
            if np.all(col == col[0]):
                continue  # permutation is a no-op
            Xp = X_oob.copy()
            Xp[:, j] = col[perm]
            imp[j] += base - _mean_score(y_oob, predict_batch(tree, Xp), model.scale, family)
    if used == 0:
        raise ValueError("no out-of-bag rows available for importance")
    imp /= used
    return {model.schema[j].name: float(imp[j]) for j in range(data.p)}


def _mean_score(ys, means, scale, family):
    return float(np.mean(pointwise_loglik(ys, means, scale, family)))
