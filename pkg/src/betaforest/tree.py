"""Single regression trees grown by recursive binary partitioning.

Splits maximize either the beta log-likelihood at node-wise moment
estimates or the classical MSE criterion. The beta criterion requires
outcomes in (0,1); MSE trees accept any finite outcome, which is how
the forest module grows them on logit / arcsine transformed scales.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .betadist import DEFAULT_PHI_BOUNDS, MU_EPS, estimate_node_params
from .dataset import ColumnKind, Dataset

__all__ = ["SplitRule", "TreeNode", "GrowthConfig", "split_gain", "best_split", "grow", "predict_mean", "predict_batch"]

THRESHOLD = "threshold"
SUBSET = "subset"


@dataclass(frozen=True)
class SplitRule:
    feature_index: int
    kind: str  # THRESHOLD or SUBSET
    threshold: float = float("nan")  # goes left if value <= threshold
    left_categories: frozenset = frozenset()  # category codes routed left

    def goes_left(self, value):
        if self.kind == THRESHOLD:
            return value <= self.threshold
        return int(value) in self.left_categories


@dataclass
class TreeNode:
    node_id: int
    split: SplitRule | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    mu: float = float("nan")  # leaf prediction (working scale)
    phi: float | None = None  # leaf precision, beta criterion only
    n_obs: int = 0

    @property
    def is_leaf(self):
        return self.split is None


@dataclass(frozen=True)
class GrowthConfig:
    criterion: str = "beta_loglik"  # or "mse"
    mtry: int | None = None  # None: use all features
    min_node_size: int = 5  # nodes of at most this size are leaves
    min_child_size: int | None = None  # None: 2 for beta, 1 for mse
    max_categories_exhaustive: int = 12
    phi_bounds: tuple = DEFAULT_PHI_BOUNDS

    def __post_init__(self):
        if self.criterion not in ("beta_loglik", "mse"):
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be >= 1")
        mcs = self.effective_min_child()
        if self.criterion == "beta_loglik" and mcs < 2:
            raise ValueError("beta criterion needs min_child_size >= 2")
        if mcs < 1:
            raise ValueError("min_child_size must be >= 1")

    def effective_min_child(self):
        if self.min_child_size is not None:
            return self.min_child_size
        return 2 if self.criterion == "beta_loglik" else 1

    @property
    def criterion_code(self):
        return kernels.CRIT_BETA if self.criterion == "beta_loglik" else kernels.CRIT_MSE


def _group_stats(ys, beta):
    s1 = float(np.sum(ys))
    s2 = float(np.dot(ys, ys))
    if beta:
        sly = float(np.sum(np.log(ys)))
        sl1y = float(np.sum(np.log1p(-ys)))
    else:
        sly = sl1y = 0.0
    return ys.size, s1, s2, sly, sl1y


def node_score(ys, criterion_code, phi_bounds=DEFAULT_PHI_BOUNDS):
    """Criterion score of a group of outcomes (log-likelihood or -SSE)."""
    m, s1, s2, sly, sl1y = _group_stats(ys, criterion_code == kernels.CRIT_BETA)
    return kernels.group_score(m, s1, s2, sly, sl1y, criterion_code, *phi_bounds)


def split_gain(parent, left, right, criterion, phi_bounds=DEFAULT_PHI_BOUNDS):
    """Criterion gain of splitting parent into (left, right).

    For the beta criterion this is the increase of the tree's total
    log-likelihood at node-wise moment estimates; for mse it is the
    decrease in total within-node sum of squared errors.
    """
    parent = np.asarray(parent, dtype=np.float64)
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    if left.size + right.size != parent.size or left.size == 0 or right.size == 0:
        raise ValueError("left and right must partition parent")
    if not np.array_equal(np.sort(np.concatenate([left, right])), np.sort(parent)):
        raise ValueError("left and right must partition parent")
    code = kernels.CRIT_BETA if criterion == "beta_loglik" else kernels.CRIT_MSE
    if code == kernels.CRIT_BETA and (left.size < 2 or right.size < 2):
        raise ValueError("beta criterion needs at least 2 observations per child")
    return (
        node_score(left, code, phi_bounds)
        + node_score(right, code, phi_bounds)
        - node_score(parent, code, phi_bounds)
    )


def _scan_numeric(col, ys, parent_score, code, min_child, lo, hi):
    order = np.argsort(col, kind="stable")
    xs = np.ascontiguousarray(col[order])
    ys_s = np.ascontiguousarray(ys[order])
    k, gain = kernels.scan_thresholds(xs, ys_s, parent_score, code, min_child, lo, hi)
    if k < 0:
        return None
    return 0.5 * (xs[k] + xs[k + 1]), gain


def _categorical_stats(col, ys, cats, beta):
    stats = {}
    for c in cats:
        mask = col == c
        stats[c] = _group_stats(ys[mask], beta)
    return stats


def _scan_subsets(col, ys, cats, parent_score, code, min_child, lo, hi):
    """Exhaustive bipartition scan over observed categories."""
    beta = code == kernels.CRIT_BETA
    stats = _categorical_stats(col, ys, cats, beta)
    r = len(cats)
    best = None
    best_gain = -np.inf
    for bits in range(2 ** (r - 1) - 1):
        left = [cats[0]]
        for i in range(r - 1):
            if bits >> i & 1:
                left.append(cats[i + 1])
        agg = [0.0] * 5
        for c in left:
            for j in range(5):
                agg[j] += stats[c][j]
        m_l = int(agg[0])
        m_r = ys.size - m_l
        if m_l < min_child or m_r < min_child:
            continue
        tot = _group_stats(ys, beta)
        score = kernels.group_score(m_l, agg[1], agg[2], agg[3], agg[4], code, lo, hi)
        score += kernels.group_score(
            m_r, tot[1] - agg[1], tot[2] - agg[2], tot[3] - agg[3], tot[4] - agg[4], code, lo, hi
        )
        gain = score - parent_score
        if np.isfinite(gain) and gain > best_gain:
            best_gain = gain
            best = frozenset(left)
    if best is None:
        return None
    return best, best_gain


def _scan_ordered_categories(col, ys, cats, parent_score, code, min_child, lo, hi):
    """CART device for many categories: order by mean outcome, scan as ordinal."""
    means = {c: float(np.mean(ys[col == c])) for c in cats}
    ordered = sorted(cats, key=lambda c: (means[c], c))
    rank = {c: i for i, c in enumerate(ordered)}
    ranks = np.asarray([rank[int(v)] for v in col], dtype=np.float64)
    hit = _scan_numeric(ranks, ys, parent_score, code, min_child, lo, hi)
    if hit is None:
        return None
    thr, gain = hit
    left = frozenset(c for c in cats if rank[c] <= thr)
    return left, gain


def best_split(X, ys, candidate_features, config: GrowthConfig, schema):
    """Best feasible rule over the candidate features, or None.

    Candidates are scanned in draw order and only strictly better gains
    replace the incumbent, so equal-gain ties resolve to the earliest
    candidate (and within a feature to the smallest threshold / first
    enumerated subset).
    """
    code = config.criterion_code
    lo, hi = config.phi_bounds
    min_child = config.effective_min_child()
    parent_score = node_score(ys, code, config.phi_bounds)
    best_rule = None
    best_gain = -np.inf
    for f in candidate_features:
        col = X[:, f]
        if schema[f].kind is ColumnKind.CATEGORICAL:
            cats = sorted(int(v) for v in np.unique(col))
            if len(cats) < 2:
                continue
            if len(cats) <= config.max_categories_exhaustive:
                hit = _scan_subsets(col, ys, cats, parent_score, code, min_child, lo, hi)
            else:
                hit = _scan_ordered_categories(col, ys, cats, parent_score, code, min_child, lo, hi)
            if hit is not None and hit[1] > best_gain:
                best_gain = hit[1]
                best_rule = SplitRule(int(f), SUBSET, left_categories=hit[0])
        else:
            hit = _scan_numeric(col, ys, parent_score, code, min_child, lo, hi)
            if hit is not None and hit[1] > best_gain:
                best_gain = hit[1]
                best_rule = SplitRule(int(f), THRESHOLD, threshold=float(hit[0]))
    if best_rule is None:
        return None
    return best_rule, float(best_gain)


def _leaf_params(ys, config: GrowthConfig):
    if config.criterion != "beta_loglik":
        return float(np.mean(ys)), None
    lo, hi = config.phi_bounds
    if ys.size == 1:
        mu = min(max(float(ys[0]), MU_EPS), 1.0 - MU_EPS)
        return mu, hi
    p = estimate_node_params(ys, lo, hi)
    return p.mu, p.phi


def _route_left(rule: SplitRule, col):
    if rule.kind == THRESHOLD:
        return col <= rule.threshold
    codes = np.asarray(sorted(rule.left_categories), dtype=np.float64)
    return np.isin(col, codes)


def grow(data: Dataset, config: GrowthConfig, rng: np.random.Generator):
    """Grow one tree; deterministic given (data, config, rng state).

    A node is split while its size exceeds min_node_size and a feasible
    rule exists over a freshly drawn mtry-subset of the features.
    """
    X, y, schema = data.X, data.y, data.schema
    if data.n < 1:
        raise ValueError("cannot grow a tree on empty data")
    if config.criterion == "beta_loglik" and (np.any(y <= 0.0) or np.any(y >= 1.0)):
        raise ValueError("beta criterion requires outcomes strictly inside (0, 1)")
    if not np.all(np.isfinite(y)):
        raise ValueError("outcomes must be finite")
    p = data.p
    mtry = p if config.mtry is None else config.mtry
    if not 1 <= mtry <= p:
        raise ValueError(f"mtry must be in [1, {p}]")
    min_child = config.effective_min_child()

    next_id = 0

    def new_node():
        nonlocal next_id
        node = TreeNode(node_id=next_id)
        next_id += 1
        return node

    root = new_node()
    stack = [(root, np.arange(data.n))]
    while stack:
        node, idx = stack.pop()
        ys = y[idx]
        node.n_obs = idx.size
        if idx.size <= config.min_node_size or idx.size < 2 * min_child:
            node.mu, node.phi = _leaf_params(ys, config)
            continue
        feats = rng.choice(p, size=mtry, replace=False)
        hit = best_split(X[idx], ys, feats, config, schema)
        if hit is None:
            node.mu, node.phi = _leaf_params(ys, config)
            continue
        rule, _ = hit
        mask = _route_left(rule, X[idx, rule.feature_index])
        node.split = rule
        node.left = new_node()
        node.right = new_node()
        # push right first so left children get consecutive preorder-ish ids
        stack.append((node.right, idx[~mask]))
        stack.append((node.left, idx[mask]))
    return root


def predict_batch(tree: TreeNode, X):
    """Leaf prediction for every row of X (working scale)."""
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains missing or non-finite values")
    out = np.empty(X.shape[0])
    stack = [(tree, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.mu
            continue
        mask = _route_left(node.split, X[idx, node.split.feature_index])
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def predict_mean(tree: TreeNode, row):
    """Leaf prediction for a single feature vector."""
    row = np.asarray(row, dtype=np.float64)
    return float(predict_batch(tree, row.reshape(1, -1))[0])
