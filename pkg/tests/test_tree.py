import numpy as np
import pytest

from betaforest.betadist import estimate_node_params, log_density
from betaforest.dataset import ColumnKind, ColumnSchema, Dataset
from betaforest.tree import (
    SUBSET,
    THRESHOLD,
    GrowthConfig,
    best_split,
    grow,
    predict_batch,
    predict_mean,
    split_gain,
)

# ---------------------------------------------------------------------------
# independent brute-force oracle: direct enumeration of every feasible rule,
# scored straight from log_density / estimate_node_params / sums of squares
# ---------------------------------------------------------------------------


def oracle_node_score(ys, criterion):
    if criterion == "mse":
        return -float(np.sum((ys - ys.mean()) ** 2))
    params = estimate_node_params(ys)
    return float(np.sum(log_density(ys, params)))


def oracle_partitions(col, kind, max_exhaustive=12):
    """Yield boolean left-masks for every feasible rule on one column."""
    if kind is ColumnKind.CATEGORICAL:
        cats = sorted(int(v) for v in np.unique(col))
        r = len(cats)
        if r < 2 or r > max_exhaustive:
            return
        for bits in range(2 ** (r - 1) - 1):
            left = {cats[0]}
            for i in range(r - 1):
                if bits >> i & 1:
                    left.add(cats[i + 1])
            yield np.isin(col.astype(int), sorted(left))
    else:
        vals = np.unique(col)
        for lo, hi in zip(vals[:-1], vals[1:]):
            yield col <= 0.5 * (lo + hi)


def oracle_best_split(X, ys, features, criterion, min_child, schema):
    parent = oracle_node_score(ys, criterion)
    best = None
    best_gain = -np.inf
    for f in features:
        for mask in oracle_partitions(X[:, f], schema[f].kind):
            nl, nr = int(mask.sum()), int((~mask).sum())
            if nl < min_child or nr < min_child:
                continue
            gain = (
                oracle_node_score(ys[mask], criterion)
                + oracle_node_score(ys[~mask], criterion)
                - parent
            )
            if gain > best_gain:
                best_gain = gain
                best = (int(f), frozenset(np.flatnonzero(mask).tolist()))
    return best, best_gain


def random_instance(rng, criterion):
    n = int(rng.integers(6, 31))
    p = int(rng.integers(1, 4))
    schema = []
    cols = []
    for j in range(p):
        kind = rng.choice(["numeric", "binary", "categorical"])
        if kind == "numeric":
            schema.append(ColumnSchema(f"x{j}", ColumnKind.NUMERIC))
            cols.append(rng.normal(size=n))
        elif kind == "binary":
            schema.append(ColumnSchema(f"x{j}", ColumnKind.NUMERIC))
            cols.append(rng.integers(1, 3, n).astype(float))
        else:
            r = int(rng.integers(2, 5))
            schema.append(ColumnSchema(f"x{j}", ColumnKind.CATEGORICAL, tuple("abcd"[:r])))
            cols.append(rng.integers(0, r, n).astype(float))
    X = np.column_stack(cols)
    ys = rng.uniform(0.02, 0.98, n)
    return Dataset(X, ys, schema)


@pytest.mark.parametrize("criterion", ["beta_loglik", "mse"])
def test_best_split_matches_brute_force(criterion):
    rng = np.random.default_rng(202)
    config = GrowthConfig(criterion=criterion, min_node_size=1)
    min_child = config.effective_min_child()
    checked = 0
    for _ in range(120):
        data = random_instance(rng, criterion)
        features = list(range(data.p))
        expect, expect_gain = oracle_best_split(
            data.X, data.y, features, criterion, min_child, data.schema
        )
        got = best_split(data.X, data.y, features, config, data.schema)
        if expect is None:
            assert got is None
            continue
        checked += 1
        assert got is not None
        rule, gain = got
        f, left_rows = expect
        assert rule.feature_index == f
        if rule.kind == THRESHOLD:
            mask = data.X[:, f] <= rule.threshold
        else:
            mask = np.isin(data.X[:, f].astype(int), sorted(rule.left_categories))
        assert frozenset(np.flatnonzero(mask).tolist()) == left_rows
        assert gain == pytest.approx(expect_gain, abs=1e-8)
    assert checked > 80


class TestSplitGain:
    def test_mse_hand_example(self):
        gain = split_gain([0.2, 0.4, 0.6, 0.8], [0.2, 0.6], [0.4, 0.8], "mse")
        assert gain == pytest.approx(0.04, rel=1e-12)

    def test_mse_no_variance_change(self):
        gain = split_gain([0.4, 0.6, 0.4, 0.6], [0.4, 0.6], [0.4, 0.6], "mse")
        assert gain == pytest.approx(0.0, abs=1e-12)

    def test_beta_prefers_separating_split(self):
        parent = [0.1, 0.2, 0.8, 0.9]
        clean = split_gain(parent, [0.1, 0.2], [0.8, 0.9], "beta_loglik")
        crossed = split_gain(parent, [0.1, 0.8], [0.2, 0.9], "beta_loglik")
        assert clean > 0
        assert clean > crossed

    def test_rejects_non_partition(self):
        with pytest.raises(ValueError):
            split_gain([0.2, 0.4, 0.6], [0.2], [0.4, 0.5], "mse")
        with pytest.raises(ValueError):
            split_gain([0.2, 0.4], [0.2, 0.4], [], "mse")

    def test_matches_total_loglik_delta(self):
        # executed-split bookkeeping: gain equals the change in the summed
        # leaf log-likelihood at node-wise moment estimates
        rng = np.random.default_rng(55)
        for _ in range(20):
            n = int(rng.integers(8, 200))
            ys = rng.uniform(0.05, 0.95, n)
            k = int(rng.integers(2, n - 2))
            left, right = ys[:k], ys[k:]
            gain = split_gain(ys, left, right, "beta_loglik")
            total_before = oracle_node_score(ys, "beta_loglik")
            total_after = oracle_node_score(left, "beta_loglik") + oracle_node_score(
                right, "beta_loglik"
            )
            assert gain == pytest.approx(total_after - total_before, abs=1e-9)


class TestBestSplitEdges:
    def test_single_binary_feature(self):
        schema = [ColumnSchema("x", ColumnKind.NUMERIC)]
        X = np.array([[1.0], [1.0], [2.0], [2.0]])
        ys = np.array([0.1, 0.2, 0.8, 0.9])
        rule, gain = best_split(X, ys, [0], GrowthConfig(min_node_size=1), schema)
        assert rule.kind == THRESHOLD
        assert rule.threshold == pytest.approx(1.5)
        assert gain > 0

    def test_constant_features_give_none(self):
        schema = [ColumnSchema("x", ColumnKind.NUMERIC)]
        X = np.ones((6, 1))
        ys = np.linspace(0.1, 0.9, 6)
        assert best_split(X, ys, [0], GrowthConfig(min_node_size=1), schema) is None

    def test_subset_rule_on_categorical(self):
        schema = [ColumnSchema("x", ColumnKind.CATEGORICAL, ("a", "b"))]
        X = np.array([[0.0], [0.0], [1.0], [1.0]])
        ys = np.array([0.1, 0.2, 0.8, 0.9])
        rule, _ = best_split(X, ys, [0], GrowthConfig(min_node_size=1), schema)
        assert rule.kind == SUBSET
        assert rule.left_categories == frozenset({0})

    def test_many_categories_ordered_device(self):
        # 15 categories exceeds the exhaustive limit; the mean-ordering
        # device must still find the obvious low/high partition
        rng = np.random.default_rng(77)
        codes = rng.integers(0, 15, 300)
        ys = np.where(codes < 8, 0.2, 0.8) + rng.uniform(-0.05, 0.05, 300)
        schema = [ColumnSchema("x", ColumnKind.CATEGORICAL, tuple(str(i) for i in range(15)))]
        rule, gain = best_split(
            codes.reshape(-1, 1).astype(float), ys, [0], GrowthConfig(min_node_size=1), schema
        )
        assert rule.kind == SUBSET
        assert rule.left_categories in (frozenset(range(8)), frozenset(range(8, 15)))
        assert gain > 0


class TestGrow:
    def _toy(self):
        schema = [ColumnSchema("x", ColumnKind.NUMERIC)]
        X = np.array([[1.0], [1.0], [2.0], [2.0]])
        ys = np.array([0.1, 0.2, 0.8, 0.9])
        return Dataset(X, ys, schema)

    def test_min_node_size_blocks_split(self):
        data = self._toy()
        cfg = GrowthConfig(min_node_size=4)
        tree = grow(data, cfg, np.random.default_rng(0))
        assert tree.is_leaf
        assert tree.mu == pytest.approx(0.5)

    def test_depth_one_tree(self):
        data = self._toy()
        cfg = GrowthConfig(min_node_size=1, mtry=1)
        tree = grow(data, cfg, np.random.default_rng(0))
        assert not tree.is_leaf
        assert tree.left.mu == pytest.approx(0.15)
        assert tree.right.mu == pytest.approx(0.85)
        assert predict_mean(tree, [1.0]) == pytest.approx(0.15)
        assert predict_mean(tree, [2.0]) == pytest.approx(0.85)

    def test_determinism(self):
        rng = np.random.default_rng(100)
        n, p = 120, 5
        data = Dataset(
            rng.normal(size=(n, p)),
            rng.uniform(0.05, 0.95, n),
            [ColumnSchema(f"x{j}", ColumnKind.NUMERIC) for j in range(p)],
        )
        cfg = GrowthConfig(min_node_size=5, mtry=2)
        t1 = grow(data, cfg, np.random.default_rng(9))
        t2 = grow(data, cfg, np.random.default_rng(9))
        np.testing.assert_array_equal(predict_batch(t1, data.X), predict_batch(t2, data.X))

        def structure(node):
            if node.is_leaf:
                return ("leaf", node.mu, node.phi, node.n_obs)
            return (
                node.split.feature_index,
                node.split.threshold,
                structure(node.left),
                structure(node.right),
            )

        assert structure(t1) == structure(t2)

    def test_leaf_partition_property(self):
        rng = np.random.default_rng(31)
        n = 150
        data = Dataset(
            rng.normal(size=(n, 3)),
            rng.uniform(0.05, 0.95, n),
            [ColumnSchema(f"x{j}", ColumnKind.NUMERIC) for j in range(3)],
        )
        cfg = GrowthConfig(min_node_size=10, mtry=2)
        tree = grow(data, cfg, np.random.default_rng(4))
        leaves = []

        def collect(node, idx):
            if node.is_leaf:
                leaves.append(idx)
                return
            mask = data.X[idx, node.split.feature_index] <= node.split.threshold
            collect(node.left, idx[mask])
            collect(node.right, idx[~mask])

        collect(tree, np.arange(n))
        all_rows = np.concatenate(leaves)
        assert sorted(all_rows.tolist()) == list(range(n))
        preds = predict_batch(tree, data.X)
        for idx in leaves:
            expected = estimate_node_params(data.y[idx]).mu if idx.size > 1 else data.y[idx][0]
            np.testing.assert_allclose(preds[idx], expected, atol=1e-12)

    def test_leaf_params_match_estimate_node_params(self):
        rng = np.random.default_rng(32)
        n = 80
        data = Dataset(
            rng.normal(size=(n, 2)),
            rng.uniform(0.05, 0.95, n),
            [ColumnSchema(f"x{j}", ColumnKind.NUMERIC) for j in range(2)],
        )
        tree = grow(data, GrowthConfig(min_node_size=8), np.random.default_rng(2))

        def check(node, idx):
            if node.is_leaf:
                p = estimate_node_params(data.y[idx])
                assert node.mu == pytest.approx(p.mu, rel=1e-12)
                assert node.phi == pytest.approx(p.phi, rel=1e-9)
                return
            mask = data.X[idx, node.split.feature_index] <= node.split.threshold
            check(node.left, idx[mask])
            check(node.right, idx[~mask])

        check(tree, np.arange(n))

    def test_monotone_relabeling_invariance(self):
        rng = np.random.default_rng(61)
        n = 100
        codes = rng.integers(0, 4, n)
        ys = np.clip(0.2 + 0.2 * codes + rng.normal(0, 0.03, n), 0.01, 0.99)
        schema_a = [ColumnSchema("x", ColumnKind.CATEGORICAL, ("a", "b", "c", "d"))]
        schema_b = [ColumnSchema("x", ColumnKind.CATEGORICAL, tuple(str(i) for i in range(8)))]
        data_a = Dataset(codes.reshape(-1, 1).astype(float), ys, schema_a)
        data_b = Dataset((2 * codes).reshape(-1, 1).astype(float), ys, schema_b)
        cfg = GrowthConfig(min_node_size=10)
        ta = grow(data_a, cfg, np.random.default_rng(3))
        tb = grow(data_b, cfg, np.random.default_rng(3))
        pa = predict_batch(ta, data_a.X)
        pb = predict_batch(tb, data_b.X)
        np.testing.assert_allclose(pa, pb, atol=1e-12)

    def test_rejects_out_of_range_outcomes(self):
        schema = [ColumnSchema("x", ColumnKind.NUMERIC)]
        data = Dataset(np.zeros((3, 1)), np.array([0.2, 0.5, 0.9]), schema)
        data.y[1] = 1.5
        with pytest.raises(ValueError):
            grow(data, GrowthConfig(), np.random.default_rng(0))

    def test_mse_criterion_accepts_transformed_scale(self):
        schema = [ColumnSchema("x", ColumnKind.NUMERIC)]
        rng = np.random.default_rng(6)
        data = Dataset(rng.normal(size=(50, 1)), rng.normal(size=50), schema)
        tree = grow(data, GrowthConfig(criterion="mse", min_node_size=5), np.random.default_rng(0))
        assert np.isfinite(predict_batch(tree, data.X)).all()


class TestPredict:
    def test_unseen_category_routes_right(self):
        schema = [ColumnSchema("x", ColumnKind.CATEGORICAL, ("a", "b"))]
        X = np.array([[0.0], [0.0], [1.0], [1.0]])
        ys = np.array([0.1, 0.2, 0.8, 0.9])
        tree = grow(Dataset(X, ys, schema), GrowthConfig(min_node_size=1), np.random.default_rng(0))
        assert predict_mean(tree, [-1.0]) == pytest.approx(0.85)

    def test_missing_value_raises(self):
        schema = [ColumnSchema("x", ColumnKind.NUMERIC)]
        X = np.array([[1.0], [2.0], [1.0], [2.0]])
        ys = np.array([0.1, 0.8, 0.2, 0.9])
        tree = grow(Dataset(X, ys, schema), GrowthConfig(min_node_size=1), np.random.default_rng(0))
        with pytest.raises(ValueError):
            predict_mean(tree, [np.nan])


def test_config_validation():
    with pytest.raises(ValueError):
        GrowthConfig(criterion="gini")
    with pytest.raises(ValueError):
        GrowthConfig(criterion="beta_loglik", min_child_size=1)
    with pytest.raises(ValueError):
        GrowthConfig(min_node_size=0)
