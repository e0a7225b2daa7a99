import numpy as np
import pytest

from betaforest.betadist import BetaParams, log_density, sample
from betaforest.dataset import ColumnKind, ColumnSchema, Dataset
from betaforest.glm import (
    BetaGlmFit,
    DesignSpec,
    RankDeficientDesignError,
    build_design,
    fit,
    loglik_and_gradient,
    predict_mean_glm,
)


def numeric_schema(p):
    return [ColumnSchema(f"x{j}", ColumnKind.NUMERIC) for j in range(p)]


def simulate_glm(n, beta, phi, seed, interactions=()):
    rng = np.random.default_rng(seed)
    p = len(beta) - 1 - len(interactions)
    X = rng.normal(size=(n, p))
    eta = beta[0] + X @ np.asarray(beta[1 : p + 1])
    for k, (a, b) in enumerate(interactions):
        eta = eta + beta[p + 1 + k] * X[:, a] * X[:, b]
    mu = 1.0 / (1.0 + np.exp(-eta))
    ys = np.empty(n)
    for i in range(n):
        ys[i] = sample(BetaParams(min(max(mu[i], 1e-6), 1 - 1e-6), phi), 1, rng)[0]
    return Dataset(X, ys, numeric_schema(p))


class TestBuildDesign:
    def test_full_design_column_count(self):
        data = simulate_glm(30, [0.0, 0.1, 0.2, 0.3, 0.4], 5.0, 0)
        spec = DesignSpec(
            intercept=True,
            main_effects=("x0", "x1", "x2", "x3"),
            interactions=(("x0", "x1"), ("x1", "x2"), ("x2", "x3"), ("x0", "x3")),
        )
        D = build_design(spec, data)
        assert D.shape == (30, 9)
        np.testing.assert_array_equal(D[:, 0], np.ones(30))
        np.testing.assert_allclose(D[:, 5], data.X[:, 0] * data.X[:, 1])
        assert spec.column_names() == [
            "(intercept)", "x0", "x1", "x2", "x3", "x0:x1", "x1:x2", "x2:x3", "x0:x3",
        ]

    def test_unknown_column(self):
        data = simulate_glm(10, [0.0, 0.1], 5.0, 1)
        with pytest.raises(ValueError):
            build_design(DesignSpec(main_effects=("nope",)), data)

    def test_empty_design(self):
        data = simulate_glm(10, [0.0, 0.1], 5.0, 1)
        with pytest.raises(ValueError):
            build_design(DesignSpec(intercept=False), data)


class TestLoglikAndGradient:
    def test_value_matches_log_density_sum(self):
        data = simulate_glm(40, [0.3, -0.5], 4.0, 2)
        spec = DesignSpec(main_effects=("x0",))
        D = build_design(spec, data)
        beta = np.array([0.2, -0.4])
        phi = 3.5
        value, _ = loglik_and_gradient(beta, np.log(phi), D, data.y)
        mu = 1.0 / (1.0 + np.exp(-(D @ beta)))
        direct = sum(
            log_density(y, BetaParams(m, phi)) for y, m in zip(data.y, mu)
        )
        assert value == pytest.approx(direct, rel=1e-12)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(10, 60))
            q = int(rng.integers(1, 4))
            D = np.column_stack([np.ones(n), rng.normal(size=(n, q))])
            ys = rng.uniform(0.02, 0.98, n)
            beta = rng.normal(scale=0.5, size=q + 1)
            ln_phi = float(rng.uniform(-0.5, 2.5))
            _, grad = loglik_and_gradient(beta, ln_phi, D, ys)
            x = np.append(beta, ln_phi)
            h = 1e-6
            for j in range(x.size):
                xp, xm = x.copy(), x.copy()
                xp[j] += h
                xm[j] -= h
                fp, _ = loglik_and_gradient(xp[:-1], xp[-1], D, ys)
                fm, _ = loglik_and_gradient(xm[:-1], xm[-1], D, ys)
                fd = (fp - fm) / (2 * h)
                assert grad[j] == pytest.approx(fd, rel=1e-5, abs=1e-5)

    def test_domain_errors(self):
        D = np.ones((3, 1))
        with pytest.raises(ValueError):
            loglik_and_gradient([0.0], 0.0, D, [0.2, 0.5, 1.0])
        with pytest.raises(ValueError):
            loglik_and_gradient([0.0], 0.0, np.array([[np.inf], [1.0], [1.0]]), [0.2, 0.5, 0.7])


class TestFit:
    def test_recovers_parameters(self):
        true = [0.4, -0.8, 0.6]
        data = simulate_glm(4000, true, 6.0, 5)
        result = fit(data, DesignSpec(main_effects=("x0", "x1")))
        assert result.converged
        np.testing.assert_allclose(result.beta, true, atol=0.1)
        assert result.phi == pytest.approx(6.0, rel=0.1)

    def test_fit_improves_on_start(self):
        # the optimizer must never end below the least-squares start
        data = simulate_glm(200, [0.2, 0.5, -0.5], 4.0, 7)
        spec = DesignSpec(main_effects=("x0", "x1"))
        D = build_design(spec, data)
        logit_y = np.log(data.y) - np.log1p(-data.y)
        beta0 = np.linalg.lstsq(D, logit_y, rcond=None)[0]
        from betaforest.betadist import estimate_node_params

        phi0 = max(estimate_node_params(data.y).phi, 0.01)
        start, _ = loglik_and_gradient(beta0, np.log(phi0), D, data.y)
        result = fit(data, spec)
        assert result.loglik >= start - 1e-9

    def test_interaction_model(self):
        true = [0.1, 0.5, -0.4, 0.7]
        data = simulate_glm(4000, true, 8.0, 9, interactions=((0, 1),))
        result = fit(
            data, DesignSpec(main_effects=("x0", "x1"), interactions=(("x0", "x1"),))
        )
        assert result.converged
        np.testing.assert_allclose(result.beta, true, atol=0.1)

    def test_rank_deficient_raises(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(50, 2))
        X[:, 1] = 2.0 * X[:, 0]
        data = Dataset(X, rng.uniform(0.1, 0.9, 50), numeric_schema(2))
        with pytest.raises(RankDeficientDesignError):
            fit(data, DesignSpec(main_effects=("x0", "x1")))

    def test_too_few_observations(self):
        data = simulate_glm(3, [0.0, 0.1, 0.1, 0.1], 5.0, 13)
        with pytest.raises(ValueError):
            fit(data, DesignSpec(main_effects=("x0", "x1", "x2")))


class TestPredict:
    def test_means_are_expit_of_linear_predictor(self):
        data = simulate_glm(300, [0.3, -0.6], 5.0, 15)
        result = fit(data, DesignSpec(main_effects=("x0",)))
        means = predict_mean_glm(result, data)
        eta = result.beta[0] + result.beta[1] * data.X[:, 0]
        np.testing.assert_allclose(means, 1.0 / (1.0 + np.exp(-eta)), rtol=1e-12)
        assert np.all((means > 0) & (means < 1))

    def test_unconverged_guard(self):
        data = simulate_glm(100, [0.3, -0.6], 5.0, 17)
        result = fit(data, DesignSpec(main_effects=("x0",)))
        bad = BetaGlmFit(
            beta=result.beta, phi=result.phi, converged=False, loglik=result.loglik,
            iterations=result.iterations, design=result.design, columns=result.columns,
            schema=result.schema,
        )
        with pytest.raises(ValueError):
            predict_mean_glm(bad, data)
        means = predict_mean_glm(bad, data, allow_unconverged=True)
        assert means.shape == (100,)
