"""Parametric beta regression by maximum likelihood.

Logit-link mean model with a constant precision parameter, fitted by
quasi-Newton ascent (BFGS with analytic gradients) jointly in the
coefficients and ln(phi).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .betadist import estimate_node_params
from .dataset import Dataset
from .special import digamma, log_gamma

__all__ = ["DesignSpec", "BetaGlmFit", "RankDeficientDesignError", "build_design", "loglik_and_gradient", "fit", "predict_mean_glm"]

_MU_CLIP = 1e-12


class RankDeficientDesignError(ValueError):
    """The design matrix does not have full column rank."""


@dataclass(frozen=True)
class DesignSpec:
    intercept: bool = True
    main_effects: tuple = ()
    interactions: tuple = ()  # pairs of column names; raw products

    def column_names(self):
        names = ["(intercept)"] if self.intercept else []
        names += list(self.main_effects)
        names += [f"{a}:{b}" for a, b in self.interactions]
        return names


@dataclass
class BetaGlmFit:
    beta: np.ndarray
    phi: float
    converged: bool
    loglik: float
    iterations: int
    design: DesignSpec
    columns: list
    schema: list = field(default_factory=list)


def build_design(spec: DesignSpec, data: Dataset):
    """Design matrix for a dataset; interaction columns are raw products."""
    name_to_idx = {c.name: i for i, c in enumerate(data.schema)}
    cols = []
    if spec.intercept:
        cols.append(np.ones(data.n))
    for name in spec.main_effects:
        if name not in name_to_idx:
            raise ValueError(f"unknown column {name!r} in design")
        cols.append(data.X[:, name_to_idx[name]])
    for a, b in spec.interactions:
        for name in (a, b):
            if name not in name_to_idx:
                raise ValueError(f"unknown column {name!r} in design")
        cols.append(data.X[:, name_to_idx[a]] * data.X[:, name_to_idx[b]])
    if not cols:
        raise ValueError("empty design")
    return np.column_stack(cols)


def _expit(eta):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-eta))


def loglik_and_gradient(beta, ln_phi, design_matrix, ys):
    """Beta log-likelihood with logit link, and its exact gradient.

    Returns (value, g) where g stacks the gradient in beta with the
    derivative with respect to ln(phi) as last entry.
    """
    D = np.asarray(design_matrix, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if np.any(ys <= 0.0) or np.any(ys >= 1.0):
        raise ValueError("outcomes must lie strictly inside (0, 1)")
    if not np.all(np.isfinite(D)):
        raise ValueError("design matrix must be finite")
    phi = float(np.exp(ln_phi))
    eta = D @ beta
    mu = np.clip(_expit(eta), _MU_CLIP, 1.0 - _MU_CLIP)
    a = mu * phi
    b = (1.0 - mu) * phi
    log_y = np.log(ys)
    log_1my = np.log1p(-ys)
    value = float(
        ys.size * log_gamma(phi)
        - np.sum(log_gamma(a))
        - np.sum(log_gamma(b))
        + np.sum((a - 1.0) * log_y)
        + np.sum((b - 1.0) * log_1my)
    )
    psi_a = digamma(a)
    psi_b = digamma(b)
    # d l_i / d mu_i, times the logit-link derivative mu(1-mu)
    dl_deta = phi * (log_y - log_1my - psi_a + psi_b) * mu * (1.0 - mu)
    grad_beta = D.T @ dl_deta
    dl_dphi = np.sum(
        digamma(phi) - mu * psi_a - (1.0 - mu) * psi_b + mu * log_y + (1.0 - mu) * log_1my
    )
    grad = np.append(grad_beta, phi * dl_dphi)
    return value, grad


def fit(data: Dataset, design: DesignSpec, gtol=1e-6, maxiter=500):
    """Maximize the log-likelihood jointly over (beta, ln phi).

    Starts from least squares of logit(y) on the design and the pooled
    moment estimate of phi. Non-convergence is reported via the
    converged flag; a rank-deficient design raises.
    """
    D = build_design(design, data)
    n, q = D.shape
    if n < q + 1:
        raise ValueError(f"need at least {q + 1} observations to fit {q} columns")
    ys = data.y
    if np.any(ys <= 0.0) or np.any(ys >= 1.0):
        raise ValueError("outcomes must lie strictly inside (0, 1)")
    if np.linalg.matrix_rank(D) < q:
        raise RankDeficientDesignError(
            f"design matrix has rank below its {q} columns; maximum likelihood is not identifiable"
        )
    logit_y = np.log(ys) - np.log1p(-ys)
    beta0 = np.linalg.lstsq(D, logit_y, rcond=None)[0]
    phi0 = max(estimate_node_params(ys).phi, 0.01)
    x0 = np.append(beta0, np.log(phi0))

    def neg(x):
        value, grad = loglik_and_gradient(x[:-1], x[-1], D, ys)
        return -value, -grad

    res = minimize(neg, x0, jac=True, method="BFGS", options={"gtol": gtol, "maxiter": maxiter})
    # the optimizer's own success flag can report precision loss right at
    # the optimum; accept a gradient small relative to the objective scale
    grad_ok = float(np.max(np.abs(res.jac))) < gtol * max(1.0, abs(float(res.fun)))
    return BetaGlmFit(
        beta=res.x[:-1].copy(),
        phi=float(np.exp(res.x[-1])),
        converged=bool(res.success or grad_ok),
        loglik=float(-res.fun),
        iterations=int(res.nit),
        design=design,
        columns=design.column_names(),
        schema=list(data.schema),
    )


def predict_mean_glm(fit_result: BetaGlmFit, new_data: Dataset, allow_unconverged=False):
    """Fitted conditional means for new rows."""
    if not fit_result.converged and not allow_unconverged:
        raise ValueError("fit did not converge; pass allow_unconverged=True to predict anyway")
    D = build_design(fit_result.design, new_data)
    if D.shape[1] != fit_result.beta.size:
        raise ValueError("design shape mismatch")
    return _expit(D @ fit_result.beta)
