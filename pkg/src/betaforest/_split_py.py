"""Pure-numpy threshold scan, the fallback for the compiled kernel.

Both backends implement the same contract: given a node's rows sorted by
one feature, score every feasible cut point and return the index of the
best one together with its gain. A node's criterion score is the beta
log-likelihood at the node's moment estimates (beta criterion) or the
negative sum of squared errors about the node mean (mse criterion), so
that gain = score(left) + score(right) - score(parent) in both cases.
"""

import numpy as np

from .special import log_gamma

BACKEND_NAME = "python"

CRIT_BETA = 0
CRIT_MSE = 1

_MU_EPS = 1e-10


def _beta_scores(m, s1, s2, sly, sl1y, min_phi, max_phi):
    """Vectorized beta log-likelihood at moment estimates from group sums."""
    mean = s1 / m
    var = (s2 - s1 * s1 / m) / (m - 1.0)
    mu = np.clip(mean, _MU_EPS, 1.0 - _MU_EPS)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi_raw = mu * (1.0 - mu) / var - 1.0
    phi = np.where(var > 0.0, np.clip(phi_raw, min_phi, max_phi), max_phi)
    a = mu * phi
    b = (1.0 - mu) * phi
    return m * (log_gamma(phi) - log_gamma(a) - log_gamma(b)) + (a - 1.0) * sly + (
        b - 1.0
    ) * sl1y


def group_score(m, s1, s2, sly, sl1y, criterion, min_phi, max_phi):
    """Criterion score of a group given its sufficient statistics."""
    if criterion == CRIT_MSE:
        return -(s2 - s1 * s1 / m)
    out = _beta_scores(
        np.asarray([float(m)]),
        np.asarray([s1]),
        np.asarray([s2]),
        np.asarray([sly]),
        np.asarray([sl1y]),
        min_phi,
        max_phi,
    )
    return float(out[0])


def scan_thresholds(xs, ys, parent_score, criterion, min_child, min_phi, max_phi):
    """Best cut point of a node sorted by one numeric feature.

    xs and ys are the node's feature values and outcomes, already sorted
    by xs (stable). Returns (k, gain) where the split puts rows [0..k]
    left, or (-1, nan) when no feasible cut exists. Ties keep the
    smallest k (first strict maximum).
    """
    n = xs.size
    if n < 2 * min_child:
        return -1, float("nan")
    k = np.arange(min_child - 1, n - min_child)
    k = k[xs[k] != xs[k + 1]]
    if k.size == 0:
        return -1, float("nan")
    cy = np.cumsum(ys)
    cy2 = np.cumsum(ys * ys)
    m_l = (k + 1).astype(np.float64)
    m_r = n - m_l
    s1_l = cy[k]
    s2_l = cy2[k]
    s1_r = cy[-1] - s1_l
    s2_r = cy2[-1] - s2_l
    if criterion == CRIT_MSE:
        scores = -(s2_l - s1_l * s1_l / m_l) - (s2_r - s1_r * s1_r / m_r)
    else:
        cl = np.cumsum(np.log(ys))
        cl1 = np.cumsum(np.log1p(-ys))
        sly_l = cl[k]
        sl1y_l = cl1[k]
        scores = _beta_scores(m_l, s1_l, s2_l, sly_l, sl1y_l, min_phi, max_phi)
        scores += _beta_scores(
            m_r, s1_r, s2_r, cl[-1] - sly_l, cl1[-1] - sl1y_l, min_phi, max_phi
        )
    gains = scores - parent_score
    best = int(np.argmax(gains))
    gain = float(gains[best])
    if not np.isfinite(gain):
        return -1, float("nan")
    return int(k[best]), gain
