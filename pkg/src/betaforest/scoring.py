"""Per-observation predictive log-likelihood for the four model families.

The beta family scores outcomes directly; the three normal families
score the (possibly transformed) outcome under a Gaussian with the
fitted variance, plus the change-of-variables Jacobian that makes the
logit-normal and arcsine-normal proper densities on (0,1).
"""

import math

import numpy as np

from .betadist import MU_EPS
from .special import Transform, log_gamma, log_jacobian, transform

__all__ = ["FAMILIES", "pointwise_loglik", "predictive_loglik"]

FAMILIES = ("beta", "gaussian_identity", "logit_normal", "arcsine_normal")

_FAMILY_TRANSFORM = {
    "gaussian_identity": Transform.IDENTITY,
    "logit_normal": Transform.LOGIT,
    "arcsine_normal": Transform.ARCSINE_SQRT,
}


def pointwise_loglik(ys, means, scale, family, include_jacobian=True):
    """Per-row log-density of ys given per-row predicted means.

    For the beta family, means are conditional means in (0,1) and scale
    is the precision phi. For the normal families, means live on the
    family's working scale and scale is the variance sigma^2.
    """
    ys = np.asarray(ys, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if ys.shape != means.shape:
        raise ValueError("ys and means must have equal length")
    if np.any(ys <= 0.0) or np.any(ys >= 1.0):
        raise ValueError("outcomes must lie strictly inside (0, 1)")
    if not scale > 0.0:
        raise ValueError("scale must be positive")
    if family == "beta":
        mus = np.clip(means, MU_EPS, 1.0 - MU_EPS)
        a = mus * scale
        b = (1.0 - mus) * scale
        return (
            log_gamma(scale)
            - log_gamma(a)
            - log_gamma(b)
            + (a - 1.0) * np.log(ys)
            + (b - 1.0) * np.log1p(-ys)
        )
    if family not in _FAMILY_TRANSFORM:
        raise ValueError(f"unknown family {family!r}")
    kind = _FAMILY_TRANSFORM[family]
    t = transform(ys, kind)
    out = -0.5 * math.log(2.0 * math.pi * scale) - (t - means) ** 2 / (2.0 * scale)
    if include_jacobian:
        out = out + log_jacobian(ys, kind)
    return out


def predictive_loglik(ys, means, scale, family, include_jacobian=True):
    """Total predictive log-likelihood over a test set."""
    return float(np.sum(pointwise_loglik(ys, means, scale, family, include_jacobian)))
