"""The beta distribution in the (location, precision) parameterization.

A ``BetaParams`` holds the location ``mu`` in (0,1) and the precision
``phi`` > 0, so the mean is ``mu`` and the variance ``mu(1-mu)/(phi+1)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .special import log_gamma

__all__ = [
    "BetaParams",
    "DEFAULT_PHI_BOUNDS",
    "MU_EPS",
    "log_density",
    "moments",
    "estimate_node_params",
    "sample",
    "fit_phi_given_means",
]

DEFAULT_PHI_BOUNDS = (1e-4, 1e6)
MU_EPS = 1e-10


@dataclass(frozen=True)
class BetaParams:
    mu: float
    phi: float

    def __post_init__(self):
        if not (0.0 < self.mu < 1.0) or not math.isfinite(self.mu):
            raise ValueError(f"mu must be in (0,1), got {self.mu}")
        if not (self.phi > 0.0) or not math.isfinite(self.phi):
            raise ValueError(f"phi must be positive, got {self.phi}")


def log_density(y, p: BetaParams):
    """Log p.d.f. of the beta distribution at y in (0,1)."""
    y = np.asarray(y, dtype=np.float64)
    if not np.all(np.isfinite(y)) or np.any(y <= 0.0) or np.any(y >= 1.0):
        raise ValueError("y must lie strictly inside (0, 1)")
    a = p.mu * p.phi
    b = (1.0 - p.mu) * p.phi
    norm = log_gamma(p.phi) - log_gamma(a) - log_gamma(b)
    return norm + (a - 1.0) * np.log(y) + (b - 1.0) * np.log1p(-y)


def moments(p: BetaParams):
    """Mean and variance implied by the parameters."""
    return p.mu, p.mu * (1.0 - p.mu) / (p.phi + 1.0)


def estimate_node_params(ys, min_phi=DEFAULT_PHI_BOUNDS[0], max_phi=DEFAULT_PHI_BOUNDS[1]):
    """Moment estimates of (mu, phi) from the outcomes in a node.

    mu is the sample mean (clamped just inside (0,1)); phi comes from
    inverting the variance formula with the unbiased sample variance and
    is clamped into [min_phi, max_phi]. Zero variance hits the upper
    clamp; overdispersed samples (s^2 >= mu(1-mu)) hit the lower one.
    """
    ys = np.asarray(ys, dtype=np.float64)
    if ys.size < 2:
        raise ValueError("need at least 2 observations to estimate phi")
    n = ys.size
    s1 = float(np.sum(ys))
    s2 = float(np.dot(ys, ys))
    mean = s1 / n
    var = (s2 - s1 * s1 / n) / (n - 1)
    mu = min(max(mean, MU_EPS), 1.0 - MU_EPS)
    if var > 0.0:
        phi = mu * (1.0 - mu) / var - 1.0
        phi = min(max(phi, min_phi), max_phi)
    else:
        phi = max_phi
    return BetaParams(mu=mu, phi=phi)


def sample(p: BetaParams, n: int, rng: np.random.Generator):
    """Draw n i.i.d. variates via two gamma draws G_a / (G_a + G_b).

    numpy's standard_gamma implements the Marsaglia-Tsang squeeze with
    the usual shape<1 boost. Draws that would round to 0 or 1 are pushed
    to the nearest representable interior value.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ga = rng.standard_gamma(p.mu * p.phi, n)
    gb = rng.standard_gamma((1.0 - p.mu) * p.phi, n)
    denom = ga + gb
    y = np.where(denom > 0.0, ga / np.where(denom > 0.0, denom, 1.0), 0.5)
    return np.clip(y, 1e-12, 1.0 - 1e-12)


def _plugin_loglik(ys, mus, phi):
    a = mus * phi
    b = (1.0 - mus) * phi
    return float(
        ys.size * log_gamma(phi)
        - np.sum(log_gamma(a))
        - np.sum(log_gamma(b))
        + np.sum((a - 1.0) * np.log(ys))
        + np.sum((b - 1.0) * np.log1p(-ys))
    )


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def fit_phi_given_means(ys, mus, phi_bounds=DEFAULT_PHI_BOUNDS):
    """Maximize the pooled beta log-likelihood over phi, means held fixed.

    Golden-section search on ln(phi) to a relative tolerance of 1e-8;
    the result is cross-checked against both bound endpoints and the
    pooled moment estimate, and the best of the four is returned.
    """
    ys = np.asarray(ys, dtype=np.float64)
    mus = np.asarray(mus, dtype=np.float64)
    if ys.size == 0 or ys.size != mus.size:
        raise ValueError("ys and mus must be non-empty and of equal length")
    if np.any(ys <= 0.0) or np.any(ys >= 1.0):
        raise ValueError("ys must lie strictly inside (0, 1)")
    mus = np.clip(mus, MU_EPS, 1.0 - MU_EPS)
    lo, hi = phi_bounds
    if not (0.0 < lo < hi):
        raise ValueError("invalid phi bounds")

    def obj(lnphi):
        return _plugin_loglik(ys, mus, math.exp(lnphi))

    a, b = math.log(lo), math.log(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = obj(c), obj(d)
    while b - a > 1e-8:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = obj(d)
    candidates = [math.exp(0.5 * (a + b)), lo, hi]
    if ys.size >= 2:
        candidates.append(estimate_node_params(ys, lo, hi).phi)
    values = [_plugin_loglik(ys, mus, phi) for phi in candidates]
    return candidates[int(np.argmax(values))]
