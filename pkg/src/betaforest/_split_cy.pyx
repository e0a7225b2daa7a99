# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled threshold-scan kernel; mirrors _split_py exactly.

Same contract as the fallback: sorted node data in, (best cut index,
gain) out. The Lanczos log-gamma here uses the identical coefficients
and operation order as betaforest.special.log_gamma.
"""

from libc.math cimport log, log1p, sin, isfinite, NAN, INFINITY, M_PI

BACKEND_NAME = "cython"

CRIT_BETA = 0
CRIT_MSE = 1

cdef double _MU_EPS = 1e-10
cdef double _LANCZOS_G = 7.0
cdef double _HALF_LOG_2PI = 0.9189385332046727417803297364056176398
cdef double _LOG_PI = 1.1447298858494001741434273513530587116

cdef double[9] _COEF
_COEF[0] = 0.99999999999980993
_COEF[1] = 676.5203681218851
_COEF[2] = -1259.1392167224028
_COEF[3] = 771.32342877765313
_COEF[4] = -176.61502916214059
_COEF[5] = 12.507343278686905
_COEF[6] = -0.13857109526572012
_COEF[7] = 9.9843695780195716e-6
_COEF[8] = 1.5056327351493116e-7


cdef inline double _lanczos(double x) noexcept nogil:
    # x >= 0.5
    cdef double z = x - 1.0
    cdef double s = _COEF[0]
    cdef int i
    for i in range(1, 9):
        s = s + _COEF[i] / (z + i)
    cdef double t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * log(t) - t + log(s)


cdef inline double _lgamma(double x) noexcept nogil:
    if x < 0.5:
        return _LOG_PI - log(sin(M_PI * x)) - _lanczos(1.0 - x)
    return _lanczos(x)


cdef inline double _beta_score(double m, double s1, double s2,
                               double sly, double sl1y,
                               double min_phi, double max_phi) noexcept nogil:
    cdef double mean = s1 / m
    cdef double var = (s2 - s1 * s1 / m) / (m - 1.0)
    cdef double mu = mean
    if mu < _MU_EPS:
        mu = _MU_EPS
    elif mu > 1.0 - _MU_EPS:
        mu = 1.0 - _MU_EPS
    cdef double phi
    if var > 0.0:
        phi = mu * (1.0 - mu) / var - 1.0
        if phi < min_phi:
            phi = min_phi
        elif phi > max_phi:
            phi = max_phi
    else:
        phi = max_phi
    cdef double a = mu * phi
    cdef double b = (1.0 - mu) * phi
    return m * (_lgamma(phi) - _lgamma(a) - _lgamma(b)) + (a - 1.0) * sly + (b - 1.0) * sl1y


def group_score(m, s1, s2, sly, sl1y, criterion, min_phi, max_phi):
    """Criterion score of a group given its sufficient statistics."""
    cdef double md = m
    if criterion == CRIT_MSE:
        return -(s2 - s1 * s1 / md)
    return _beta_score(md, s1, s2, sly, sl1y, min_phi, max_phi)


def scan_thresholds(double[::1] xs, double[::1] ys, double parent_score,
                    int criterion, int min_child, double min_phi, double max_phi):
    """Best cut point of a node sorted by one numeric feature.

    Returns (k, gain) with rows [0..k] going left, or (-1, nan) when no
    feasible cut exists. Ties keep the smallest k.
    """
    cdef Py_ssize_t n = xs.shape[0]
    if n < 2 * min_child:
        return -1, NAN
    cdef double tot1 = 0.0, tot2 = 0.0, totl = 0.0, totl1 = 0.0
    cdef double s1 = 0.0, s2 = 0.0, sly = 0.0, sl1y = 0.0
    cdef double y, m_l, m_r, score, gain
    cdef double best_gain = -INFINITY
    cdef Py_ssize_t i, k
    cdef Py_ssize_t best_k = -1
    cdef bint beta = criterion == CRIT_BETA
    for i in range(n):
        y = ys[i]
        tot1 += y
        tot2 += y * y
        if beta:
            totl += log(y)
            totl1 += log1p(-y)
    for k in range(n - 1):
        y = ys[k]
        s1 += y
        s2 += y * y
        if beta:
            sly += log(y)
            sl1y += log1p(-y)
        if k + 1 < min_child or n - k - 1 < min_child:
            continue
        if xs[k] == xs[k + 1]:
            continue
        m_l = <double> (k + 1)
        m_r = <double> (n - k - 1)
        if beta:
            score = _beta_score(m_l, s1, s2, sly, sl1y, min_phi, max_phi)
            score += _beta_score(m_r, tot1 - s1, tot2 - s2,
                                 totl - sly, totl1 - sl1y, min_phi, max_phi)
        else:
            score = -(s2 - s1 * s1 / m_l) - ((tot2 - s2) - (tot1 - s1) * (tot1 - s1) / m_r)
        gain = score - parent_score
        if gain > best_gain:
            best_gain = gain
            best_k = k
    if best_k < 0 or not isfinite(best_gain):
        return -1, NAN
    return best_k, best_gain
