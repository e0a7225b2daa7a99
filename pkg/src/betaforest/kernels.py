"""Split-kernel backend selection.

The compiled extension is preferred when it imported cleanly; set
BETAFOREST_BACKEND=python (or =cython) to force a backend, e.g. for the
benchmark in benchmarks/bench_split.py.
"""

import os

from . import _split_py

_forced = os.environ.get("BETAFOREST_BACKEND", "").strip().lower()

if _forced == "python":
    _impl = _split_py
elif _forced == "cython":
    from . import _split_cy as _impl
else:
    try:
        from . import _split_cy as _impl
    except ImportError:
        _impl = _split_py

BACKEND = _impl.BACKEND_NAME
CRIT_BETA = _split_py.CRIT_BETA
CRIT_MSE = _split_py.CRIT_MSE

scan_thresholds = _impl.scan_thresholds
group_score = _impl.group_score


def get_backend(name=None):
    """Return the kernel module for an explicit backend name."""
    if name is None:
        return _impl
    if name == "python":
        return _split_py
    if name == "cython":
        from . import _split_cy

        return _split_cy
    raise ValueError(f"unknown backend {name!r}")
