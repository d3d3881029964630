"""Hot kernels with a compiled core and a pure Python fallback.

The Cython module is used when it was built; set ``NEPTUNE_PURE_PYTHON=1`` to
force the fallback. ``backend`` names the active implementation.
"""
import os

from . import _pykernels

try:
    if os.environ.get("NEPTUNE_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure python requested")
    from . import _ckernels as _impl
except ImportError:
    _impl = _pykernels

backend = _impl.NAME
kmeans_dp = _impl.kmeans_dp
label_components = _impl.label_components
mine_rules = _impl.mine_rules
nearest_points = _impl.nearest_points


def available():
    """All importable kernel modules, keyed by name (for tests and benchmarks)."""
    mods = {"python": _pykernels}
    try:
        from . import _ckernels
        mods["cython"] = _ckernels
    except ImportError:
        pass
    return mods
