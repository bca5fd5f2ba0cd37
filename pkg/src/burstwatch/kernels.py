"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
twin takes over. Set ``BURSTWATCH_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

if os.environ.get("BURSTWATCH_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

lifecycle_advance = _impl.lifecycle_advance
lifecycle_skip_zeros = _impl.lifecycle_skip_zeros
derivative_features = _impl.derivative_features
best_split = _impl.best_split
new_state = _pykernels.new_state


def available_backends():
    """Name -> module for every backend importable in this process."""
    found = {"python": _pykernels}
    try:
        from . import _kernels
        found["cython"] = _kernels
    except ImportError:
        pass
    return found
