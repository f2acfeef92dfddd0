"""Backend selection for the hot loops.

The compiled Cython module is used when it was built and importable; otherwise
the numpy fallback is used. Set ``LEDIFLOW_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("LEDIFLOW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

silu_forward = _impl.silu_forward
silu_backward = _impl.silu_backward
adamw_update = _impl.adamw_update
rbf_pair_sum = _impl.rbf_pair_sum

__all__ = ["BACKEND", "silu_forward", "silu_backward", "adamw_update", "rbf_pair_sum"]
