"""Hot numeric kernels with selectable backend.

The env var POPSYN_BACKEND picks the implementation:

  auto   (default) numba if importable, else numpy
  numba  require the numba-compiled kernels
  numpy  force the pure-numpy fallback

Both backends implement the same operations in the same order; they agree to
floating-point roundoff (see tests/test_backend.py). Within one backend every
kernel is deterministic. benchmarks/bench_kernels.py compares the two.
"""

import os

_choice = os.environ.get("POPSYN_BACKEND", "auto").lower()

if _choice == "numpy":
    from . import numpy_impl as _impl
elif _choice == "numba":
    from . import numba_impl as _impl
elif _choice == "auto":
    try:
        from . import numba_impl as _impl
    except ImportError:  # pragma: no cover - depends on install
        from . import numpy_impl as _impl
else:
    raise ValueError(
        f"POPSYN_BACKEND must be one of auto/numba/numpy, got {_choice!r}"
    )

BACKEND = _impl.NAME

elu_forward = _impl.elu_forward
elu_backward = _impl.elu_backward
sigmoid_forward = _impl.sigmoid_forward
sigmoid_backward = _impl.sigmoid_backward
softmax_blocks_forward = _impl.softmax_blocks_forward
softmax_blocks_backward = _impl.softmax_blocks_backward
binary_ce_value_grad = _impl.binary_ce_value_grad
rmsprop_update = _impl.rmsprop_update
categorical_blocks = _impl.categorical_blocks
