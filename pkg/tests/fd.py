"""Central finite differences over parameter arrays, shared by gradient tests."""

import numpy as np

STEP = 1e-5
REL_TOL = 1e-4


def central_diff(loss_fn, arrays, step=STEP):
    """Numeric gradient of loss_fn() w.r.t. each array, perturbed in place."""
    grads = []
    for arr in arrays:
        g = np.zeros_like(arr)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            ix = it.multi_index
            orig = arr[ix]
            arr[ix] = orig + step
            hi = loss_fn()
            arr[ix] = orig - step
            lo = loss_fn()
            arr[ix] = orig
            g[ix] = (hi - lo) / (2.0 * step)
        grads.append(g)
    return grads


def max_rel_error(analytic, numeric, floor=1e-6):
    """Worst elementwise |a - n| / max(|a|, |n|, floor) over paired arrays."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst
