"""Compare the numpy and numba kernel backends on training-scale shapes.

Usage: python benchmarks/bench_kernels.py [--rows 4096] [--cols 1200] [--repeat 30]

Each kernel is timed with time.perf_counter over --repeat calls after one
warmup call (the warmup also absorbs numba's JIT compile). Run it twice if
the machine is cold; the second run is the one to trust.
"""

import argparse
import time

import numpy as np

from popsyn.kernels import numpy_impl

try:
    from popsyn.kernels import numba_impl
except ImportError:
    numba_impl = None


def _cases(rows, cols, rng):
    z = rng.normal(size=(rows, cols))
    gout = rng.normal(size=(rows, cols))
    p_sig = numpy_impl.sigmoid_forward(z)
    # five softmax blocks of equal width, padded to cols
    starts = np.arange(5) * (cols // 5)
    ends = starts + cols // 5
    probs = numpy_impl.softmax_blocks_forward(z, starts, ends)
    x = (rng.random(size=(rows, cols)) < 0.2).astype(np.float64)
    u = rng.random(size=(rows, 5))
    flat = rng.normal(size=rows * cols)
    return [
        ("elu_forward", lambda impl: impl.elu_forward(z)),
        ("elu_backward", lambda impl: impl.elu_backward(z, gout)),
        ("sigmoid_forward", lambda impl: impl.sigmoid_forward(z)),
        ("sigmoid_backward", lambda impl: impl.sigmoid_backward(p_sig, gout)),
        ("softmax_blocks_forward", lambda impl: impl.softmax_blocks_forward(z, starts, ends)),
        ("softmax_blocks_backward", lambda impl: impl.softmax_blocks_backward(probs, gout, starts, ends)),
        ("binary_ce_value_grad", lambda impl: impl.binary_ce_value_grad(x, probs + 1e-6, 1e-12)),
        ("rmsprop_update", lambda impl: impl.rmsprop_update(
            flat.copy(), flat.copy(), np.abs(flat) + 0.1, 0.001, 0.9, 1e-8)),
        ("categorical_blocks", lambda impl: impl.categorical_blocks(probs, starts, ends, u)),
    ]


def _time(fn, impl, repeat):
    fn(impl)  # warmup / JIT
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(impl)
    return (time.perf_counter() - t0) / repeat


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=4096)
    parser.add_argument("--cols", type=int, default=1200)
    parser.add_argument("--repeat", type=int, default=30)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    cases = _cases(args.rows, args.cols - args.cols % 5, rng)

    print(f"shape {args.rows}x{args.cols}, {args.repeat} calls per kernel")
    header = f"{'kernel':<26} {'numpy':>10} {'numba':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, fn in cases:
        t_np = _time(fn, numpy_impl, args.repeat)
        if numba_impl is None:
            print(f"{name:<26} {t_np * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>8}")
            continue
        t_nb = _time(fn, numba_impl, args.repeat)
        print(f"{name:<26} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {t_np / t_nb:>7.1f}x")
    if numba_impl is None:
        print("numba not importable; only the numpy backend was timed")


if __name__ == "__main__":
    main()
