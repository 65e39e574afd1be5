"""Time the compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs on the input sizes the scenarios use by default. Output is
one line per kernel with the best-of-``repeat`` time for each backend.
"""

import argparse
import timeit

import numpy as np

from uavudn import _fallback

try:
    from uavudn import _kernels
except ImportError:
    _kernels = None


def _cases():
    rng = np.random.default_rng(0)

    # Energy transfer: a 751-slot spiral over a 20 x 20 grid.
    q = np.column_stack([rng.uniform(0, 1000, (751, 2)), np.full(751, 100.0)])
    w = np.column_stack([rng.uniform(0, 1000, (400, 2)), np.zeros(400)])
    p = rng.uniform(0, 5, 751)
    yield "harvest_energy", lambda m: m.harvest_energy(q, p, w, 1e-6, 0.5, 1.0)

    # Flying BS: one height with 10 D2D pairs.
    n = 11
    G = rng.uniform(1e-13, 1e-11, (n, n))
    G[np.diag_indices(n)] = rng.uniform(1e-10, 1e-8, n)
    pmax = np.concatenate([[5.0], np.full(n - 1, 0.1)])
    yield "bs_power_solve", lambda m: m.bs_power_solve(G, pmax, 1e-14, 3.16, 16, 20, 1e-12)

    # Relay: 100 slots over a 101-point position lattice, window 2.
    reward = rng.uniform(0, 10, (100, 101))
    yield "dp_forward", lambda m: m.dp_forward(reward, 2)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled kernels not built; only the fallback is timed")
    print(f"{'kernel':<16}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, call in _cases():
        t_py = min(timeit.repeat(lambda: call(_fallback), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:<16}{t_py * 1e3:>14.3f}{'-':>14}{'-':>10}")
            continue
        t_cy = min(timeit.repeat(lambda: call(_kernels), number=1, repeat=args.repeat))
        print(f"{name:<16}{t_py * 1e3:>14.3f}{t_cy * 1e3:>14.3f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
