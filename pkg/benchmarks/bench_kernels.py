"""Time the numba kernels against the pure-numpy fallbacks.

Runs every kernel with both backends over a spread of particle counts and
prints a table of per-call times plus the speedup. Usage:

    python3 benchmarks/bench_kernels.py [--particles 100,1000,10000] [--repeat 50]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ste import kernels
from ste.kernels import (_history_log_likelihood_loop,
                         _history_log_likelihood_numpy,
                         _hypothetical_position_variance_loop,
                         _hypothetical_position_variance_numpy,
                         _obs_log_likelihood_loop, _obs_log_likelihood_numpy,
                         _plume_mean_loop, _plume_mean_numpy)

N_HISTORY = 50
N_HYPOTHETICAL = 25


def make_inputs(n: int, rng: np.random.Generator):
    thetas = np.column_stack([
        rng.uniform(0, 30, n), rng.uniform(0, 30, n),      # x, y
        rng.uniform(100, 500, n), rng.uniform(1, 4, n),    # rate, wind speed
        rng.uniform(0, 2 * np.pi, n), rng.uniform(1, 8, n),  # angle, diffusivity
        np.full(n, 10.0),                                  # lifetime
    ])
    weights = rng.dirichlet(np.ones(n))
    hx, hy = rng.uniform(0, 30, N_HISTORY), rng.uniform(0, 30, N_HISTORY)
    hc = rng.uniform(0, 2, N_HISTORY)
    cs = rng.uniform(0, 2, N_HYPOTHETICAL)
    return thetas, weights, hx, hy, hc, cs


def bench(fn, args, repeat: int) -> float:
    fn(*args)  # warm up (numba compiles here)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--particles", default="100,1000,10000",
                        help="comma-separated particle counts")
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()

    try:
        from numba import njit
    except ImportError:
        raise SystemExit("numba is not importable; nothing to compare")
    jit = {
        "plume_mean": njit(cache=True)(_plume_mean_loop),
        "obs_log_likelihood": njit(cache=True)(_obs_log_likelihood_loop),
        "history_log_likelihood": njit(cache=True)(_history_log_likelihood_loop),
        "hypothetical_position_variance":
            njit(cache=True)(_hypothetical_position_variance_loop),
    }
    plain = {
        "plume_mean": _plume_mean_numpy,
        "obs_log_likelihood": _obs_log_likelihood_numpy,
        "history_log_likelihood": _history_log_likelihood_numpy,
        "hypothetical_position_variance": _hypothetical_position_variance_numpy,
    }

    print(f"active package backend: {kernels.BACKEND}")
    print(f"{'kernel':<32}{'N':>8}{'numpy (us)':>14}{'numba (us)':>14}{'speedup':>10}")
    rng = np.random.default_rng(0)
    for n in [int(v) for v in args.particles.split(",")]:
        thetas, weights, hx, hy, hc, cs = make_inputs(n, rng)
        m = _plume_mean_numpy(12.0, 9.0, thetas)
        sigma = 0.3 * m + 0.2
        calls = {
            "plume_mean": (12.0, 9.0, thetas),
            "obs_log_likelihood": (12.0, 9.0, 0.7, thetas, 0.3, 0.2),
            "history_log_likelihood": (hx, hy, hc, thetas, 0.3, 0.2),
            "hypothetical_position_variance":
                (m, sigma, weights, thetas[:, 0], thetas[:, 1], cs),
        }
        for name, call in calls.items():
            t_np = bench(plain[name], call, args.repeat)
            t_nb = bench(jit[name], call, args.repeat)
            print(f"{name:<32}{n:>8}{t_np * 1e6:>14.1f}{t_nb * 1e6:>14.1f}"
                  f"{t_np / t_nb:>10.2f}x")


if __name__ == "__main__":
    main()
