"""Benchmark the compiled evolution kernel against the NumPy fallback.

Usage: python benchmarks/bench_evolve.py [--sizes 10,25,50,100] [--repeat 3]

Builds one seeded random graph per size and times full stationary-state
solves (fixed iteration count so both backends do identical work).
"""

from __future__ import annotations

import argparse
import dataclasses
import time

import numpy as np

from qsfolio.data import ReturnsPanel, compute_stats
from qsfolio.engine import active_backend, run_to_stationary
from qsfolio.graph import QswParams, build_graph


def seeded_graph(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    rets = rng.normal(3e-4, 0.012, size=(400, n)) * \
        rng.uniform(0.6, 1.6, size=n)
    dates = np.arange("2020-01-01", 400, dtype="datetime64[D]")
    panel = ReturnsPanel(dates, tuple(f"A{i}" for i in range(n)), rets, "log")
    # tol far below reachable precision: both backends run max_iters steps
    params = QswParams(alpha=10.0, beta=10.0, lambda_hold=10.0, omega=0.3,
                       tol=1e-300, max_iters=1500)
    return build_graph(compute_stats(panel), params), params


def time_solve(graph, params, backend: str, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        started = time.perf_counter()
        run_to_stationary(graph, params, backend=backend)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="10,25,50,100")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = ["numpy"]
    if active_backend() == "native":
        backends.insert(0, "native")
    else:
        print("note: compiled kernel not built; timing NumPy only\n")

    iters = 1500
    print(f"{iters} evolution steps per solve, best of {args.repeat} runs\n")
    header = f"{'n':>5}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for n in sizes:
        graph, params = seeded_graph(n)
        params = dataclasses.replace(params, max_iters=iters)
        times = [time_solve(graph, params, b, args.repeat) for b in backends]
        row = f"{n:>5}" + "".join(f"{t * 1e3:>12.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
