"""Micro-benchmark: compiled quadrature core vs the pure-Python fallback.

Times the oscillatory-transform engine (single point and vectorized) and a
full density profile build through both backends, printing microseconds per
point and the speedup.  Run from the repository root:

    python3 benchmarks/bench_backends.py [--repeats 5]
"""

import argparse
import importlib
import sys
import time

import numpy as np


def _load(pure):
    for mod in list(sys.modules):
        if mod.startswith("stablekern"):
            del sys.modules[mod]
    import os

    os.environ["STABLEKERN_PURE_PYTHON"] = "1" if pure else ""
    pkg = importlib.import_module("stablekern")
    backend = importlib.import_module("stablekern._backend")
    return pkg, backend


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(pure, repeats):
    pkg, backend = _load(pure)
    name = pkg.backend_name
    xs = np.linspace(0.0, 30.0, 513)
    out = {}

    n_single = 200
    def single():
        for x in xs[:n_single]:
            backend.osc_transform(1.7, 1.0, float(x), 0, 1e-11)
    out["osc_transform (scalar)"] = _time(single, repeats) / n_single * 1e6

    def many():
        backend.osc_transform_many(1.7, 1.0, xs, 0, 1e-11)
    out["osc_transform_many"] = _time(many, repeats) / xs.size * 1e6

    def diff_many():
        backend.diff_transform_many(1.9, 1.0, xs, 1e-11)
    out["diff_transform_many"] = _time(diff_many, repeats) / xs.size * 1e6

    from stablekern.density import StableProfile

    t0 = time.perf_counter()
    StableProfile(1.7)
    out["StableProfile build (s)"] = time.perf_counter() - t0

    return name, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    results = {}
    for pure in (False, True):
        name, out = bench(pure, args.repeats)
        results[name] = out
        print(f"\nbackend: {name}")
        for key, val in out.items():
            unit = "s" if key.endswith("(s)") else "us/pt"
            print(f"  {key:28s} {val:10.3f} {unit}")

    if len(results) == 2:
        names = list(results)
        print(f"\nspeedup ({names[0]} over {names[1]}):")
        for key in results[names[0]]:
            a, b = results[names[0]][key], results[names[1]][key]
            if a > 0:
                print(f"  {key:28s} {b / a:10.1f}x")


if __name__ == "__main__":
    main()
