"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--runs N]

Part one times single kernel calls; part two times whole optimizer runs
in a child process per backend (the backend is chosen at import time).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from mfodbo import _pykernels, pv
from mfodbo._backend import compiled_kernels

RUN_SNIPPET = """
import time
from mfodbo import run, OptimizerConfig, BACKEND
from mfodbo.benchfns import get_function
from mfodbo.pv import pv_objective
objs = [get_function('rastrigin', 10).objective(), pv_objective('sdm')]
t0 = time.perf_counter()
for obj in objs:
    for s in range({runs}):
        run(obj, OptimizerConfig.for_variant('{variant}', seed=s, iterations={iters}))
print(BACKEND, (time.perf_counter() - t0) / ({runs} * len(objs)))
"""


def kernel_cases():
    rng = np.random.default_rng(0)
    d = 30
    x, xp, w = rng.random(d), rng.random(d), rng.random(d)
    lo, hi = np.zeros(d), np.ones(d)
    hist = np.ascontiguousarray(rng.random((4, d)))
    weights = np.array([0.1, 0.045, 0.0285, 0.0206625])
    ds = pv.bundled_dataset("sdm")
    p = np.array(pv.PUBLISHED_BEST["sdm"][0])
    v, i, t = ds.voltage, ds.current, ds.temperature_kelvin
    return {
        "roll": lambda k: k.roll(x, xp, w, 0.1, 0.3, lo, hi),
        "fo_roll": lambda k: k.fo_roll(hist, weights, xp, w, 0.1, 0.3, lo, hi),
        "brood": lambda k: k.brood(x, xp, lo, hi, w, x, lo, hi),
        "steal": lambda k: k.steal(x, xp, w, 0.5, x, lo, hi),
        "rastrigin": lambda k: k.rastrigin(x),
        "ackley": lambda k: k.ackley(x),
        "sdm_rmse": lambda k: k.sdm_rmse(p, v, i, t),
        "folc_sequence(900)": lambda k: k.folc_sequence(0.3, 3.0, 0.7, 900),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000, help="calls per kernel timing")
    ap.add_argument("--runs", type=int, default=3, help="optimizer runs per objective")
    ap.add_argument("--iters", type=int, default=200)
    ap.add_argument("--variant", default="MFO-DBO")
    args = ap.parse_args(argv)

    ck = compiled_kernels()
    if ck is None:
        print("compiled kernels are not built; only the fallback can be timed", file=sys.stderr)
    print(f"{'kernel':<22}{'python (us)':>14}{'cython (us)':>14}{'speedup':>10}")
    for name, call in kernel_cases().items():
        tp = min(timeit.repeat(lambda: call(_pykernels), number=args.repeat, repeat=3)) / args.repeat
        if ck is not None:
            tc = min(timeit.repeat(lambda: call(ck), number=args.repeat, repeat=3)) / args.repeat
            print(f"{name:<22}{tp * 1e6:>14.2f}{tc * 1e6:>14.2f}{tp / tc:>10.1f}")
        else:
            print(f"{name:<22}{tp * 1e6:>14.2f}{'-':>14}{'-':>10}")

    print(f"\nwhole runs ({args.variant}, {args.iters} iterations, seconds per run)")
    snippet = RUN_SNIPPET.format(runs=args.runs, variant=args.variant, iters=args.iters)
    for backend in ("python", "cython"):
        if backend == "cython" and ck is None:
            continue
        env = dict(os.environ, MFODBO_BACKEND=backend)
        out = subprocess.run([sys.executable, "-c", snippet], env=env, capture_output=True, text=True, check=True)
        name, secs = out.stdout.split()
        print(f"{name:<10}{float(secs):.3f}")


if __name__ == "__main__":
    main()
