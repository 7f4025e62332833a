"""Compare the numba kernels against the pure-numpy fallback.

Run from the repository root::

    python benchmarks/bench_kernels.py

Each backend runs in its own interpreter because the backend is fixed at import.
"""

import json
import os
import subprocess
import sys

SNIPPET = r"""
import json, timeit
import numpy as np
from qrbackward import kernels, harness

rng = np.random.default_rng(0)
out = {"numba": kernels.USE_NUMBA}
for n in (14, 200, 2000):
    lower, upper = rng.uniform(-1, 0, (2, n))
    diag = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.standard_normal(n)
    vals = rng.uniform(-1, 2, n)
    kernels.thomas_solve(lower, diag, upper, rhs)
    kernels.windowed_logistic_sum(vals)
    reps = 2000 if n < 1000 else 200
    out[f"thomas n={n}"] = min(timeit.repeat(lambda: kernels.thomas_solve(lower, diag, upper, rhs),
                                             number=reps, repeat=3)) / reps
    out[f"window n={n}"] = min(timeit.repeat(lambda: kernels.windowed_logistic_sum(vals),
                                             number=reps, repeat=3)) / reps

cfg = harness.ExperimentConfig(case="test2", epsilons=(1e-3,), samples=20)
harness.run_sample(cfg, 1e-3, 0)
out["test2 sample (M=15, K=100)"] = min(timeit.repeat(lambda: harness.run_sample(cfg, 1e-3, 1),
                                                      number=5, repeat=3)) / 5
print(json.dumps(out))
"""


def run(disable):
    env = {**os.environ, "QRBACKWARD_DISABLE_NUMBA": "1" if disable else "0"}
    proc = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    fast, slow = run(False), run(True)
    if not fast.pop("numba"):
        print("numba unavailable; both columns use the numpy fallback")
    slow.pop("numba")
    print(f"{'benchmark':32} {'numba [us]':>12} {'numpy [us]':>12} {'speedup':>8}")
    for key in fast:
        print(f"{key:32} {1e6 * fast[key]:12.2f} {1e6 * slow[key]:12.2f} {slow[key] / fast[key]:8.2f}")


if __name__ == "__main__":
    main()
