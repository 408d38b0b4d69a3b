"""Time the numeric kernels with and without numba.

Each variant runs in its own interpreter because the backend is chosen at
import time from BIHILB_NO_NUMBA.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from bihilb import kernels
from bihilb._accel import USE_NUMBA

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
a = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
a = a - a.T
T = rng.normal(size=(4, 2, 2)) + 1j * rng.normal(size=(4, 2, 2))
T = 0.1 * (T - np.conj(np.swapaxes(T, -1, -2)))
f = np.array([0.3, -0.2, 0.5])
cases = {
    "pfaffian_12x12_x200": lambda: [kernels.pfaffian_numeric(a) for _ in range(200)],
    "nahm_rk4_k2_2000x8": lambda: kernels.nahm_rk4(T, 1e-3, 2000, 8),
    "euler_top_rk4_20000": lambda: kernels.euler_top_rk4(f, 1e-4, 20000),
}
out = {"numba": USE_NUMBA}
for name, fn in cases.items():
    fn()  # warm-up, includes compilation
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps(out))
"""


def run(no_numba: bool, repeat: int) -> dict:
    env = dict(os.environ)
    if no_numba:
        env["BIHILB_NO_NUMBA"] = "1"
    else:
        env.pop("BIHILB_NO_NUMBA", None)
    res = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'kernel':<24} {'numba [s]':>11} {'numpy [s]':>11} {'speed-up':>9}")
    for name in (k for k in fast if k != "numba"):
        print(f"{name:<24} {fast[name]:>11.5f} {slow[name]:>11.5f} {slow[name] / fast[name]:>8.1f}x")
    if not fast["numba"]:
        print("note: numba unavailable, both columns use the numpy path")


if __name__ == "__main__":
    main()
