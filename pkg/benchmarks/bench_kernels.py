"""Benchmark the series-product kernel: numba JIT vs pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
The numpy fallback is selected by re-importing the package in a subprocess
with CRNF_DISABLE_NUMBA=1, so both paths use identical inputs.
"""

import json
import os
import subprocess
import sys
import time

WORK = r"""
import json, time, sys
import numpy as np
from crnf.series import MixedSeries
from crnf import _kernels

rng = np.random.default_rng(0)
n, trunc = 3, 8

def random_series(nterms):
    s = MixedSeries.zero(n, trunc)
    for _ in range(nterms):
        a = tuple(rng.integers(0, 3, n)); b = tuple(rng.integers(0, 3, n))
        m = int(rng.integers(0, 3))
        if sum(a) + sum(b) + 2 * m > trunc:
            continue
        s = s + MixedSeries.monomial(n, trunc, a, b, m, rng.normal() + 1j * rng.normal())
    return s

A = random_series(300)
B = random_series(300)
C = A * B  # warm-up (includes JIT compilation when numba is active)
t0 = time.perf_counter()
reps = 50
for _ in range(reps):
    C = A * B
dt = (time.perf_counter() - t0) / reps
print(json.dumps({"numba": _kernels.HAS_NUMBA, "sec_per_product": dt,
                  "terms": len(C.coeffs), "checksum": float(C.norm())}))
"""


def run(disable):
    env = dict(os.environ)
    if disable:
        env["CRNF_DISABLE_NUMBA"] = "1"
    else:
        env.pop("CRNF_DISABLE_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", WORK], env=env, capture_output=True, text=True
    )
    if out.returncode != 0:
        raise RuntimeError(out.stderr)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    jit = run(disable=False)
    plain = run(disable=True)
    assert abs(jit["checksum"] - plain["checksum"]) < 1e-9, "kernels disagree"
    print(f"numba active: {jit['numba']}  {jit['sec_per_product']*1e3:.3f} ms/product")
    print(f"numpy fallback:        {plain['sec_per_product']*1e3:.3f} ms/product")
    if jit["numba"]:
        print(f"speedup: {plain['sec_per_product']/jit['sec_per_product']:.2f}x")
    else:
        print("numba not importable; both runs used the numpy fallback")


if __name__ == "__main__":
    main()
