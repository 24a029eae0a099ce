"""Benchmark: compiled tracing kernels against the pure numpy fallback.

Runs the batched single-step kernel and the long-trace kernel in a
subprocess per backend (the backend is chosen at import time via
VOLENT_PURE_NUMPY), so the numbers reflect what users of either path
get.

Usage: python benchmarks/bench_tracing.py [n_rays]
"""

import json
import os
import subprocess
import sys

_WORKER = r"""
import json, math, sys, time
import numpy as np
from volent.hypgeom import regular_polygon
from volent.tracing import WallTable, backend, batch_first_crossing, trace

n = int(sys.argv[1])
poly = regular_polygon(5, 2, (2, 2, 2, 2, 2))
table = WallTable.from_polygon(poly)
rng = np.random.default_rng(0)
x = rng.uniform(-0.1, 0.1, n)
y = rng.uniform(0.9, 1.1, n)
a = rng.uniform(0.0, 2.0 * math.pi, n)
dx, dy = np.cos(a), np.sin(a)

batch_first_crossing(table, x[:64], y[:64], dx[:64], dy[:64])  # warm up jit
t0 = time.perf_counter()
batch_first_crossing(table, x, y, dx, dy)
t_batch = time.perf_counter() - t0

trace(table, x[0], y[0], dx[0], dy[0], 5.0)
t0 = time.perf_counter()
total = 0
for i in range(min(n, 2000)):
    j, t, u, th, flag = trace(table, x[i], y[i], dx[i], dy[i], 50.0)
    total += len(j)
t_trace = time.perf_counter() - t0
print(json.dumps({"backend": backend(), "n": n, "batch_s": t_batch,
                  "trace_s": t_trace, "crossings": total}))
"""


def run(pure: bool, n: int) -> dict:
    env = dict(os.environ)
    env["VOLENT_PURE_NUMPY"] = "1" if pure else "0"
    out = subprocess.run([sys.executable, "-c", _WORKER, str(n)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    rows = [run(False, n), run(True, n)]
    print(f"{'backend':<8} {'batch step':>12} {'2000 traces':>12}")
    for r in rows:
        print(f"{r['backend']:<8} {r['batch_s']:>11.3f}s {r['trace_s']:>11.3f}s")
    if rows[0]["backend"] != rows[1]["backend"]:
        print(f"speedup: batch x{rows[1]['batch_s'] / rows[0]['batch_s']:.1f}, "
              f"trace x{rows[1]['trace_s'] / rows[0]['trace_s']:.1f}")


if __name__ == "__main__":
    main()
