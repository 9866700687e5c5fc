"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py           # full run
    python benchmarks/bench_kernels.py --quick   # smoke run

Kernel timings call both modules directly in one process; the end-to-end
rows run a subprocess per backend so backend selection happens at import.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from qaut import _kernels_py

try:
    from qaut import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

E2E = """
import time
from importlib import resources
from qaut import dsl, BACKEND
from qaut.automaton import sample_run, enumerate_runs
with resources.as_file(resources.files("qaut") / "corpus" / "teleport.qaut") as p:
    a = dsl.load(p)
t = time.perf_counter()
for seed in range({runs}):
    sample_run(a, a.initial_state, seed)
t_run = time.perf_counter() - t
t = time.perf_counter()
for _ in range({runs} // 10 or 1):
    enumerate_runs(a, a.initial_state)
t_enum = time.perf_counter() - t
print(BACKEND, t_run, t_enum)
"""


def hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def best(stmt, number, repeat=5):
    return min(timeit.repeat(stmt, number=number, repeat=repeat)) / number


def kernel_rows(quick: bool):
    rng = np.random.default_rng(0)
    rows = []
    sizes = (4, 8) if quick else (4, 8, 16, 32)
    for n in sizes:
        h = hermitian(rng, n)
        k = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        b = k[: n // 2, : n // 2].copy()
        cases = {
            "jacobi_eigvalsh": lambda m: (lambda: m.jacobi_eigvalsh(h.copy(), 1e-12)),
            "sandwich": lambda m: (lambda: m.sandwich(k, h)),
            "sandwich_trace": lambda m: (lambda: m.sandwich_trace(k, h)),
            "matmul": lambda m: (lambda: m.matmul(k, h)),
            "kron": lambda m: (lambda: m.kron(b, b)),
        }
        number = 5 if quick else (200 if n <= 8 else 20)
        for name, make in cases.items():
            t_py = best(make(_kernels_py), number, 2 if quick else 5)
            t_c = best(make(_compiled), number, 2 if quick else 5) if _compiled else float("nan")
            rows.append((name, n, t_c, t_py))
    return rows


def e2e_rows(quick: bool):
    runs = 20 if quick else 1000
    out = []
    for pure in ("0", "1"):
        env = dict(os.environ, QAUT_PURE_PYTHON=pure)
        proc = subprocess.run([sys.executable, "-c", E2E.format(runs=runs)], env=env, capture_output=True, text=True, check=True)
        backend, t_run, t_enum = proc.stdout.split()
        out.append((backend, runs, float(t_run), float(t_enum)))
    return out


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--quick", action="store_true", help="few repetitions, small sizes")
    args = p.parse_args(argv)

    print(f"{'kernel':<16} {'n':>3} {'compiled (us)':>14} {'python (us)':>12} {'speedup':>8}")
    for name, n, t_c, t_py in kernel_rows(args.quick):
        print(f"{name:<16} {n:>3} {t_c * 1e6:>14.2f} {t_py * 1e6:>12.2f} {t_py / t_c:>7.1f}x")
    print()
    print(f"{'backend':<10} {'teleport runs':>13} {'sample (s)':>11} {'enumerate (s)':>14}")
    for backend, runs, t_run, t_enum in e2e_rows(args.quick):
        print(f"{backend:<10} {runs:>13} {t_run:>11.3f} {t_enum:>14.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
