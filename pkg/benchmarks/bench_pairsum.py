"""Benchmark: compiled pair-sum core vs the numpy fallback.

Times the three kernels in isolation and a full right-hand-side
evaluation at several grid sizes.  Run with

    python3 benchmarks/bench_pairsum.py
"""

import time

import numpy as np

from stokestring import _pairsum_py
from stokestring import dynamics as dyn
from stokestring import geometry as geo
from stokestring import spectral as sp

try:
    from stokestring import _pairsum as _compiled
except ImportError:
    _compiled = None


def _time(fn, *args, reps=20):
    fn(*args)                       # warm up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps


def bench_kernels(n):
    rng = np.random.default_rng(0)
    ta = sp.grid_points(n)
    arr = lambda shape: np.ascontiguousarray(rng.standard_normal(shape))
    tz = arr((n, 2)) + 3.0
    parts = [ta, tz] + [arr((n, 2)) for _ in range(4)] + [ta, tz, arr((n, 2))]
    dens = arr((n, 2))
    rows = []
    for name in ("apply_w", "apply_r"):
        py = _time(getattr(_pairsum_py, name), *parts, dens, 0.02)
        cy = (_time(getattr(_compiled, name), *parts, dens, 0.02)
              if _compiled else float("nan"))
        rows.append((f"{name} n={n}", py, cy))
    fargs = parts[:5] + parts[6:] + [dens, arr((n, 2)), arr((n, 2)),
                                     arr((n, 2)), arr((n, 2)), 0.02]
    py = _time(_pairsum_py.apply_delta_q, *fargs)
    cy = (_time(_compiled.apply_delta_q, *fargs) if _compiled else float("nan"))
    rows.append((f"apply_delta_q n={n}", py, cy))
    return rows


def bench_step(n, backend_label):
    alpha = sp.grid_points(n)
    st = geo.normalize_initial_data(alpha + 0.01 * np.sin(2 * alpha),
                                    0.01 * np.sin(2 * alpha))
    cfg = dyn.SimConfig(n=n, dt=1e-3, t_final=10 * 1e-3, output_every=10 ** 9)
    t0 = time.perf_counter()
    res = dyn.run_simulation(st, cfg)
    per = (time.perf_counter() - t0) / res.steps
    return f"full step n={n} [{backend_label}]: {1e3 * per:8.2f} ms"


def main():
    from stokestring.backend import BACKEND
    print(f"active backend: {BACKEND}")
    print(f"{'kernel':>24s} {'numpy ms':>10s} {'compiled ms':>12s} {'speedup':>8s}")
    for n in (128, 256, 512):
        for name, py, cy in bench_kernels(n):
            ratio = py / cy if cy == cy else float("nan")
            print(f"{name:>24s} {1e3 * py:10.3f} {1e3 * cy:12.3f} {ratio:8.1f}x")
    for n in (128, 256, 512):
        print(bench_step(n, BACKEND))
    print("(set STOKESTRING_BACKEND=python to time full steps on the fallback)")


if __name__ == "__main__":
    main()
