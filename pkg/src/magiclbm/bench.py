"""Backend benchmark: compiled against vectorized time loops.

Runs the same driven-channel march on both backends, reports steps per
second for each, and checks that the two trajectories agree bitwise
(they execute the identical arithmetic in the identical order, so any
difference is a bug, not roundoff).
"""

import os
import time

import numpy as np

from . import kernels
from .collision import relaxation_d2q9

__all__ = ["run_benchmark", "format_report"]


def _timed_march(backend, start, warmup, steps, kw):
    previous = os.environ.get(kernels.BACKEND_ENV_VAR)
    os.environ[kernels.BACKEND_ENV_VAR] = backend
    try:
        f = kernels.d2q9_run(start, warmup, **kw)
        began = time.perf_counter()
        f = kernels.d2q9_run(f, steps, **kw)
        elapsed = time.perf_counter() - began
    finally:
        if previous is None:
            os.environ.pop(kernels.BACKEND_ENV_VAR, None)
        else:
            os.environ[kernels.BACKEND_ENV_VAR] = previous
    return f, steps / elapsed


def run_benchmark(nx=100, ny=21, steps=1000, warmup=100):
    """Time the channel march on every available backend.

    The warmup chunk absorbs compilation time; the timed chunk continues
    from the warmed state.  Returns a dict with the grid, step counts,
    steps-per-second per backend, the compiled-over-vectorized speedup
    (when both ran), and whether the final fields matched bitwise.
    """
    kw = dict(
        settings=relaxation_d2q9(0.375, 1.0),
        alpha=-2.0,
        beta=1.0,
        fx=1e-6,
        force_code=kernels.FORCE_SPLIT_HALF,
        x_code=kernels.X_PERIODIC,
        y_code=kernels.Y_WALL,
    )
    start = np.zeros((9, ny, nx))
    report = {
        "nx": nx,
        "ny": ny,
        "steps": steps,
        "warmup": warmup,
        "rates": {},
        "speedup": None,
        "bitwise_match": None,
    }
    f_numpy, rate = _timed_march("numpy", start, warmup, steps, kw)
    report["rates"]["numpy"] = rate
    if kernels.NUMBA_AVAILABLE:
        f_numba, rate = _timed_march("numba", start, warmup, steps, kw)
        report["rates"]["numba"] = rate
        report["speedup"] = report["rates"]["numba"] / report["rates"]["numpy"]
        report["bitwise_match"] = bool(np.array_equal(f_numba, f_numpy))
    return report


def format_report(report):
    """Human-readable lines for a run_benchmark result."""
    lines = [
        f"channel march on {report['nx']}x{report['ny']} "
        f"({report['warmup']} warmup + {report['steps']} timed steps)"
    ]
    for backend in ("numba", "numpy"):
        rate = report["rates"].get(backend)
        if rate is not None:
            lines.append(f"  {backend:>6}: {rate:10.1f} steps/s")
    if report["speedup"] is not None:
        lines.append(f"  speedup (numba / numpy): {report['speedup']:.1f}x")
        match = "yes" if report["bitwise_match"] else "NO (backend drift!)"
        lines.append(f"  bitwise identical trajectories: {match}")
    else:
        lines.append("  numba backend not available; timed numpy only")
    return lines
