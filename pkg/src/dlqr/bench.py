"""Timing comparison of the compiled and pure-NumPy kernel backends.

Covers the three kernel entry points (single abscissa, batched grid
abscissas, Lyapunov solve) plus one composite workload, a full
projection-method solve, run with each backend temporarily installed.
Agreement between backends is checked on the fly so the benchmark doubles
as an equivalence smoke test.
"""

import time
from contextlib import contextmanager

import numpy as np

from . import lyap as _lyap_mod
from ._backend import load_backend
from .model import ChainFamilyParams, StructureMask, build_chain_system, inverse_optimal_weights

__all__ = ["available_backends", "run_benchmarks", "format_table"]


def available_backends():
    out = {"python": load_backend("python")}
    try:
        out["compiled"] = load_backend("compiled")
    except ImportError:
        pass
    return out


@contextmanager
def _installed(kern):
    """Temporarily route the solver stack through the given kernel module."""
    old = _lyap_mod.kernels
    _lyap_mod.kernels = kern
    try:
        yield
    finally:
        _lyap_mod.kernels = old


def _bench(fn, min_time=0.2, max_reps=10000):
    fn()  # warmup
    reps = 0
    t0 = time.perf_counter()
    while True:
        fn()
        reps += 1
        dt = time.perf_counter() - t0
        if dt >= min_time or reps >= max_reps:
            return dt / reps


def _case_system(eps=0.05):
    sys = build_chain_system(ChainFamilyParams(3, (-1.0, 10.0, 1.0), (10.0, 1.0), eps))
    R2 = np.array([[20.0, 1, -1], [1, 5, 2], [-1, 2, 2]])
    weights = inverse_optimal_weights(sys, 20.0 * np.eye(3), R2)
    return sys, weights, StructureMask.identity(3)


def run_benchmarks(sizes=(3, 6, 10), grid_points=100000, seed=0):
    """Returns (rows, notes). Each row is a dict with per-backend timings."""
    rng = np.random.default_rng(seed)
    backs = available_backends()
    notes = []
    if "compiled" not in backs:
        notes.append("compiled extension not importable; timing the python backend only")
    rows = []

    for n in sizes:
        M = rng.standard_normal((n, n)) - 2.5 * np.eye(n)
        row = {"workload": f"spectral_abscissa ({n}x{n})", "per_call": {}, "unit": "us"}
        vals = {}
        for name, kern in backs.items():
            row["per_call"][name] = _bench(lambda k=kern: k.spectral_abscissa(M)) * 1e6
            vals[name] = kern.spectral_abscissa(M)
        _check_close(vals, notes, row["workload"], tol=1e-8)
        rows.append(row)

    for n in sizes:
        M = rng.standard_normal((n, n)) - 2.5 * np.eye(n)
        Q = rng.standard_normal((n, n))
        Q = Q @ Q.T + np.eye(n)
        row = {"workload": f"lyap_solve ({n}x{n})", "per_call": {}, "unit": "us"}
        vals = {}
        for name, kern in backs.items():
            row["per_call"][name] = _bench(lambda k=kern: k.lyap_solve(M, Q)) * 1e6
            vals[name] = float(np.trace(kern.lyap_solve(M, Q)[0]))
        _check_close(vals, notes, row["workload"], tol=1e-8)
        rows.append(row)

    sys, weights, mask = _case_system()
    rws, cls = mask.free_indices()
    pts = rng.uniform(-60, 60, size=(grid_points, mask.n_free))
    row = {"workload": f"abscissa grid ({grid_points} pts, n=3)", "per_call": {}, "unit": "ms"}
    vals = {}
    for name, kern in backs.items():
        row["per_call"][name] = _bench(
            lambda k=kern: k.closed_loop_abscissa_grid(sys.A, sys.B, sys.C, rws, cls, pts),
            min_time=0.5) * 1e3
        a = kern.closed_loop_abscissa_grid(sys.A, sys.B, sys.C, rws, cls, pts)
        vals[name] = float(np.sum(a < 0)) + float(a[np.isfinite(a)].sum()) * 1e-9
    _check_close(vals, notes, row["workload"], tol=1e-6)
    rows.append(row)

    from .search import solve_projection_method  # deferred: search pulls in this module's deps

    K0 = np.diag([40.0, 40.0, 40.0])
    row = {"workload": "full A-M solve from D1(40,40,40)", "per_call": {}, "unit": "ms"}
    vals = {}
    for name, kern in backs.items():
        with _installed(kern):
            row["per_call"][name] = _bench(
                lambda: solve_projection_method(sys, weights, mask, K0, method="am"),
                min_time=0.5) * 1e3
            vals[name] = solve_projection_method(sys, weights, mask, K0, method="am").final_cost
    _check_close(vals, notes, row["workload"], tol=1e-6)
    rows.append(row)
    return rows, notes


def _check_close(vals, notes, label, tol):
    if len(vals) < 2:
        return
    ref = vals["python"]
    other = vals["compiled"]
    scale = max(1.0, abs(ref))
    if not np.isfinite(other) or abs(other - ref) > tol * scale:
        notes.append(f"backend mismatch on {label}: python={ref!r} compiled={other!r}")


def format_table(rows, notes=()):
    names = sorted({name for r in rows for name in r["per_call"]})
    heads = ["workload"] + names + ["speedup"]
    table = []
    for r in rows:
        line = [f"{r['workload']}"]
        for n in names:
            v = r["per_call"].get(n)
            line.append("-" if v is None else f"{v:.3g} {r['unit']}")
        if "python" in r["per_call"] and "compiled" in r["per_call"] and r["per_call"]["compiled"]:
            line.append(f"{r['per_call']['python'] / r['per_call']['compiled']:.2f}x")
        else:
            line.append("-")
        table.append(line)
    widths = [max(len(h), *(len(row[i]) for row in table)) for i, h in enumerate(heads)]
    out = ["  ".join(h.ljust(w) for h, w in zip(heads, widths))]
    for row in table:
        out.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    for note in notes:
        out.append(f"note: {note}")
    return "\n".join(out) + "\n"
