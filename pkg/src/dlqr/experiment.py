"""Batch jump experiments over random stabilizing initial points.

For each trial a structured stabilizing gain is sampled, every configured
solver cell (method, s_bar, beta) is run from it, and the trajectory is
classified against a component atlas: which component it started in,
where it ended, and how many component jumps occurred along the way.
Counts of "started in a sub-optimal component, ended in the global one"
aggregate into tables.

Trials are independent: each draws its randomness from a counter-based
generator keyed by (seed, eps index, trial index), so a run with N
workers is byte-identical to a serial one.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .atlas import (
    build_atlas,
    classify,
    count_jumps,
    normalize_box,
    philox_rng,
    sample_stabilizing,
)
from .errors import (
    DlqrError,
    InvalidParameterError,
    OutOfAtlasError,
    SamplingError,
)
from .search import ArmijoParams, solve_projection_method

__all__ = ["JumpExperimentConfig", "JumpReport", "run_jump_experiment"]

_EXPERIMENT_METHODS = ("am", "newton")


@dataclass(frozen=True)
class JumpExperimentConfig:
    """Knobs of one batch experiment.

    eps_values requests one sub-experiment per value; the system argument
    of run_jump_experiment must then be a callable eps -> LtiSystem.
    anchors name reference gains whose components head the summary table;
    global_anchor names the component counted as the jump target.
    """

    trials: int
    box: tuple = (-60.0, 60.0)
    grid: tuple = ((1.0, 0.5),)  # (s_bar, beta) pairs
    methods: tuple = ("am",)
    eps_values: tuple = (None,)
    seed: int = 0
    alpha: float = 1e-2
    stop_tol: float = 1e-3
    max_iters: int = 500
    max_backtracks: int = 60
    resolution: int = 120
    anchors: Optional[dict] = None
    global_anchor: str = "D1"
    max_rejects: int = 100000

    def __post_init__(self):
        if int(self.trials) < 1:
            raise InvalidParameterError(f"trials must be positive, got {self.trials}")
        object.__setattr__(self, "trials", int(self.trials))
        b = np.asarray(self.box, dtype=np.float64)
        normalize_box(self.box, 1 if b.shape == (2,) else b.shape[0],
                      positive_volume=True)
        methods = tuple(self.methods)
        if not methods or any(m not in _EXPERIMENT_METHODS for m in methods):
            raise InvalidParameterError(
                f"methods must be a non-empty subset of {_EXPERIMENT_METHODS}, got {methods}")
        object.__setattr__(self, "methods", methods)
        grid = tuple((float(s), float(b)) for s, b in self.grid)
        if not grid:
            raise InvalidParameterError("grid must list at least one (s_bar, beta) pair")
        for s, b in grid:
            ArmijoParams(s_bar=s, beta=b, alpha=self.alpha,
                         max_backtracks=self.max_backtracks)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "eps_values", tuple(self.eps_values))
        object.__setattr__(self, "seed", int(self.seed))

    def cells(self):
        return [
            {"eps": eps, "method": m, "s_bar": s, "beta": b}
            for eps in self.eps_values
            for m in self.methods
            for (s, b) in self.grid
        ]


@dataclass
class JumpReport:
    """Per-trial rows plus aggregated per-cell jump counts."""

    config: JumpExperimentConfig
    anchor_labels: list  # one dict name -> label per eps value
    cells: list  # dicts {eps, method, s_bar, beta, counts, to_global, statuses}
    rows: list  # per-trial dicts in (eps, cell, trial) order
    k0_dim: int

    def csv_header(self):
        cols = ["trial", "seed"]
        cols += [f"k0_{i}" for i in range(self.k0_dim)]
        cols += ["start_component", "method", "s_bar", "beta", "final_J",
                 "end_component", "n_iters", "status", "n_jumps", "eps"]
        return cols

    def to_csv_rows(self):
        out = []
        for r in self.rows:
            row = [str(r["trial"]), str(r["seed"])]
            row += [repr(float(v)) for v in r["k0"]]
            row += [
                str(r["start_component"]),
                r["method"],
                repr(float(r["s_bar"])),
                repr(float(r["beta"])),
                repr(float(r["final_J"])),
                str(r["end_component"]),
                str(r["n_iters"]),
                r["status"],
                str(r["n_jumps"]),
                "" if r["eps"] is None else repr(float(r["eps"])),
            ]
            out.append(row)
        return out

    def to_global(self, start_anchor, eps=None, method=None, s_bar=None, beta=None):
        """Count of trials that started in `start_anchor`'s component and
        ended in the global one, over cells matching the filters."""
        total = 0
        for cell in self.cells:
            if eps is not None and cell["eps"] != eps:
                continue
            if method is not None and cell["method"] != method:
                continue
            if s_bar is not None and cell["s_bar"] != s_bar:
                continue
            if beta is not None and cell["beta"] != beta:
                continue
            total += cell["to_global"].get(start_anchor, 0)
        return total

    def to_json_dict(self):
        return {
            "format": "dlqr-jump-report-1",
            "seed": self.config.seed,
            "trials": self.config.trials,
            "global_anchor": self.config.global_anchor,
            "box": list(np.asarray(self.config.box, dtype=float).ravel()),
            "resolution": self.config.resolution,
            "anchor_labels": [
                {"eps": eps, "labels": labels}
                for eps, labels in zip(self.config.eps_values, self.anchor_labels)
            ],
            "cells": [
                {
                    "eps": c["eps"],
                    "method": c["method"],
                    "s_bar": c["s_bar"],
                    "beta": c["beta"],
                    "to_global": c["to_global"],
                    "started": c["started"],
                    "statuses": c["statuses"],
                    "counts": {k: dict(v) for k, v in c["counts"].items()},
                }
                for c in self.cells
            ],
        }

    def summary_text(self):
        """Aligned table: rows are sub-optimal start components, columns are
        experiment cells, entries are jumped/started counts."""
        g = self.config.global_anchor
        starts = sorted({name for c in self.cells for name in c["started"] if name != g})
        heads = ["start -> " + g]
        for c in self.cells:
            eps_part = "" if c["eps"] is None else f" eps={c['eps']:g}"
            heads.append(f"{c['method']} s={c['s_bar']:g} b={c['beta']:g}{eps_part}")
        lines = []
        table = []
        for name in starts:
            row = [name]
            for c in self.cells:
                row.append(f"{c['to_global'].get(name, 0)}/{c['started'].get(name, 0)}")
            table.append(row)
        widths = [max(len(h), *(len(r[i]) for r in table)) if table else len(h)
                  for i, h in enumerate(heads)]
        lines.append("  ".join(h.ljust(w) for h, w in zip(heads, widths)))
        for row in table:
            lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
        lines.append("")
        lines.append(f"trials per cell: {self.config.trials}   seed: {self.config.seed}")
        for eps, labels in zip(self.config.eps_values, self.anchor_labels):
            eps_part = "" if eps is None else f"eps={eps:g}: "
            lines.append("components " + eps_part
                         + ", ".join(f"{k}={v}" for k, v in labels.items()))
        return "\n".join(lines) + "\n"


# Worker context, set once per process by the pool initializer.
_CTX = {}


def _init_worker(payload):
    _CTX.clear()
    _CTX.update(payload)


def _run_trial(task):
    """All cells of one (eps, trial) pair; returns per-cell row dicts."""
    eps_idx, trial = task
    cfg = _CTX["config"]
    sys = _CTX["systems"][eps_idx]
    atlas = _CTX["atlases"][eps_idx]
    weights = _CTX["weights"][eps_idx]
    mask = _CTX["mask"]
    eps = cfg.eps_values[eps_idx]
    box = _CTX["box"]

    rng = philox_rng(cfg.seed, (eps_idx, trial))
    base = {"trial": trial, "seed": cfg.seed, "eps": eps}
    try:
        K0 = sample_stabilizing(sys, mask, box, rng, max_rejects=cfg.max_rejects)
    except SamplingError:
        k0 = [math.nan] * atlas.free_rows.size
        return [
            dict(base, k0=k0, start_component=0, method=m, s_bar=s, beta=b,
                 final_J=math.nan, end_component=0, n_iters=0,
                 status="sampling-failure", n_jumps=0)
            for m in cfg.methods for (s, b) in cfg.grid
        ]
    k0 = [float(v) for v in atlas.free_values(K0)]
    start = classify(atlas, K0, sys=sys)
    rows = []
    for m in cfg.methods:
        for (s, b) in cfg.grid:
            armijo = ArmijoParams(s_bar=s, beta=b, alpha=cfg.alpha,
                                  max_backtracks=cfg.max_backtracks)
            try:
                rec = solve_projection_method(
                    sys, weights, mask, K0, method=m, armijo=armijo,
                    stop_tol=cfg.stop_tol, max_iters=cfg.max_iters)
                jumps, labels = count_jumps(atlas, [it.K for it in rec.iterates], sys=sys)
                rows.append(dict(base, k0=k0, start_component=start, method=m,
                                 s_bar=s, beta=b, final_J=rec.final_cost,
                                 end_component=labels[-1], n_iters=rec.n_iters,
                                 status=rec.status, n_jumps=jumps))
            except DlqrError as exc:
                rows.append(dict(base, k0=k0, start_component=start, method=m,
                                 s_bar=s, beta=b, final_J=math.nan,
                                 end_component=0, n_iters=0,
                                 status=f"error:{type(exc).__name__}", n_jumps=0))
    return rows


def run_jump_experiment(system, weights, mask, config, threads=1):
    """Run the batch experiment; returns a JumpReport.

    `system` is an LtiSystem, or a callable eps -> LtiSystem when
    config.eps_values holds more than one value (or non-None values);
    `weights` may likewise be a callable eps -> PerformanceWeights so each
    instance keeps its own inverse-optimality weights. Individual trial
    failures are recorded in their rows and never abort the batch.
    """
    cfg = config
    systems = []
    weights_list = []
    for eps in cfg.eps_values:
        if callable(system):
            if eps is None:
                raise InvalidParameterError("eps_values must be numeric with a system factory")
            systems.append(system(eps))
        else:
            if len(cfg.eps_values) > 1:
                raise InvalidParameterError(
                    "multiple eps_values require a callable system factory")
            systems.append(system)
        weights_list.append(weights(eps) if callable(weights) else weights)
    d = mask.n_free
    box = normalize_box(cfg.box, d)

    atlases = []
    anchor_labels = []
    for sys_eps in systems:
        atlas = build_atlas(sys_eps, mask, box, cfg.resolution)
        atlases.append(atlas)
        labels = {}
        if cfg.anchors:
            for name, K in cfg.anchors.items():
                try:
                    labels[name] = classify(atlas, np.asarray(K, dtype=np.float64),
                                            sys=sys_eps)
                except OutOfAtlasError:
                    labels[name] = 0  # outside the box: names no component
        anchor_labels.append(labels)

    payload = {
        "config": cfg,
        "systems": systems,
        "atlases": atlases,
        "weights": weights_list,
        "mask": mask,
        "box": box,
    }
    tasks = [(eps_idx, trial)
             for eps_idx in range(len(cfg.eps_values))
             for trial in range(cfg.trials)]
    threads = max(1, int(threads))
    if threads == 1:
        _init_worker(payload)
        results = [_run_trial(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (threads * 16))
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                                 initargs=(payload,)) as ex:
            results = list(ex.map(_run_trial, tasks, chunksize=chunk))

    # regroup into (eps, cell, trial) order
    cell_defs = [(m, s, b) for m in cfg.methods for (s, b) in cfg.grid]
    rows = []
    cells = []
    for eps_idx, eps in enumerate(cfg.eps_values):
        trial_rows = results[eps_idx * cfg.trials:(eps_idx + 1) * cfg.trials]
        labels = anchor_labels[eps_idx]
        label_to_name = {}
        for name, lab in labels.items():
            if lab > 0:  # an anchor on the boundary names no component
                label_to_name.setdefault(lab, name)
        for ci, (m, s, b) in enumerate(cell_defs):
            counts = {}
            started = {}
            statuses = {}
            for per_trial in trial_rows:
                r = per_trial[ci]
                rows.append(r)
                s_name = label_to_name.get(r["start_component"], "other")
                e_name = label_to_name.get(r["end_component"], "other")
                counts.setdefault(s_name, {}).setdefault(e_name, 0)
                counts[s_name][e_name] += 1
                started[s_name] = started.get(s_name, 0) + 1
                statuses[r["status"]] = statuses.get(r["status"], 0) + 1
            g = cfg.global_anchor
            to_global = {s_name: ends.get(g, 0) for s_name, ends in counts.items()}
            cells.append({"eps": eps, "method": m, "s_bar": s, "beta": b,
                          "counts": counts, "started": started,
                          "to_global": to_global, "statuses": statuses})

    return JumpReport(config=cfg, anchor_labels=anchor_labels, cells=cells,
                      rows=rows, k0_dim=d)
