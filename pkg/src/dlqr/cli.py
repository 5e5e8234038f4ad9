"""Command-line front end.

Subcommands: solve (one solver run), experiment (batch jump statistics),
atlas (component atlas of the structured stabilizing set), bench (kernel
backend timing). Configuration comes from an optional JSON file with
strict key checking; flags override file values; all outputs are written
atomically so interrupted runs leave no partial files.

Exit codes: 0 success/converged, 1 configuration error, 2 solver failure.
"""

import argparse
import copy
import json
import os
import sys
import tempfile

import numpy as np

from ._backend import BACKEND_NAME
from .atlas import (
    atlas_slice,
    atlas_to_json_dict,
    build_atlas,
    classify,
    count_jumps,
    fibonacci,
    philox_rng,
    sample_stabilizing,
    trajectory_labels,
)
from .bench import format_table, run_benchmarks
from .errors import (
    DlqrError,
    InvalidParameterError,
    NotStabilizingError,
    OutOfAtlasError,
    SamplingError,
    UnsupportedDimensionError,
)
from .experiment import JumpExperimentConfig, run_jump_experiment
from .model import (
    ChainFamilyParams,
    StructureMask,
    build_chain_system,
    default_chain_params,
    inverse_optimal_weights,
    problem_from_json,
)
from .search import AlmParams, ArmijoParams, solve_alm, solve_projection_method

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2

DEFAULT_CONFIG = {
    "seed": 0,
    "threads": 1,
    "out": ".",
    "system": {
        "benchmark": "chain-n3-a",
        "file": None,
        "eps": 0.0,
        "n": None,
        "f": None,
        "h": None,
    },
    "k0": {
        "named": None,
        "diag": None,
        "matrix": None,
        "sample": False,
    },
    "solver": {
        "kind": "projection",
        "method": "am",
        "stop_tol": 1e-3,
        "max_iters": 500,
        "armijo": {"s_bar": 1.0, "beta": 0.5, "alpha": 1e-2, "max_backtracks": 60},
        "alm": {
            "c0": 10.0,
            "gamma": 3.0,
            "tau": 1e5,
            "eps_feas": 1e-4,
            "inner_tol": 1e-2,
            "max_inner": 500,
            "max_outer": 50,
        },
    },
    "atlas": {
        "enabled": True,
        "resolution": 120,
        "box": [-60.0, 60.0],
        "slice": None,
    },
    "experiment": {
        "trials": 100,
        "methods": ["am"],
        "grid": [[1.0, 0.5]],
        "eps_values": None,
        "resolution": 120,
        "box": [-60.0, 60.0],
        "anchors": "auto",
        "global_anchor": "D1",
        "alpha": 1e-2,
        "stop_tol": 1e-3,
        "max_iters": 500,
        "max_backtracks": 60,
    },
}

# config keys whose values are free-form (not checked against the defaults)
_OPEN_LEAVES = {("atlas", "slice"), ("experiment", "anchors")}

_NAMED_GAINS_N3A = {
    "D1": np.diag([40.0, 40.0, 40.0]),
    "D2": np.diag([0.0, 0.0, 0.0]),
    "D3": np.diag([-10.0, 5.0, 10.0]),
    "Kc": 20.0 * np.eye(3),
}

_ALM_KC = np.array([[6.0, -10.0, 0.0], [0.0, 2.0, -10.0], [4.0, 0.0, 0.0]])
_NAMED_GAINS_ALM = {
    "Kc": _ALM_KC,
    "K01": np.array([[172.0, -260.0, 42.0], [130.0, 184.0, -130.0], [352.0, 0.0, -140.0]]),
    "K02": np.array([[28.0, -18.2, 31.0], [9.0, -6.0, -9.0], [18.0, 0.0, 40.0]]),
}


def _merge_config(base, user, path=()):
    """Deep-merge user config over defaults, rejecting unknown keys."""
    if not isinstance(user, dict):
        raise InvalidParameterError(f"config section {'.'.join(path) or '<root>'} must be an object")
    out = copy.deepcopy(base)
    for key, val in user.items():
        if key not in base:
            where = ".".join(path + (key,))
            raise InvalidParameterError(f"unknown config key: {where}")
        if isinstance(base[key], dict) and (path + (key,)) not in _OPEN_LEAVES and isinstance(val, dict):
            out[key] = _merge_config(base[key], val, path + (key,))
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(path=None, overrides=None):
    """Resolve defaults <- file <- flag overrides into one config dict."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except OSError as exc:
            raise InvalidParameterError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InvalidParameterError(f"config file is not valid JSON: {exc}") from None
        cfg = _merge_config(cfg, user)
    for dotted, val in (overrides or {}).items():
        node = cfg
        parts = dotted.split(".")
        for part in parts[:-1]:
            node = node[part]
        node[parts[-1]] = val
    return cfg


def _parse_box(text):
    parts = str(text).split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("box must be LO:HI")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError("box bounds must be numbers") from None
    return [lo, hi]


def _parse_k0(text):
    """Either a named gain ("D1") or comma-separated diagonal values."""
    if "," in text:
        return {"diag": [float(v) for v in text.split(",")]}
    return {"named": text}


class _Problem:
    """Resolved system, weights, mask, plus benchmark metadata."""

    def __init__(self, sys, weights, mask, named_gains, factory=None,
                 weights_factory=None, chain_n=None, label=""):
        self.sys = sys
        self.weights = weights
        self.mask = mask
        self.named_gains = named_gains
        self.factory = factory  # eps -> LtiSystem, when the system is a chain family
        self.weights_factory = weights_factory  # eps -> PerformanceWeights
        self.chain_n = chain_n
        self.label = label


def build_problem(cfg):
    scfg = cfg["system"]
    bench = scfg["benchmark"]
    if scfg["file"] is not None:
        if bench not in (None, DEFAULT_CONFIG["system"]["benchmark"]):
            raise InvalidParameterError("give either system.file or system.benchmark, not both")
        with open(scfg["file"], "r", encoding="utf-8") as fh:
            sys_, weights, mask = problem_from_json(fh.read())
        return _Problem(sys_, weights, mask, {}, label=f"file:{scfg['file']}")
    eps = float(scfg["eps"])
    if bench == "chain-n3-a":
        def factory(e):
            return build_chain_system(ChainFamilyParams(3, (-1.0, 10.0, 1.0), (10.0, 1.0), e))
        R2 = np.array([[20.0, 1.0, -1.0], [1.0, 5.0, 2.0], [-1.0, 2.0, 2.0]])
        def wfactory(e):
            return inverse_optimal_weights(factory(e), _NAMED_GAINS_N3A["Kc"], R2)
        sys_ = factory(eps)
        return _Problem(sys_, wfactory(eps), StructureMask.identity(3), dict(_NAMED_GAINS_N3A),
                        factory=factory, weights_factory=wfactory, chain_n=3,
                        label="chain-n3-a")
    if bench == "chain-n3-alm":
        def factory(e):
            return build_chain_system(ChainFamilyParams(3, (-1.0, 2.0, 1.0), (2.0, 1.0), e))
        def wfactory(e):
            return inverse_optimal_weights(factory(e), _ALM_KC, np.eye(3))
        sys_ = factory(eps)
        return _Problem(sys_, wfactory(eps), StructureMask.identity(3), dict(_NAMED_GAINS_ALM),
                        factory=factory, weights_factory=wfactory, chain_n=3,
                        label="chain-n3-alm")
    if bench == "chain-n":
        if scfg["n"] is None:
            raise InvalidParameterError("system.n is required for the chain-n benchmark")
        n = int(scfg["n"])
        if scfg["f"] is not None or scfg["h"] is not None:
            if scfg["f"] is None or scfg["h"] is None:
                raise InvalidParameterError("give both system.f and system.h or neither")
            def factory(e, f=scfg["f"], h=scfg["h"]):
                return build_chain_system(ChainFamilyParams(n, tuple(f), tuple(h), e))
        else:
            def factory(e):
                return build_chain_system(default_chain_params(n, eps=e))
        def wfactory(e):
            return inverse_optimal_weights(factory(e), 20.0 * np.eye(n), np.eye(n))
        sys_ = factory(eps)
        named = {"Kc": 20.0 * np.eye(n)}
        return _Problem(sys_, wfactory(eps), StructureMask.identity(n), named,
                        factory=factory, weights_factory=wfactory, chain_n=n,
                        label=f"chain-n{n}")
    raise InvalidParameterError(
        f"unknown benchmark {bench!r}; expected chain-n3-a, chain-n3-alm, chain-n, or system.file")


def _resolve_k0(cfg, prob):
    kcfg = cfg["k0"]
    if kcfg["named"] is not None:
        name = str(kcfg["named"])
        if name not in prob.named_gains:
            raise InvalidParameterError(
                f"unknown named gain {name!r}; this benchmark has {sorted(prob.named_gains)}")
        return prob.named_gains[name].copy()
    if kcfg["matrix"] is not None:
        K0 = np.asarray(kcfg["matrix"], dtype=np.float64)
        if K0.shape != (prob.mask.m, prob.mask.p):
            raise InvalidParameterError(
                f"k0.matrix must be {prob.mask.m} x {prob.mask.p}, got {K0.shape}")
        return K0
    if kcfg["diag"] is not None:
        vals = np.asarray(kcfg["diag"], dtype=np.float64).ravel()
        if vals.size != min(prob.mask.m, prob.mask.p):
            raise InvalidParameterError(
                f"k0.diag needs {min(prob.mask.m, prob.mask.p)} values, got {vals.size}")
        K0 = np.zeros((prob.mask.m, prob.mask.p))
        np.fill_diagonal(K0, vals)
        return K0
    if kcfg["sample"]:
        rng = philox_rng(cfg["seed"])
        return sample_stabilizing(prob.sys, prob.mask, cfg["atlas"]["box"], rng)
    # benchmark defaults
    if cfg["solver"]["kind"] == "alm" and "Kc" in prob.named_gains:
        return prob.named_gains["Kc"].copy()
    if "D1" in prob.named_gains:
        return prob.named_gains["D1"].copy()
    if "Kc" in prob.named_gains:
        return prob.named_gains["Kc"].copy()
    raise InvalidParameterError("no k0 given: set k0.named, k0.diag, k0.matrix or k0.sample")


def _atomic_write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)  # mkstemp defaults to 0600
        os.replace(tmp, os.path.join(out_dir, name))
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _csv_text(header, rows):
    lines = [",".join(header)]
    lines += [",".join(row) for row in rows]
    return "\n".join(lines) + "\n"


def _fmt_matrix(K):
    return np.array2string(np.asarray(K), precision=6, suppress_small=True)


def cmd_solve(cfg):
    prob = build_problem(cfg)
    K0 = _resolve_k0(cfg, prob)
    sol = cfg["solver"]
    armijo = ArmijoParams(**sol["armijo"])
    try:
        if sol["kind"] == "projection":
            record = solve_projection_method(
                prob.sys, prob.weights, prob.mask, K0, method=sol["method"],
                armijo=armijo, stop_tol=sol["stop_tol"], max_iters=sol["max_iters"])
        elif sol["kind"] == "alm":
            if sol["method"] not in ("am", "newton"):
                raise InvalidParameterError("alm supports method am or newton")
            a = sol["alm"]
            alm = AlmParams(c0=a["c0"], gamma=a["gamma"], tau=a["tau"],
                            eps_feas=a["eps_feas"], inner_tol=a["inner_tol"],
                            max_inner=a["max_inner"])
            record = solve_alm(prob.sys, prob.weights, prob.mask, K0,
                               inner_method=sol["method"], armijo=armijo, alm=alm,
                               max_outer=a["max_outer"])
        else:
            raise InvalidParameterError(f"unknown solver kind {sol['kind']!r}")
    except (InvalidParameterError, NotStabilizingError) as exc:
        # bad starting point or parameters: configuration error
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    component = None
    acfg = cfg["atlas"]
    atlas = None
    if acfg["enabled"] and prob.mask.n_free <= 5:
        atlas = build_atlas(prob.sys, prob.mask, acfg["box"], acfg["resolution"])
        try:
            component = classify(atlas, prob.mask.project(record.final_K), sys=prob.sys)
        except OutOfAtlasError:
            component = None
        if sol["kind"] == "projection":
            labels = trajectory_labels(atlas, [it.K for it in record.iterates], sys=prob.sys)
            record.component_labels = labels
            jumps, _ = count_jumps(atlas, [it.K for it in record.iterates],
                                   sys=prob.sys, labels=labels)
            record.meta["n_jumps"] = jumps

    doc = {
        "config": cfg,
        "benchmark": prob.label,
        "backend": BACKEND_NAME,
        "component": component,
        "record": record.to_json_dict(),
    }
    out = cfg["out"]
    _atomic_write(out, "run.json", json.dumps(doc, indent=2) + "\n")
    _atomic_write(out, "trajectory.csv", _csv_text(record.csv_header(), record.to_csv_rows()))

    print(f"status: {record.status}")
    print(f"final J: {record.final_cost:.10g}")
    print("final K:")
    print(_fmt_matrix(record.final_K))
    print(f"component: {'unknown' if component is None else component}")
    if "n_jumps" in record.meta:
        print(f"jumps: {record.meta['n_jumps']}")
    if record.status != "converged":
        return EXIT_SOLVER
    return EXIT_OK


def _auto_anchors(prob):
    # interior representatives of the three components of the n=3 chain:
    # the minima themselves, so they stay inside any sampler box that
    # covers the region of interest and remain stabilizing for eps > 0
    if prob.chain_n == 3 and prob.mask.n_free == 3:
        return {
            "D1": np.diag([20.0, 20.0, 20.0]),
            "D2": np.diag([6.06, -3.16, -0.63]),
            "D3": np.diag([6.48, 6.46, 3.02]),
        }
    return {}


def cmd_experiment(cfg):
    prob = build_problem(cfg)
    ecfg = cfg["experiment"]
    anchors = ecfg["anchors"]
    if anchors == "auto":
        anchors = _auto_anchors(prob)
    elif isinstance(anchors, dict):
        parsed = {}
        for name, val in anchors.items():
            arr = np.asarray(val, dtype=np.float64)
            if arr.ndim == 1:
                K = np.zeros((prob.mask.m, prob.mask.p))
                np.fill_diagonal(K, arr)
                parsed[name] = K
            else:
                parsed[name] = arr
        anchors = parsed
    else:
        raise InvalidParameterError("experiment.anchors must be \"auto\" or a name -> gain map")

    eps_values = ecfg["eps_values"]
    if eps_values is None:
        eps_values = [float(cfg["system"]["eps"])] if prob.factory else [None]
    box_arr = np.asarray(ecfg["box"], dtype=np.float64)
    box = tuple(box_arr.ravel()) if box_arr.ndim == 1 else tuple(map(tuple, box_arr))
    jcfg = JumpExperimentConfig(
        trials=ecfg["trials"],
        box=box,
        grid=tuple((float(s), float(b)) for s, b in ecfg["grid"]),
        methods=tuple(ecfg["methods"]),
        eps_values=tuple(eps_values),
        seed=cfg["seed"],
        alpha=ecfg["alpha"],
        stop_tol=ecfg["stop_tol"],
        max_iters=ecfg["max_iters"],
        max_backtracks=ecfg["max_backtracks"],
        resolution=ecfg["resolution"],
        anchors=anchors,
        global_anchor=ecfg["global_anchor"],
    )
    use_factory = prob.factory is not None and eps_values != [None]
    system = prob.factory if use_factory else prob.sys
    weights = prob.weights_factory if use_factory else prob.weights
    report = run_jump_experiment(system, weights, prob.mask, jcfg,
                                 threads=cfg["threads"])
    out = cfg["out"]
    _atomic_write(out, "report.csv", _csv_text(report.csv_header(), report.to_csv_rows()))
    _atomic_write(out, "summary.txt", report.summary_text())
    _atomic_write(out, "summary.json", json.dumps(report.to_json_dict(), indent=2) + "\n")
    sys.stdout.write(report.summary_text())
    return EXIT_OK


def cmd_atlas(cfg):
    prob = build_problem(cfg)
    acfg = cfg["atlas"]
    atlas = build_atlas(prob.sys, prob.mask, acfg["box"], acfg["resolution"])
    out = cfg["out"]
    _atomic_write(out, "atlas.json", json.dumps(atlas_to_json_dict(atlas)) + "\n")
    print(f"components: {atlas.component_count}")
    counts = atlas.component_cell_counts()
    for label, cnt in enumerate(counts, start=1):
        print(f"component {label}: {cnt} cells, volume {cnt * atlas.cell_volume:.6g}")
    if prob.chain_n is not None:
        target = fibonacci(prob.chain_n)
        ok = atlas.component_count >= target
        print(f"F_{prob.chain_n} = {target}, bound satisfied: {'true' if ok else 'false'}")
    if acfg["slice"] is not None:
        sl = acfg["slice"]
        if not isinstance(sl, dict) or set(sl) - {"axes", "values"}:
            raise InvalidParameterError("atlas.slice must be {\"axes\": [i, j], \"values\": {axis: value}}")
        fixed = {int(k): float(v) for k, v in (sl.get("values") or {}).items()}
        xs, ys, slab = atlas_slice(atlas, tuple(sl["axes"]), fixed)
        hdr = ["x"] + [repr(float(v)) for v in ys]
        rows = [[repr(float(xs[i]))] + [str(int(v)) for v in slab[i]] for i in range(len(xs))]
        _atomic_write(out, "slice.csv", _csv_text(hdr, rows))
    return EXIT_OK


def cmd_bench(cfg):
    rows, notes = run_benchmarks()
    text = format_table(rows, notes)
    sys.stdout.write(text)
    if cfg["out"] != ".":
        _atomic_write(cfg["out"], "bench.json", json.dumps({"rows": rows, "notes": notes}, indent=2) + "\n")
    return EXIT_OK


def _build_parser():
    p = argparse.ArgumentParser(
        prog="dlqr",
        description="Structured LQR local search: solvers, component atlases, jump experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", metavar="PATH", help="JSON config file")
        sp.add_argument("--seed", type=int, metavar="U64", help="root RNG seed")
        sp.add_argument("--threads", type=int, metavar="N", help="worker processes")
        sp.add_argument("--out", metavar="DIR", help="output directory")
        sp.add_argument("--benchmark", metavar="NAME",
                        help="built-in system: chain-n3-a, chain-n3-alm, chain-n")
        sp.add_argument("--eps", type=float, metavar="F", help="chain family margin")
        sp.add_argument("--print-config", action="store_true",
                        help="print the resolved config and exit")

    sp_solve = sub.add_parser("solve", help="run one solver from one starting gain")
    common(sp_solve)
    sp_solve.add_argument("--method", choices=["am", "newton", "gd"], help="search direction")
    sp_solve.add_argument("--solver", choices=["projection", "alm"], dest="solver_kind",
                          help="outer strategy")
    sp_solve.add_argument("--sbar", type=float, metavar="F", help="initial Armijo step")
    sp_solve.add_argument("--beta", type=float, metavar="F", help="Armijo shrink factor")
    sp_solve.add_argument("--alpha", type=float, metavar="F", help="Armijo slope fraction")
    sp_solve.add_argument("--k0", metavar="SPEC", help="named gain (D1) or diagonal values (40,40,40)")

    sp_exp = sub.add_parser("experiment", help="batch jump experiment over random starts")
    common(sp_exp)
    sp_exp.add_argument("--method", choices=["am", "newton"], help="solver for all cells")
    sp_exp.add_argument("--sbar", type=float, metavar="F", help="single-cell initial step")
    sp_exp.add_argument("--beta", type=float, metavar="F", help="single-cell shrink factor")
    sp_exp.add_argument("--alpha", type=float, metavar="F", help="Armijo slope fraction")
    sp_exp.add_argument("--trials", type=int, metavar="N", help="trials per cell")
    sp_exp.add_argument("--resolution", type=int, metavar="N", help="atlas cells per axis")
    sp_exp.add_argument("--box", type=_parse_box, metavar="LO:HI", help="sampler box per free entry")

    sp_atlas = sub.add_parser("atlas", help="build and save a component atlas")
    common(sp_atlas)
    sp_atlas.add_argument("--resolution", type=int, metavar="N", help="cells per axis")
    sp_atlas.add_argument("--box", type=_parse_box, metavar="LO:HI", help="box per free entry")
    sp_atlas.add_argument("--n", type=int, metavar="N", help="chain-n order")

    sp_bench = sub.add_parser("bench", help="compare compiled and python kernel backends")
    common(sp_bench)

    return p


def _overrides_from_args(args):
    ov = {}
    simple = {
        "seed": "seed",
        "threads": "threads",
        "out": "out",
        "benchmark": "system.benchmark",
        "eps": "system.eps",
    }
    for attr, dotted in simple.items():
        val = getattr(args, attr, None)
        if val is not None:
            ov[dotted] = val
    if getattr(args, "n", None) is not None:
        ov["system.n"] = args.n
    cmd = args.command
    if cmd == "solve":
        if args.method is not None:
            ov["solver.method"] = args.method
        if args.solver_kind is not None:
            ov["solver.kind"] = args.solver_kind
        if args.sbar is not None:
            ov["solver.armijo.s_bar"] = args.sbar
        if args.beta is not None:
            ov["solver.armijo.beta"] = args.beta
        if args.alpha is not None:
            ov["solver.armijo.alpha"] = args.alpha
        if args.k0 is not None:
            for key, val in _parse_k0(args.k0).items():
                ov[f"k0.{key}"] = val
    elif cmd == "experiment":
        if args.method is not None:
            ov["experiment.methods"] = [args.method]
        if args.sbar is not None or args.beta is not None:
            if args.sbar is None or args.beta is None:
                raise InvalidParameterError("give both --sbar and --beta to override the grid")
            ov["experiment.grid"] = [[args.sbar, args.beta]]
        if args.alpha is not None:
            ov["experiment.alpha"] = args.alpha
        if args.trials is not None:
            ov["experiment.trials"] = args.trials
        if args.resolution is not None:
            ov["experiment.resolution"] = args.resolution
        if args.box is not None:
            ov["experiment.box"] = args.box
    elif cmd == "atlas":
        if args.resolution is not None:
            ov["atlas.resolution"] = args.resolution
        if args.box is not None:
            ov["atlas.box"] = args.box
    return ov


_COMMANDS = {
    "solve": cmd_solve,
    "experiment": cmd_experiment,
    "atlas": cmd_atlas,
    "bench": cmd_bench,
}


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    # argparse reads values like "-60:60" or "-10,5,10" as options; splice
    # them onto their flag
    argv = list(argv)
    i = 0
    while i < len(argv) - 1:
        if argv[i] in ("--box", "--k0"):
            argv[i] = f"{argv[i]}={argv[i + 1]}"
            del argv[i + 1]
        i += 1
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # bad flags are configuration errors; --help stays success
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        cfg = load_config(args.config, _overrides_from_args(args))
    except InvalidParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "print_config", False):
        print(json.dumps(cfg, indent=2))
        return EXIT_OK
    try:
        return _COMMANDS[args.command](cfg)
    except (InvalidParameterError, UnsupportedDimensionError, NotStabilizingError,
            SamplingError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DlqrError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
