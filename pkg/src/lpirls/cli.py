"""Command-line front end: ``lp-irls {gen,solve,bench,rsp}``.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical or regime failure.
Any subcommand accepts ``--config FILE`` with ``key = value`` lines (keys
are flag names without the leading dashes); flags given on the command
line override the file. ``LP_IRLS_THREADS`` caps the worker threads used
by ``bench``.
"""

import argparse
import csv
import itertools
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import apps, diagnostics, io
from .irls import irls_solve
from .model import (
    BestKTerm,
    ExponentialDecay,
    Fixed,
    IrlsConfig,
    LpIrlsError,
    ResidualQuantile,
    validate_instance,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# Configuration -----------------------------------------------------------------


def read_config_file(path):
    """Parse ``key = value`` lines; blank lines and ``#`` comments are skipped."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            cfg[key.replace("-", "_")] = value
    return cfg


def make_rule(name, eps0=1.0, beta=0.5, fixed_eps=None):
    if name == "fixed":
        if fixed_eps is None:
            raise UsageError("--rule fixed needs --fixed-eps")
        return Fixed(float(fixed_eps))
    if name == "expdecay":
        return ExponentialDecay(float(eps0), float(beta))
    if name == "quantile":
        return ResidualQuantile()
    if name == "bestk":
        return BestKTerm()
    raise UsageError(f"unknown rule {name!r}")


def config_from_args(args):
    return IrlsConfig(
        p=args.p,
        smoothing=make_rule(args.rule, args.eps0, args.beta, args.fixed_eps),
        alpha=args.alpha,
        max_iters=args.max_iters,
        stop_rel_change=args.tol,
        eps_floor=args.eps_floor,
        init=args.init,
        wls_method=args.wls,
    )


def thread_count():
    env = os.environ.get("LP_IRLS_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError("LP_IRLS_THREADS must be a positive integer") from None
        if n < 1:
            raise UsageError("LP_IRLS_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


# Subcommands ---------------------------------------------------------------------


def generate(kind, params, seed):
    """Dispatch to a generator by name (``rr``, ``slr`` or ``rpr``)."""
    if kind == "rr":
        return apps.gen_rr(int(params["m"]), int(params["n"]), int(params["k"]),
                           float(params.get("sigma", 0.0)), seed)
    if kind == "slr":
        return apps.gen_slr(int(params["m"]), int(params["n"]), float(params.get("sigma", 0.0)),
                            float(params.get("shuffle_ratio", 0.5)), seed)
    if kind == "rpr":
        return apps.gen_rpr(int(params["m"]), int(params["n"]), int(params["num_positive_sign"]), seed)
    raise UsageError(f"unknown generator {kind!r}")


def cmd_gen(args):
    params = {"m": args.m, "n": args.n, "k": args.k, "sigma": args.sigma,
              "shuffle_ratio": args.shuffle_ratio, "num_positive_sign": args.num_positive_sign}
    needed = {"rr": ("m", "n", "k"), "slr": ("m", "n"), "rpr": ("m", "n", "num_positive_sign")}
    missing = [key for key in needed.get(args.generator, ()) if params[key] is None]
    if missing:
        raise UsageError(f"gen {args.generator} needs " + ", ".join("--" + k.replace("_", "-") for k in missing))
    try:
        inst = generate(args.generator, params, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    paths = io.save_instance(args.out, inst)
    print(f"wrote {paths['A']} {paths['y']} {paths['meta']}")
    return EXIT_OK


def cmd_solve(args):
    inst = io.load_instance(args.instance)
    problems = validate_instance(inst)
    if problems:
        raise UsageError(f"{args.instance}: " + "; ".join(problems))
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = irls_solve(inst, cfg)
    if args.out:
        io.write_trace(args.out, res.trace)
        x_path = args.x_out or os.path.splitext(args.out)[0] + ".xhat.txt"
        io.write_matrix(x_path, res.x_hat)
    last = res.trace[-1]
    msg = f"stop={res.stop_reason} iterations={res.iterations} eps={io.fmt(last.eps)}"
    if last.rel_error is not None:
        msg += f" rel_error={io.fmt(last.rel_error)}"
    print(msg)
    return EXIT_OK


def _load_matrix(path):
    stem_a = io.instance_paths(path)["A"]
    if os.path.exists(stem_a):
        return io.read_matrix(stem_a)
    return io.read_matrix(path)


def cmd_rsp(args):
    if args.mode == "gaussian-condition":
        if None in (args.m, args.n, args.k):
            raise UsageError("gaussian-condition needs --m, --n and --k")
        holds = diagnostics.gaussian_rsp_condition(args.m, args.n, args.k, args.eta, args.delta)
        lhs, rhs = diagnostics.gaussian_rsp_sides(args.m, args.n, args.k, args.eta, args.delta)
        out = {"mode": args.mode, "m": args.m, "n": args.n, "k": args.k, "eta": args.eta,
               "delta": args.delta, "lhs": lhs, "rhs": rhs, "holds": holds}
        print(f"condition_holds={holds} lhs={io.fmt(lhs)} rhs={io.fmt(rhs)}")
    else:
        if args.instance is None or args.k is None:
            raise UsageError(f"rsp {args.mode} needs an instance path and --k")
        a = _load_matrix(args.instance)
        if args.mode == "exact":
            try:
                rep = diagnostics.rsp_exact(a, args.p, args.k)
            except diagnostics.DimensionTooLarge as exc:
                raise diagnostics.DimensionTooLarge(f"{exc}; use --mode randomized") from None
        else:
            rep = diagnostics.rsp_randomized_lower_bound(a, args.p, args.k, args.samples, seed=args.seed)
        out = rep.to_dict()
        eta = "inf (range space property fails at this order)" if rep.infinite else io.fmt(rep.eta)
        print(f"eta={eta} method={rep.method} support={list(rep.witness_support)}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(out, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


# Benchmark harness -------------------------------------------------------------

BENCH_FIELDS = ["trial", "seed", "method", "status", "final_rel_error", "iterations", "wall_ms"]
SOLVER_KEYS = {"method", "label", "p", "rule", "alpha", "eps0", "beta", "fixed_eps", "max_iters",
               "tol", "eps_floor", "init", "wls"}


def load_bench_spec(path):
    """Read and check a benchmark spec (JSON).

    Keys: ``name``, ``generator`` (``type`` plus parameters; list-valued
    parameters are swept as a grid), ``solvers`` (each with ``method`` in
    ``irls``, ``ls``, ``subgradient``, ``brute_force`` and solver options),
    ``num_trials``, ``seed_base`` and optionally ``success_tol``.
    """
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    gen = spec.get("generator")
    if not isinstance(gen, dict) or gen.get("type") not in ("rr", "slr", "rpr"):
        raise UsageError("spec.generator.type must be rr, slr or rpr")
    solvers = spec.get("solvers") or []
    if not solvers:
        raise UsageError("spec needs a non-empty solver list")
    for s in solvers:
        if s.get("method") not in ("irls", "ls", "subgradient", "brute_force"):
            raise UsageError(f"unknown solver method {s.get('method')!r}")
        extra = set(s) - SOLVER_KEYS
        if extra:
            raise UsageError(f"unknown solver keys {sorted(extra)}")
    if int(spec.get("num_trials", 1)) < 1:
        raise UsageError("num_trials must be at least 1")
    return spec


def solver_label(s):
    if "label" in s:
        return s["label"]
    if s["method"] == "irls":
        return f"irls_p{s.get('p', 1.0):g}_{s.get('rule', 'bestk')}"
    return s["method"]


def bench_cells(gen):
    params = {k: v for k, v in gen.items() if k != "type"}
    keys = sorted(params)
    grids = [v if isinstance(v, list) else [v] for v in (params[k] for k in keys)]
    return keys, [dict(zip(keys, combo)) for combo in itertools.product(*grids)]


def run_solver(inst, s, kind=None):
    method = s["method"]
    if method == "irls":
        alpha = s.get("alpha")
        if alpha is None and kind == "rpr":
            # either sign class can play the outliers; take the smaller one
            alpha = min(inst.k, inst.m - inst.k)
        cfg = IrlsConfig(
            p=float(s.get("p", 1.0)),
            smoothing=make_rule(s.get("rule", "bestk"), s.get("eps0", 1.0), s.get("beta", 0.5), s.get("fixed_eps")),
            alpha=alpha,
            max_iters=int(s.get("max_iters", 50)),
            stop_rel_change=float(s.get("tol", 1e-15)),
            eps_floor=float(s.get("eps_floor", 1e-16)),
            init=s.get("init", "unit"),
            wls_method=s.get("wls", "qr"),
        )
        res = irls_solve(inst, cfg)
        return res.x_hat, res.iterations
    if method == "ls":
        return apps.least_squares(inst.a_matrix, inst.y), 1
    if method == "subgradient":
        iters = int(s.get("max_iters", 10000))
        return apps.subgradient_baseline(inst, iters), iters
    return diagnostics.brute_force_lp_min(inst, float(s.get("p", 1.0))), 1


def run_trial(kind, cell, solvers, trial, seed):
    rows = []
    inst = generate(kind, cell, seed)
    for j, s in enumerate(solvers):
        start = time.perf_counter()
        try:
            x_hat, iters = run_solver(inst, s, kind)
            err = apps.relative_error(x_hat, inst.x_star, up_to_sign=(kind == "rpr"))
            status = "ok" if math.isfinite(err) else "nonfinite"
        except (LpIrlsError, ValueError, np.linalg.LinAlgError) as exc:
            err, iters, status = math.nan, 0, type(exc).__name__
        wall = (time.perf_counter() - start) * 1e3
        rows.append((j, {"trial": trial, "seed": seed, "method": solver_label(s), "status": status,
                         "final_rel_error": err, "iterations": iters, "wall_ms": wall}))
    return rows


def summarize(rows, keys, labels, success_tol):
    out = []
    for cell_idx, cell in enumerate(rows):
        for label in labels:
            sel = [r for r in cell["rows"] if r["method"] == label]
            errs = np.array([r["final_rel_error"] for r in sel if r["status"] == "ok"])
            qs = np.quantile(errs, [0.1, 0.25, 0.5, 0.75, 0.9]) if errs.size else [math.nan] * 5
            out.append({
                **{k: cell["params"][k] for k in keys}, "method": label, "trials": len(sel),
                "ok": int(errs.size),
                "success_rate": float(np.mean(errs < success_tol)) if errs.size else math.nan,
                "q10": qs[0], "q25": qs[1], "median": qs[2], "q75": qs[3], "q90": qs[4],
                "median_iterations": float(np.median([r["iterations"] for r in sel])),
            })
    return out


def _cell(v):
    if isinstance(v, float):
        return io.fmt(v)
    return v


def write_rows(path, fields, rows):
    with open(path, "w", encoding="ascii", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r[k]) for k in fields})


def cmd_bench(args):
    spec = load_bench_spec(args.spec)
    kind = spec["generator"]["type"]
    keys, cells = bench_cells(spec["generator"])
    solvers = spec["solvers"]
    trials = args.trials if args.trials is not None else int(spec.get("num_trials", 1))
    seed_base = args.seed if args.seed is not None else int(spec.get("seed_base", 0))
    jobs = [(ci, t) for ci in range(len(cells)) for t in range(trials)]

    def job(item):
        ci, t = item
        return ci, t, run_trial(kind, cells[ci], solvers, t, seed_base + t)

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(job, jobs))
    # deterministic order: cell, trial, solver position
    results.sort(key=lambda item: (item[0], item[1]))
    flat, per_cell = [], [{"params": c, "rows": []} for c in cells]
    for ci, _, rows in results:
        for _, r in sorted(rows, key=lambda jr: jr[0]):
            row = {**cells[ci], **r}
            flat.append(row)
            per_cell[ci]["rows"].append(row)

    out = args.out or os.path.splitext(args.spec)[0] + ".results.csv"
    write_rows(out, keys + BENCH_FIELDS, flat)
    summary = summarize(per_cell, keys, [solver_label(s) for s in solvers],
                        float(spec.get("success_tol", 1e-5)))
    summary_path = os.path.splitext(out)[0] + ".summary.csv"
    write_rows(summary_path, keys + ["method", "trials", "ok", "success_rate", "q10", "q25",
                                     "median", "q75", "q90", "median_iterations"], summary)
    print(f"wrote {out} ({len(flat)} rows) and {summary_path}")
    return EXIT_OK


# Parser ------------------------------------------------------------------------


def _solver_flags(p):
    p.add_argument("--p", type=float, default=1.0, help="exponent in [0, 1]")
    p.add_argument("--alpha", type=int, default=None, help="sparsity hyper-parameter (default: instance k)")
    p.add_argument("--rule", choices=["fixed", "expdecay", "quantile", "bestk"], default="bestk")
    p.add_argument("--eps0", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--fixed-eps", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-15, help="relative-change stopping tolerance")
    p.add_argument("--eps-floor", type=float, default=1e-16)
    p.add_argument("--init", choices=["unit", "zero"], default="unit")
    p.add_argument("--wls", choices=["qr", "normal"], default="qr", help="inner least-squares method")


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", default=None, help="key=value file; flags override it")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default=None)

    parser = _Parser(prog="lp-irls", description="Robust l_p regression by IRLS.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate a synthetic instance")
    g.add_argument("--generator", choices=["rr", "slr", "rpr"], default="rr")
    g.add_argument("--m", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--sigma", type=float, default=0.0)
    g.add_argument("--shuffle-ratio", type=float, default=0.5)
    g.add_argument("--num-positive-sign", type=int)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", parents=[common], help="run IRLS and write the trace CSV")
    s.add_argument("instance", help="instance stem (STEM.A.txt, STEM.y.txt, STEM.json) or [A|y] matrix file")
    _solver_flags(s)
    s.add_argument("--x-out", default=None, help="where to write x_hat (default: next to --out)")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", parents=[common], help="run a seeded benchmark from a JSON spec")
    b.add_argument("spec")
    b.add_argument("--trials", type=int, default=None, help="override num_trials")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("rsp", parents=[common], help="range-space-property diagnostics")
    r.add_argument("instance", nargs="?", default=None)
    r.add_argument("--mode", choices=["exact", "randomized", "gaussian-condition"], default="exact")
    r.add_argument("--p", type=float, default=1.0)
    r.add_argument("--k", type=int, default=None)
    r.add_argument("--samples", type=int, default=10000)
    r.add_argument("--m", type=int)
    r.add_argument("--n", type=int)
    r.add_argument("--eta", type=float, default=0.5)
    r.add_argument("--delta", type=float, default=0.01)
    r.set_defaults(func=cmd_rsp)
    return parser, sub


def parse_args(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config_file(args.config)
        subparser = sub.choices[args.command]
        known = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, value in cfg.items():
            if key not in known or key in ("config", "func", "help"):
                raise UsageError(f"{args.config}: unknown key {key!r}")
            action = known[key]
            defaults[key] = action.type(value) if action.type else value
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if args.seed is None and args.command in ("gen", "rsp"):
        args.seed = 0
    return args


def main(argv=None):
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LpIrlsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
