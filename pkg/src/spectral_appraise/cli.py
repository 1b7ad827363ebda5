"""Command-line frontend: subset selection, scoring, benchmark, verification.

Exit codes: 0 success, 1 verification failure, 2 invalid arguments,
3 data format error, 4 numerical failure, 5 benchmark selection mismatch.
Reported objective values subtract the empty-set baseline, so the empty
subset always scores 0 (this matters for the log-determinant family, whose
raw empty value is m*log(t)).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import bench as bench_mod
from . import dataio
from .errors import (
    DataFormatError,
    InvalidArgumentError,
    NumericalError,
)
from .classic import FacilityLocation, build_similarity
from .objectives import SpectralObjective, density_normalize
from .optimize import (
    Cardinality,
    PartitionMatroid,
    greedy_max,
    heuristic_greedy_min,
    query_thread_count,
    stochastic_greedy,
    stratified_random,
    SelectionResult,
)
from .phi import make_phi
from .verify import run_battery

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4
EXIT_MISMATCH = 5

# CLI objective name -> (phi kind, default params) or facility location.
SPECTRAL_OBJECTIVES = {
    "vendi": ("neg_xlogx", {"t": 0.0}),
    "dpp": ("log_shift", {"t": 1e-3}),
    "power": ("power", {"eta": 0.5}),
    "plaw": ("powerlaw", {"alpha": 1.0, "beta": 1.0}),
    "satexp": ("satexp", {}),
    "ratio": ("ratio", {"alpha": 1.0}),
}

NORMALIZE_ALIASES = {
    "none": "none",
    "trace1": "density_trace1",
    "emax": "monotone_e_lambda_max",
}


def _parse_phi_params(pairs):
    out = {}
    for raw in pairs or ():
        if "=" not in raw:
            raise InvalidArgumentError(
                f"--phi-param expects NAME=VALUE, got {raw!r}"
            )
        key, val = raw.split("=", 1)
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise InvalidArgumentError(
                f"--phi-param {key.strip()} needs a numeric value, got {val!r}"
            ) from exc
    return out


def _build_objective(args, design):
    """Objective instance plus a config echo for the output document."""
    name = args.objective
    if name == "fl":
        if getattr(args, "sim_file", None):
            similarity = dataio.read_similarity(args.sim_file)
            if similarity.n != design.shape[0]:
                raise InvalidArgumentError(
                    "similarity file and design matrix disagree on n"
                )
            sim_config = {"sim_file": args.sim_file}
        else:
            similarity = build_similarity(
                design, kernel=args.kernel, top_k=args.top_k, sigma=args.rbf_sigma
            )
            sim_config = {
                "kernel": args.kernel,
                "top_k": args.top_k,
                "sigma": args.rbf_sigma,
            }
        return FacilityLocation(similarity), {"objective": "fl", **sim_config}
    if name not in SPECTRAL_OBJECTIVES:
        raise InvalidArgumentError(f"unknown objective {name!r}")
    kind, defaults = SPECTRAL_OBJECTIVES[name]
    params = dict(defaults)
    params.update(_parse_phi_params(getattr(args, "phi_param", None)))
    phi = make_phi(kind, **params)
    mode = NORMALIZE_ALIASES[args.normalize]
    normalized = density_normalize(design, mode) if mode != "none" else design
    objective = SpectralObjective(normalized, phi)
    config = {
        "objective": name,
        "phi_kind": kind,
        "phi_params": params,
        "normalize": args.normalize,
    }
    return objective, config


def _selection_config(args, extra):
    config = dict(extra)
    config.update(
        {
            "data": args.data,
            "mode": args.mode,
            "k": args.k,
            "quotas_per_class": args.quotas_per_class,
            "epsilon": args.epsilon,
            "seed": args.seed,
        }
    )
    return config


def _committed_walk(objective, order):
    """Commit a fixed order, recording gains, and wrap as a SelectionResult."""
    gains = []
    base = objective.eval()
    for i in order:
        gains.append(objective.gain(int(i)))
        objective.commit(int(i))
    return SelectionResult(
        [int(i) for i in order], gains, base + math.fsum(gains), len(gains)
    )


def cmd_select(args):
    design = dataio.load_design(args.data)
    n = design.shape[0]
    labels = None
    if args.labels:
        labels = dataio.read_labels(args.labels, n=n)

    needs_matroid = args.quotas_per_class is not None
    if args.mode in ("stratified",) and labels is None:
        raise InvalidArgumentError("--mode stratified requires --labels")
    if needs_matroid and labels is None:
        raise InvalidArgumentError("--quotas-per-class requires --labels")
    if not needs_matroid and args.k is None and args.mode != "stratified":
        raise InvalidArgumentError("one of --k or --quotas-per-class is required")

    objective, extra = _build_objective(args, design)
    threads = query_thread_count()

    prefix = None
    if args.prefix:
        prefix = [int(i) for i in dataio.read_indices(args.prefix)]

    start = time.perf_counter()
    if args.mode in ("max", "min"):
        if needs_matroid:
            quotas = {int(c): int(args.quotas_per_class) for c in set(labels.tolist())}
            constraint = PartitionMatroid.from_arrays(labels, quotas)
        else:
            constraint = Cardinality(args.k)
        if args.mode == "max":
            if prefix is not None:
                raise InvalidArgumentError("--prefix only applies to --mode min")
            result = greedy_max(objective, constraint, lazy=True, threads=threads)
        else:
            result = heuristic_greedy_min(
                objective, constraint, prefix=prefix, threads=threads
            )
    elif args.mode == "stochastic":
        if needs_matroid:
            raise InvalidArgumentError(
                "stochastic greedy supports only cardinality constraints"
            )
        result = stochastic_greedy(
            objective, args.k, args.epsilon, seed=args.seed, threads=threads
        )
    elif args.mode == "random":
        if args.k is None:
            raise InvalidArgumentError("--mode random requires --k")
        if not 1 <= args.k <= n:
            raise InvalidArgumentError(f"--k must be in [1, {n}]")
        rng = np.random.default_rng(args.seed)
        order = rng.permutation(n)[: args.k]
        result = _committed_walk(objective, order)
    elif args.mode == "stratified":
        if args.quotas_per_class is None:
            raise InvalidArgumentError("--mode stratified requires --quotas-per-class")
        quotas = {int(c): int(args.quotas_per_class) for c in set(labels.tolist())}
        chosen = stratified_random(labels, quotas, seed=args.seed)
        result = _committed_walk(objective, chosen)
    else:
        raise InvalidArgumentError(f"unknown mode {args.mode!r}")
    wall = time.perf_counter() - start

    document = {
        "order": [int(i) for i in result.order],
        "gains": [float(g) for g in result.gains],
        "final_value": float(result.final_value - objective.empty_value()),
        "objective": args.objective,
        "config": _selection_config(args, extra),
        "wall_seconds": wall,
    }
    _emit(document, args.out)
    return EXIT_OK


def cmd_score(args):
    design = dataio.load_design(args.data)
    indices = [int(i) for i in dataio.read_indices(args.subset)]
    if len(set(indices)) != len(indices):
        raise InvalidArgumentError("subset file contains duplicate indices")
    for i in indices:
        if not 0 <= i < design.shape[0]:
            raise InvalidArgumentError(f"subset index {i} outside the ground set")

    objective, extra = _build_objective(args, design)
    for i in indices:
        objective.commit(i)
    value = objective.eval() - objective.empty_value()

    # The score is a set function: recommitting in sorted order must agree.
    recheck = _build_objective(args, design)[0]
    for i in sorted(indices):
        recheck.commit(i)
    other = recheck.eval() - recheck.empty_value()
    if abs(other - value) > 1e-8 * max(1.0, abs(value)):
        raise NumericalError(
            f"score depends on commit order ({value!r} vs {other!r}) "
            "during the set-function audit"
        )

    document = {"value": float(value), "config": _selection_config_score(args, extra)}
    if isinstance(objective, SpectralObjective):
        summary = objective.spectral_summary()
        summary["raw_value"] = float(objective.eval())
        document["per_eigenvalue_summary"] = summary
    _emit(document, args.out)
    return EXIT_OK


def _selection_config_score(args, extra):
    config = dict(extra)
    config.update({"data": args.data, "subset": args.subset})
    return config


def cmd_bench(args):
    n_list = [int(x) for x in args.n.split(",") if x]
    k_fracs = [float(x) for x in args.k_frac.split(",") if x]
    if not n_list or not k_fracs:
        raise InvalidArgumentError("--n and --k-frac need at least one value each")
    cells = bench_mod.run_bench(
        n_list,
        args.m,
        k_fracs,
        repeats=args.repeats,
        seed=args.seed,
        objective=args.objective,
        max_oracle_work=args.max_oracle_work,
    )
    print(bench_mod.format_table(cells))
    document = {
        "m": args.m,
        "repeats": args.repeats,
        "seed": args.seed,
        "objective": args.objective,
        "cells": [c.to_dict() for c in cells],
    }
    if args.out:
        _emit(document, args.out)
    else:
        print(json.dumps(document, indent=2))
    return EXIT_OK


def cmd_verify(_args):
    results = run_battery()
    failed = []
    for item in results:
        status = "PASS" if item.passed else "FAIL"
        print(f"{status}  {item.name}: {item.detail}")
        if not item.passed:
            failed.append(item.name)
    if failed:
        print(f"failed items: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def _emit(document, out):
    text = json.dumps(document, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _add_objective_flags(parser):
    parser.add_argument(
        "--objective",
        required=True,
        choices=sorted(SPECTRAL_OBJECTIVES) + ["fl"],
    )
    parser.add_argument(
        "--phi-param",
        action="append",
        metavar="NAME=VALUE",
        help="override a phi parameter (repeatable), e.g. --phi-param t=0.01",
    )
    parser.add_argument(
        "--normalize",
        choices=sorted(NORMALIZE_ALIASES),
        default="trace1",
        help="design normalization for spectral objectives (default trace1)",
    )
    parser.add_argument("--kernel", choices=("dot", "cosine", "rbf"), default="rbf")
    parser.add_argument("--rbf-sigma", type=float, default=1.0)
    parser.add_argument("--top-k", type=int, default=256)
    parser.add_argument("--sim-file", help="load a SIM1 container instead of a kernel")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spectral-appraise",
        description="Appraise and select data subsets with spectral set objectives.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sel = sub.add_parser("select", help="choose a subset under a constraint")
    p_sel.add_argument("--data", required=True)
    _add_objective_flags(p_sel)
    p_sel.add_argument(
        "--mode",
        choices=("max", "min", "stochastic", "random", "stratified"),
        default="max",
    )
    p_sel.add_argument("--k", type=int)
    p_sel.add_argument("--quotas-per-class", type=int)
    p_sel.add_argument("--epsilon", type=float, default=0.1)
    p_sel.add_argument("--prefix", help="file of seed indices for --mode min")
    p_sel.add_argument("--seed", type=int, default=0)
    p_sel.add_argument("--labels", help="newline-delimited integer class labels")
    p_sel.add_argument("--out", help="write the result JSON here (default stdout)")
    p_sel.set_defaults(func=cmd_select)

    p_score = sub.add_parser("score", help="evaluate an existing subset")
    p_score.add_argument("--data", required=True)
    p_score.add_argument("--subset", required=True, help="file of indices")
    _add_objective_flags(p_score)
    p_score.add_argument("--out")
    p_score.set_defaults(func=cmd_score)

    p_bench = sub.add_parser(
        "bench", help="time incremental vs dense-oracle greedy selection"
    )
    p_bench.add_argument("--n", required=True, help="comma list of ground-set sizes")
    p_bench.add_argument("--m", type=int, required=True)
    p_bench.add_argument(
        "--k-frac", required=True, help="comma list of selected fractions"
    )
    p_bench.add_argument("--repeats", type=int, default=3)
    p_bench.add_argument("--objective", default="vendi")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument(
        "--max-oracle-work",
        type=float,
        default=bench_mod.DEFAULT_WORK_CEILING,
        help="refuse cells whose k*n*m^3 estimate exceeds this",
    )
    p_bench.add_argument("--out")
    p_bench.set_defaults(func=cmd_bench)

    p_verify = sub.add_parser("verify", help="run the built-in verification battery")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches the invalid-argument code
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return args.func(args)
    except bench_mod.SelectionMismatchError as exc:
        print(f"error (selection mismatch): {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except InvalidArgumentError as exc:
        print(f"error (invalid argument): {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DataFormatError as exc:
        print(f"error (data format): {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error (numerical failure): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"error (data format): {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
