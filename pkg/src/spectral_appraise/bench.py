"""Timed comparison of incremental vs dense-eigensolve greedy selection.

Each grid cell draws one seeded Gaussian design matrix, trace-normalizes it,
and runs the same lazy greedy maximization twice: once with gains from a
dense eigensolve per query (the oracle arm) and once through the incremental
rank-1 path.  Both arms must select the identical index sequence; times are
the minimum over repeats to shave off scheduler noise.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericalError
from .objectives import (
    OracleSpectralObjective,
    SpectralObjective,
    density_normalize,
)
from .optimize import Cardinality, greedy_max
from .phi import make_phi

# Refuse cells whose oracle arm would exceed this many k*n*m^3 flop-equivalents.
DEFAULT_WORK_CEILING = 2e13

BENCH_OBJECTIVES = {"vendi": lambda: make_phi("neg_xlogx", t=0.0)}


class SelectionMismatchError(NumericalError):
    """The oracle and incremental arms disagreed on the selected sequence."""


@dataclass
class BenchCell:
    n: int
    m: int
    k_frac: float
    k: int
    oracle_seconds: float
    secular_seconds: float
    speedup: float
    identical: bool
    order: list = field(default_factory=list)

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "k_frac": self.k_frac,
            "k": self.k,
            "oracle_seconds": self.oracle_seconds,
            "secular_seconds": self.secular_seconds,
            "speedup": self.speedup,
            "identical": self.identical,
        }


def _warmup(objective_factory):
    """One tiny selection outside the clock, so one-time costs (kernel
    compilation, allocator growth) never land inside a timed run."""
    rng = np.random.default_rng(0)
    design = density_normalize(rng.standard_normal((6, 3)))
    phi = make_phi("neg_xlogx", t=0.0)
    greedy_max(objective_factory(design, phi), Cardinality(2), lazy=True)


def _timed_selection(objective_factory, k, repeats):
    best = None
    order = None
    for _ in range(repeats):
        objective = objective_factory()
        start = time.perf_counter()
        result = greedy_max(objective, Cardinality(k), lazy=True)
        elapsed = time.perf_counter() - start
        if order is None:
            order = result.order
        elif order != result.order:
            raise SelectionMismatchError(
                "selection changed between repeats of the same arm"
            )
        best = elapsed if best is None else min(best, elapsed)
    return best, order


def run_bench(
    n_list,
    m,
    k_frac_list,
    repeats=3,
    seed=0,
    objective="vendi",
    max_oracle_work=DEFAULT_WORK_CEILING,
):
    """Run the oracle-vs-incremental grid and return a list of BenchCell."""
    if objective not in BENCH_OBJECTIVES:
        raise InvalidArgumentError(
            f"benchmark supports objectives {sorted(BENCH_OBJECTIVES)}, "
            f"got {objective!r}"
        )
    if repeats < 1:
        raise InvalidArgumentError("repeats must be at least 1")
    phi_factory = BENCH_OBJECTIVES[objective]
    _warmup(OracleSpectralObjective)
    _warmup(SpectralObjective)
    cells = []
    for ci, n in enumerate(n_list):
        for cj, k_frac in enumerate(k_frac_list):
            k = max(1, round(k_frac * n))
            work = float(k) * n * float(m) ** 3
            if work > max_oracle_work:
                raise InvalidArgumentError(
                    f"cell n={n}, m={m}, k={k} needs ~{work:.2e} oracle work, "
                    f"above the ceiling {max_oracle_work:.2e}"
                )
            rng = np.random.default_rng([seed, ci, cj])
            design = density_normalize(rng.standard_normal((n, m)))
            phi = phi_factory()
            oracle_t, oracle_order = _timed_selection(
                lambda: OracleSpectralObjective(design, phi), k, repeats
            )
            secular_t, secular_order = _timed_selection(
                lambda: SpectralObjective(design, phi), k, repeats
            )
            identical = oracle_order == secular_order
            if not identical:
                raise SelectionMismatchError(
                    f"cell n={n}, k={k}: oracle selected {oracle_order[:8]}..., "
                    f"incremental selected {secular_order[:8]}..."
                )
            cells.append(
                BenchCell(
                    n=n,
                    m=m,
                    k_frac=k_frac,
                    k=k,
                    oracle_seconds=oracle_t,
                    secular_seconds=secular_t,
                    speedup=oracle_t / secular_t,
                    identical=identical,
                    order=list(oracle_order),
                )
            )
    return cells


def format_table(cells):
    """Fixed-width text table of the benchmark grid."""
    header = (
        f"{'n':>6} {'m':>6} {'k':>6} {'k/n':>6} "
        f"{'oracle_s':>12} {'secular_s':>12} {'speedup':>10} {'identical':>9}"
    )
    lines = [header, "-" * len(header)]
    for c in cells:
        lines.append(
            f"{c.n:>6} {c.m:>6} {c.k:>6} {c.k_frac:>6.3f} "
            f"{c.oracle_seconds:>12.4f} {c.secular_seconds:>12.4f} "
            f"{c.speedup:>10.1f} {str(c.identical):>9}"
        )
    return "\n".join(lines)
