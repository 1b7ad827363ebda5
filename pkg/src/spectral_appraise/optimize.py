"""Constraint-aware greedy selection over incremental set objectives.

Objectives are duck-typed: they expose ``n``, ``eval()``, ``gain(i)``,
``commit(i)``, ``reset()`` and ``copy()``.  Gains within one step are
read-only against a frozen objective, so they may be dispatched to a thread
pool; the commit at the end of a step is exclusive.

Gains that differ by less than NEAR_TIE_EPS*(1 + |gain|) are treated as
equal and resolved toward the lowest index, so floating-point jitter between
the incremental and dense evaluation paths cannot flip a selection.
"""

from __future__ import annotations

import heapq
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import InvalidArgumentError

NEAR_TIE_EPS = 1e-12

THREADS_ENV = "SPECTRAL_APPRAISE_THREADS"


def query_thread_count():
    """Gain-query parallelism cap: the env override or the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            count = int(raw)
        except ValueError as exc:
            raise InvalidArgumentError(
                f"{THREADS_ENV} must be an integer, got {raw!r}"
            ) from exc
        if count < 1:
            raise InvalidArgumentError(f"{THREADS_ENV} must be at least 1")
        return count
    return os.cpu_count() or 1


def _batch_gains(objective, candidates, threads):
    if threads > 1 and len(candidates) > 8:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(objective.gain, candidates))
    return [objective.gain(c) for c in candidates]


@dataclass(frozen=True)
class Cardinality:
    """At most k selected elements."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise InvalidArgumentError("cardinality bound must be at least 1")


@dataclass(frozen=True)
class PartitionMatroid:
    """At most quota[c] elements from each block {i : labels[i] == c}."""

    labels: tuple
    quotas: dict

    @staticmethod
    def from_arrays(labels, quotas):
        labels = tuple(int(x) for x in np.asarray(labels).ravel())
        quotas = {int(c): int(q) for c, q in dict(quotas).items()}
        if any(q < 0 for q in quotas.values()):
            raise InvalidArgumentError("quotas must be nonnegative")
        missing = set(labels) - set(quotas)
        if missing:
            raise InvalidArgumentError(
                f"no quota given for classes {sorted(missing)}"
            )
        return PartitionMatroid(labels, quotas)

    @property
    def capacity(self):
        return sum(min(q, sum(1 for l in self.labels if l == c))
                   for c, q in self.quotas.items())


class _ConstraintTracker:
    """Running feasibility bookkeeping for one selection run."""

    def __init__(self, constraint, n):
        self.constraint = constraint
        self.size = 0
        if isinstance(constraint, Cardinality):
            self.limit = constraint.k
            self.counts = None
        elif isinstance(constraint, PartitionMatroid):
            if len(constraint.labels) != n:
                raise InvalidArgumentError(
                    "partition labels must cover the whole ground set"
                )
            self.limit = constraint.capacity
            self.counts = dict.fromkeys(constraint.quotas, 0)
        else:
            raise InvalidArgumentError(f"unknown constraint {constraint!r}")
        if self.limit < 1:
            raise InvalidArgumentError("constraint admits no element")

    def feasible(self, index):
        if self.size >= self.limit:
            return False
        if self.counts is None:
            return True
        label = self.constraint.labels[index]
        return self.counts[label] < self.constraint.quotas[label]

    def block_exhausted(self, index):
        """True when this element can never become feasible again."""
        if self.counts is None:
            return False
        label = self.constraint.labels[index]
        return self.counts[label] >= self.constraint.quotas[label]

    def add(self, index):
        self.size += 1
        if self.counts is not None:
            self.counts[self.constraint.labels[index]] += 1

    @property
    def saturated(self):
        return self.size >= self.limit


@dataclass
class SelectionResult:
    """Ordered selection with per-step gains and run provenance."""

    order: list
    gains: list
    final_value: float
    evaluations: int
    seed: int | None = None
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "order": [int(i) for i in self.order],
            "gains": [float(g) for g in self.gains],
            "final_value": float(self.final_value),
            "evaluations": int(self.evaluations),
            "seed": self.seed,
            "config": self.config,
        }


def _scan_best(pairs, minimize=False):
    """Index-ascending scan with near-tie tolerance; lowest index wins ties."""
    best_i = None
    best_g = None
    for i, g in pairs:
        if best_i is None:
            best_i, best_g = i, g
            continue
        margin = NEAR_TIE_EPS * (1.0 + abs(g))
        better = (g < best_g - margin) if minimize else (g > best_g + margin)
        if better:
            best_i, best_g = i, g
    return best_i, best_g


def greedy_max(objective, constraint, lazy=True, threads=1):
    """Greedy maximization under a cardinality or partition constraint.

    The lazy variant keeps stale gains in a max-heap; a stale bound is an
    upper bound for submodular objectives, so refreshing entries until the
    top is fresh reproduces the eager selection exactly (near-ties are
    re-refreshed and resolved toward the lowest index).
    """
    tracker = _ConstraintTracker(constraint, objective.n)
    run = greedy_lazy if lazy else greedy_eager
    return run(objective, tracker, threads)


def greedy_eager(objective, tracker, threads=1):
    order, gains = [], []
    evaluations = 0
    base = objective.eval()
    selected = set()
    while not tracker.saturated:
        candidates = [
            i for i in range(objective.n)
            if i not in selected and tracker.feasible(i)
        ]
        if not candidates:
            break
        values = _batch_gains(objective, candidates, threads)
        evaluations += len(candidates)
        best_i, best_g = _scan_best(zip(candidates, values))
        objective.commit(best_i)
        tracker.add(best_i)
        selected.add(best_i)
        order.append(best_i)
        gains.append(best_g)
    return SelectionResult(order, gains, base + math.fsum(gains), evaluations)


def greedy_lazy(objective, tracker, threads=1):
    order, gains = [], []
    base = objective.eval()
    n = objective.n
    candidates = list(range(n))
    values = _batch_gains(objective, candidates, threads)
    evaluations = n
    step = 0
    # Heap entries: (-gain, index, step the gain was computed at).
    heap = [(-g, i, 0) for i, g in zip(candidates, values)]
    heapq.heapify(heap)

    while not tracker.saturated and heap:
        champion = None
        while heap:
            neg_g, i, tag = heapq.heappop(heap)
            if tracker.block_exhausted(i) or not tracker.feasible(i):
                continue
            if tag == step:
                champion = (i, -neg_g)
                break
            g = objective.gain(i)
            evaluations += 1
            heapq.heappush(heap, (-g, i, step))
        if champion is None:
            break

        # Anything whose (upper-bound) gain is within the near-tie band of
        # the champion must be refreshed so ties resolve by index exactly as
        # in the eager scan.
        best_i, best_g = champion
        margin = 4.0 * NEAR_TIE_EPS * (1.0 + abs(best_g))
        contenders = [champion]
        spilled = []
        while heap and -heap[0][0] >= best_g - margin:
            neg_g, i, tag = heapq.heappop(heap)
            if tracker.block_exhausted(i) or not tracker.feasible(i):
                continue
            g = -neg_g
            if tag != step:
                g = objective.gain(i)
                evaluations += 1
            contenders.append((i, g))
            spilled.append((i, g))
        contenders.sort()
        winner_i, winner_g = _scan_best(contenders)
        for i, g in spilled:
            if i != winner_i:
                heapq.heappush(heap, (-g, i, step))
        if winner_i != best_i:
            heapq.heappush(heap, (-best_g, best_i, step))

        objective.commit(winner_i)
        tracker.add(winner_i)
        order.append(winner_i)
        gains.append(winner_g)
        step += 1
    return SelectionResult(order, gains, base + math.fsum(gains), evaluations)


def stochastic_greedy(objective, k, epsilon, seed=0, threads=1):
    """Cardinality-constrained greedy over random candidate batches.

    Each step draws ceil((n/k) * ln(1/epsilon)) unselected candidates
    without replacement (capped at what remains) and takes the best;
    deterministic for a fixed seed.
    """
    if not 0.0 < epsilon < 1.0:
        raise InvalidArgumentError("epsilon must lie strictly between 0 and 1")
    if k < 1:
        raise InvalidArgumentError("k must be at least 1")
    rng = np.random.default_rng(seed)
    n = objective.n
    sample_size = math.ceil((n / k) * math.log(1.0 / epsilon))
    remaining = list(range(n))
    order, gains = [], []
    base = objective.eval()
    evaluations = 0
    for _ in range(min(k, n)):
        take = min(sample_size, len(remaining))
        batch = sorted(rng.choice(len(remaining), size=take, replace=False))
        candidates = [remaining[j] for j in batch]
        values = _batch_gains(objective, candidates, threads)
        evaluations += len(candidates)
        best_i, best_g = _scan_best(zip(candidates, values))
        objective.commit(best_i)
        remaining.remove(best_i)
        order.append(best_i)
        gains.append(best_g)
    return SelectionResult(
        order, gains, base + math.fsum(gains), evaluations, seed=seed
    )


def heuristic_greedy_min(objective, constraint, prefix=None, threads=1):
    """Fill a feasible set by repeatedly adding the smallest-gain element.

    Useful for building deliberately low-value subsets quickly; it carries
    no approximation guarantee.  ``prefix`` seeds the selection (it is
    committed in the given order and must itself be feasible); a prefix
    already at capacity comes back unchanged.
    """
    tracker = _ConstraintTracker(constraint, objective.n)
    order, gains = [], []
    base = objective.eval()
    evaluations = 0
    selected = set()
    for raw in prefix if prefix is not None else ():
        i = int(raw)
        if not 0 <= i < objective.n:
            raise InvalidArgumentError(f"prefix index {i} outside the ground set")
        if i in selected or not tracker.feasible(i):
            raise InvalidArgumentError("prefix is infeasible under the constraint")
        g = objective.gain(i)
        evaluations += 1
        objective.commit(i)
        tracker.add(i)
        selected.add(i)
        order.append(i)
        gains.append(g)
    while not tracker.saturated:
        candidates = [
            i for i in range(objective.n)
            if i not in selected and tracker.feasible(i)
        ]
        if not candidates:
            break
        values = _batch_gains(objective, candidates, threads)
        evaluations += len(candidates)
        best_i, best_g = _scan_best(zip(candidates, values), minimize=True)
        objective.commit(best_i)
        tracker.add(best_i)
        selected.add(best_i)
        order.append(best_i)
        gains.append(best_g)
    return SelectionResult(order, gains, base + math.fsum(gains), evaluations)


def stratified_random(labels, quotas, seed=0):
    """Uniform without-replacement sample of quota[c] elements per class."""
    labels = np.asarray(labels)
    quotas = {int(c): int(q) for c, q in dict(quotas).items()}
    rng = np.random.default_rng(seed)
    picked = []
    for cls in sorted(quotas):
        members = np.flatnonzero(labels == cls)
        if quotas[cls] > members.size:
            raise InvalidArgumentError(
                f"class {cls} has {members.size} elements, quota {quotas[cls]}"
            )
        if quotas[cls]:
            picked.append(rng.choice(members, size=quotas[cls], replace=False))
    if not picked:
        return np.empty(0, dtype=np.intp)
    return np.sort(np.concatenate(picked)).astype(np.intp)


def brute_force_opt(objective, k, constraint=None):
    """Exhaustive optimum over all feasible subsets of size at most k.

    Only for tiny ground sets (n <= 20); the objective must be empty and is
    evaluated through fresh copies, so it comes back untouched.
    """
    n = objective.n
    if n > 20:
        raise InvalidArgumentError("brute force is refused beyond n = 20")
    if getattr(objective, "selected", None):
        raise InvalidArgumentError("brute force expects an empty objective")
    best_set, best_val = (), objective.eval()
    for size in range(1, min(k, n) + 1):
        for subset in combinations(range(n), size):
            if constraint is not None and not _feasible_subset(constraint, subset, n):
                continue
            probe = objective.copy()
            for i in subset:
                probe.commit(i)
            val = probe.eval()
            if val > best_val:
                best_set, best_val = subset, val
    return list(best_set), best_val


def _feasible_subset(constraint, subset, n):
    try:
        tracker = _ConstraintTracker(constraint, n)
    except InvalidArgumentError:
        return False
    for i in subset:
        if not tracker.feasible(i):
            return False
        tracker.add(i)
    return True
