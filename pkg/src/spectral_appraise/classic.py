"""Facility location over sparse top-k similarities and size-based value laws.

The similarity structure is column-oriented: for every covered element j it
keeps the top_k most similar candidate facilities, so marginal gains only see
retained entries.  This mirrors the usual sparsification of the n x n
similarity matrix when n is large; at desk scale the default top_k of 256 is
effectively dense.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

KERNELS = ("dot", "cosine", "rbf")
DEFAULT_TOP_K = 256


class SparseSimilarity:
    """Per-column lists of (facility, similarity), descending, at most top_k.

    ``col_indices[j]`` / ``col_values[j]`` describe who can cover element j;
    the transposed row view (``row_cols`` / ``row_vals``) lists, for each
    facility, the elements whose retained lists mention it.
    """

    def __init__(self, n, top_k, col_indices, col_values):
        if top_k < 1:
            raise InvalidArgumentError("top_k must be at least 1")
        self.n = int(n)
        self.top_k = int(top_k)
        self.col_indices = [np.asarray(ix, dtype=np.uint32) for ix in col_indices]
        self.col_values = [np.asarray(v, dtype=np.float64) for v in col_values]
        if len(self.col_indices) != self.n or len(self.col_values) != self.n:
            raise InvalidArgumentError("need one retained list per column")
        for j, (ix, v) in enumerate(zip(self.col_indices, self.col_values)):
            if ix.size != v.size or ix.size > self.top_k:
                raise InvalidArgumentError(f"column {j} breaks the top_k bound")
            if v.size and (np.any(v < 0) or np.any(np.diff(v) > 0)):
                raise InvalidArgumentError(
                    f"column {j} must hold nonnegative descending similarities"
                )
            if ix.size and np.max(ix) >= self.n:
                raise InvalidArgumentError(f"column {j} references index >= n")
        self._rows = None

    def row_view(self, facility):
        """(covered columns, similarities) for one candidate facility."""
        if self._rows is None:
            cols = [[] for _ in range(self.n)]
            vals = [[] for _ in range(self.n)]
            for j, (ix, v) in enumerate(zip(self.col_indices, self.col_values)):
                for i, s in zip(ix, v):
                    cols[int(i)].append(j)
                    vals[int(i)].append(float(s))
            self._rows = (
                [np.asarray(c, dtype=np.intp) for c in cols],
                [np.asarray(v, dtype=np.float64) for v in vals],
            )
        return self._rows[0][facility], self._rows[1][facility]


def build_similarity(design, kernel="rbf", top_k=DEFAULT_TOP_K, sigma=1.0):
    """Sparse top-k similarity structure from a design matrix.

    Kernels: ``dot`` (inner products clamped at 0), ``cosine`` (clamped at 0;
    zero rows are rejected), ``rbf`` with exp(-||x_i - x_j||^2 / sigma).
    Per column, the top_k largest similarities are kept, ties broken toward
    the lower facility index.
    """
    d = np.asarray(design, dtype=np.float64)
    if d.ndim != 2 or d.size == 0:
        raise InvalidArgumentError("design matrix must be a nonempty 2-d array")
    if top_k < 1:
        raise InvalidArgumentError("top_k must be at least 1")
    n = d.shape[0]
    if kernel == "dot":
        sim = np.maximum(d @ d.T, 0.0)
    elif kernel == "cosine":
        norms = np.linalg.norm(d, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise InvalidArgumentError(
                f"row {int(zero[0])} has zero norm; cosine similarity undefined"
            )
        unit = d / norms[:, None]
        sim = np.maximum(unit @ unit.T, 0.0)
    elif kernel == "rbf":
        if sigma <= 0:
            raise InvalidArgumentError("rbf kernel requires sigma > 0")
        sq = np.sum(d * d, axis=1)
        dist2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (d @ d.T), 0.0)
        sim = np.exp(-dist2 / sigma)
    else:
        raise InvalidArgumentError(f"unknown kernel {kernel!r}; choose from {KERNELS}")

    keep = min(top_k, n)
    facility_ids = np.arange(n)
    col_indices, col_values = [], []
    for j in range(n):
        order = np.lexsort((facility_ids, -sim[:, j]))[:keep]
        col_indices.append(order.astype(np.uint32))
        col_values.append(sim[order, j])
    return SparseSimilarity(n, top_k, col_indices, col_values)


class FacilityLocation:
    """f(A) = sum_j max over selected facilities of the retained s_ij.

    ``best`` caches the current per-column maximum (0 with no selected
    neighbor), so a gain is one sparse row pass and a commit is the same
    pass plus the max update.
    """

    def __init__(self, similarity):
        self.similarity = similarity
        self.best = np.zeros(similarity.n)
        self.selected: set[int] = set()

    @property
    def n(self):
        return self.similarity.n

    def _check(self, index):
        index = int(index)
        if not 0 <= index < self.n:
            raise InvalidArgumentError(f"index {index} outside the ground set")
        return index

    def eval(self):
        return float(self.best.sum())

    def empty_value(self):
        return 0.0

    def gain(self, index, rho=1):
        index = self._check(index)
        if rho < 0:
            raise InvalidArgumentError("facility location does not support removal")
        cols, vals = self.similarity.row_view(index)
        if cols.size == 0:
            return 0.0
        return float(np.maximum(vals - self.best[cols], 0.0).sum())

    def commit(self, index, rho=1):
        index = self._check(index)
        if rho < 0:
            raise InvalidArgumentError("facility location does not support removal")
        cols, vals = self.similarity.row_view(index)
        if cols.size:
            self.best[cols] = np.maximum(self.best[cols], vals)
        self.selected.add(index)

    def reset(self):
        self.best = np.zeros(self.n)
        self.selected = set()

    def copy(self):
        dup = FacilityLocation(self.similarity)
        dup.best = self.best.copy()
        dup.selected = set(self.selected)
        return dup


def facility_location_bruteforce(similarity, subset):
    """Reference evaluation over the retained sparse entries."""
    best = np.zeros(similarity.n)
    for i in set(int(s) for s in subset):
        cols, vals = similarity.row_view(i)
        if cols.size:
            best[cols] = np.maximum(best[cols], vals)
    return float(best.sum())


# ---------------------------------------------------------------------------
# Size-based value laws


@dataclass(frozen=True)
class PowerSizeLaw:
    """value(d) = offset - coeff * d**-exponent; the classic size-only law."""

    offset: float = 1.0
    coeff: float = 1.0
    exponent: float = 0.5
    empty_epsilon: float | None = None  # if set, value(0) = value(empty_epsilon)

    def __post_init__(self):
        if self.coeff <= 0 or self.exponent <= 0:
            raise InvalidArgumentError("coeff and exponent must be positive")

    def value(self, size):
        if size < 0:
            raise InvalidArgumentError("size must be nonnegative")
        if size == 0:
            if self.empty_epsilon is None:
                return -math.inf
            size = self.empty_epsilon
        return self.offset - self.coeff * float(size) ** (-self.exponent)


@dataclass(frozen=True)
class ClusterSizeLaw:
    """value(counts) = offset - sum_i (shift_i + count_i)**-exponent_i."""

    offset: float
    shifts: tuple
    exponents: tuple

    def __post_init__(self):
        if len(self.shifts) != len(self.exponents):
            raise InvalidArgumentError("need one exponent per domain")
        if any(e <= 0 for e in self.exponents) or any(c < 0 for c in self.shifts):
            raise InvalidArgumentError("exponents must be positive, shifts nonnegative")

    def value(self, counts):
        counts = np.asarray(counts, dtype=np.float64)
        if counts.size != len(self.shifts):
            raise InvalidArgumentError("need one count per domain")
        if np.any(counts < 0):
            raise InvalidArgumentError("counts must be nonnegative")
        terms = (np.asarray(self.shifts) + counts) ** (-np.asarray(self.exponents))
        return self.offset - float(terms.sum())


class EpochAwareLaw:
    """Loss of training on d unique samples under a fixed sample budget.

    A smaller dataset is repeated for more epochs to spend the same budget,
    and every repetition is worth less: the exponent of epoch j decays as
    decay_base**((j-1)/half_life).  The loss is piecewise power-law in d,
    continuous, convex and non-increasing, saturating at coeff*budget**-exponent
    once d reaches the budget; value(d) = offset - loss(d).
    """

    def __init__(self, budget, offset=1.0, coeff=1.0, exponent=0.5, half_life=2.0):
        if budget <= 0:
            raise InvalidArgumentError("the sample budget must be positive")
        if coeff <= 0 or exponent <= 0 or half_life <= 0:
            raise InvalidArgumentError(
                "coeff, exponent and half_life must be positive"
            )
        self.budget = float(budget)
        self.offset = float(offset)
        self.coeff = float(coeff)
        self.exponent = float(exponent)
        self.half_life = float(half_life)
        # _log_prefix[k] = sum_{j=2..k} -beta_j * log(j/(j-1)); grown on demand.
        self._log_prefix = np.zeros(2)

    def _beta(self, j):
        j = np.asarray(j, dtype=np.float64)
        return self.exponent * 0.5 ** ((j - 1.0) / self.half_life)

    def _prefix(self, k):
        if k >= self._log_prefix.size:
            old = self._log_prefix.size
            js = np.arange(old, k + 1, dtype=np.float64)
            terms = -self._beta(js) * np.log(js / (js - 1.0))
            grown = np.concatenate((self._log_prefix, np.cumsum(terms)))
            grown[old:] += self._log_prefix[-1]
            self._log_prefix = grown
        return float(self._log_prefix[k])

    def loss(self, size):
        d = float(size)
        if d < 0:
            raise InvalidArgumentError("size must be nonnegative")
        if d == 0.0:
            return math.inf
        if d >= self.budget:
            return self.coeff * self.budget ** (-self.exponent)
        epochs = int(self.budget // d)
        partial_beta = float(self._beta(epochs + 1))
        log_loss = (
            math.log(self.coeff)
            + (-self.exponent + partial_beta) * math.log(d)
            + self._prefix(epochs)
            - partial_beta * math.log(self.budget / epochs)
        )
        return math.exp(log_loss)

    def value(self, size):
        return self.offset - self.loss(size)


def scaling_law_value(law, size_or_counts):
    """Value of a subset under any of the size-based laws.

    ``size_or_counts`` is a scalar size for the power and epoch-aware laws
    and a per-domain count vector for the cluster law.
    """
    return law.value(size_or_counts)
