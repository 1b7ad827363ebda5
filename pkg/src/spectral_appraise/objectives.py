"""Set objectives over the spectrum of a growing subset Gram matrix.

``SpectralObjective`` sums a scalar function over the eigenvalues of
B_X = D[X]^T D[X] and answers marginal-gain queries through the incremental
eigensolver; ``OracleSpectralObjective`` is the same set function computed by
a dense eigensolve per query and exists for benchmarking and cross-checks.
"""

from __future__ import annotations

import math

import numpy as np

from .eigen import (
    SpectralState,
    commit_rank_one,
    dense_eigen_oracle,
    eigenvalues_after_rank_one,
)
from .errors import InvalidArgumentError

# Eigenvalues below this are indistinguishable from zero for every supported
# phi; clamping avoids log underflow.
EIG_CLAMP = 1e-300

NORMALIZATIONS = ("none", "density_trace1", "monotone_e_lambda_max")


def density_normalize(design, mode="density_trace1"):
    """Rescale a design matrix so its full Gram spectrum is well behaved.

    ``density_trace1`` unit-normalizes every row and divides by sqrt(n), so
    trace(D^T D) = 1 and the eigenvalues form a sub-probability on every
    subset.  ``monotone_e_lambda_max`` additionally rescales so the largest
    full-set eigenvalue is 1/e, which keeps -x log x increasing over the
    whole reachable spectrum.  ``none`` returns an unscaled copy.
    """
    d = np.asarray(design, dtype=np.float64)
    if d.ndim != 2 or d.size == 0:
        raise InvalidArgumentError("design matrix must be a nonempty 2-d array")
    if mode == "none":
        return d.copy()
    if mode not in NORMALIZATIONS:
        raise InvalidArgumentError(
            f"unknown normalization {mode!r}; choose from {NORMALIZATIONS}"
        )
    norms = np.linalg.norm(d, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise InvalidArgumentError(f"row {int(zero[0])} has zero norm")
    out = d / (norms[:, None] * math.sqrt(d.shape[0]))
    if mode == "monotone_e_lambda_max":
        lam_max = float(np.linalg.svd(out, compute_uv=False)[0]) ** 2
        out /= math.sqrt(math.e * lam_max)
    return out


def phi_sum(phi, eigvals, dim, include_zeros=True):
    """Compensated sum of phi over a spectrum plus the implicit-zeros term."""
    vals = np.asarray(eigvals, dtype=np.float64)
    vals = np.where(vals < EIG_CLAMP, 0.0, vals)
    terms = np.atleast_1d(phi.value(vals)).tolist()
    if include_zeros and dim > vals.size:
        terms.append((dim - vals.size) * phi.value_at_zero())
    return math.fsum(terms)


def vendi_score(eigvals, q=1.0, renormalize=False):
    """Diversity of a spectrum as an effective number of modes.

    With the eigenvalues forming a (sub-)probability, q=1 gives the
    exponentiated Shannon entropy exp(-sum lam log lam), q=0 counts the
    nonzero eigenvalues, q=2 gives 1/sum lam^2, and general q >= 0 uses the
    exponentiated order-q entropy.  ``renormalize`` first divides by the
    eigenvalue sum.
    """
    if q < 0:
        raise InvalidArgumentError("the order q must be nonnegative")
    if isinstance(eigvals, SpectralState):
        eigvals = eigvals.eigvals
    lam = np.asarray(eigvals, dtype=np.float64)
    lam = lam[lam > EIG_CLAMP]
    if lam.size == 0:
        return 0.0
    if renormalize:
        lam = lam / lam.sum()
    if q == 0:
        return float(lam.size)
    if q == 1.0:
        return float(np.exp(-np.sum(lam * np.log(lam))))
    return float(np.exp(np.log(np.sum(lam**q)) / (1.0 - q)))


class SpectralObjective:
    """f(X) = sum_i phi(eigenvalue_i(B_X)), maintained incrementally.

    ``include_zeros`` adds (m - rank) * phi(0) so unnormalized phi (the
    log-determinant family) evaluates the full m x m matrix; it contributes
    nothing when phi(0) = 0.  Gains are differences of compensated sums:
    the two spectra agree except where the update bites, so naive summation
    would cancel most digits.
    """

    def __init__(self, design, phi, include_zeros=True):
        design = np.ascontiguousarray(design, dtype=np.float64)
        if design.ndim != 2 or design.size == 0:
            raise InvalidArgumentError("design matrix must be a nonempty 2-d array")
        self.design = design
        self.phi = phi
        self.include_zeros = include_zeros
        self.state = SpectralState(design.shape[1])
        self.selected: set[int] = set()

    @property
    def n(self):
        return self.design.shape[0]

    @property
    def dim(self):
        return self.design.shape[1]

    def _row(self, index):
        index = int(index)
        if not 0 <= index < self.n:
            raise InvalidArgumentError(f"index {index} outside the ground set")
        return self.design[index]

    def eval(self):
        return phi_sum(self.phi, self.state.eigvals, self.dim, self.include_zeros)

    def empty_value(self):
        """f at the empty set: m * phi(0) (or 0 without the zeros term)."""
        return phi_sum(self.phi, (), self.dim, self.include_zeros)

    def gain(self, index, rho=1):
        row = self._row(index)
        new_vals, new_rank = eigenvalues_after_rank_one(self.state, row, rho)
        old_vals = self.state.eigvals
        new_vals = np.where(new_vals < EIG_CLAMP, 0.0, new_vals)
        old = np.where(old_vals < EIG_CLAMP, 0.0, old_vals)
        terms = np.atleast_1d(self.phi.value(new_vals)).tolist()
        terms.extend((-np.atleast_1d(self.phi.value(old))).tolist())
        if self.include_zeros:
            terms.append((old.size - new_rank) * self.phi.value_at_zero())
        return math.fsum(terms)

    def commit(self, index, rho=1):
        row = self._row(index)
        commit_rank_one(self.state, row, rho)
        if rho > 0:
            self.selected.add(int(index))
        else:
            self.selected.discard(int(index))

    def reset(self):
        self.state = SpectralState(self.dim)
        self.selected = set()

    def copy(self):
        dup = SpectralObjective.__new__(SpectralObjective)
        dup.design = self.design
        dup.phi = self.phi
        dup.include_zeros = self.include_zeros
        dup.state = self.state.copy()
        dup.selected = set(self.selected)
        return dup

    def spectral_summary(self):
        lam = self.state.eigvals
        return {
            "rank": int(lam.size),
            "trace": float(lam.sum()),
            "eigenvalue_min": float(lam[0]) if lam.size else 0.0,
            "eigenvalue_max": float(lam[-1]) if lam.size else 0.0,
            "vendi_q1": vendi_score(lam, 1.0),
            "vendi_q2": vendi_score(lam, 2.0),
            "vendi_q0": vendi_score(lam, 0.0),
        }


class OracleSpectralObjective:
    """Same set function as ``SpectralObjective`` via dense eigensolves.

    Every gain query re-solves the full m x m eigenvalue problem; this is the
    baseline the incremental path is benchmarked against, and it must select
    identically under greedy maximization.
    """

    def __init__(self, design, phi, include_zeros=True):
        design = np.ascontiguousarray(design, dtype=np.float64)
        self.design = design
        self.phi = phi
        self.include_zeros = include_zeros
        self.gram = np.zeros((design.shape[1], design.shape[1]))
        self.selected: set[int] = set()
        self._value = None  # current f(X); one eigensolve per gain query

    @property
    def n(self):
        return self.design.shape[0]

    @property
    def dim(self):
        return self.design.shape[1]

    def _value_of(self, gram):
        vals = np.maximum(dense_eigen_oracle(gram), 0.0)
        return phi_sum(self.phi, vals, self.dim, self.include_zeros)

    def eval(self):
        if self._value is None:
            self._value = self._value_of(self.gram)
        return self._value

    def empty_value(self):
        return phi_sum(self.phi, (), self.dim, self.include_zeros)

    def gain(self, index, rho=1):
        row = self.design[int(index)]
        updated = self.gram + rho * np.outer(row, row)
        return self._value_of(updated) - self.eval()

    def commit(self, index, rho=1):
        row = self.design[int(index)]
        self.gram = self.gram + rho * np.outer(row, row)
        self._value = None
        if rho > 0:
            self.selected.add(int(index))
        else:
            self.selected.discard(int(index))

    def reset(self):
        self.gram = np.zeros((self.dim, self.dim))
        self.selected = set()
        self._value = None

    def copy(self):
        dup = OracleSpectralObjective.__new__(OracleSpectralObjective)
        dup.design = self.design
        dup.phi = self.phi
        dup.include_zeros = self.include_zeros
        dup.gram = self.gram.copy()
        dup.selected = set(self.selected)
        dup._value = self._value
        return dup


class ModularObjective:
    """Additive weights; greedy is exact here, so tests lean on it."""

    def __init__(self, weights):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.selected: set[int] = set()

    @property
    def n(self):
        return self.weights.size

    def eval(self):
        return float(sum(self.weights[i] for i in self.selected))

    def gain(self, index, rho=1):
        return float(rho * self.weights[int(index)])

    def commit(self, index, rho=1):
        if rho > 0:
            self.selected.add(int(index))
        else:
            self.selected.discard(int(index))

    def reset(self):
        self.selected = set()

    def copy(self):
        dup = ModularObjective(self.weights)
        dup.selected = set(self.selected)
        return dup
