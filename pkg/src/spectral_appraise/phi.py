"""Scalar eigenvalue-evaluation functions and their monotonicity diagnostics.

Each ``PhiSpec`` is a concave scalar function applied to the eigenvalues of a
subset Gram matrix; the sum over the spectrum is the set objective.  The kinds
split into two families: four whose negative derivative is matrix monotone
(the resulting set function is submodular) and three practically useful ones
where that fails and only a weak diminishing-returns factor survives.  The
Loewner divided-difference matrix is the standard certificate for telling the
two families apart, and ``weak_dr_bound`` computes the surviving factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigen import dense_eigen_oracle
from .errors import InvalidArgumentError, UnsupportedPhiError

# kind -> (required params, defaults)
PHI_KINDS = {
    "neg_xlogx": {"t": 0.0},
    "log_shift": {"t": 1.0},
    "power": {"eta": 0.5},
    "neg_power": {"eta": 2.0},
    "powerlaw": {"alpha": 1.0, "beta": 1.0},
    "satexp": {},
    "ratio": {"alpha": 1.0},
}


@dataclass(frozen=True)
class PhiSpec:
    """A named scalar function with closed-form value and derivative.

    Kinds and parameter ranges:

    - ``neg_xlogx(t >= 0)``: -(t+x) log(t+x), with the t=0 value at x=0
      taken as 0 by continuity.
    - ``log_shift(t >= 0)``: log(t+x); the log-determinant objective.
    - ``power(0 < eta <= 1)``: x**eta.
    - ``neg_power(1 <= eta <= 2)``: -x**eta.
    - ``powerlaw(alpha > 0, beta > 0)``: 1 - (x+beta)**-alpha.
    - ``satexp``: 1 - exp(-x).
    - ``ratio(alpha > 0)``: x / (1 + x**alpha)**(1/alpha).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PHI_KINDS:
            raise InvalidArgumentError(
                f"unknown phi kind {self.kind!r}; choose from {sorted(PHI_KINDS)}"
            )
        merged = dict(PHI_KINDS[self.kind])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise InvalidArgumentError(
                f"{self.kind} does not take parameters {sorted(unknown)}"
            )
        merged.update(self.params)
        object.__setattr__(self, "params", merged)
        self._validate()

    def _validate(self):
        p = self.params
        if self.kind in ("neg_xlogx", "log_shift") and p["t"] < 0:
            raise InvalidArgumentError(f"{self.kind} requires t >= 0")
        if self.kind == "power" and not 0 < p["eta"] <= 1:
            raise InvalidArgumentError("power requires 0 < eta <= 1")
        if self.kind == "neg_power" and not 1 <= p["eta"] <= 2:
            raise InvalidArgumentError("neg_power requires 1 <= eta <= 2")
        if self.kind == "powerlaw" and (p["alpha"] <= 0 or p["beta"] <= 0):
            raise InvalidArgumentError("powerlaw requires alpha > 0 and beta > 0")
        if self.kind == "ratio" and p["alpha"] <= 0:
            raise InvalidArgumentError("ratio requires alpha > 0")

    def value(self, x):
        """phi(x) for scalar or array x >= 0."""
        x = np.asarray(x, dtype=np.float64)
        p = self.params
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "neg_xlogx":
                s = p["t"] + x
                out = np.where(s > 0.0, -s * np.log(np.where(s > 0, s, 1.0)), 0.0)
            elif self.kind == "log_shift":
                out = np.log(p["t"] + x)
            elif self.kind == "power":
                out = x ** p["eta"]
            elif self.kind == "neg_power":
                out = -(x ** p["eta"])
            elif self.kind == "powerlaw":
                out = 1.0 - (x + p["beta"]) ** (-p["alpha"])
            elif self.kind == "satexp":
                out = 1.0 - np.exp(-x)
            else:  # ratio
                a = p["alpha"]
                out = x * (1.0 + x ** a) ** (-1.0 / a)
        return out if out.ndim else float(out)

    def derivative(self, x):
        """phi'(x); infinite where the derivative is singular at 0."""
        x = np.asarray(x, dtype=np.float64)
        p = self.params
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "neg_xlogx":
                s = p["t"] + x
                out = np.where(s > 0.0, -np.log(np.where(s > 0, s, 1.0)) - 1.0, np.inf)
            elif self.kind == "log_shift":
                s = p["t"] + x
                out = np.where(s > 0.0, 1.0 / np.where(s > 0, s, 1.0), np.inf)
            elif self.kind == "power":
                eta = p["eta"]
                if eta == 1.0:
                    out = np.ones_like(x)
                else:
                    out = np.where(x > 0.0, eta * x ** (eta - 1.0), np.inf)
            elif self.kind == "neg_power":
                eta = p["eta"]
                out = -eta * x ** (eta - 1.0)
            elif self.kind == "powerlaw":
                a, b = p["alpha"], p["beta"]
                out = a * (x + b) ** (-a - 1.0)
            elif self.kind == "satexp":
                out = np.exp(-x)
            else:  # ratio
                a = p["alpha"]
                out = (1.0 + x ** a) ** (-1.0 / a - 1.0)
        return out if out.ndim else float(out)

    def second_derivative(self, x):
        """phi''(x), nonpositive everywhere on the domain (concavity)."""
        x = np.asarray(x, dtype=np.float64)
        p = self.params
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "neg_xlogx":
                out = -1.0 / (p["t"] + x)
            elif self.kind == "log_shift":
                out = -((p["t"] + x) ** -2.0)
            elif self.kind == "power":
                eta = p["eta"]
                out = eta * (eta - 1.0) * x ** (eta - 2.0)
            elif self.kind == "neg_power":
                eta = p["eta"]
                out = -eta * (eta - 1.0) * x ** (eta - 2.0)
            elif self.kind == "powerlaw":
                a, b = p["alpha"], p["beta"]
                out = -a * (a + 1.0) * (x + b) ** (-a - 2.0)
            elif self.kind == "satexp":
                out = -np.exp(-x)
            else:  # ratio
                a = p["alpha"]
                out = -(1.0 + a) * x ** (a - 1.0) * (1.0 + x ** a) ** (-1.0 / a - 2.0)
        return out if out.ndim else float(out)

    def value_at_zero(self):
        return float(self.value(0.0))

    @property
    def is_normalized(self):
        return self.value_at_zero() == 0.0


def make_phi(kind, **params):
    return PhiSpec(kind, params)


@dataclass(frozen=True)
class WeakDrReport:
    """Weak diminishing-returns factor of a concave eigenvalue function.

    ``zeta = phi'(spectral_radius) / phi'(0)`` lower-bounds the ratio of
    marginal gains between nested subsets, so greedy maximization keeps a
    1 - exp(-zeta) guarantee.
    """

    zeta: float
    spectral_radius: float
    greedy_bound: float


def weak_dr_bound(phi, spectral_radius):
    """Diminishing-returns factor for ``phi`` on spectra within the radius.

    Requires phi concave with a finite positive derivative at zero
    (``neg_xlogx`` at t=0 and fractional ``power`` are rejected: their
    derivative diverges at the origin).
    """
    if spectral_radius < 0:
        raise InvalidArgumentError("spectral radius must be nonnegative")
    d0 = phi.derivative(0.0)
    if not math.isfinite(d0) or d0 <= 0.0:
        raise UnsupportedPhiError(
            f"{phi.kind} has phi'(0) = {d0}; the weak-DR ratio needs a finite "
            "positive derivative at zero"
        )
    zeta = float(phi.derivative(spectral_radius)) / d0
    zeta = min(zeta, 1.0)
    return WeakDrReport(zeta, float(spectral_radius), 1.0 - math.exp(-zeta))


def loewner_matrix(fn, deriv, points):
    """Divided-difference matrix of ``fn`` at strictly increasing points.

    Entry (i, j) is (fn(x_i) - fn(x_j)) / (x_i - x_j) off the diagonal and
    deriv(x_i) on it.  The matrix is positive semidefinite at every choice
    of points exactly when ``fn`` is matrix monotone, so a negative
    eigenvalue at any single point set is a disproof.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidArgumentError("points must be a nonempty 1-d sequence")
    if np.any(np.diff(x) <= 0):
        raise InvalidArgumentError("points must be strictly increasing")
    vals = np.asarray([fn(t) for t in x], dtype=np.float64)
    k = x.size
    out = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            if i == j:
                out[i, j] = deriv(x[i])
            else:
                out[i, j] = (vals[i] - vals[j]) / (x[i] - x[j])
    return out


def min_eigenvalue(mat):
    return float(dense_eigen_oracle(mat)[0])


def neg_derivative_loewner(phi, points):
    """Loewner matrix of -phi' at the given points."""
    return loewner_matrix(
        lambda t: -phi.derivative(t),
        lambda t: -phi.second_derivative(t),
        points,
    )


def matrix_antitone_counterexample():
    """Fixed instance showing scalar non-increasingness is not matrix antitone.

    Applies g(x) = -exp(-x) through the eigendecomposition to the diagonal
    matrix A = diag(1, 2, 3) and to B = A + 0.1 (a rank-1 all-ones bump,
    so A <= B in the semidefinite order) and reports the eigenvalues of
    g(B) - g(A); the middle one is negative, so g(A) <= g(B) fails even
    though g is non-increasing on scalars.
    """
    a = np.diag([1.0, 2.0, 3.0])
    b = a + 0.1
    diff = _apply_scalar(lambda x: -np.exp(-x), b) - _apply_scalar(
        lambda x: -np.exp(-x), a
    )
    eigs = dense_eigen_oracle(diff)
    eigs = eigs[np.argsort(-np.abs(eigs), kind="stable")]  # dominant first
    return {
        "difference_eigenvalues": eigs,
        "psd": bool(np.min(eigs) >= -1e-12),
        "gap_eigenvalues": dense_eigen_oracle(b - a)[::-1],
    }


def _apply_scalar(fn, mat):
    vals, vecs = np.linalg.eigh(np.asarray(mat, dtype=np.float64))
    return (vecs * fn(vals)) @ vecs.T
