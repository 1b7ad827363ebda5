"""Built-in verification battery: fixed counterexamples, bounds and fuzz.

Each item reproduces a known numeric fact (counterexample eigenvalues, weak
diminishing-returns factors) or fuzzes a structural invariant (eigenvalue
interlacing, submodular gain ordering).  The battery is what ``verify`` on
the command line runs; everything must pass on a fresh build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eigen import (
    SpectralState,
    check_interlacing,
    commit_rank_one,
    eigenvalues_after_rank_one,
)
from .objectives import SpectralObjective, density_normalize
from .phi import (
    loewner_matrix,
    make_phi,
    matrix_antitone_counterexample,
    min_eigenvalue,
    neg_derivative_loewner,
    weak_dr_bound,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name, passed, detail):
    return CheckResult(name, bool(passed), detail)


def check_loewner_inverse_square():
    mat = loewner_matrix(lambda y: -(y**-2.0), lambda y: 2.0 * y**-3.0, [1.0, 2.0, 3.0])
    got = min_eigenvalue(mat)
    want = -0.0475019
    return _check(
        "loewner-inverse-square-min-eig",
        abs(got - want) <= 1e-5,
        f"min eigenvalue {got:.7f}, expected {want} +/- 1e-5",
    )


def check_loewner_ratio_half():
    mat = neg_derivative_loewner(make_phi("ratio", alpha=0.5), [1.0, 9.0])
    det = float(np.linalg.det(mat))
    want = -3.81e-6
    return _check(
        "loewner-ratio-determinant",
        abs(det - want) <= 1e-7,
        f"determinant {det:.3e}, expected {want} +/- 1e-7",
    )


def check_satexp_counterexample():
    report = matrix_antitone_counterexample()
    got = np.sort(np.asarray(report["difference_eigenvalues"]))
    want = np.sort(np.array([5.0462e-2, -2.0420e-3, 1.0459e-5]))
    close = np.all(np.abs(got - want) <= 1e-5)
    return _check(
        "saturating-exp-antitone-counterexample",
        close and not report["psd"],
        f"difference eigenvalues {got}, expected {want} each +/- 1e-5",
    )


def check_weak_dr_values():
    r1 = weak_dr_bound(make_phi("powerlaw", alpha=1.0, beta=1.0), 0.1)
    r2 = weak_dr_bound(make_phi("satexp"), 0.1)
    ok = (
        abs(r1.zeta - 0.826) <= 1e-3
        and abs(r1.greedy_bound - 0.5623) <= 1e-3
        and abs(r2.zeta - 0.905) <= 1e-3
        and abs(r2.greedy_bound - 0.595) <= 1e-3
    )
    return _check(
        "weak-dr-factors",
        ok,
        f"powerlaw zeta {r1.zeta:.4f} bound {r1.greedy_bound:.4f}; "
        f"satexp zeta {r2.zeta:.4f} bound {r2.greedy_bound:.4f}",
    )


def check_interlacing_fuzz(updates=1000, seed=0):
    rng = np.random.default_rng(seed)
    state = SpectralState(12)
    committed = []
    worst_trace = 0.0
    for _ in range(updates):
        downdate = committed and rng.random() < 0.3
        if downdate:
            u = committed.pop(int(rng.integers(len(committed))))
            rho = -1
        else:
            u = rng.standard_normal(12)
            committed.append(u)
            rho = 1
        old = state.eigvals.copy()
        new_vals, _ = eigenvalues_after_rank_one(state, u, rho)
        usq = float(u @ u)
        check_interlacing(old, new_vals, rho, usq)
        commit_rank_one(state, u, rho)
        scale = max(1.0, state.trace())
        worst_trace = max(
            worst_trace,
            abs(state.trace() - state.committed_sq_norm) / scale,
        )
    return _check(
        "interlacing-and-trace-fuzz",
        worst_trace <= 1e-10,
        f"{updates} updates/downdates, worst relative trace error {worst_trace:.2e}",
    )


def check_submodularity_fuzz(chains=120, seed=0):
    worst = math.inf
    for trial in range(chains):
        rng = np.random.default_rng([seed, trial])
        n, m = 14, 6
        design = density_normalize(rng.standard_normal((n, m)))
        phi = make_phi("neg_xlogx") if trial % 2 == 0 else make_phi("log_shift", t=0.5)
        perm = rng.permutation(n)
        small = SpectralObjective(design, phi)
        for i in perm[:3]:
            small.commit(int(i))
        large = small.copy()
        for i in perm[3:8]:
            large.commit(int(i))
        for s in perm[8:12]:
            margin = small.gain(int(s)) - large.gain(int(s))
            worst = min(worst, margin)
    return _check(
        "submodular-gain-ordering-fuzz",
        worst >= -1e-9,
        f"{chains} chains, worst diminishing-returns margin {worst:.2e}",
    )


def check_weak_dr_gain_ratio(chains=60, seed=1):
    worst = math.inf
    for trial in range(chains):
        rng = np.random.default_rng([seed, trial])
        n, m = 12, 5
        design = density_normalize(rng.standard_normal((n, m)))
        radius = float(np.linalg.svd(design, compute_uv=False)[0]) ** 2
        phis = [
            make_phi("powerlaw", alpha=1.0, beta=1.0),
            make_phi("satexp"),
            make_phi("ratio", alpha=1.0),
        ]
        phi = phis[trial % 3]
        zeta = weak_dr_bound(phi, radius).zeta
        perm = rng.permutation(n)
        small = SpectralObjective(design, phi)
        for i in perm[:2]:
            small.commit(int(i))
        large = small.copy()
        for i in perm[2:7]:
            large.commit(int(i))
        for s in perm[7:10]:
            margin = small.gain(int(s)) - zeta * large.gain(int(s))
            worst = min(worst, margin)
    return _check(
        "weak-dr-gain-ratio-fuzz",
        worst >= -1e-9,
        f"{chains} chains, worst zeta-weak margin {worst:.2e}",
    )


BATTERY = (
    check_loewner_inverse_square,
    check_loewner_ratio_half,
    check_satexp_counterexample,
    check_weak_dr_values,
    check_interlacing_fuzz,
    check_submodularity_fuzz,
    check_weak_dr_gain_ratio,
)


def run_battery():
    return [item() for item in BATTERY]
