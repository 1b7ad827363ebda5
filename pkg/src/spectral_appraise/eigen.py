"""Incremental spectral factorization of a Gram matrix under rank-1 updates.

A ``SpectralState`` maintains B = Q diag(lam) Q^T for the Gram matrix of the
rows committed so far (Q: m x r orthonormal, lam ascending positive).  Adding
or removing a row costs O(m*r + r^2) for an eigenvalue query and one extra
O(m*r^2) matrix product for a commit, instead of a fresh O(m^3) dense solve.

The eigenvalues of a diagonal-plus-rank-one matrix are the roots of a rational
function with one pole per distinct diagonal entry; repeated entries and
zero-weight coordinates are first removed by deflation (block reflectors
collapse each repeated group onto a single coordinate).  Eigenvectors are
rebuilt from a weight vector re-derived from the computed roots, which is far
better behaved numerically than reusing the raw update weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericalError, PsdViolationError

_EPS = float(np.finfo(np.float64).eps)

# Deflation thresholds (relative): weights below WEIGHT_TOL*||v|| are dropped,
# eigenvalues closer than EQUAL_TOL*max(1, lam_max) are treated as repeated.
WEIGHT_TOL = 64.0 * _EPS
EQUAL_TOL = 64.0 * _EPS

# A residual norm above RANK_TOL*max(||u||, sqrt(lam_max)) grows the rank.
RANK_TOL = 1e-8

# Orthogonality maintenance: full modified Gram-Schmidt pass every
# REORTH_EVERY commits or when the drift audit exceeds REORTH_DRIFT;
# drift beyond FAIL_DRIFT is unrecoverable.
REORTH_EVERY = 512
REORTH_DRIFT = 1e-8
FAIL_DRIFT = 1e-6

MAX_ROOT_ITER = 100


def householder_toward_axis(x):
    """Reflector sending x onto a signed coordinate axis.

    Returns ``(w_unit, pivot, sign)`` such that H = I - 2 w w^T satisfies
    H x = -sign * ||x|| * e_pivot.  The pivot is the largest-magnitude
    coordinate (lowest index on ties) and sign = sign(x[pivot]) with
    sign(0) = +1; reflecting onto the dominant coordinate keeps ||w|| large
    and avoids the cancellation a fixed-axis choice can suffer.
    """
    x = np.asarray(x, dtype=np.float64)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise InvalidArgumentError("cannot build a reflector for the zero vector")
    pivot = int(np.argmax(np.abs(x)))
    sign = -1.0 if x[pivot] < 0.0 else 1.0
    w = x.copy()
    w[pivot] += sign * norm
    w /= np.linalg.norm(w)
    return w, pivot, sign


def apply_reflector(w_unit, x):
    """Apply H = I - 2 w w^T to a vector or to the rows of a matrix."""
    w = np.asarray(w_unit, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return x - 2.0 * np.multiply.outer(w, w @ x)


@dataclass
class DeflationPlan:
    """Reduction of a diagonal-plus-rank-one problem to distinct poles.

    ``active`` lists the coordinates that enter the reduced root-finding
    problem (strictly distinct poles, nonzero weights); ``preserved``
    coordinates keep their eigenvalue unchanged.  Each repeated-eigenvalue
    group contributes one active coordinate carrying the whole group weight,
    produced by a block reflector whose sign flip must be undone when
    eigenvectors are reconstructed.
    """

    size: int
    groups: list = field(default_factory=list)          # index arrays, len > 1
    group_weights: list = field(default_factory=list)   # ||v_group|| per group
    householder_blocks: list = field(default_factory=list)  # (w_unit, local pivot) or None
    sign_flips: list = field(default_factory=list)      # sign used in the reflector
    active: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))
    active_weights: np.ndarray = field(default_factory=lambda: np.empty(0))
    preserved: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))


def deflate(eigvals, v, weight_tol=None, equal_tol=None):
    """Split a diagonal-plus-rank-one problem into active and preserved parts.

    ``eigvals`` must be sorted ascending.  Coordinates whose weight is
    negligible relative to ||v|| pass through unchanged; groups of repeated
    eigenvalues are collapsed onto a single coordinate carrying the group
    norm.  An empty active set means the update leaves every eigenvalue
    unchanged.
    """
    d = np.asarray(eigvals, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    k = d.size
    if v.size != k:
        raise InvalidArgumentError("eigvals and v must have equal length")
    plan = DeflationPlan(size=k)
    if k == 0:
        return plan
    if np.any(np.diff(d) < 0):
        raise InvalidArgumentError("eigvals must be sorted ascending")

    vnorm = float(np.linalg.norm(v))
    wtol = (WEIGHT_TOL if weight_tol is None else weight_tol) * vnorm
    etol = (EQUAL_TOL if equal_tol is None else equal_tol) * max(
        1.0, float(np.max(np.abs(d)))
    )

    # Generic case: all poles distinct, every weight significant.
    if np.all(np.diff(d) > etol) and np.all(np.abs(v) > wtol):
        plan.active = np.arange(k, dtype=np.intp)
        plan.active_weights = v.copy()
        return plan

    active: list[int] = []
    weights: list[float] = []
    preserved: list[int] = []
    start = 0
    # Consecutive eigenvalues chain into one group while gaps stay below etol.
    boundaries = list(np.flatnonzero(np.diff(d) > etol) + 1) + [k]
    for stop in boundaries:
        idx = np.arange(start, stop)
        if idx.size == 1:
            i = int(idx[0])
            if abs(v[i]) > wtol:
                active.append(i)
                weights.append(float(v[i]))
            else:
                preserved.append(i)
        else:
            vg = v[idx]
            alpha = float(np.linalg.norm(vg))
            if alpha <= wtol:
                preserved.extend(int(i) for i in idx)
            else:
                w_unit, local_pivot, sign = householder_toward_axis(vg)
                plan.groups.append(idx)
                plan.group_weights.append(alpha)
                plan.householder_blocks.append((w_unit, local_pivot))
                plan.sign_flips.append(sign)
                pivot = int(idx[0]) + local_pivot
                active.append(pivot)
                weights.append(-sign * alpha)
                preserved.extend(int(i) for i in idx if i != pivot)
        start = stop

    plan.active = np.asarray(active, dtype=np.intp)
    plan.active_weights = np.asarray(weights, dtype=np.float64)
    plan.preserved = np.asarray(sorted(preserved), dtype=np.intp)
    return plan


@dataclass
class SecularProblem:
    """Root-finding problem 1 + rho * sum_i z_i^2 / (d_i - mu) = 0."""

    poles: np.ndarray
    weights: np.ndarray
    rho: float = 1.0


def secular_roots(problem, return_shifts=False):
    """All roots of the rational secular function, one per pole interval.

    For strictly increasing poles d_1 < ... < d_k, nonzero weights and
    rho > 0 there is exactly one root in each (d_i, d_{i+1}) and one in
    (d_k, d_k + rho*sum z^2].  Each root is tracked in a pole-shifted
    variable (the iterate is the offset from the nearest pole, so the small
    difference root-minus-pole is carried at full precision) and refined by
    re-solving a two-pole rational surrogate fitted to the function value
    and its split derivative; any step leaving the bracketing interval
    falls back to bisection.  The per-root scan runs compiled when numba is
    available, otherwise on vectorized arrays.

    With ``return_shifts`` the result is ``(roots, shift_idx, tau)`` where
    ``roots[i] == poles[shift_idx[i]] + tau[i]``.
    """
    d = np.ascontiguousarray(problem.poles, dtype=np.float64)
    z = np.asarray(problem.weights, dtype=np.float64)
    rho = float(problem.rho)
    k = d.size
    if k == 0:
        empty = np.empty(0)
        if return_shifts:
            return empty, np.empty(0, dtype=np.intp), empty
        return empty
    if rho <= 0.0:
        raise InvalidArgumentError("effective rho must be positive")
    if np.any(np.diff(d) <= 0):
        raise InvalidArgumentError("poles must be strictly increasing")
    if np.any(z == 0.0):
        raise InvalidArgumentError("weights must be nonzero")

    z2 = rho * z * z
    total = float(np.sum(z2))

    if _secular_solve_compiled is not None:
        tau, shift_idx, ok = _secular_solve_compiled(d, z2, total)
    else:
        tau, shift_idx, ok = _secular_solve_numpy(d, z2, total)
    if not ok.all():
        bad = np.flatnonzero(~ok)
        upper = np.append(d[1:], d[-1] + total)
        raise NumericalError(
            "secular root iteration did not converge in intervals "
            + ", ".join(f"({d[i]:.6g}, {upper[i]:.6g})" for i in bad)
        )

    roots = d[shift_idx] + tau
    if return_shifts:
        return roots, shift_idx, tau
    return roots


def _secular_solve_numpy(d, z2, total):
    """Pure-numpy fallback: bracket setup plus the vectorized refinement."""
    k = d.size
    upper = np.empty(k)
    upper[:-1] = d[1:]
    upper[-1] = d[-1] + total
    gaps = upper - d

    # Decide the shift pole per root from the sign of f at the midpoint of
    # its bracket: f increases through the interval, so f(mid) >= 0 puts the
    # root in the left half.  Interior roots in the right half shift to the
    # pole above; the open-ended last root always shifts to its own pole.
    mid = d + 0.5 * gaps
    f_mid = 1.0 + np.sum(z2[None, :] / (d[None, :] - mid[:, None]), axis=1)
    idx = np.arange(k)
    go_right = (f_mid < 0.0) & (idx < k - 1)
    shift_idx = np.where(go_right, idx + 1, idx)
    shift_val = d[shift_idx]

    lo = np.where(go_right, mid - upper, 0.0)
    hi = np.where(go_right, 0.0, mid - d)
    if f_mid[-1] < 0.0:
        lo[-1] = mid[-1] - d[-1]
        hi[-1] = total

    tau = _initial_offsets(d, z2, gaps, f_mid, go_right, shift_val, total)
    span = hi - lo
    tau = np.minimum(np.maximum(tau, lo + 1e-3 * span), hi - 1e-3 * span)

    # Local pole pair per root for the rational surrogate, in shifted
    # coordinates (one offset is exactly zero, the other an exact pole gap).
    # Interior root i sits between poles (i, i+1); the open-ended last root
    # uses the last two poles.  All poles at or left of ``split`` lump into
    # the surrogate's left pole, the rest into the right one.
    off_a = np.empty(k)
    off_b = np.zeros(k)
    split = np.arange(k, dtype=np.int64)
    if k > 1:
        off_a[:-1] = np.where(go_right[:-1], -gaps[:-1], 0.0)
        off_b[:-1] = np.where(go_right[:-1], 0.0, gaps[:-1])
        off_a[-1] = d[-2] - d[-1]
        split[-1] = k - 2
    else:
        off_a[0] = -(1.0 + total)
        split[0] = -1

    width_tol = (8.0 * _EPS) * gaps
    ok = _refine_offsets_numpy(
        d, z2, shift_val, gaps, width_tol, off_a, off_b, split, lo, hi, tau
    )
    return tau, shift_idx, ok


def _refine_offsets_numpy(d, z2, shift_val, gaps, width_tol,
                          off_a, off_b, split, lo, hi, tau):
    """Vectorized surrogate iteration over all roots at once.

    Each pass fits c + ca/(off_a - tau) + cb/(off_b - tau) to the secular
    function (matching its value and its left/right split derivative at the
    iterate) and jumps to the in-bracket root of that surrogate;
    out-of-bracket jumps fall back to bisection.  A converged root keeps its
    offset frozen (the extra bracket updates are harmless).  Mutates
    lo/hi/tau in place and returns the per-root convergence flags.
    """
    k = d.size
    delta = d[None, :] - shift_val[:, None]
    cols = np.maximum(split, 0)[:, None]
    done = np.zeros(k, dtype=bool)
    for _ in range(MAX_ROOT_ITER):
        recip = 1.0 / (delta - tau[:, None])
        terms = z2 * recip
        f = terms.sum(axis=1)
        f += 1.0
        curve = terms * recip
        fp = curve.sum(axis=1)

        positive = f > 0.0
        hi[...] = np.where(positive, tau, hi)
        lo[...] = np.where(positive, lo, tau)

        left_fp = np.take_along_axis(np.cumsum(curve, axis=1), cols, 1).ravel()
        left_fp = np.where(split < 0, 0.0, left_fp)
        right_fp = fp - left_fp
        den_a = off_a - tau
        den_b = off_b - tau
        ca = left_fp * den_a * den_a
        cb = right_fp * den_b * den_b
        big_a = 1.0 + (f - 1.0 - ca / den_a - cb / den_b)
        big_b = big_a * (off_a + off_b) + ca + cb
        big_c = big_a * off_a * off_b + ca * off_b + cb * off_a
        disc = np.sqrt(np.maximum(big_b * big_b - 4.0 * big_a * big_c, 0.0))
        qf = 0.5 * (big_b + np.copysign(disc, big_b))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = qf / big_a
            r2 = big_c / qf
        cand = np.where((r1 > lo) & (r1 < hi), r1, r2)
        good = (cand > lo) & (cand < hi) & np.isfinite(cand)
        cand = np.where(good, cand, 0.5 * (lo + hi))

        done |= np.abs(f) <= 1e-13 * (1.0 + np.abs(fp) * gaps)
        done |= (hi - lo) <= width_tol
        done |= cand == tau
        tau[...] = np.where(done, tau, cand)
        if done.all():
            break
    return done


def _build_compiled_solver():
    try:
        from numba import njit
    except ImportError:
        return None

    eps8 = 8.0 * _EPS

    @njit(cache=True, fastmath=False)
    def solve(d, z2, total):
        k = d.shape[0]
        tau = np.empty(k)
        shift_idx = np.empty(k, dtype=np.int64)
        ok = np.zeros(k, dtype=np.bool_)
        for i in range(k):
            up = d[i + 1] if i < k - 1 else d[k - 1] + total
            gap = up - d[i]
            mid = d[i] + 0.5 * gap

            fm = 1.0
            for j in range(k):
                fm += z2[j] / (d[j] - mid)

            go_right = fm < 0.0 and i < k - 1
            si = i + 1 if go_right else i
            sv = d[si]
            if go_right:
                low = mid - up
                high = 0.0
            else:
                low = 0.0
                high = mid - d[i]
            if i == k - 1 and fm < 0.0:
                low = mid - d[i]
                high = total

            # Initial guess: root of the two-pole surrogate frozen at the
            # midpoint, expressed as an offset x from the interval's left
            # pole (for the last interval, from its own pole).
            if i < k - 1:
                a = z2[i]
                b = z2[i + 1]
                s = fm - 1.0 + 2.0 * a / gap - 2.0 * b / gap
                big_a = 1.0 + s
                big_b = big_a * gap + a + b
                big_c = a * gap
                disc = big_b * big_b - 4.0 * big_a * big_c
                if disc < 0.0:
                    disc = 0.0
                sq = math.sqrt(disc)
                qf = 0.5 * (big_b + (sq if big_b >= 0.0 else -sq))
                x = 0.5 * gap
                if qf != 0.0:
                    r2 = big_c / qf
                    if 0.0 < r2 < gap:
                        x = r2
                    elif big_a != 0.0:
                        r1 = qf / big_a
                        if 0.0 < r1 < gap:
                            x = r1
                t = x - gap if go_right else x
            else:
                s = fm - 1.0 + 2.0 * z2[k - 1] / total
                den = 1.0 + s
                x = z2[k - 1] / den if den > 0.0 else total
                if not (0.0 < x <= total) or not math.isfinite(x):
                    x = 0.5 * total
                t = x
            span = high - low
            t = min(max(t, low + 1e-3 * span), high - 1e-3 * span)

            # Local surrogate pole pair in shifted coordinates; poles at or
            # left of sp lump into the left surrogate pole.
            if i < k - 1:
                oa = -gap if go_right else 0.0
                ob = 0.0 if go_right else gap
                sp = i
            elif k > 1:
                oa = d[k - 2] - d[k - 1]
                ob = 0.0
                sp = k - 2
            else:
                oa = -(1.0 + total)
                ob = 0.0
                sp = -1

            wtol = eps8 * gap
            for _ in range(MAX_ROOT_ITER):
                f = 1.0
                fp = 0.0
                left = 0.0
                for j in range(k):
                    den_j = (d[j] - sv) - t
                    term = z2[j] / den_j
                    f += term
                    c = term / den_j
                    fp += c
                    if j <= sp:
                        left += c
                if f > 0.0:
                    high = t
                else:
                    low = t

                if abs(f) <= 1e-13 * (1.0 + abs(fp) * gap) or (high - low) <= wtol:
                    ok[i] = True
                    break

                den_a = oa - t
                den_b = ob - t
                ca = left * den_a * den_a
                cb = (fp - left) * den_b * den_b
                big_a = 1.0 + (f - 1.0 - ca / den_a - cb / den_b)
                big_b = big_a * (oa + ob) + ca + cb
                big_c = big_a * oa * ob + ca * ob + cb * oa
                disc = big_b * big_b - 4.0 * big_a * big_c
                if disc < 0.0:
                    disc = 0.0
                sq = math.sqrt(disc)
                qf = 0.5 * (big_b + (sq if big_b >= 0.0 else -sq))
                cand = 0.5 * (low + high)
                if big_a != 0.0:
                    r1 = qf / big_a
                    if low < r1 < high:
                        cand = r1
                    elif qf != 0.0:
                        r2 = big_c / qf
                        if low < r2 < high:
                            cand = r2
                elif qf != 0.0:
                    r2 = big_c / qf
                    if low < r2 < high:
                        cand = r2
                if cand == t:
                    ok[i] = True
                    break
                t = cand
            tau[i] = t
            shift_idx[i] = si
        return tau, shift_idx, ok

    return solve


_secular_solve_compiled = _build_compiled_solver()


def _build_compiled_query():
    if _secular_solve_compiled is None:
        return None
    from numba import njit

    solve = _secular_solve_compiled

    @njit(cache=True, fastmath=False)
    def query(eigvecs, eigvals, u, rank_tol, weight_tol, equal_tol):
        """Generic-case eigenvalue query; status 1 requests the slow path."""
        m, r = eigvecs.shape
        v = eigvecs.T @ u
        u_par = eigvecs @ v
        unorm2 = 0.0
        alpha2 = 0.0
        for j in range(m):
            unorm2 += u[j] * u[j]
            resid = u[j] - u_par[j]
            alpha2 += resid * resid
        empty = np.empty(0)
        if unorm2 == 0.0:
            return empty, 1
        lam_max = eigvals[r - 1]
        threshold = rank_tol * max(math.sqrt(unorm2), math.sqrt(lam_max))
        alpha = math.sqrt(alpha2)
        grow = alpha > threshold and r < m

        k = r + 1 if grow else r
        d = np.empty(k)
        z = np.empty(k)
        if grow:
            d[0] = 0.0
            z[0] = alpha
            for j in range(r):
                d[j + 1] = eigvals[j]
                z[j + 1] = v[j]
        else:
            for j in range(r):
                d[j] = eigvals[j]
                z[j] = v[j]

        znorm2 = 0.0
        for j in range(k):
            znorm2 += z[j] * z[j]
        wtol = weight_tol * math.sqrt(znorm2)
        etol = equal_tol * max(1.0, lam_max)
        for j in range(k):
            if abs(z[j]) <= wtol:
                return empty, 1
            if j and d[j] - d[j - 1] <= etol:
                return empty, 1

        z2 = z * z
        total = z2.sum()
        tau, shift_idx, ok = solve(d, z2, total)
        if not ok.all():
            return empty, 2
        roots = np.empty(k)
        for j in range(k):
            roots[j] = d[shift_idx[j]] + tau[j]
        return roots, 0

    return query


_query_fast_compiled = _build_compiled_query()


def _initial_offsets(d, z2, gaps, f_mid, go_right, shift_val, total):
    """Starting offsets from a two-pole rational surrogate per interval.

    Freezing every term except the interval's own two poles at the midpoint
    turns the root condition into a quadratic; its in-interval root is a far
    better start than the midpoint and typically leaves only a few Newton
    steps.  The returned offsets are relative to the chosen shift pole.
    """
    k = d.size
    x = np.empty(k)

    if k > 1:
        a = z2[:-1]
        b = z2[1:]
        g = gaps[:-1]
        # Residual of the frozen terms at the midpoint; the two local pole
        # terms at the midpoint are -2a/g and +2b/g.
        s = f_mid[:-1] - 1.0 + 2.0 * a / g - 2.0 * b / g
        big_a = 1.0 + s
        big_b = big_a * g + a + b
        big_c = a * g
        disc = np.maximum(big_b * big_b - 4.0 * big_a * big_c, 0.0)
        sq = np.sqrt(disc)
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = np.where(big_b >= 0.0, (big_b + sq), (big_b - sq)) / (2.0 * big_a)
            r2 = big_c / (big_a * r1)
            lin = big_c / big_b
        cand = np.where((r2 > 0.0) & (r2 < g), r2, r1)
        cand = np.where(np.isfinite(cand) & (cand > 0.0) & (cand < g), cand, lin)
        cand = np.where(
            np.isfinite(cand) & (cand > 0.0) & (cand < g), cand, 0.5 * g
        )
        x[:-1] = cand

    # Open-ended last interval: one-pole surrogate with the rest frozen.
    s_last = f_mid[-1] - 1.0 + 2.0 * z2[-1] / total
    denom = 1.0 + s_last
    x_last = z2[-1] / denom if denom > 0.0 else total
    if not (0.0 < x_last <= total) or not math.isfinite(x_last):
        x_last = 0.5 * total
    x[-1] = x_last

    # Convert from pole-i offsets to offsets from the chosen shift pole.
    return np.where(go_right, x - gaps, x)


def loewner_weights(old_eigvals, new_eigvals):
    """Weight vector whose rank-1 update maps one spectrum onto another.

    Given strictly interlacing spectra (old_i < new_i < old_{i+1}, both
    ascending), returns the unique nonnegative v with
    eig(diag(old) + v v^T) = new.  Deriving eigenvectors from this
    reconstructed vector instead of the raw update weights keeps them
    orthogonal even when two new eigenvalues nearly collide.
    """
    d = np.asarray(old_eigvals, dtype=np.float64)
    lam = np.asarray(new_eigvals, dtype=np.float64)
    k = d.size
    if lam.size != k:
        raise InvalidArgumentError("spectra must have equal length")
    if k == 0:
        return np.empty(0)
    scale = max(1.0, float(np.max(np.abs(d))), float(np.max(np.abs(lam))))
    slack = 16.0 * _EPS * scale
    ok = np.all(lam >= d - slack) and np.all(lam[:-1] <= d[1:] + slack)
    if not ok:
        raise NumericalError("spectra do not interlace")
    diff_new = lam[:, None] - d[None, :]  # [j, i] = new_j - old_i
    return _weights_from_differences(d, diff_new)


def _weights_from_differences(d, diff_new):
    """Reconstructed weights from the precomputed matrix new_j - old_i.

    The products of differences are accumulated in log space to dodge
    overflow; a collapsed root (zero difference) yields a zero weight.
    """
    k = d.size
    diff_old = d[None, :] - d[:, None]  # [j, i] = old_j - old_i
    v = np.empty(k)
    for i in range(k):
        num = diff_new[:, i]
        if np.any(num == 0.0):
            v[i] = 0.0
            continue
        den = np.delete(diff_old[:, i], i)
        log_num = float(np.sum(np.log(np.abs(num))))
        log_den = float(np.sum(np.log(np.abs(den))))
        v[i] = math.exp(0.5 * (log_num - log_den))
    return v


@dataclass
class _Update:
    """Everything a query or commit needs to know about one rank-1 update."""

    mode: str                 # "noop", "preserve", "increase" or "downdate"
    poles: np.ndarray         # working (ascending) pole list
    plan: DeflationPlan
    roots: np.ndarray
    shift_idx: np.ndarray
    tau: np.ndarray
    basis_extra: np.ndarray | None = None  # unit residual direction if rank grew
    zero_floor: float = 0.0   # downdated eigenvalues at or below this vanish


class SpectralState:
    """Eigendecomposition of the Gram matrix of the committed rows.

    ``eigvecs`` is m x r with orthonormal columns and ``eigvals`` holds the
    r strictly positive eigenvalues ascending.  Queries are read-only and
    allocate their own scratch, so any number may run concurrently against
    a frozen state; commits require exclusive access.
    """

    def __init__(self, dim):
        if dim <= 0:
            raise InvalidArgumentError("dimension must be positive")
        self.dim = int(dim)
        self.eigvals = np.empty(0, dtype=np.float64)
        self.eigvecs = np.empty((self.dim, 0), dtype=np.float64)
        self.commits = 0
        self.committed_sq_norm = 0.0

    @property
    def rank(self):
        return self.eigvals.size

    def copy(self):
        dup = SpectralState(self.dim)
        dup.eigvals = self.eigvals.copy()
        dup.eigvecs = self.eigvecs.copy()
        dup.commits = self.commits
        dup.committed_sq_norm = self.committed_sq_norm
        return dup

    def trace(self):
        return float(np.sum(self.eigvals))

    def matrix(self):
        """Densify B = Q diag(lam) Q^T (tests and small-scale checks only)."""
        return (self.eigvecs * self.eigvals) @ self.eigvecs.T

    def orthogonality_drift(self):
        if self.rank == 0:
            return 0.0
        g = self.eigvecs.T @ self.eigvecs
        np.fill_diagonal(g, np.diag(g) - 1.0)
        return float(np.max(np.abs(g)))


def _prepare_update(state, u, rho):
    """Classify a rank-1 update and solve its reduced secular problem."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (state.dim,):
        raise InvalidArgumentError(
            f"update vector has shape {u.shape}, expected ({state.dim},)"
        )
    if rho not in (1, -1, 1.0, -1.0):
        raise InvalidArgumentError("rho must be +1 or -1")
    rho = float(rho)

    none = np.empty(0)
    no_idx = np.empty(0, dtype=np.intp)
    unorm = float(np.linalg.norm(u))
    if unorm == 0.0:
        return u, _Update("noop", state.eigvals.copy(), DeflationPlan(size=0),
                          none, no_idx, none)

    r = state.rank
    lam_max = float(state.eigvals[-1]) if r else 0.0
    v = state.eigvecs.T @ u if r else none
    u_perp = u - state.eigvecs @ v if r else u.copy()
    alpha = float(np.linalg.norm(u_perp))
    threshold = RANK_TOL * max(unorm, math.sqrt(lam_max))

    if rho > 0:
        if alpha > threshold and r < state.dim:
            poles = np.concatenate(([0.0], state.eigvals))
            weights = np.concatenate(([alpha], v))
            mode = "increase"
            basis_extra = u_perp / alpha
        else:
            poles = state.eigvals.copy()
            weights = v
            mode = "preserve"
            basis_extra = None
    else:
        # Downdate: the removed row has to lie in the current span, and the
        # problem is solved in negated, reverse-sorted form.
        scale = max(lam_max, unorm * unorm, 1e-300)
        if alpha * alpha > 1e-7 * scale:
            raise PsdViolationError(
                "downdate vector leaves the current span "
                f"(residual norm {alpha:.3e}); result would not stay PSD"
            )
        if r == 0:
            raise PsdViolationError("cannot downdate an empty factorization")
        poles = -state.eigvals[::-1]
        weights = v[::-1].copy()
        mode = "downdate"
        basis_extra = None

    plan = deflate(poles, weights)
    if plan.active.size:
        roots, sidx, tau = secular_roots(
            SecularProblem(poles[plan.active], plan.active_weights),
            return_shifts=True,
        )
    else:
        roots, sidx, tau = none, no_idx, none
    upd = _Update(mode, poles, plan, roots, sidx, tau, basis_extra)

    if mode == "downdate":
        scale = max(lam_max, unorm * unorm, 1e-300)
        upd.zero_floor = 1e-10 * scale
        new_min = -_merged_working(upd)[-1]
        if new_min < -1e-7 * scale:
            raise PsdViolationError(
                f"downdate drove an eigenvalue to {new_min:.3e}"
            )
    return u, upd


def _merged_working(upd):
    """Working-order spectrum with secular roots substituted in."""
    merged = upd.poles.copy()
    if upd.plan.active.size:
        merged[upd.plan.active] = upd.roots
    return merged


def _final_eigenvalues(upd):
    """Ascending strictly positive spectrum implied by a prepared update."""
    if upd.mode == "noop":
        return upd.poles.copy()
    merged = _merged_working(upd)
    if upd.mode == "downdate":
        vals = -merged[::-1]
    else:
        vals = np.sort(merged)
    return vals[vals > upd.zero_floor]


def eigenvalues_after_rank_one(state, u, rho=1):
    """Eigenvalues of B + rho*u*u^T without touching the state.

    Returns ``(new_eigvals, new_rank)``.  Dispatches between the
    rank-preserving path (residual of u within the current span below
    threshold: r x r reduced problem) and the rank-increasing path (a zero
    pole carrying the residual norm joins the problem).  Downdates solve
    the negated, reverse-sorted problem and report a rank drop when the
    smallest eigenvalue lands on zero.

    Additions with no repeated eigenvalues and no negligible weights run
    entirely in the compiled kernel; anything needing deflation falls back
    to the general path.
    """
    if (
        rho in (1, 1.0)
        and _query_fast_compiled is not None
        and state.rank
        and isinstance(u, np.ndarray)
        and u.dtype == np.float64
        and u.shape == (state.dim,)
    ):
        vals, status = _query_fast_compiled(
            state.eigvecs, state.eigvals, np.ascontiguousarray(u),
            RANK_TOL, WEIGHT_TOL, EQUAL_TOL,
        )
        if status == 0:
            return vals, vals.size
        if status == 2:
            raise NumericalError(
                "secular root iteration did not converge during a fast query"
            )
    _, upd = _prepare_update(state, u, rho)
    vals = _final_eigenvalues(upd)
    return vals, vals.size


def commit_rank_one(state, u, rho=1):
    """Apply B <- B + rho*u*u^T, updating eigenvalues and eigenvectors.

    Reduced eigenvectors come from (diag(poles) - root_k I)^{-1} w with the
    reconstructed weight vector w; group reflector sign flips are undone,
    vectors are lifted back to the full coordinate set and rotated by the
    block reflectors and the current basis.  Returns the mutated state.
    """
    u, upd = _prepare_update(state, u, rho)
    if upd.mode == "noop":
        return state

    plan = upd.plan
    if upd.mode == "increase":
        basis = np.concatenate((upd.basis_extra[:, None], state.eigvecs), axis=1)
    else:
        basis = state.eigvecs

    transform = np.eye(plan.size)
    if plan.active.size:
        d_act = upd.poles[plan.active]
        # diff_new[j, i] = root_j - pole_i, assembled from the shifted
        # representation so near-pole roots keep full relative precision.
        diff_new = (d_act[upd.shift_idx][:, None] - d_act[None, :]) + upd.tau[:, None]
        w_rec = _weights_from_differences(d_act, diff_new)
        with np.errstate(divide="ignore", invalid="ignore"):
            vecs = np.where(diff_new != 0.0, -w_rec[None, :] / diff_new, 0.0).T
        for j, i in np.argwhere(diff_new == 0.0):
            vecs[:, j] = 0.0
            vecs[i, j] = 1.0
        vecs /= np.linalg.norm(vecs, axis=0)
        signs = np.where(plan.active_weights < 0.0, -1.0, 1.0)
        vecs *= signs[:, None]
        transform[np.ix_(plan.active, plan.active)] = vecs

    for idx, block in zip(plan.groups, plan.householder_blocks):
        w_unit, _ = block
        transform[idx, :] = apply_reflector(w_unit, transform[idx, :])

    merged = _merged_working(upd)
    if upd.mode == "downdate":
        new_vals = -merged[::-1]
        transform = transform[::-1, ::-1]
    else:
        order = np.argsort(merged, kind="stable")
        new_vals = merged[order]
        transform = transform[:, order]

    keep = new_vals > upd.zero_floor
    if not np.all(keep):
        new_vals = new_vals[keep]
        transform = transform[:, keep]

    state.eigvals = new_vals
    state.eigvecs = basis @ transform
    state.commits += 1
    state.committed_sq_norm += rho * float(u @ u)

    drift = state.orthogonality_drift()
    if drift > FAIL_DRIFT:
        raise NumericalError(
            f"eigenbasis drift {drift:.3e} exceeds the recoverable limit"
        )
    if drift > REORTH_DRIFT or state.commits % REORTH_EVERY == 0:
        _reorthogonalize(state)
    return state


def _reorthogonalize(state):
    """Modified Gram-Schmidt pass over the eigenvector columns."""
    q = state.eigvecs
    for i in range(q.shape[1]):
        col = q[:, i]
        if i:
            col = col - q[:, :i] @ (q[:, :i].T @ col)
        norm = float(np.linalg.norm(col))
        if norm == 0.0:
            raise NumericalError("eigenbasis collapsed during re-orthogonalization")
        q[:, i] = col / norm


def dense_eigen_oracle(mat):
    """Ascending eigenvalues of a symmetric matrix via a dense solver.

    Reference baseline used by tests and the benchmark's oracle arm.
    """
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    if mat.size:
        asym = float(np.max(np.abs(mat - mat.T)))
        if asym > 1e-10 * max(1.0, float(np.max(np.abs(mat)))):
            raise InvalidArgumentError("matrix is not symmetric")
    return np.linalg.eigvalsh(mat)


def check_interlacing(old_eigvals, new_eigvals, rho, u_sq_norm, tol=1e-10):
    """Verify the eigenvalue separation chains for one rank-1 update.

    For rho=+1: old_i <= new_i <= old_{i+1} and new_max <= old_max + ||u||^2;
    for rho=-1 the mirrored chain.  A grown rank is handled by padding the
    old spectrum with a leading zero, a dropped rank by padding the new one.
    Violations beyond ``tol`` (relative to the spectrum scale) raise
    NumericalError.
    """
    old = np.asarray(old_eigvals, dtype=np.float64)
    new = np.asarray(new_eigvals, dtype=np.float64)
    if rho > 0 and new.size == old.size + 1:
        old = np.concatenate(([0.0], old))
    if rho < 0 and new.size == old.size - 1:
        new = np.concatenate(([0.0], new))
    if new.size != old.size:
        raise NumericalError("rank changed by more than one in a rank-1 update")
    if old.size == 0:
        return
    scale = max(1.0, float(np.max(np.abs(old))), u_sq_norm)
    slack = tol * scale
    if rho > 0:
        ok = (
            np.all(new >= old - slack)
            and np.all(new[:-1] <= old[1:] + slack)
            and new[-1] <= old[-1] + u_sq_norm + slack
        )
    else:
        ok = (
            np.all(new <= old + slack)
            and np.all(new[1:] >= old[:-1] - slack)
            and new[0] >= old[0] - u_sq_norm - slack
        )
    if not ok:
        raise NumericalError("rank-1 update violated eigenvalue interlacing")
