import numpy as np
import pytest

from spectral_appraise.eigen import SpectralState


def assert_spectra_match(got, reference_full, dim, rel=1e-7):
    """Compare a kept spectrum against a full dense one, zero-padded.

    Tiny eigenvalues sit at the dense solver's noise floor (~eps * lam_max),
    so the comparison uses a mixed absolute/relative tolerance.
    """
    got = np.asarray(got)
    ref = np.sort(np.maximum(np.asarray(reference_full), 0.0))
    scale = max(1.0, float(ref[-1]) if ref.size else 1.0)
    padded = np.zeros(dim)
    if got.size:
        padded[dim - got.size:] = got
    assert padded.size == ref.size
    np.testing.assert_array_less(
        np.abs(padded - ref), 1e-12 * scale + rel * np.abs(ref) + 1e-300
    )


def synthetic_state(m, r, seed=0, spread=(0.5, 2.0)):
    """A valid SpectralState built directly (orthonormal basis + spectrum)."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((m, r)))
    state = SpectralState(m)
    state.eigvecs = np.ascontiguousarray(q)
    state.eigvals = np.sort(rng.uniform(*spread, size=r))
    state.committed_sq_norm = float(state.eigvals.sum())
    return state


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
