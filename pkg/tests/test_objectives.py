import math

import numpy as np
import pytest

from spectral_appraise.errors import InvalidArgumentError
from spectral_appraise.objectives import (
    ModularObjective,
    OracleSpectralObjective,
    SpectralObjective,
    density_normalize,
    vendi_score,
)
from spectral_appraise.phi import make_phi, weak_dr_bound


def unit_rows(*rows):
    return np.asarray(rows, dtype=np.float64)


class TestDensityNormalize:
    def test_trace_one(self, rng):
        design = density_normalize(rng.standard_normal((12, 5)))
        assert np.trace(design.T @ design) == pytest.approx(1.0)

    def test_single_row_spectra(self):
        one = density_normalize([[3.0, 4.0]])
        assert np.linalg.eigvalsh(one.T @ one)[-1] == pytest.approx(1.0)
        mono = density_normalize([[3.0, 4.0]], "monotone_e_lambda_max")
        assert np.linalg.eigvalsh(mono.T @ mono)[-1] == pytest.approx(1 / math.e)

    def test_monotone_mode_caps_largest_eigenvalue(self, rng):
        design = density_normalize(
            rng.standard_normal((20, 6)), "monotone_e_lambda_max"
        )
        lam_max = np.linalg.eigvalsh(design.T @ design)[-1]
        assert lam_max == pytest.approx(1 / math.e, rel=1e-10)

    def test_zero_row_error_names_row(self):
        mat = np.ones((4, 3))
        mat[2] = 0.0
        with pytest.raises(InvalidArgumentError, match="row 2"):
            density_normalize(mat)

    def test_unknown_mode(self, rng):
        with pytest.raises(InvalidArgumentError):
            density_normalize(rng.standard_normal((3, 2)), "weird")

    def test_log_vendi_nonnegative_after_normalization(self, rng):
        phi = make_phi("neg_xlogx")
        design = density_normalize(rng.standard_normal((15, 4)))
        obj = SpectralObjective(design, phi)
        order = rng.permutation(15)
        for i in order:
            obj.commit(int(i))
            assert obj.eval() >= -1e-12


class TestVendiScore:
    def test_uniform_two_point_spectrum_any_order(self):
        for q in (0.0, 0.5, 1.0, 2.0, 7.3):
            assert vendi_score([0.5, 0.5], q) == pytest.approx(2.0)

    def test_support_count_at_order_zero(self):
        assert vendi_score([1.0, 0.0, 0.0], 0) == 1.0

    def test_collision_order_golden(self):
        assert vendi_score([0.5, 0.25, 0.25], 2) == pytest.approx(8.0 / 3.0)

    def test_negative_order_rejected(self):
        with pytest.raises(InvalidArgumentError):
            vendi_score([0.5, 0.5], -1.0)

    def test_empty_spectrum(self):
        assert vendi_score([], 1.0) == 0.0

    def test_state_argument_accepted(self, rng):
        from conftest import synthetic_state

        state = synthetic_state(6, 3, seed=1)
        assert vendi_score(state, 1.0) == vendi_score(state.eigvals, 1.0)


class TestSpectralEval:
    def test_uniform_entropy(self):
        root_half = math.sqrt(0.5)
        obj = SpectralObjective(
            unit_rows([root_half, 0.0], [0.0, root_half]), make_phi("neg_xlogx")
        )
        obj.commit(0)
        obj.commit(1)
        assert obj.eval() == pytest.approx(math.log(2.0), abs=1e-12)

    def test_log_det_closed_form(self):
        obj = SpectralObjective(
            unit_rows([1.0, 0.0], [0.0, math.sqrt(2.0)]),
            make_phi("log_shift", t=1.0),
        )
        obj.commit(0)
        obj.commit(1)
        assert obj.eval() == pytest.approx(math.log(2.0) + math.log(3.0), abs=1e-12)

    def test_empty_set_normalized_phi(self, rng):
        design = density_normalize(rng.standard_normal((5, 3)))
        for phi in (make_phi("neg_xlogx"), make_phi("satexp"), make_phi("power")):
            assert SpectralObjective(design, phi).eval() == 0.0

    def test_zero_policy_counts_implicit_zeros(self, rng):
        t = 1e-2
        design = rng.standard_normal((6, 4))
        obj = SpectralObjective(design, make_phi("log_shift", t=t))
        assert obj.eval() == pytest.approx(4 * math.log(t))
        obj.commit(1)
        gram = np.outer(design[1], design[1]) + t * np.eye(4)
        assert obj.eval() == pytest.approx(np.linalg.slogdet(gram)[1], rel=1e-10)


class TestSpectralGain:
    def test_gain_equals_eval_difference(self, rng):
        design = density_normalize(rng.standard_normal((12, 5)))
        obj = SpectralObjective(design, make_phi("neg_xlogx"))
        for i in (0, 4, 7):
            obj.commit(i)
        for s in range(12):
            probe = obj.copy()
            probe.commit(s)
            assert obj.gain(s) == pytest.approx(
                probe.eval() - obj.eval(), abs=1e-9
            )

    def test_duplicate_row_gain_matches_recompute(self, rng):
        design = density_normalize(rng.standard_normal((8, 3)))
        obj = SpectralObjective(design, make_phi("neg_xlogx"))
        for i in (2, 5):
            obj.commit(i)
        dup_gain = obj.gain(5)
        scratch = SpectralObjective(design, make_phi("neg_xlogx"))
        for i in (2, 5, 5):
            scratch.commit(i)
        base = SpectralObjective(design, make_phi("neg_xlogx"))
        for i in (2, 5):
            base.commit(i)
        assert dup_gain == pytest.approx(scratch.eval() - base.eval(), abs=1e-9)

    def test_first_gain_is_phi_of_row_energy(self, rng):
        design = density_normalize(rng.standard_normal((6, 4)))
        for phi in (make_phi("neg_xlogx"), make_phi("satexp")):
            obj = SpectralObjective(design, phi)
            s = 3
            assert obj.gain(s) == pytest.approx(
                float(phi.value(design[s] @ design[s])), abs=1e-12
            )

    def test_submodular_spot_check(self, rng):
        for kind, kw in (("neg_xlogx", {}), ("log_shift", {"t": 0.5})):
            phi = make_phi(kind, **kw)
            for trial in range(25):
                gen = np.random.default_rng(trial)
                design = density_normalize(gen.standard_normal((14, 6)))
                perm = gen.permutation(14)
                small = SpectralObjective(design, phi)
                for i in perm[:3]:
                    small.commit(int(i))
                large = small.copy()
                for i in perm[3:8]:
                    large.commit(int(i))
                s = int(perm[9])
                assert small.gain(s) >= large.gain(s) - 1e-9

    def test_monotone_under_radius_cap(self, rng):
        design = density_normalize(
            rng.standard_normal((12, 4)), "monotone_e_lambda_max"
        )
        obj = SpectralObjective(design, make_phi("neg_xlogx"))
        for i in rng.permutation(12):
            assert obj.gain(int(i)) >= -1e-9
            obj.commit(int(i))

    def test_monotone_for_increasing_phis(self, rng):
        design = density_normalize(rng.standard_normal((10, 4)))
        phis = [
            make_phi("log_shift", t=0.3),
            make_phi("power", eta=0.5),
            make_phi("powerlaw"),
            make_phi("satexp"),
            make_phi("ratio"),
        ]
        for phi in phis:
            obj = SpectralObjective(design, phi)
            for i in range(10):
                assert obj.gain(i) >= -1e-9
                obj.commit(i)

    def test_weak_dr_gain_ratio(self, rng):
        design = density_normalize(rng.standard_normal((12, 5)))
        radius = float(np.linalg.svd(design, compute_uv=False)[0]) ** 2
        for phi in (make_phi("powerlaw"), make_phi("satexp"), make_phi("ratio")):
            zeta = weak_dr_bound(phi, radius).zeta
            perm = rng.permutation(12)
            small = SpectralObjective(design, phi)
            for i in perm[:2]:
                small.commit(int(i))
            large = small.copy()
            for i in perm[2:7]:
                large.commit(int(i))
            for s in perm[8:11]:
                assert small.gain(int(s)) >= zeta * large.gain(int(s)) - 1e-9

    def test_removal_gain(self, rng):
        design = density_normalize(rng.standard_normal((6, 3)))
        obj = SpectralObjective(design, make_phi("neg_xlogx"))
        for i in (0, 1, 2):
            obj.commit(i)
        drop = obj.gain(1, rho=-1)
        probe = obj.copy()
        probe.commit(1, rho=-1)
        assert drop == pytest.approx(probe.eval() - obj.eval(), abs=1e-9)
        assert 1 not in probe.selected

    def test_out_of_range_index(self, rng):
        obj = SpectralObjective(density_normalize(rng.standard_normal((4, 2))),
                                make_phi("neg_xlogx"))
        with pytest.raises(InvalidArgumentError):
            obj.gain(4)


class TestOracleObjective:
    def test_matches_incremental_gains(self, rng):
        design = density_normalize(rng.standard_normal((10, 4)))
        phi = make_phi("neg_xlogx")
        fast = SpectralObjective(design, phi)
        slow = OracleSpectralObjective(design, phi)
        for i in (0, 3, 8):
            fast.commit(i)
            slow.commit(i)
        for s in range(10):
            assert fast.gain(s) == pytest.approx(slow.gain(s), abs=1e-10)
        assert fast.eval() == pytest.approx(slow.eval(), abs=1e-10)


class TestModular:
    def test_gain_and_eval(self):
        obj = ModularObjective([1.0, 5.0, 2.0])
        assert obj.gain(1) == 5.0
        obj.commit(1)
        obj.commit(2)
        assert obj.eval() == 7.0
        obj.commit(2, rho=-1)
        assert obj.eval() == 5.0
