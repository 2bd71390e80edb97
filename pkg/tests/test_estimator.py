import math

import numpy as np
import pytest

from vqpt import estimator, qcore
from vqpt.ansatz import AnsatzSpec, ParamVector, Variant, build_unitary
from vqpt.estimator import (
    EXACT,
    ShotPlan,
    overlap_re_im,
    ptvqc_overlap_real,
    sample_bits,
    uvqsvd_eigenphase,
    x_prep,
)
from vqpt.qcore import Rng, UnitaryMatrix


def random_params(spec, rng):
    return ParamVector(rng.uniform(0, 2 * np.pi, spec.n_params))


class TestShotPlan:
    def test_rejects_negative_shots(self):
        with pytest.raises(ValueError):
            ShotPlan(-1)

    def test_requires_rng_for_shots(self):
        with pytest.raises(ValueError):
            ShotPlan(100, None)


class TestSampleBits:
    def test_deterministic_distribution(self):
        counts = sample_bits([1.0, 0.0], 50, Rng(0))
        assert counts[0] == 50 and counts[1] == 0

    def test_binomial_concentration(self):
        counts = sample_bits([0.5, 0.5], 100_000, Rng(1))
        assert abs(counts[0] / 100_000 - 0.5) < 0.01

    def test_fixed_seed_reproduces_counts(self):
        a = sample_bits([0.3, 0.7], 1000, Rng(7))
        b = sample_bits([0.3, 0.7], 1000, Rng(7))
        assert np.array_equal(a, b)

    def test_tiny_negative_probability_clamped(self):
        counts = sample_bits([1.0 + 1e-13, -1e-13], 10, Rng(0))
        assert counts.sum() == 10

    def test_large_negative_probability_rejected(self):
        with pytest.raises(ValueError):
            sample_bits([1.1, -0.1], 10, Rng(0))

    def test_bad_normalization_rejected(self):
        with pytest.raises(ValueError):
            sample_bits([0.5, 0.4], 10, Rng(0))


class TestXPrep:
    def test_maps_zero_to_basis_state(self):
        for n in (1, 2, 3):
            for index in range(2 ** n):
                u = x_prep(n, index)
                assert u.mat[index, 0] == 1.0
                assert qcore.is_unitary(u, 1e-12)


class TestPtvqcOverlap:
    def test_identical_circuit_gives_one(self):
        spec = AnsatzSpec(2, 2, Variant.PTVQC)
        params = random_params(spec, Rng(0))
        target = build_unitary(spec, params)
        for i in range(4):
            assert ptvqc_overlap_real(target, spec, params, i) == pytest.approx(1.0, abs=1e-12)

    def test_opposite_global_phase_gives_minus_one(self):
        spec = AnsatzSpec(1, 1, Variant.PTVQC)
        params = random_params(spec, Rng(1))
        target = UnitaryMatrix(2, -build_unitary(spec, params).mat)
        assert ptvqc_overlap_real(target, spec, params, 0) == pytest.approx(-1.0, abs=1e-12)

    def test_matches_direct_inner_product(self):
        rng = Rng(2)
        spec = AnsatzSpec(2, 2, Variant.PTVQC)
        for trial in range(20):
            params = random_params(spec, rng)
            target = qcore.haar_unitary(4, rng)
            model = build_unitary(spec, params)
            i = trial % 4
            direct = float(np.real(np.vdot(target.mat[:, i], model.mat[:, i])))
            assert ptvqc_overlap_real(target, spec, params, i) == pytest.approx(direct, abs=1e-12)

    def test_probabilities_form_distribution(self):
        # p0 derived from the interference identity stays in [0, 1]
        rng = Rng(3)
        spec = AnsatzSpec(3, 2, Variant.PTVQC)
        for _ in range(10):
            re = ptvqc_overlap_real(qcore.haar_unitary(8, rng), spec, random_params(spec, rng), 0)
            p0 = 0.5 + 0.5 * re
            assert -1e-12 <= p0 <= 1 + 1e-12

    def test_circuit_outcome_identity(self):
        # the ancilla marginal satisfies p0 + p1 = 1 and p0 = 1/2 + Re/2 with
        # Re taken from the direct statevector inner product
        rng = Rng(19)
        spec = AnsatzSpec(2, 2, Variant.PTVQC)
        for trial in range(10):
            params = random_params(spec, rng)
            target = qcore.haar_unitary(4, rng)
            model = build_unitary(spec, params)
            i = trial % 4
            state = qcore.StateVector.basis(3, i)
            state = qcore.apply_gate(state, qcore.h(), [2])
            state = qcore.apply_controlled(state, target, [0, 1], 2, 1)
            state = qcore.apply_controlled(state, model, [0, 1], 2, 0)
            state = qcore.apply_gate(state, qcore.h(), [2])
            psi = state.amps.reshape(2, 4)
            p0, p1 = float(np.sum(np.abs(psi[0]) ** 2)), float(np.sum(np.abs(psi[1]) ** 2))
            direct = float(np.real(np.vdot(target.mat[:, i], model.mat[:, i])))
            assert abs(p0 + p1 - 1.0) < 1e-12
            assert abs(p0 - (0.5 + 0.5 * direct)) < 1e-12

    def test_shot_mode_is_deterministic_under_seed(self):
        spec = AnsatzSpec(1, 1, Variant.PTVQC)
        params = random_params(spec, Rng(4))
        target = qcore.haar_unitary(2, Rng(5))
        a = ptvqc_overlap_real(target, spec, params, 0, ShotPlan(500, Rng(9)))
        b = ptvqc_overlap_real(target, spec, params, 0, ShotPlan(500, Rng(9)))
        assert a == b

    def test_shot_mode_approaches_exact(self):
        spec = AnsatzSpec(1, 1, Variant.PTVQC)
        params = random_params(spec, Rng(6))
        target = qcore.haar_unitary(2, Rng(7))
        exact = ptvqc_overlap_real(target, spec, params, 0)
        noisy = ptvqc_overlap_real(target, spec, params, 0, ShotPlan(200_000, Rng(8)))
        assert abs(noisy - exact) < 0.01


class TestOverlapReIm:
    def test_equal_preparations_give_unity(self):
        v = qcore.haar_unitary(4, Rng(0))
        z = overlap_re_im(v, v)
        assert z.real == pytest.approx(1.0, abs=1e-12)
        assert z.imag == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_preparations_give_zero(self):
        z = overlap_re_im(qcore.identity(1), qcore.x())
        assert abs(z) < 1e-12

    def test_matches_direct_inner_product(self):
        rng = Rng(1)
        for n in (1, 2, 3, 4, 5):
            for _ in range(20 if n <= 3 else 5):
                v = qcore.haar_unitary(2 ** n, rng)
                w = qcore.haar_unitary(2 ** n, rng)
                direct = complex(np.vdot(w.mat[:, 0], v.mat[:, 0]))
                z = overlap_re_im(v, w)
                assert abs(z - direct) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            overlap_re_im(qcore.identity(1), qcore.identity(2))


class TestUvqsvdEigenphase:
    def test_identity_target(self):
        spec = AnsatzSpec(2, 1, Variant.UVQSVD)
        params = random_params(spec, Rng(0))
        for i in range(4):
            mag, phase = uvqsvd_eigenphase(qcore.identity(2), spec, params, i)
            assert mag == pytest.approx(1.0, abs=1e-12)
            assert min(phase, 2 * np.pi - phase) < 1e-6

    def test_diagonal_eigenphase_readout(self):
        target = UnitaryMatrix(2, np.diag([1.0, np.exp(1j * np.pi / 4)]))
        spec = AnsatzSpec(1, 1, Variant.UVQSVD)
        params = ParamVector(np.zeros(3))  # circuit is the identity
        mag, phase = uvqsvd_eigenphase(target, spec, params, 1)
        assert mag == pytest.approx(1.0, abs=1e-12)
        assert phase == pytest.approx(np.pi / 4, abs=1e-12)

    def test_matches_direct_expectation(self):
        rng = Rng(2)
        spec = AnsatzSpec(2, 2, Variant.UVQSVD)
        for trial in range(10):
            params = random_params(spec, rng)
            target = qcore.haar_unitary(4, rng)
            model = build_unitary(spec, params)
            i = trial % 4
            direct = complex(np.vdot(model.mat[:, i], target.mat @ model.mat[:, i]))
            mag, phase = uvqsvd_eigenphase(target, spec, params, i)
            assert mag == pytest.approx(abs(direct), abs=1e-12)
            assert (mag * np.exp(1j * phase)) == pytest.approx(direct, abs=1e-11)


class TestExactModeEquivalence:
    def test_all_circuits_match_oracle_across_sizes(self):
        # estimator outputs in exact mode equal statevector inner products
        rng = Rng(11)
        cases_per_n = {1: 40, 2: 30, 3: 20, 4: 6, 5: 4}
        for n, cases in cases_per_n.items():
            spec = AnsatzSpec(n, 2, Variant.PTVQC)
            for _ in range(cases):
                params = random_params(spec, rng)
                target = qcore.haar_unitary(2 ** n, rng)
                model = build_unitary(spec, params)
                i = int(rng.integers(0, 2 ** n))
                direct = float(np.real(np.vdot(target.mat[:, i], model.mat[:, i])))
                assert abs(ptvqc_overlap_real(target, spec, params, i) - direct) < 1e-12
