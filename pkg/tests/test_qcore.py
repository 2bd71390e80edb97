import json
import math

import numpy as np
import pytest

from vqpt import qcore
from vqpt.qcore import Rng, StateVector, UnitaryMatrix


INV_SQRT2 = 1 / math.sqrt(2)


class TestRng:
    def test_identical_seeds_reproduce_streams(self):
        a = Rng(123).uniform(size=50)
        b = Rng(123).uniform(size=50)
        assert np.array_equal(a, b)

    def test_children_are_deterministic_and_distinct(self):
        a = Rng(5).child(1, 2).standard_normal(10)
        b = Rng(5).child(1, 2).standard_normal(10)
        c = Rng(5).child(1, 3).standard_normal(10)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_derive_seed_stable(self):
        assert Rng(9).derive_seed(4) == Rng(9).derive_seed(4)
        assert Rng(9).derive_seed(4) != Rng(9).derive_seed(5)


class TestStateVector:
    def test_basis_and_norm(self):
        s = StateVector.basis(3, 5)
        assert s.norm() == 1.0
        assert s.amps[5] == 1.0

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            StateVector(2, np.zeros(3))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            StateVector(1, np.array([np.nan, 0]))

    def test_normalize_within_tolerance(self):
        s = StateVector(1, np.array([3.0, 4.0])).normalize()
        assert abs(sum(abs(a) ** 2 for a in s.amps) - 1) < 1e-10

    def test_amps_are_immutable(self):
        s = StateVector.zero(2)
        with pytest.raises(ValueError):
            s.amps[0] = 0.5

    def test_json_round_trip(self):
        s = StateVector(2, np.array([0.5, 0.5j, -0.5, -0.5j]))
        blob = json.dumps(s.to_json())
        back = StateVector.from_json(json.loads(blob))
        assert np.allclose(back.amps, s.amps)


class TestUnitaryMatrix:
    def test_power_by_repeated_squaring(self):
        u = qcore.haar_unitary(4, Rng(0))
        assert np.allclose(u.power(5).mat, np.linalg.matrix_power(u.mat, 5))

    def test_dim_must_be_power_of_two(self):
        with pytest.raises(ValueError):
            UnitaryMatrix(3, np.eye(3))

    def test_json_round_trip_row_major(self):
        u = qcore.haar_unitary(2, Rng(1))
        back = UnitaryMatrix.from_json(u.to_json())
        assert np.allclose(back.mat, u.mat)

    def test_operator_ceiling(self):
        with pytest.raises(ValueError):
            UnitaryMatrix(2 ** 11, np.eye(2 ** 11))


class TestApplyGate:
    def test_x_on_qubit0(self):
        # qubit 0 is the least significant bit: |00> -> |01>
        s = qcore.apply_gate(StateVector.zero(2), qcore.x(), [0])
        assert np.allclose(s.amps, [0, 1, 0, 0])

    def test_h_on_single_qubit(self):
        s = qcore.apply_gate(StateVector.zero(1), qcore.h(), [0])
        assert np.allclose(s.amps, [INV_SQRT2, INV_SQRT2])

    def test_cx_builds_bell_pair(self):
        plus_high = StateVector(2, np.array([1, 0, 1, 0]) / math.sqrt(2))
        bell = qcore.apply_gate(plus_high, qcore.cx(), [1, 0])
        assert np.allclose(bell.amps, np.array([1, 0, 0, 1]) / math.sqrt(2))

    def test_bit_order_round_trip(self):
        # flipping qubit k toggles exactly bit k of the basis index
        for n in (1, 2, 3):
            for k in range(n):
                s = qcore.apply_gate(StateVector.zero(n), qcore.x(), [k])
                assert s.amps[1 << k] == 1.0

    def test_norm_preserved(self):
        rng = Rng(3)
        for _ in range(20):
            n = 3
            raw = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            s = StateVector(n, raw / np.linalg.norm(raw))
            g = qcore.haar_unitary(4, rng)
            out = qcore.apply_gate(s, g, [0, 2])
            assert abs(out.norm() ** 2 - 1) < 1e-12

    def test_gate_dimension_mismatch(self):
        with pytest.raises(ValueError):
            qcore.apply_gate(StateVector.zero(2), qcore.cx(), [0])

    def test_duplicate_and_out_of_range_indices(self):
        with pytest.raises(ValueError):
            qcore.apply_gate(StateVector.zero(2), qcore.cx(), [0, 0])
        with pytest.raises(ValueError):
            qcore.apply_gate(StateVector.zero(2), qcore.x(), [2])

    def test_listed_qubit_order_matches_tensor_embedding(self):
        # CX with control q0, target q1 acting on |01> (q0 set) flips q1
        s = qcore.apply_gate(StateVector.basis(2, 1), qcore.cx(), [0, 1])
        assert s.amps[3] == 1.0


class TestApplyControlled:
    def test_control_not_satisfied_is_identity(self):
        s = StateVector.basis(2, 0)  # control qubit 1 reads 0
        out = qcore.apply_controlled(s, qcore.x(), [0], control=1, control_value=1)
        assert np.allclose(out.amps, s.amps)

    def test_control_satisfied_applies_gate(self):
        s = StateVector.basis(2, 2)  # control qubit 1 reads 1
        out = qcore.apply_controlled(s, qcore.x(), [0], control=1, control_value=1)
        assert np.allclose(out.amps, StateVector.basis(2, 3).amps)

    def test_matches_block_matrix_oracle(self):
        rng = Rng(17)
        g = qcore.haar_unitary(4, rng)
        raw = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        s = StateVector(3, raw / np.linalg.norm(raw))
        out = qcore.apply_controlled(s, g, [0, 1], control=2, control_value=1)
        # oracle: block-diagonal matrix |0><0| x I + |1><1| x G on the full register
        full = np.kron(np.diag([1.0, 0.0]), np.eye(4)) + np.kron(np.diag([0.0, 1.0]), g.mat)
        assert np.allclose(out.amps, full @ s.amps, atol=1e-12)

    def test_control_collision_rejected(self):
        with pytest.raises(ValueError):
            qcore.apply_controlled(StateVector.zero(2), qcore.x(), [0], control=0, control_value=1)


class TestStandardGates:
    def test_catalogue_contents(self):
        cat = qcore.standard_gates()
        assert set(cat) == {"RX", "RY", "RZ", "P", "H", "X", "CX"}

    def test_ry_zero_is_identity(self):
        assert np.allclose(qcore.ry(0.0).mat, np.eye(2))

    def test_rz_inverse_angles(self):
        assert np.allclose((qcore.rz(math.pi) @ qcore.rz(-math.pi)).mat, np.eye(2))

    def test_phase_gate_after_h(self):
        # frozen from the direct 2x2 product: P(3pi/2) H |0> = (|0> - i|1>)/sqrt2
        s = qcore.apply_gate(StateVector.zero(1), qcore.h(), [0])
        s = qcore.apply_gate(s, qcore.p(1.5 * math.pi), [0])
        assert np.allclose(s.amps, [INV_SQRT2, -1j * INV_SQRT2], atol=1e-12)

    def test_rotation_conventions(self):
        theta = 0.7
        assert np.allclose(qcore.rz(theta).mat,
                           np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]))
        sx = np.array([[0, 1], [1, 0]])
        expected = (math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * sx)
        assert np.allclose(qcore.rx(theta).mat, expected)


class TestHaarUnitary:
    def test_deterministic_and_unitary(self):
        u1 = qcore.haar_unitary(2, Rng(5))
        u2 = qcore.haar_unitary(2, Rng(5))
        assert np.array_equal(u1.mat, u2.mat)
        assert qcore.is_unitary(u1, 1e-10)

    def test_first_entry_marginal_dim2(self):
        # E|U00|^2 = 1/dim for Haar; tolerance sized for the 1e4 draw budget
        rng = Rng(2024)
        vals = np.array([abs(qcore.haar_unitary(2, rng.child(i)).mat[0, 0]) ** 2
                         for i in range(10_000)])
        assert abs(vals.mean() - 0.5) < 0.02

    def test_first_entry_beta_moments(self):
        # |<0|U|0>|^2 ~ Beta(1, dim-1): check mean and second moment to 3 MC sigma
        dim = 4
        rng = Rng(99)
        vals = np.array([abs(qcore.haar_unitary(dim, rng.child(i)).mat[0, 0]) ** 2
                         for i in range(10_000)])
        mean = 1 / dim
        var = (dim - 1) / (dim ** 2 * (dim + 1))
        se_mean = math.sqrt(var / len(vals))
        assert abs(vals.mean() - mean) < 3 * se_mean
        m2 = 2 / (dim * (dim + 1))  # E X^2 for Beta(1, dim-1)
        se_m2 = np.std(vals ** 2, ddof=1) / math.sqrt(len(vals))
        assert abs(np.mean(vals ** 2) - m2) < 3 * se_m2

    def test_eigenphase_uniformity(self):
        # pooled eigenphases of Haar unitaries are marginally uniform on [0, 2pi)
        rng = Rng(7)
        phases = []
        for i in range(10_000):
            u = qcore.haar_unitary(4, rng.child(i))
            phases.extend(np.angle(np.linalg.eigvals(u.mat)) % (2 * np.pi))
        xs = np.sort(np.asarray(phases)) / (2 * np.pi)
        n = len(xs)
        grid = np.arange(1, n + 1) / n
        ks = max(np.max(grid - xs), np.max(xs - (grid - 1 / n)))
        assert ks < 0.02


class TestQft:
    def test_single_qubit_is_hadamard(self):
        assert np.allclose(qcore.qft(1).mat, qcore.h().mat)

    def test_column_zero_is_uniform(self):
        s = StateVector(2, qcore.qft(2).mat @ StateVector.zero(2).amps)
        assert np.allclose(s.amps, np.full(4, 0.5))

    def test_unitarity_up_to_n5(self):
        for n in range(1, 6):
            f = qcore.qft(n)
            assert np.max(np.abs((f @ f.dagger()).mat - np.eye(2 ** n))) < 1e-12


class TestMetrics:
    def test_fidelity_identical(self):
        s = StateVector(1, np.array([0.6, 0.8j]))
        assert qcore.fidelity_pure(s, s) == pytest.approx(1.0)

    def test_fidelity_orthogonal(self):
        assert qcore.fidelity_pure(StateVector.basis(1, 0), StateVector.basis(1, 1)) == 0.0

    def test_fidelity_plus_state(self):
        plus = qcore.apply_gate(StateVector.zero(1), qcore.h(), [0])
        assert qcore.fidelity_pure(StateVector.zero(1), plus) == pytest.approx(0.5)

    def test_fidelity_dim_mismatch(self):
        with pytest.raises(ValueError):
            qcore.fidelity_pure(StateVector.zero(1), StateVector.zero(2))

    def test_similarity_identical(self):
        u = qcore.haar_unitary(4, Rng(3))
        assert qcore.similarity(u, u) == pytest.approx(1.0)

    def test_similarity_hand_computed(self):
        # ||I - diag(1,-1)||_F = 2 and ||I||_F = sqrt2, so S = 1 - sqrt2
        a = UnitaryMatrix(2, np.eye(2))
        b = UnitaryMatrix(2, np.diag([1.0, -1.0]))
        assert qcore.similarity(a, b) == pytest.approx(1 - math.sqrt(2))

    def test_similarity_cost_identity(self):
        # ||U - V||_F^2 = 2 sum_i (1 - Re <i|U^dag V|i>) for unitary pairs
        rng = Rng(13)
        for n in (1, 2, 3, 4, 5):
            u = qcore.haar_unitary(2 ** n, rng.child(n, 0))
            v = qcore.haar_unitary(2 ** n, rng.child(n, 1))
            lhs = np.linalg.norm(u.mat - v.mat) ** 2
            rhs = 2 * np.sum(1 - np.real(np.diagonal(u.mat.conj().T @ v.mat)))
            assert abs(lhs - rhs) < 1e-10
