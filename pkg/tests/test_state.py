import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from ebits.state import (
    LocalUnitary,
    ProjectorSet,
    apply_local,
    basis_state,
    fidelity,
    make_state,
    measure_projectors,
    outcome_probabilities,
    pi_rotation,
    project,
    random_state,
    random_unitary,
    tensor,
)

UP = basis_state("0")
DOWN = basis_state("1")
SINGLET_AMPS = (0, 1 / math.sqrt(2), -1 / math.sqrt(2), 0)

seeds = st.integers(0, 2**32 - 1)


class TestMakeState:
    def test_basis_state(self):
        s = make_state(1, (1, 0))
        np.testing.assert_array_equal(s.amps, [1, 0])
        assert s.num_qubits == 1

    def test_singlet(self):
        s = make_state(2, SINGLET_AMPS, ["Alice", "Bob"])
        assert s.norm == pytest.approx(1.0, abs=1e-12)
        assert [lab.owner for lab in s.labels] == ["Alice", "Bob"]

    def test_renormalization(self):
        s = make_state(1, (3, 4), normalize=True)
        np.testing.assert_allclose(s.amps, [0.6, 0.8], atol=1e-15)

    def test_small_drift_is_renormalized(self):
        s = make_state(1, (1 + 5e-7, 0))
        assert s.norm == pytest.approx(1.0, abs=1e-15)

    def test_large_drift_rejected(self):
        with pytest.raises(ValueError, match="norm"):
            make_state(1, (3, 4))

    @pytest.mark.parametrize("amps", [(1, 0, 0), (1,), (1, 0, 0, 0, 0)])
    def test_length_mismatch(self, amps):
        with pytest.raises(ValueError):
            make_state(1, amps)

    def test_zero_norm(self):
        with pytest.raises(ValueError, match="zero-norm"):
            make_state(1, (0, 0), normalize=True)

    def test_label_count(self):
        with pytest.raises(ValueError, match="labels"):
            make_state(2, SINGLET_AMPS, ["Alice"])

    def test_unknown_owner(self):
        with pytest.raises(ValueError, match="owner"):
            make_state(1, (1, 0), ["Carol"])

    def test_non_finite(self):
        with pytest.raises(ValueError, match="finite"):
            make_state(1, (np.nan, 1))

    def test_big_endian(self):
        # |up, down> has qubit 1 set, the least significant bit
        assert np.argmax(np.abs(basis_state("01").amps)) == 1
        assert np.argmax(np.abs(basis_state("10").amps)) == 2

    def test_amplitudes_read_only(self):
        s = make_state(1, (1, 0))
        with pytest.raises(ValueError):
            s.amps[0] = 0


class TestTensor:
    def test_basis_product(self):
        np.testing.assert_array_equal(tensor(UP, DOWN).amps, [0, 1, 0, 0])

    def test_kirk_times_singlet(self):
        a, b = 0.6, 0.8j
        kirk = make_state(1, (a, b), ["Bob"])
        s = tensor(kirk, make_state(2, SINGLET_AMPS, ["Alice", "Bob"]))
        # (a|up> + b|down>)(|up down> - |down up>)/sqrt2 over (K, A, B)
        expected = np.zeros(8, complex)
        expected[0b001], expected[0b010] = a / math.sqrt(2), -a / math.sqrt(2)
        expected[0b101], expected[0b110] = b / math.sqrt(2), -b / math.sqrt(2)
        np.testing.assert_allclose(s.amps, expected, atol=1e-15)
        assert [lab.owner for lab in s.labels] == ["Bob", "Alice", "Bob"]

    def test_two_pairs(self):
        alpha, beta = math.sqrt(0.75), math.sqrt(0.25)
        pair = make_state(2, (alpha, 0, 0, beta))
        s = tensor(pair, pair)
        expected = np.zeros(16)
        expected[0b0000] = alpha**2
        expected[0b1111] = beta**2
        expected[0b0011] = expected[0b1100] = alpha * beta
        np.testing.assert_allclose(s.amps, expected, atol=1e-15)

    @given(seeds)
    def test_associativity(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (random_state(int(n), rng) for n in rng.integers(1, 4, size=3))
        assert fidelity(tensor(tensor(a, b), c), tensor(a, tensor(b, c))) == pytest.approx(1.0, abs=1e-12)


class TestApplyLocal:
    def test_identity(self, rng):
        s = random_state(3, rng)
        out = apply_local(s, LocalUnitary(1, np.eye(2)))
        np.testing.assert_allclose(out.amps, s.amps)

    def test_z_rotation(self):
        a, b = 0.6, 0.8
        s = make_state(1, (a, -b))
        out = apply_local(s, LocalUnitary(0, pi_rotation("z")))
        assert fidelity(out, make_state(1, (a, b))) == pytest.approx(1.0, abs=1e-12)

    def test_y_rotation_against_matrix_exponential(self):
        a, b = 0.6, 0.8j
        s = make_state(1, (-b, a))  # a|down> - b|up>
        oracle = scipy.linalg.expm(-0.5j * math.pi * np.array([[0, -1j], [1j, 0]]))
        out = apply_local(s, LocalUnitary(0, oracle))
        assert fidelity(out, make_state(1, (a, b))) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(oracle, pi_rotation("y"), atol=1e-12)

    def test_targets_only_one_qubit(self):
        s = basis_state("000")
        out = apply_local(s, LocalUnitary(1, pi_rotation("x")))
        assert fidelity(out, basis_state("010")) == pytest.approx(1.0)

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            apply_local(UP, LocalUnitary(1, np.eye(2)))

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError, match="unitary"):
            LocalUnitary(0, np.array([[1, 1], [0, 1]]))

    def test_norm_preserved_1000_random(self):
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(1, 7))
            s = random_state(n, rng)
            out = apply_local(s, LocalUnitary(int(rng.integers(n)), random_unitary(rng)))
            worst = max(worst, abs(out.norm - 1))
        assert worst < 1e-10


class TestMeasure:
    def test_eigenstate(self, rng):
        rec = measure_projectors(UP, ProjectorSet.computational(0), rng)
        assert rec.outcome == 0
        assert rec.probability == pytest.approx(1.0)

    def test_bell_measurement_on_teleport_register(self, rng):
        bell = [
            np.array([0, 1, 1, 0]) / math.sqrt(2),
            np.array([0, 1, -1, 0]) / math.sqrt(2),
            np.array([1, 0, 0, 1]) / math.sqrt(2),
            np.array([1, 0, 0, -1]) / math.sqrt(2),
        ]
        kirk = make_state(1, (0.6, 0.8))
        s = tensor(kirk, make_state(2, SINGLET_AMPS))
        pset = ProjectorSet.from_vectors((0, 2), bell)
        np.testing.assert_allclose(outcome_probabilities(s, pset), 0.25, atol=1e-12)

    def test_total_z_two_pairs(self):
        p = 0.7
        pair = make_state(2, (math.sqrt(p), 0, 0, math.sqrt(1 - p)))
        s = tensor(pair, pair)
        down = np.array([bin(i).count("1") for i in range(4)])
        pset = ProjectorSet((0, 2), tuple((down == j).astype(float) for j in range(3)))
        # outcome j=1 is total z-spin zero
        assert outcome_probabilities(s, pset)[1] == pytest.approx(2 * p * (1 - p), abs=1e-12)

    def test_incomplete_set_rejected(self):
        with pytest.raises(ValueError, match="complete"):
            ProjectorSet((0,), (np.array([1.0, 0.0]),))

    def test_non_orthogonal_rejected(self):
        plus = np.array([1, 1]) / math.sqrt(2)
        with pytest.raises(ValueError):
            ProjectorSet.from_vectors((0,), [np.array([1, 0]), plus])

    def test_zero_probability_projection(self):
        with pytest.raises(ValueError, match="zero probability"):
            project(UP, ProjectorSet.computational(0), 1)

    @settings(max_examples=200)
    @given(seeds)
    def test_born_completeness_and_idempotence(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 6))
        s = random_state(n, rng)
        # random orthonormal basis on two random qubits
        q = tuple(int(x) for x in rng.choice(n, size=2, replace=False))
        z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        basis, _ = np.linalg.qr(z)
        pset = ProjectorSet.from_vectors(q, basis.T)
        assert outcome_probabilities(s, pset).sum() == pytest.approx(1.0, abs=1e-10)
        rec = measure_projectors(s, pset, rng)
        assert rec.post_state.norm == pytest.approx(1.0, abs=1e-10)
        again = outcome_probabilities(rec.post_state, pset)
        assert again[rec.outcome] == pytest.approx(1.0, abs=1e-10)

    def test_sampling_frequencies(self):
        rng = np.random.default_rng(3)
        s = make_state(1, (math.sqrt(0.3), math.sqrt(0.7)))
        pset = ProjectorSet.computational(0)
        n = 20000
        ups = sum(measure_projectors(s, pset, rng).outcome == 0 for _ in range(n))
        assert abs(ups / n - 0.3) <= 3 * math.sqrt(0.3 * 0.7 / n)


class TestFidelity:
    def test_self(self, rng):
        s = random_state(3, rng)
        assert fidelity(s, s) == pytest.approx(1.0, abs=1e-12)

    def test_global_phase(self, rng):
        s = random_state(2, rng)
        assert fidelity(s, make_state(2, -s.amps)) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert fidelity(UP, DOWN) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            fidelity(UP, basis_state("00"))
