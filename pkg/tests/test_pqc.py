"""Circuit-regressor tests: layout, predictions, gradients, persistence."""

import math

import numpy as np
import pytest

from qforecast import qsim
from qforecast.pqc import (PqcModel, TrainConfig, feature_map, gradient, load_model,
                           loss, model_circuit, predict, predict_batch, save_model,
                           train)


def small_model(num_qubits=4, seed=0, **kw):
    return PqcModel.initialized(num_qubits=num_qubits, seed=seed, **kw)


class TestModelConstruction:
    def test_parameter_count_twelve_qubits(self):
        m = PqcModel.initialized()
        assert m.num_qubits == 12
        assert m.theta.shape == (48,)
        assert m.observable == "ZIIIIIIIIIII"

    def test_seeded_init_range_and_determinism(self):
        a = PqcModel.initialized(seed=7)
        b = PqcModel.initialized(seed=7)
        assert np.array_equal(a.theta, b.theta)
        assert np.max(np.abs(a.theta)) <= 0.1
        c = PqcModel.initialized(seed=8)
        assert not np.array_equal(a.theta, c.theta)

    def test_rejects_bad_theta_shape(self):
        with pytest.raises(ValueError):
            PqcModel(theta=np.zeros(10), num_qubits=12)

    def test_rejects_bad_observable(self):
        with pytest.raises(ValueError):
            PqcModel(theta=np.zeros(16), num_qubits=4, observable="QZII")


class TestFeatureMap:
    def test_zero_window_gives_zero_state(self):
        state = qsim.run_circuit(feature_map(np.zeros(4)))
        assert np.allclose(state.amplitudes, [1] + [0] * 15, atol=1e-12)

    def test_one_gate_per_feature(self):
        c = feature_map([0.1, 0.2, 0.3])
        assert len(c.gates) == 3
        assert all(g.name == "ry" for g in c.gates)
        assert [g.qubits[0] for g in c.gates] == [0, 1, 2]

    def test_scale_multiplies_angles(self):
        a = qsim.run_circuit(feature_map([0.2, -0.4], feature_scale=2.0))
        b = qsim.run_circuit(feature_map([0.4, -0.8]))
        assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-12)

    def test_locality_of_feature_changes(self):
        # changing feature i only composes an extra RY rotation on qubit i
        rng = np.random.default_rng(0)
        x = rng.uniform(-0.25, 0.25, size=4)
        x2 = x.copy()
        x2[2] += 0.3
        base = qsim.run_circuit(feature_map(x))
        moved = qsim.apply_gate(base, qsim.Gate("ry", (2,), angle=0.3))
        direct = qsim.run_circuit(feature_map(x2))
        assert np.allclose(moved.amplitudes, direct.amplitudes, atol=1e-12)


class TestModelCircuit:
    def test_gate_count_and_order_twelve_qubits(self):
        m = PqcModel.initialized()
        c = model_circuit(m, np.zeros(12))
        assert len(c.gates) == 72
        names = [g.name for g in c.gates]
        assert names[:12] == ["ry"] * 12
        assert names[12:18] == ["cnot"] * 6
        assert names[18:42] == ["rx", "ry"] * 12
        assert names[42:48] == ["cnot"] * 6
        assert names[48:] == ["rx", "ry"] * 12

    def test_entangler_patterns_twelve_qubits(self):
        m = PqcModel.initialized()
        c = model_circuit(m, np.zeros(12))
        first = [g.qubits for g in c.gates[12:18]]
        second = [g.qubits for g in c.gates[42:48]]
        assert first == [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9), (10, 11)]
        assert second == [(1, 2), (3, 4), (5, 6), (7, 8), (9, 10), (11, 0)]

    def test_theta_layout_layer_major_rx_first(self):
        m = small_model()
        m = m.with_theta(np.arange(16, dtype=float))
        c = model_circuit(m, np.zeros(4))
        rotations = [g for g in c.gates if g.name in ("rx", "ry")][4:]
        angles = [g.angle for g in rotations]
        assert angles == list(range(16))
        kinds = [g.name for g in rotations]
        assert kinds == ["rx", "ry"] * 8

    def test_zero_everything_gives_zero_state(self):
        m = PqcModel(theta=np.zeros(16), num_qubits=4)
        state = qsim.run_circuit(model_circuit(m, np.zeros(4)))
        assert np.allclose(state.amplitudes, [1] + [0] * 15, atol=1e-12)

    def test_window_length_checked(self):
        with pytest.raises(ValueError):
            model_circuit(small_model(), np.zeros(5))


class TestPredict:
    def test_zero_model_predicts_one(self):
        m = PqcModel(theta=np.zeros(16), num_qubits=4)
        assert predict(m, np.zeros(4)) == pytest.approx(1.0, abs=1e-12)

    def test_bounded(self):
        rng = np.random.default_rng(1)
        m = small_model()
        for _ in range(20):
            w = rng.uniform(-0.25, 0.25, size=4)
            p = predict(m.with_theta(rng.uniform(-math.pi, math.pi, 16)), w)
            assert -1.0 - 1e-12 <= p <= 1.0 + 1e-12

    def test_batch_matches_single(self):
        rng = np.random.default_rng(2)
        m = small_model(seed=3)
        windows = rng.uniform(-0.25, 0.25, size=(5, 4))
        batch = predict_batch(m, windows)
        assert np.allclose(batch, [predict(m, w) for w in windows], atol=0)


class TestLoss:
    def test_zero_when_labels_match_predictions(self):
        rng = np.random.default_rng(3)
        m = small_model(seed=4)
        windows = rng.uniform(-0.25, 0.25, size=(6, 4))
        labels = predict_batch(m, windows)
        assert loss(m, windows, labels) == pytest.approx(0.0, abs=1e-14)

    def test_hand_computed_value(self):
        m = PqcModel(theta=np.zeros(16), num_qubits=4)
        # predictions are exactly 1.0; labels 0.5 -> mse 0.25
        windows = np.zeros((3, 4))
        assert loss(m, windows, [0.5, 0.5, 0.5]) == pytest.approx(0.25, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            loss(small_model(), np.zeros((2, 4)), [1.0])


class TestGradient:
    def test_parameter_shift_matches_finite_difference(self):
        rng = np.random.default_rng(4)
        m = small_model(seed=5)
        windows = rng.uniform(-0.25, 0.25, size=(5, 4))
        labels = rng.uniform(-0.25, 0.25, size=5)
        for _ in range(5):
            probe = m.with_theta(rng.uniform(-math.pi, math.pi, 16))
            shift = gradient(probe, windows, labels)
            diff = gradient(probe, windows, labels, method="finite-difference")
            denom = max(1.0, float(np.max(np.abs(diff))))
            assert np.max(np.abs(shift - diff)) / denom <= 1e-4

    def test_zero_residual_gives_exactly_zero(self):
        rng = np.random.default_rng(5)
        m = small_model(seed=6)
        windows = rng.uniform(-0.25, 0.25, size=(4, 4))
        labels = predict_batch(m, windows)
        g = gradient(m, windows, labels)
        assert np.max(np.abs(g)) == 0.0

    def test_rejects_unknown_method(self):
        with pytest.raises(ValueError):
            gradient(small_model(), np.zeros((1, 4)), [0.0], method="spsa")


class TestTrain:
    def make_data(self, rng, m):
        windows = rng.uniform(-0.25, 0.25, size=(8, m.num_qubits))
        labels = rng.uniform(-0.25, 0.25, size=8)
        return windows, labels

    def test_derivative_free_reduces_loss(self):
        rng = np.random.default_rng(6)
        m = small_model(seed=7)
        windows, labels = self.make_data(rng, m)
        initial = loss(m, windows, labels)
        fitted, result = train(m, windows, labels,
                               TrainConfig(max_iters=150, max_evals=150))
        assert result.trace[0] == pytest.approx(initial, abs=1e-12)
        assert loss(fitted, windows, labels) < initial
        assert loss(fitted, windows, labels) == pytest.approx(result.fun, abs=1e-12)

    def test_quasi_newton_reduces_loss(self):
        rng = np.random.default_rng(7)
        m = small_model(seed=8)
        windows, labels = self.make_data(rng, m)
        initial = loss(m, windows, labels)
        fitted, result = train(m, windows, labels,
                               TrainConfig(optimizer="lbfgs", max_iters=20))
        assert loss(fitted, windows, labels) < initial

    def test_best_seen_never_above_initial(self):
        rng = np.random.default_rng(8)
        m = small_model(seed=9)
        windows = rng.uniform(-0.25, 0.25, size=(4, 4))
        fitted, result = train(m, windows, np.zeros(4),
                               TrainConfig(max_iters=40, max_evals=40))
        assert result.fun <= result.trace[0] + 1e-15

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        m = small_model(seed=10)
        windows, labels = self.make_data(rng, m)
        _, r1 = train(m, windows, labels, TrainConfig(max_iters=60, max_evals=60))
        _, r2 = train(m, windows, labels, TrainConfig(max_iters=60, max_evals=60))
        assert r1.trace == r2.trace
        assert np.array_equal(r1.x, r2.x)

    def test_rejects_unknown_optimizer(self):
        with pytest.raises(ValueError):
            train(small_model(), np.zeros((1, 4)), [0.0],
                  TrainConfig(optimizer="sgd"))


class TestPersistence:
    def test_round_trip_exact(self, tmp_path):
        m = PqcModel.initialized(seed=11, feature_scale=1.5)
        path = tmp_path / "model.txt"
        save_model(m, path)
        back = load_model(path)
        assert np.array_equal(back.theta, m.theta)
        assert back.num_qubits == m.num_qubits
        assert back.feature_scale == m.feature_scale
        assert back.observable == m.observable

    def test_loaded_model_predicts_identically(self, tmp_path):
        rng = np.random.default_rng(10)
        m = small_model(seed=12)
        path = tmp_path / "model.txt"
        save_model(m, path)
        back = load_model(path)
        w = rng.uniform(-0.25, 0.25, size=4)
        assert predict(back, w) == predict(m, w)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "broken.txt"
        path.write_text("0.1\n0.2\n")
        with pytest.raises(ValueError):
            load_model(path)
