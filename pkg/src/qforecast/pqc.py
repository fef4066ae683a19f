"""Parameterized-quantum-circuit regressor for sliding-window forecasting.

Architecture (for k qubits, default 12): each of the k window values is
angle-encoded as RY(feature_scale * x_i) on its own qubit, followed by two
variational blocks. Block L applies a CNOT entangling pattern and then
RX(theta), RY(theta) on every qubit. The first pattern pairs neighbors
(0,1), (2,3), ...; the second shifts by one, (1,2), (3,4), ..., and closes
the ring with (k-1, 0) when k >= 3. The prediction is the expectation of
Z on qubit 0, so outputs live in [-1, 1] and match the scaled-difference
target range.

Parameters are flat, layer-major then qubit-minor, RX before RY:
theta[L * 2k + 2q] is the RX angle of qubit q in block L.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from . import optimize, qsim

VARIATIONAL_BLOCKS = 2


def _validate_observable(label: str, num_qubits: int) -> str:
    if len(label) != num_qubits or any(ch not in "IXYZ" for ch in label):
        raise ValueError(f"bad observable {label!r} for {num_qubits} qubits")
    return label


@dataclass(frozen=True)
class PqcModel:
    theta: np.ndarray
    num_qubits: int = 12
    feature_scale: float = 1.0
    observable: str = ""

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("need at least one qubit")
        observable = self.observable or "Z" + "I" * (self.num_qubits - 1)
        _validate_observable(observable, self.num_qubits)
        theta = np.array(self.theta, dtype=float)
        want = VARIATIONAL_BLOCKS * 2 * self.num_qubits
        if theta.shape != (want,):
            raise ValueError(f"theta has shape {theta.shape}, expected ({want},)")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "observable", observable)

    @classmethod
    def initialized(cls, num_qubits: int = 12, seed: int = 0,
                    feature_scale: float = 1.0, observable: str = "",
                    ) -> "PqcModel":
        """Fresh model with theta drawn uniformly from [-0.1, 0.1]."""
        rng = np.random.default_rng(seed)
        theta = rng.uniform(-0.1, 0.1, size=VARIATIONAL_BLOCKS * 2 * num_qubits)
        return cls(theta=theta, num_qubits=num_qubits,
                   feature_scale=feature_scale, observable=observable)

    @property
    def num_parameters(self) -> int:
        return self.theta.size

    def with_theta(self, theta) -> "PqcModel":
        return replace(self, theta=np.asarray(theta, dtype=float))


def feature_map(window, feature_scale: float = 1.0) -> qsim.Circuit:
    """Angle encoding: RY(feature_scale * x_i) on qubit i."""
    window = np.asarray(window, dtype=float)
    circuit = qsim.Circuit(window.size)
    for q, x in enumerate(window):
        circuit.ry(q, feature_scale * float(x))
    return circuit


def _entangler_pairs(num_qubits: int, block: int) -> list[tuple[int, int]]:
    if block == 0:
        return [(q, q + 1) for q in range(0, num_qubits - 1, 2)]
    pairs = [(q, q + 1) for q in range(1, num_qubits - 1, 2)]
    if num_qubits >= 3:
        pairs.append((num_qubits - 1, 0))
    return pairs


def model_circuit(model: PqcModel, window) -> qsim.Circuit:
    window = np.asarray(window, dtype=float)
    if window.size != model.num_qubits:
        raise ValueError(f"window length {window.size} != {model.num_qubits} qubits")
    circuit = feature_map(window, model.feature_scale)
    k = model.num_qubits
    for block in range(VARIATIONAL_BLOCKS):
        for control, target in _entangler_pairs(k, block):
            circuit.cnot(control, target)
        base = block * 2 * k
        for q in range(k):
            circuit.rx(q, model.theta[base + 2 * q])
            circuit.ry(q, model.theta[base + 2 * q + 1])
    return circuit


def predict(model: PqcModel, window) -> float:
    state = qsim.run_circuit(model_circuit(model, window))
    return qsim.expectation(state, model.observable)


def predict_batch(model: PqcModel, windows) -> np.ndarray:
    windows = np.atleast_2d(np.asarray(windows, dtype=float))
    return np.array([predict(model, w) for w in windows])


def loss(model: PqcModel, windows, labels) -> float:
    """Mean squared error of the circuit predictions."""
    labels = np.asarray(labels, dtype=float).ravel()
    preds = predict_batch(model, windows)
    if preds.size != labels.size:
        raise ValueError(f"{preds.size} windows but {labels.size} labels")
    return float(np.mean((preds - labels) ** 2))


def gradient(model: PqcModel, windows, labels, method: str = "parameter-shift",
             h: float = 1e-5) -> np.ndarray:
    """Gradient of the loss in theta.

    parameter-shift evaluates predictions at theta_p +- pi/2 and chains the
    exact derivative through the squared loss; finite-difference applies
    central differences to the loss itself.
    """
    windows = np.atleast_2d(np.asarray(windows, dtype=float))
    labels = np.asarray(labels, dtype=float).ravel()
    if method == "finite-difference":
        grad = np.empty(model.num_parameters)
        for p in range(model.num_parameters):
            shift = np.zeros(model.num_parameters)
            shift[p] = h
            up = loss(model.with_theta(model.theta + shift), windows, labels)
            down = loss(model.with_theta(model.theta - shift), windows, labels)
            grad[p] = (up - down) / (2 * h)
        return grad
    if method != "parameter-shift":
        raise ValueError(f"method must be 'parameter-shift' or "
                         f"'finite-difference', got {method!r}")
    preds = predict_batch(model, windows)
    residual = 2.0 * (preds - labels) / labels.size
    grad = np.empty(model.num_parameters)
    for p in range(model.num_parameters):
        shift = np.zeros(model.num_parameters)
        shift[p] = math.pi / 2
        up = predict_batch(model.with_theta(model.theta + shift), windows)
        down = predict_batch(model.with_theta(model.theta - shift), windows)
        grad[p] = float(residual @ ((up - down) / 2.0))
    return grad


@dataclass
class TrainConfig:
    optimizer: str = "cobyla"
    max_iters: int = 300
    max_evals: int | None = None
    gradient_method: str = "parameter-shift"


def train(model: PqcModel, windows, labels, config: TrainConfig | None = None,
          ) -> tuple[PqcModel, optimize.OptimResult]:
    """Fit theta to the windowed data; returns the best-seen model and the
    optimizer result (per-evaluation loss trace, convergence flag)."""
    config = config or TrainConfig()
    windows = np.atleast_2d(np.asarray(windows, dtype=float))
    labels = np.asarray(labels, dtype=float).ravel()

    def objective(theta):
        return loss(model.with_theta(theta), windows, labels)

    options = optimize.OptimOptions(max_iters=config.max_iters,
                                    max_evals=config.max_evals)
    if config.optimizer == "cobyla":
        result = optimize.minimize_derivative_free(objective, model.theta, options)
    elif config.optimizer == "lbfgs":
        def grad(theta):
            return gradient(model.with_theta(theta), windows, labels,
                            method=config.gradient_method)
        result = optimize.minimize_quasi_newton(objective, model.theta, grad,
                                                options)
    else:
        raise ValueError(f"optimizer must be 'cobyla' or 'lbfgs', "
                         f"got {config.optimizer!r}")
    return model.with_theta(result.x), result


def save_model(model: PqcModel, path) -> None:
    """Plain-text persistence: header key-value lines, then theta values."""
    lines = [f"num_qubits {model.num_qubits}",
             f"observable {model.observable}",
             f"feature_scale {model.feature_scale!r}"]
    lines += [repr(float(t)) for t in model.theta]
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def load_model(path) -> PqcModel:
    with open(path) as fh:
        lines = [line.strip() for line in fh if line.strip()]
    header = {}
    body = []
    for line in lines:
        parts = line.split()
        if len(parts) == 2 and parts[0] in ("num_qubits", "observable",
                                            "feature_scale"):
            header[parts[0]] = parts[1]
        else:
            body.append(float(line))
    try:
        return PqcModel(theta=np.array(body),
                        num_qubits=int(header["num_qubits"]),
                        feature_scale=float(header["feature_scale"]),
                        observable=header["observable"])
    except KeyError as exc:
        raise ValueError(f"{path}: missing header line {exc}") from None
