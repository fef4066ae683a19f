"""Small dense statevector simulator.

Conventions:
    * Qubit 0 is the leftmost tensor factor, i.e. the most significant bit
      of the basis index: |q0 q1 ... q_{k-1}>.
    * States are complex128 and unit norm; operations return new states.
    * Single-qubit gates and CNOT go through the selected kernel backend
      (compiled or pure numpy); multi-qubit dense unitaries use numpy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import backend

ATOL = 1e-10
NORM_ATOL = 1e-8

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_SDG = np.array([[1, 0], [0, -1j]], dtype=complex)

_PAULI_BY_LABEL = {"I": np.eye(2, dtype=complex), "X": _X, "Y": _Y, "Z": _Z}


def _rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.array([[cmath.exp(-0.5j * theta), 0],
                     [0, cmath.exp(0.5j * theta)]], dtype=complex)


_FIXED_1Q = {"h": _H, "x": _X, "sdg": _SDG}
_ROTATIONS = {"rx": _rx, "ry": _ry, "rz": _rz}


def is_unitary(matrix: np.ndarray, atol: float = ATOL) -> bool:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    eye = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix.conj().T @ matrix - eye)) <= atol)


@dataclass(frozen=True)
class Statevector:
    """Immutable unit-norm amplitude vector over 2**num_qubits basis states."""

    amplitudes: np.ndarray
    num_qubits: int = field(init=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0 or amps.size & (amps.size - 1):
            raise ValueError(f"amplitude length {amps.size} is not a power of two")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {norm!r} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "num_qubits", amps.size.bit_length() - 1)

    @classmethod
    def zero(cls, num_qubits: int) -> "Statevector":
        return cls.basis_state(num_qubits, 0)

    @classmethod
    def basis_state(cls, num_qubits: int, index: int) -> "Statevector":
        if num_qubits < 1:
            raise ValueError("need at least one qubit")
        if not 0 <= index < (1 << num_qubits):
            raise ValueError(f"basis index {index} out of range")
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class Gate:
    """One gate application: a name, target qubits, and parameters.

    Names: h, x, sdg, rx, ry, rz, cnot, unitary. Rotations carry `angle`;
    `unitary` carries a square `matrix` over the listed qubits, whose first
    listed qubit is the most significant within the gate.
    """

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.qubits}")
        if self.name in _FIXED_1Q:
            if len(self.qubits) != 1 or self.angle is not None:
                raise ValueError(f"{self.name} takes one qubit and no angle")
        elif self.name in _ROTATIONS:
            if len(self.qubits) != 1 or self.angle is None:
                raise ValueError(f"{self.name} takes one qubit and an angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.name == "cnot":
            if len(self.qubits) != 2:
                raise ValueError("cnot takes (control, target)")
        elif self.name == "unitary":
            if self.matrix is None:
                raise ValueError("unitary gate needs a matrix")
            mat = np.array(self.matrix, dtype=complex)
            if mat.shape != (1 << len(self.qubits),) * 2:
                raise ValueError(f"matrix shape {mat.shape} does not match "
                                 f"{len(self.qubits)} qubit(s)")
            if not is_unitary(mat):
                raise ValueError("matrix is not unitary within 1e-10")
            mat.setflags(write=False)
            object.__setattr__(self, "matrix", mat)
        else:
            raise ValueError(f"unknown gate {self.name!r}")


class Circuit:
    """Ordered gate list on a fixed qubit count. Build, then run."""

    def __init__(self, num_qubits: int):
        if num_qubits < 1:
            raise ValueError("need at least one qubit")
        self.num_qubits = int(num_qubits)
        self.gates: list[Gate] = []

    def add(self, gate: Gate) -> None:
        for q in gate.qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} out of range for {self.num_qubits} qubits")
        self.gates.append(gate)

    def h(self, qubit: int) -> None:
        self.add(Gate("h", (qubit,)))

    def x(self, qubit: int) -> None:
        self.add(Gate("x", (qubit,)))

    def sdg(self, qubit: int) -> None:
        self.add(Gate("sdg", (qubit,)))

    def rx(self, qubit: int, angle: float) -> None:
        self.add(Gate("rx", (qubit,), angle=angle))

    def ry(self, qubit: int, angle: float) -> None:
        self.add(Gate("ry", (qubit,), angle=angle))

    def rz(self, qubit: int, angle: float) -> None:
        self.add(Gate("rz", (qubit,), angle=angle))

    def cnot(self, control: int, target: int) -> None:
        self.add(Gate("cnot", (control, target)))

    def unitary(self, matrix: np.ndarray, qubits) -> None:
        self.add(Gate("unitary", tuple(qubits), matrix=matrix))


def _gate_matrix_1q(gate: Gate) -> np.ndarray:
    if gate.name in _FIXED_1Q:
        return _FIXED_1Q[gate.name]
    return _ROTATIONS[gate.name](gate.angle)


def _apply_dense(buf: np.ndarray, num_qubits: int, qubits: tuple[int, ...],
                 matrix: np.ndarray) -> None:
    """Apply a dense 2**t x 2**t matrix to `qubits` of the buffer, in place."""
    t = len(qubits)
    view = buf.reshape((2,) * num_qubits)
    moved = np.moveaxis(view, qubits, range(t))
    shape = moved.shape
    flat = moved.reshape(1 << t, -1)
    out = matrix @ flat
    view[...] = np.moveaxis(out.reshape(shape), range(t), qubits)


def _apply_gate_inplace(buf: np.ndarray, num_qubits: int, gate: Gate) -> None:
    for q in gate.qubits:
        if not 0 <= q < num_qubits:
            raise ValueError(f"qubit {q} out of range for {num_qubits} qubits")
    if gate.name == "cnot":
        backend.apply_cnot(buf, num_qubits, gate.qubits[0], gate.qubits[1])
    elif gate.name == "unitary":
        if len(gate.qubits) == 1:
            m = gate.matrix
            backend.apply_single_qubit(buf, num_qubits, gate.qubits[0],
                                       m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        else:
            _apply_dense(buf, num_qubits, gate.qubits, gate.matrix)
    else:
        m = _gate_matrix_1q(gate)
        backend.apply_single_qubit(buf, num_qubits, gate.qubits[0],
                                   m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Return gate applied to state, leaving the input untouched."""
    buf = np.array(state.amplitudes, dtype=complex)
    _apply_gate_inplace(buf, state.num_qubits, gate)
    return Statevector(buf)


def run_circuit(circuit: Circuit, initial: Statevector | None = None) -> Statevector:
    """Apply all gates in order to `initial` (default |0...0>)."""
    if initial is None:
        initial = Statevector.zero(circuit.num_qubits)
    if initial.num_qubits != circuit.num_qubits:
        raise ValueError(f"state has {initial.num_qubits} qubits, "
                         f"circuit has {circuit.num_qubits}")
    buf = np.array(initial.amplitudes, dtype=complex)
    for gate in circuit.gates:
        _apply_gate_inplace(buf, circuit.num_qubits, gate)
    return Statevector(buf)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense matrix of the whole circuit (column i = circuit applied to |i>)."""
    dim = 1 << circuit.num_qubits
    mat = np.eye(dim, dtype=complex)
    for i in range(dim):
        buf = mat[:, i].copy()
        for gate in circuit.gates:
            _apply_gate_inplace(buf, circuit.num_qubits, gate)
        mat[:, i] = buf
    return mat


def inner_product(a: Statevector, b: Statevector) -> complex:
    """<a|b> with the conjugate on the first argument."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("qubit counts differ")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _pauli_digits(observable, num_qubits: int) -> tuple[int, ...]:
    if isinstance(observable, str):
        try:
            digits = tuple("IXYZ".index(ch) for ch in observable)
        except ValueError:
            raise ValueError(f"bad Pauli label {observable!r}") from None
    elif hasattr(observable, "digits"):
        digits = tuple(observable.digits)
    else:
        digits = tuple(int(d) for d in observable)
        if any(not 0 <= d <= 3 for d in digits):
            raise ValueError(f"Pauli digits must be 0..3, got {digits}")
    if len(digits) != num_qubits:
        raise ValueError(f"observable length {len(digits)} != {num_qubits} qubits")
    return digits


def expectation(state: Statevector, observable) -> float:
    """<state| P |state> for a Pauli string given as label, digits, or object."""
    digits = _pauli_digits(observable, state.num_qubits)
    buf = np.array(state.amplitudes, dtype=complex)
    for qubit, d in enumerate(digits):
        if d:
            m = _PAULI_BY_LABEL["IXYZ"[d]]
            backend.apply_single_qubit(buf, state.num_qubits, qubit,
                                       m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    value = np.vdot(state.amplitudes, buf)
    return float(value.real)


def prepare_state(amplitudes: np.ndarray) -> np.ndarray:
    """Unitary whose first column is the given unit vector.

    Householder construction: with a = arg(v[0]) and u = v - e^{ia} e0,
    U = e^{ia} (I - 2 u u^dag / u^dag u) maps e0 to v exactly.
    """
    v = np.array(amplitudes, dtype=complex)
    if v.ndim != 1 or v.size == 0 or v.size & (v.size - 1):
        raise ValueError(f"amplitude length {v.size} is not a power of two")
    if abs(np.linalg.norm(v) - 1.0) > NORM_ATOL:
        raise ValueError("amplitudes are not unit norm")
    phase = cmath.exp(1j * cmath.phase(v[0])) if abs(v[0]) > 0 else 1.0
    u = v.copy()
    u[0] -= phase
    uu = np.vdot(u, u).real
    if uu < 1e-24:
        return phase * np.eye(v.size, dtype=complex)
    return phase * (np.eye(v.size, dtype=complex) - 2.0 * np.outer(u, u.conj()) / uu)


def controlled(matrix: np.ndarray) -> np.ndarray:
    """Block matrix diag(I, U): a new most-significant control qubit."""
    u = np.asarray(matrix, dtype=complex)
    if not is_unitary(u):
        raise ValueError("matrix is not unitary within 1e-10")
    dim = u.shape[0]
    out = np.zeros((2 * dim, 2 * dim), dtype=complex)
    out[:dim, :dim] = np.eye(dim)
    out[dim:, dim:] = u
    return out


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def hadamard_test(matrix: np.ndarray, part: str = "real",
                  shots: int | None = None, rng=None) -> float:
    """Estimate Re or Im of <0...0| U |0...0> with one ancilla.

    Ancilla (qubit 0) protocol: H, controlled-U, optional S-adjoint for the
    imaginary part, H, then measure. P(ancilla=0) = (1 + Re<0|U|0>)/2, and
    the returned estimator is 2 P(0) - 1. Exact mode (shots=None) uses the
    true probability; sampled mode draws `shots` Bernoulli trials.
    """
    u = np.asarray(matrix, dtype=complex)
    if not is_unitary(u):
        raise ValueError("matrix is not unitary within 1e-10")
    if part not in ("real", "imaginary"):
        raise ValueError(f"part must be 'real' or 'imaginary', got {part!r}")
    if shots is not None and shots <= 0:
        raise ValueError(f"shots must be positive, got {shots}")
    dim = u.shape[0]
    # Ancilla is the new MSB, so the register splits into contiguous halves.
    buf = np.zeros(2 * dim, dtype=complex)
    buf[0] = 1.0
    num_qubits = (2 * dim).bit_length() - 1
    backend.apply_single_qubit(buf, num_qubits, 0,
                               _H[0, 0], _H[0, 1], _H[1, 0], _H[1, 1])
    buf[dim:] = u @ buf[dim:]
    if part == "imaginary":
        backend.apply_single_qubit(buf, num_qubits, 0,
                                   _SDG[0, 0], _SDG[0, 1], _SDG[1, 0], _SDG[1, 1])
    backend.apply_single_qubit(buf, num_qubits, 0,
                               _H[0, 0], _H[0, 1], _H[1, 0], _H[1, 1])
    p0 = float(np.sum(np.abs(buf[:dim]) ** 2))
    if shots is None:
        return 2.0 * p0 - 1.0
    p0 = min(max(p0, 0.0), 1.0)
    zeros = _as_rng(rng).binomial(shots, p0)
    return 2.0 * zeros / shots - 1.0


_FREDKIN = np.eye(8, dtype=complex)
_FREDKIN[[5, 6]] = _FREDKIN[[6, 5]]


def swap_test(a: Statevector, b: Statevector,
              shots: int | None = None, rng=None) -> float:
    """Estimate |<a|b>|^2 via the ancilla-controlled swap circuit."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("qubit counts differ")
    if shots is not None and shots <= 0:
        raise ValueError(f"shots must be positive, got {shots}")
    k = a.num_qubits
    num_qubits = 1 + 2 * k
    buf = np.kron(np.array([1.0, 0.0], dtype=complex),
                  np.kron(a.amplitudes, b.amplitudes))
    backend.apply_single_qubit(buf, num_qubits, 0,
                               _H[0, 0], _H[0, 1], _H[1, 0], _H[1, 1])
    for j in range(k):
        _apply_dense(buf, num_qubits, (0, 1 + j, 1 + k + j), _FREDKIN)
    backend.apply_single_qubit(buf, num_qubits, 0,
                               _H[0, 0], _H[0, 1], _H[1, 0], _H[1, 1])
    p0 = float(np.sum(np.abs(buf[:buf.size // 2]) ** 2))
    if shots is None:
        return 2.0 * p0 - 1.0
    p0 = min(max(p0, 0.0), 1.0)
    zeros = _as_rng(rng).binomial(shots, p0)
    return 2.0 * zeros / shots - 1.0
