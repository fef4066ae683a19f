"""Variational quantum linear solver over Pauli-decomposed normal equations.

Given A w = b with Hermitian A, the solver prepares a trial state |x(theta)>
with a layered hardware-style ansatz and minimizes

    C(theta) = 1 - |<b|psi>|^2 / <psi|psi>,    |psi> = A |x(theta)>,

which is zero exactly when A|x> is parallel to |b>. The normalized form is
the default; the unnormalized variant C = 1 - |<b|psi>|^2 is kept behind a
flag for comparison, but its minimum does not coincide with the solution
direction in general, so it is not used by the pipeline.

Cost terms can be evaluated analytically or through Hadamard-test
estimators (exact or shot-sampled) over the retained Pauli terms.

Solutions of real systems are snapped to a real representative after
optimization when that does not hurt the cost: the global phase of
|x(theta)> is arbitrary, and downstream forecasting needs real weights.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import optimize, pauli, qsim

DEFAULT_COST_TOL = 1e-3


def default_layers(num_qubits: int) -> int:
    return 1 if num_qubits <= 2 else 2


@dataclass(frozen=True)
class AnsatzSpec:
    """Layered ansatz: a rotation layer, then `layers` entangle+rotate blocks.

    Each rotation layer applies RY then RZ to every qubit; each entangling
    block is the CNOT chain (0,1), (1,2), ..., (k-2, k-1). Parameters are
    ordered layer-major, qubit-minor, RY before RZ.
    """

    num_qubits: int
    layers: int

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("need at least one qubit")
        if self.layers < 1:
            raise ValueError("need at least one layer")

    @classmethod
    def default(cls, num_qubits: int) -> "AnsatzSpec":
        return cls(num_qubits, default_layers(num_qubits))

    @property
    def num_parameters(self) -> int:
        return 2 * self.num_qubits * (self.layers + 1)


def ansatz_circuit(spec: AnsatzSpec, theta) -> qsim.Circuit:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.num_parameters,):
        raise ValueError(f"theta has shape {theta.shape}, "
                         f"expected ({spec.num_parameters},)")
    k = spec.num_qubits
    circuit = qsim.Circuit(k)
    pos = 0
    for layer in range(spec.layers + 1):
        if layer > 0:
            for q in range(k - 1):
                circuit.cnot(q, q + 1)
        for q in range(k):
            circuit.ry(q, theta[pos])
            circuit.rz(q, theta[pos + 1])
            pos += 2
    return circuit


def ansatz_state(spec: AnsatzSpec, theta) -> np.ndarray:
    return np.array(qsim.run_circuit(ansatz_circuit(spec, theta)).amplitudes)


@dataclass(frozen=True)
class VqlsProblem:
    """A Pauli-decomposed system A w = b with its prepared right-hand side."""

    decomposition: pauli.PauliDecomposition
    b_state: np.ndarray
    b_norm: float
    a_matrix: np.ndarray    # original input matrix
    a_used: np.ndarray      # reconstruction of the retained terms
    prepare_b: np.ndarray   # unitary with first column b_state

    @property
    def num_qubits(self) -> int:
        return self.decomposition.num_qubits

    @classmethod
    def from_system(cls, a, b, prune_tol: float = pauli.DEFAULT_PRUNE_TOL,
                    ) -> "VqlsProblem":
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex).ravel()
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix shape {a.shape} is not square")
        if b.size != a.shape[0]:
            raise ValueError(f"b has length {b.size}, matrix is {a.shape[0]}")
        b_norm = float(np.linalg.norm(b))
        if b_norm == 0.0:
            raise ValueError("right-hand side is zero")
        decomposition = pauli.decompose(a, prune_tol=prune_tol)
        if not decomposition.terms:
            raise ValueError("matrix decomposed to nothing above the prune tolerance")
        b_state = b / b_norm
        b_state.setflags(write=False)
        a = a.copy()
        a.setflags(write=False)
        a_used = pauli.reconstruct(decomposition)
        a_used.setflags(write=False)
        prep = qsim.prepare_state(b_state)
        prep.setflags(write=False)
        return cls(decomposition=decomposition, b_state=b_state, b_norm=b_norm,
                   a_matrix=a, a_used=a_used, prepare_b=prep)


def _pauli_unitaries(problem: VqlsProblem) -> list[np.ndarray]:
    return [pauli.pauli_matrix(s) for _, s in problem.decomposition.terms]


def _hadamard_complex(u, shots, rng) -> complex:
    real = qsim.hadamard_test(u, part="real", shots=shots, rng=rng)
    imag = qsim.hadamard_test(u, part="imaginary", shots=shots, rng=rng)
    return complex(real, imag)


def overlap_term(problem: VqlsProblem, index: int, theta, ansatz=None,
                 estimator: str = "analytic", shots: int | None = None,
                 rng=None) -> complex:
    """<b | M_index | x(theta)> for the index-th retained Pauli term."""
    if not 0 <= index < len(problem.decomposition.terms):
        raise ValueError(f"term index {index} out of range")
    ansatz = ansatz or AnsatzSpec.default(problem.num_qubits)
    if estimator == "analytic":
        x = ansatz_state(ansatz, theta)
        m = pauli.pauli_matrix(problem.decomposition.terms[index][1])
        return complex(np.vdot(problem.b_state, m @ x))
    if estimator == "hadamard":
        v = qsim.circuit_unitary(ansatz_circuit(ansatz, theta))
        m = pauli.pauli_matrix(problem.decomposition.terms[index][1])
        composite = problem.prepare_b.conj().T @ m @ v
        return _hadamard_complex(composite, shots, qsim._as_rng(rng))
    raise ValueError(f"estimator must be 'analytic' or 'hadamard', got {estimator!r}")


def _cost_from_state(problem: VqlsProblem, x: np.ndarray,
                     normalized: bool = True) -> float:
    psi = problem.a_used @ x
    overlap = abs(np.vdot(problem.b_state, psi)) ** 2
    if not normalized:
        return float(1.0 - overlap)
    denom = float(np.real(np.vdot(psi, psi)))
    if denom <= 1e-300:
        return 1.0
    return float(1.0 - overlap / denom)


def cost(problem: VqlsProblem, theta, ansatz=None, estimator: str = "analytic",
         shots: int | None = None, rng=None, normalized: bool = True) -> float:
    """Cost of the trial state at theta; 0 means A|x> is parallel to |b>."""
    ansatz = ansatz or AnsatzSpec.default(problem.num_qubits)
    if estimator == "analytic":
        return _cost_from_state(problem, ansatz_state(ansatz, theta), normalized)
    if estimator != "hadamard":
        raise ValueError(f"estimator must be 'analytic' or 'hadamard', "
                         f"got {estimator!r}")
    rng = qsim._as_rng(rng)
    v = qsim.circuit_unitary(ansatz_circuit(ansatz, theta))
    prep_adj = problem.prepare_b.conj().T
    alphas = [a for a, _ in problem.decomposition.terms]
    mats = _pauli_unitaries(problem)
    overlap = complex(0.0)
    for a, m in zip(alphas, mats):
        overlap += a * _hadamard_complex(prep_adj @ m @ v, shots, rng)
    numerator = abs(overlap) ** 2
    if not normalized:
        return float(1.0 - numerator)
    denom = 0.0
    v_adj = v.conj().T
    for ai, mi in zip(alphas, mats):
        for aj, mj in zip(alphas, mats):
            term = _hadamard_complex(v_adj @ mi @ mj @ v, shots, rng)
            denom += ai * aj * term.real
    if denom <= 1e-12:
        return 1.0
    return float(1.0 - numerator / denom)


def canonical_phase(state: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest amplitude is real positive."""
    state = np.asarray(state, dtype=complex)
    lead = int(np.argmax(np.abs(state)))
    mag = abs(state[lead])
    if mag == 0.0:
        return state.copy()
    return state * (state[lead].conjugate() / mag)


def realign_to_real(state: np.ndarray) -> np.ndarray | None:
    """Best real unit vector matching `state` up to global phase, or None.

    The imaginary norm of e^{i phi} x is minimized at phi = -arg(sum x_j^2)/2;
    if the real part at that phase is degenerate (norm ~ 0) there is no
    useful real representative.
    """
    state = np.asarray(state, dtype=complex)
    square_sum = complex(np.sum(state * state))
    if abs(square_sum) < 1e-12:
        return None
    phase = cmath.exp(-0.5j * cmath.phase(square_sum))
    real_part = np.real(phase * state)
    norm = float(np.linalg.norm(real_part))
    if norm < 1e-6:
        return None
    return real_part / norm


def rescale(problem: VqlsProblem, w_state) -> tuple[np.ndarray, float, int]:
    """Classical post-scaling: w = sign * (||b|| / ||A x||) * x.

    The sign is the choice in {+1, -1} minimizing ||A w - b||; ties keep +1.
    """
    x = np.asarray(w_state, dtype=complex)
    psi = problem.a_used @ x
    psi_norm = float(np.linalg.norm(psi))
    if psi_norm <= 1e-300:
        raise ValueError("A maps the trial state to zero; cannot rescale")
    scale = problem.b_norm / psi_norm
    b = problem.b_state * problem.b_norm
    res_plus = float(np.linalg.norm(scale * psi - b))
    res_minus = float(np.linalg.norm(-scale * psi - b))
    sign = -1 if res_minus < res_plus else 1
    return sign * scale * x, scale, sign


@dataclass
class VqlsResult:
    theta: np.ndarray
    w_state: np.ndarray
    w: np.ndarray
    scale: float
    sign: int
    cost_trace: list[float]
    final_cost: float
    residual: float
    converged: bool
    evaluations: int


def solve(problem: VqlsProblem, ansatz: AnsatzSpec | None = None,
          optimizer: str = "cobyla", seed: int = 0, restarts: int = 5,
          max_iters: int = 2000, estimator: str = "analytic",
          shots: int | None = None, normalized: bool = True,
          cost_tol: float = DEFAULT_COST_TOL) -> VqlsResult:
    """Minimize the cost over theta with seeded random restarts.

    Returns the best restart's solution, snapped to a real representative
    when that is at least as good, with the classical rescale applied.
    The convergence flag reports final cost <= cost_tol.
    """
    ansatz = ansatz or AnsatzSpec.default(problem.num_qubits)
    rng = np.random.default_rng(seed)
    shot_rng = np.random.default_rng(rng.integers(2 ** 63)) if shots else None

    def objective(theta):
        return cost(problem, theta, ansatz=ansatz, estimator=estimator,
                    shots=shots, rng=shot_rng, normalized=normalized)

    best = None
    trace: list[float] = []
    evaluations = 0
    for _ in range(max(restarts, 1)):
        theta0 = rng.uniform(0.0, 2.0 * math.pi, size=ansatz.num_parameters)
        options = optimize.OptimOptions(max_iters=max_iters, max_evals=max_iters)
        if optimizer == "cobyla":
            res = optimize.minimize_derivative_free(objective, theta0, options)
        elif optimizer == "lbfgs":
            grad = lambda t: optimize.finite_diff_gradient(objective, t)
            res = optimize.minimize_quasi_newton(objective, theta0, grad, options)
        else:
            raise ValueError(f"optimizer must be 'cobyla' or 'lbfgs', "
                             f"got {optimizer!r}")
        trace.extend(res.trace)
        evaluations += res.evaluations
        if best is None or res.fun < best.fun:
            best = res
    theta_best = np.asarray(best.x, dtype=float)
    raw_state = ansatz_state(ansatz, theta_best)
    chosen = raw_state
    real_candidate = realign_to_real(raw_state)
    if real_candidate is not None:
        raw_cost = _cost_from_state(problem, raw_state, normalized)
        real_cost = _cost_from_state(problem, real_candidate, normalized)
        if real_cost <= raw_cost + 1e-12:
            chosen = real_candidate
    w_state = canonical_phase(chosen)
    w, scale, sign = rescale(problem, w_state)
    final_cost = _cost_from_state(problem, w_state, normalized)
    b = problem.b_state * problem.b_norm
    residual = float(np.linalg.norm(problem.a_used @ w - b)) / problem.b_norm
    return VqlsResult(theta=theta_best, w_state=w_state, w=w, scale=scale,
                      sign=sign, cost_trace=trace, final_cost=final_cost,
                      residual=residual, converged=bool(final_cost <= cost_tol),
                      evaluations=evaluations)
