"""Timing comparison of the compiled and pure-numpy gate kernels.

Applies the same random sequence of single-qubit rotations and CNOTs to a
random state with both kernel implementations and reports microseconds per
gate plus the speedup.  Run directly:

    python benchmarks/bench_kernels.py [--qubits 4 8 12 14] [--gates 200]
"""

import argparse
import time

import numpy as np

from qforecast import _kernels_py
from qforecast.qsim import _rx, _ry

try:
    from qforecast import _kernels
except ImportError:
    _kernels = None


def random_state(num_qubits, rng):
    dim = 2 ** num_qubits
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return np.ascontiguousarray(psi / np.linalg.norm(psi))


def gate_sequence(num_qubits, num_gates, rng):
    """(kind, qubit(s), matrix) triples mirroring the circuit workloads."""
    ops = []
    for _ in range(num_gates):
        if rng.random() < 0.25 and num_qubits >= 2:
            control = int(rng.integers(num_qubits))
            target = int(rng.integers(num_qubits - 1))
            if target >= control:
                target += 1
            ops.append(("cnot", control, target, None))
        else:
            qubit = int(rng.integers(num_qubits))
            angle = float(rng.uniform(0, 2 * np.pi))
            matrix = _rx(angle) if rng.random() < 0.5 else _ry(angle)
            ops.append(("1q", qubit, None, matrix))
    return ops


def run(module, psi, num_qubits, ops):
    start = time.perf_counter()
    for kind, a, b, matrix in ops:
        if kind == "cnot":
            module.apply_cnot(psi, num_qubits, a, b)
        else:
            module.apply_single_qubit(psi, num_qubits, a,
                                      matrix[0, 0], matrix[0, 1],
                                      matrix[1, 0], matrix[1, 1])
    return time.perf_counter() - start


def bench(num_qubits, num_gates, repeats=5):
    rng = np.random.default_rng(0)
    ops = gate_sequence(num_qubits, num_gates, rng)
    results = {}
    modules = [("python", _kernels_py)]
    if _kernels is not None:
        modules.append(("compiled", _kernels))
    for name, module in modules:
        best = np.inf
        for _ in range(repeats):
            psi = random_state(num_qubits, np.random.default_rng(1))
            best = min(best, run(module, psi, num_qubits, ops))
        results[name] = best / num_gates
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--qubits", type=int, nargs="+",
                        default=[4, 8, 12, 14])
    parser.add_argument("--gates", type=int, default=200)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled kernels not built; timing the fallback only")
    header = "%-8s %14s %14s %10s" % ("qubits", "python us/gate",
                                      "compiled us/gate", "speedup")
    print(header)
    print("-" * len(header))
    for num_qubits in args.qubits:
        results = bench(num_qubits, args.gates)
        python_us = results["python"] * 1e6
        if "compiled" in results:
            compiled_us = results["compiled"] * 1e6
            print("%-8d %14.2f %16.2f %9.1fx"
                  % (num_qubits, python_us, compiled_us,
                     python_us / compiled_us))
        else:
            print("%-8d %14.2f %16s %10s" % (num_qubits, python_us, "-", "-"))


if __name__ == "__main__":
    main()
