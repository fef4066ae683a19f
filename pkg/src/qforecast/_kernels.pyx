# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled statevector kernels.

Semantics match qforecast._kernels_py exactly; both mutate the amplitude
buffer in place. Qubit 0 is the most significant bit of the basis index.
"""


def apply_single_qubit(double complex[::1] psi, int num_qubits, int qubit,
                       double complex m00, double complex m01,
                       double complex m10, double complex m11):
    """Apply a 2x2 matrix to one qubit of a 2**num_qubits amplitude buffer."""
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << num_qubits
    cdef Py_ssize_t mask = (<Py_ssize_t>1) << (num_qubits - 1 - qubit)
    cdef Py_ssize_t step = mask << 1
    cdef Py_ssize_t base, off, i, j
    cdef double complex a, b
    for base in range(0, dim, step):
        for off in range(mask):
            i = base + off
            j = i | mask
            a = psi[i]
            b = psi[j]
            psi[i] = m00 * a + m01 * b
            psi[j] = m10 * a + m11 * b


def apply_cnot(double complex[::1] psi, int num_qubits, int control, int target):
    """Flip `target` amplitudes wherever the `control` bit is set."""
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << num_qubits
    cdef Py_ssize_t cmask = (<Py_ssize_t>1) << (num_qubits - 1 - control)
    cdef Py_ssize_t tmask = (<Py_ssize_t>1) << (num_qubits - 1 - target)
    cdef Py_ssize_t i, j
    cdef double complex tmp
    for i in range(dim):
        if (i & cmask) and not (i & tmask):
            j = i | tmask
            tmp = psi[i]
            psi[i] = psi[j]
            psi[j] = tmp
