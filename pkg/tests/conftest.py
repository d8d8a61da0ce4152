"""Shared independent oracles: dense ladder matrices built from explicit
Kronecker products (qubit i is bit i, so the last factor is qubit 0)."""

from functools import reduce

import numpy as np
import pytest

SIGMA = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|: empties an occupied mode
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)
PAULI = {"I": I2, "X": np.array([[0, 1], [1, 0]], dtype=complex),
         "Y": np.array([[0, -1j], [1j, 0]]), "Z": Z}


def kron_qubits(ops):
    """``ops[i]`` acts on qubit ``i``."""
    return reduce(np.kron, reversed(ops))


def dense_annihilator(mode, n):
    return kron_qubits([Z] * mode + [SIGMA] + [I2] * (n - mode - 1))


def dense_fermion(op):
    n = op.n_modes
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for term in op.terms:
        mat = np.eye(1 << n, dtype=complex)
        for mode, dagger in term.factors:
            a = dense_annihilator(mode, n)
            mat = mat @ (a.conj().T if dagger else a)
        out += term.coefficient * mat
    return out


def dense_pauli(paulis, n):
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for p in paulis:
        out += p.coefficient * kron_qubits([PAULI[c] for c in p.letters])
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dense_local_annihilator(mode, n):
    """Ladder operator on one qubit with no parity string."""
    return kron_qubits([I2] * mode + [SIGMA] + [I2] * (n - mode - 1))


def dense_number(mode, n):
    a = dense_annihilator(mode, n)
    return a.conj().T @ a


def dense_pairing(coefficients, n, local=True):
    """``-sum_i c_i (a†_i a†_{n+i} + a_{n+i} a_i)`` on ``2n`` qubits."""
    lower = dense_local_annihilator if local else dense_annihilator
    out = np.zeros((1 << 2 * n, 1 << 2 * n), dtype=complex)
    for i, c in enumerate(coefficients):
        al, ar = lower(i, 2 * n), lower(n + i, 2 * n)
        out -= c * (al.conj().T @ ar.conj().T + ar @ al)
    return out


def random_hermitian(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (m + m.conj().T) / 2
