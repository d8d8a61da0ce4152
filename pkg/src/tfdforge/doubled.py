"""Doubled-space Hamiltonians whose ground state approximates the thermofield
double, the exact thermofield double itself, and overlap diagnostics.

Left modes are ``0..n-1`` and right modes ``n..2n-1``, so a statevector on
``2n`` qubits is indexed ``b_L + 2**n * b_R`` and ``|l> (x) |r>`` is
``np.kron(r, l)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractViolation
from .fock import (
    QUBIT_CAP,
    FermionOperator,
    FermionTerm,
    PauliString,
    SparseOperator,
    _check_cap,
    build_sparse,
    embed_doubled,
    jordan_wigner,
    pauli_sum_to_sparse,
)
from .models import ModeFrequencies
from .solver import eig_full

SMALL_ARG = 1e-8


def _omega(freqs) -> np.ndarray:
    if isinstance(freqs, ModeFrequencies):
        return freqs.as_array()
    return np.atleast_1d(np.asarray(freqs, dtype=float))


def tensor_lr(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Statevector of ``|left> (x) |right>`` in the L-before-R layout."""
    return np.kron(right, left)


@dataclass(frozen=True)
class CouplingWeights:
    mu: np.ndarray
    beta: float
    frequencies: np.ndarray


@dataclass(frozen=True)
class BogoliubovFactors:
    theta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    beta: float


def coupling_weights(freqs, beta: float) -> CouplingWeights:
    """``mu_i = w_i / (2 sinh(beta w_i / 2))``, with the ``1/beta`` limit at
    ``w_i -> 0``.  ``beta = inf`` gives all zeros."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    omega = _omega(freqs)
    half = beta * np.abs(omega) / 2
    mu = np.empty_like(omega)
    small = half < SMALL_ARG
    mu[small] = 1.0 / beta
    y = half[~small]
    # |w| e^{-y} / (1 - e^{-2y}) avoids overflow of sinh at large y
    with np.errstate(over="ignore", invalid="ignore"):
        mu[~small] = np.abs(omega[~small]) * np.exp(-y) / -np.expm1(-2 * y)
    mu[np.isinf(half)] = 0.0
    return CouplingWeights(mu, float(beta), omega)


def bogoliubov_factors(freqs, beta: float) -> BogoliubovFactors:
    """Rotation angles with ``v_k / u_k = exp(-beta w_k / 2)``."""
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    omega = _omega(freqs)
    with np.errstate(over="ignore", invalid="ignore"):
        arg = -beta * omega / 2
        arg = np.where(omega == 0, 0.0, arg)
        theta = np.arctan(np.exp(arg))
    return BogoliubovFactors(theta, np.cos(theta), np.sin(theta), float(beta))


def pairing_terms(coefficients: Sequence[float], n: int) -> FermionOperator:
    """``-sum_i c_i (a†_i a†_{n+i} + a_{n+i} a_i)`` on ``2n`` modes.

    Algebraically this is ``sum_i c_i (a_i a_{n+i} - a†_i a†_{n+i})``.  Each
    pair is written with its adjoint spelled out so the Z-string-free qubit
    map stays Hermitian.
    """
    terms = []
    for i, c in enumerate(coefficients):
        if c == 0:
            continue
        terms.append(FermionTerm(-c, ((i, True), (n + i, True))))
        terms.append(FermionTerm(-c, ((n + i, False), (i, False))))
    return FermionOperator(2 * n, terms)


def _lr_sparse(H: FermionOperator, cap: int) -> SparseOperator:
    """``H_L + H_R`` with ``H_R = I (x) H*``."""
    n = H.n_modes
    _check_cap(2 * n, cap)
    if not H.is_even():
        return build_sparse(embed_doubled(H, "L") + embed_doubled(H, "R"), cap)
    # Even terms pick up the left parity an even number of times, so the
    # right copy is exactly I (x) H* and both halves are Kronecker products.
    h = build_sparse(H, cap).matrix
    eye = sp.identity(1 << n, dtype=complex, format="csr")
    return SparseOperator(sp.kron(eye, h) + sp.kron(h.conj(), eye), 2 * n)


def _cross_sparse(cross: FermionOperator, skip_z: bool, cap: int) -> SparseOperator:
    if skip_z:
        return pauli_sum_to_sparse(jordan_wigner(cross, skip_z_strings=True),
                                   cross.n_modes, cap)
    return build_sparse(cross, cap)


@dataclass(frozen=True, eq=False)
class TotalHamiltonian:
    operator: SparseOperator
    beta: float
    weights: CouplingWeights
    hamiltonian: FermionOperator
    cross: FermionOperator
    skip_z_strings: bool = True

    @property
    def n_modes(self) -> int:
        return self.hamiltonian.n_modes

    @cached_property
    def paulis(self) -> list[PauliString]:
        """Qubit image on ``2n`` qubits, merged over like strings."""
        H = self.hamiltonian
        acc: dict[str, complex] = {}
        pieces = (jordan_wigner(embed_doubled(H, "L")),
                  jordan_wigner(embed_doubled(H, "R")),
                  jordan_wigner(self.cross, skip_z_strings=self.skip_z_strings))
        for piece in pieces:
            for p in piece:
                acc[p.letters] = acc.get(p.letters, 0) + p.coefficient
        return [PauliString(c, s) for s, c in sorted(acc.items()) if abs(c) > 1e-14]


def build_h_total(H: FermionOperator, freqs, beta: float, skip_z_strings: bool = True,
                  cap: int = QUBIT_CAP) -> TotalHamiltonian:
    """``H_L + H_R + H_LR(beta)`` on ``2n`` qubits.

    The pairing strength of mode ``i`` is ``2 mu_i``: with that value the
    ground state at quadratic ``H`` is exactly the thermofield double (each
    ``(i, n+i)`` block then has ground-state amplitude ratio
    ``exp(-beta w_i / 2)``).
    """
    omega = _omega(freqs)
    if len(omega) != H.n_modes:
        raise ContractViolation("one frequency per mode is required")
    weights = coupling_weights(omega, beta)
    cross = pairing_terms(2 * weights.mu, H.n_modes)
    op = _lr_sparse(H, cap) + _cross_sparse(cross, skip_z_strings, cap)
    return TotalHamiltonian(op, float(beta), weights, H, cross, skip_z_strings)


@dataclass(frozen=True, eq=False)
class FamilyVariant:
    left: np.ndarray
    right: np.ndarray
    operator: SparseOperator
    constants: np.ndarray
    fermion_operator: FermionOperator


def build_family_variant(freqs, beta: float, left: Sequence[float],
                         right: Sequence[float], skip_z_strings: bool = True,
                         cap: int = QUBIT_CAP) -> FamilyVariant:
    """Bogoliubov-rotated ``sum_i L_i n~^L_i + R_i n~^R_i`` written out in the
    bare modes.  The rotated vacuum (the thermofield double of
    ``sum_i w_i n_i``) is its zero-energy eigenstate for any ``L``, ``R``."""
    omega = _omega(freqs)
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    n = len(omega)
    if left.shape != (n,) or right.shape != (n,):
        raise ContractViolation("L and R need one entry per mode")
    bog = bogoliubov_factors(omega, beta)
    u2, v2, uv = bog.u**2, bog.v**2, bog.u * bog.v
    constants = (left + right) * v2
    terms = [FermionTerm(float(constants.sum()), ())]
    for i in range(n):
        terms.append(FermionTerm(left[i] * u2[i] - right[i] * v2[i], ((i, True), (i, False))))
        terms.append(FermionTerm(-left[i] * v2[i] + right[i] * u2[i],
                                 ((n + i, True), (n + i, False))))
    diagonal = FermionOperator(2 * n, terms)
    cross = pairing_terms((left + right) * uv, n)
    op = build_sparse(diagonal, cap) + _cross_sparse(cross, skip_z_strings, cap)
    return FamilyVariant(left, right, op, constants, diagonal + cross)


def exact_tfd(H_sparse: SparseOperator, beta: float) -> np.ndarray:
    """``sum_m lambda_m |E_m> (x) |E_m*>`` with Gibbs amplitudes
    ``lambda_m = exp(-beta E_m / 2) / sqrt(Z)``."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    decomp = eig_full(H_sparse)
    energies, vectors = decomp.energies, decomp.vectors
    shifted = energies - energies[0]
    if np.isinf(beta):
        amps = (shifted <= 1e-12).astype(float)
    else:
        amps = np.exp(-beta * shifted / 2)
    amps /= np.linalg.norm(amps)
    psi = (vectors.conj() * amps) @ vectors.T
    return psi.reshape(-1)


def state_overlap(psi: np.ndarray, phi: np.ndarray) -> float:
    psi = np.asarray(psi)
    phi = np.asarray(phi)
    if psi.shape != phi.shape:
        raise ContractViolation(f"dimension mismatch {psi.shape} vs {phi.shape}")
    for name, v in (("psi", psi), ("phi", phi)):
        if abs(np.linalg.norm(v) - 1) > 1e-8:
            raise ContractViolation(f"{name} is not normalised")
    return float(min(1.0, abs(np.vdot(psi, phi))))


def reduced_density_left(psi: np.ndarray, n: int) -> np.ndarray:
    """Reduced density matrix of the left factor."""
    m = psi.reshape(1 << n, 1 << n)  # rows: right index, cols: left index
    return m.T @ m.conj()
