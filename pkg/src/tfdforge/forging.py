"""Entanglement-forged variational thermofield double.

The variational state is ``sum_i lambda_i |f_i> (x) |f_i*>`` with
``|f_i> = U(theta)|b_i>`` built from a Hamiltonian variational ansatz and
Boltzmann weights taken from the energy estimators ``<f_i|H|f_i>``.
Expectation values of ``H_tot`` are recombined from ``n``-qubit matrix
elements only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .doubled import TotalHamiltonian
from .errors import ContractViolation, HermiticityError
from .fock import (
    FermionOperator,
    FockState,
    PauliString,
    SparseOperator,
    apply_pauli,
    build_sparse,
    jordan_wigner,
)

IMAG_TOL_ESTIMATOR = 1e-10
IMAG_TOL_FORGED = 1e-8


def _sort_key(p: PauliString):
    c = complex(p.coefficient)
    return (p.letters, c.real, c.imag)


@dataclass(frozen=True, eq=False)
class HVALayout:
    """Ordered commuting groups of Pauli strings; set 0 is the quadratic part."""

    sets: tuple[tuple[PauliString, ...], ...]
    layers: int = 1

    def __post_init__(self):
        if self.layers < 1:
            raise ContractViolation("at least one layer is required")
        for group in self.sets:
            for p in group:
                if abs(complex(p.coefficient).imag) > 1e-12:
                    raise ContractViolation("ansatz generators need real coefficients")

    @property
    def n_qubits(self) -> int:
        return self.sets[0][0].n_qubits

    @property
    def param_shape(self) -> tuple[int, int]:
        return (self.layers, len(self.sets))

    @property
    def n_params(self) -> int:
        return self.layers * len(self.sets)


def partition_commuting(paulis: Sequence[PauliString], h2_strings: Sequence[PauliString],
                        layers: int = 1) -> HVALayout:
    """Group the qubit image of ``H`` into commuting sets.

    Set 0 holds the strings whose letters occur in ``h2_strings`` (the image
    of the quadratic part), with coefficients from ``paulis``.  The rest are
    sorted and placed first-fit into sets ``1, 2, ...``.
    """
    for i, a in enumerate(h2_strings):
        for b in h2_strings[i + 1:]:
            if not a.commutes_with(b):
                raise ContractViolation("quadratic strings must commute")
    by_letters = {p.letters: p for p in paulis}
    h2_letters = {p.letters for p in h2_strings}
    missing = h2_letters - by_letters.keys()
    if missing:
        raise ContractViolation(f"quadratic strings absent from the full image: {missing}")
    first = tuple(sorted((by_letters[s] for s in h2_letters), key=_sort_key))
    rest = sorted((p for p in paulis if p.letters not in h2_letters), key=_sort_key)
    groups: list[list[PauliString]] = []
    for p in rest:
        for g in groups:
            if all(p.commutes_with(q) for q in g):
                g.append(p)
                break
        else:
            groups.append([p])
    return HVALayout((first,) + tuple(tuple(g) for g in groups), layers)


def build_layout(hamiltonian: FermionOperator, quadratic: FermionOperator,
                 layers: int = 1) -> HVALayout:
    return partition_commuting(jordan_wigner(hamiltonian), jordan_wigner(quadratic), layers)


def _theta_matrix(layout: HVALayout, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.size != layout.n_params:
        raise ContractViolation(
            f"expected {layout.param_shape} parameters, got shape {theta.shape}")
    return theta.reshape(layout.param_shape)


def _evolve(layout: HVALayout, theta, states: np.ndarray) -> np.ndarray:
    th = _theta_matrix(layout, theta)
    out = np.array(states, dtype=complex)
    # U = prod_l prod_s exp(-i theta_{s,l} h_s) read as an operator product:
    # the rightmost factor (last layer, last set) reaches the state first.
    for layer in reversed(range(layout.layers)):
        for s in reversed(range(len(layout.sets))):
            for p in layout.sets[s]:
                angle = th[layer, s] * complex(p.coefficient).real
                if angle == 0:
                    continue
                out = np.cos(angle) * out - 1j * np.sin(angle) * apply_pauli(p.letters, out)
    return out


def apply_ansatz(layout: HVALayout, theta, b: FockState) -> np.ndarray:
    """``U(theta)|b>`` as an exact statevector."""
    if b.n_modes != layout.n_qubits:
        raise ContractViolation("basis state does not match the ansatz width")
    vec = np.zeros(1 << layout.n_qubits, dtype=complex)
    vec[b.bits] = 1
    return _evolve(layout, theta, vec)


def ansatz_frame(layout: HVALayout, theta) -> np.ndarray:
    """Matrix whose column ``i`` is ``U(theta)|b_i>``."""
    return _evolve(layout, theta, np.eye(1 << layout.n_qubits, dtype=complex))


def _as_sparse(H) -> SparseOperator:
    if isinstance(H, FermionOperator):
        return build_sparse(H)
    return H


def energy_estimators(layout: HVALayout, theta, H_qubit,
                      basis: Sequence[FockState] | None = None,
                      frame: np.ndarray | None = None) -> np.ndarray:
    """``<f_i|H|f_i>`` for each basis state (all of them by default)."""
    H = _as_sparse(H_qubit)
    if frame is None:
        frame = ansatz_frame(layout, theta)
    if basis is not None:
        frame = frame[:, [b.bits for b in basis]]
    values = np.einsum("ij,ij->j", frame.conj(), H.matrix @ frame)
    if np.max(np.abs(values.imag), initial=0.0) > IMAG_TOL_ESTIMATOR:
        raise HermiticityError("energy estimator has a non-negligible imaginary part")
    return values.real


@dataclass(frozen=True)
class SchmidtWeights:
    weights: np.ndarray
    energies: np.ndarray
    beta: float
    rank: int

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights)


def schmidt_weights(energies, beta: float, rank: int | None = None) -> SchmidtWeights:
    """Boltzmann amplitudes ``exp(-beta E_i / 2)``, kept on the ``rank``
    lowest estimators and normalised to unit 2-norm."""
    energies = np.asarray(energies, dtype=float)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    rank = len(energies) if rank is None else rank
    if not 1 <= rank <= len(energies):
        raise ContractViolation(f"rank must lie in [1, {len(energies)}]")
    keep = np.argsort(energies, kind="stable")[:rank]
    shifted = energies[keep] - energies[keep].min()
    amps = np.zeros_like(energies)
    if np.isinf(beta):
        amps[keep] = (shifted <= 1e-12).astype(float)
    else:
        amps[keep] = np.exp(-beta * shifted / 2)
    amps /= np.linalg.norm(amps)
    return SchmidtWeights(amps, energies, float(beta), rank)


@dataclass(frozen=True)
class LRTermDecomposition:
    """``H_tot = sum_a c_a O_{L,a} (x) O_{R,a}`` with Pauli strings on each side."""

    terms: tuple[tuple[float, str, str], ...]
    n_qubits: int

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        out = np.zeros((dim * dim, dim * dim), dtype=complex)
        eye = np.eye(dim)
        for c, left, right in self.terms:
            out += c * np.kron(apply_pauli(right, eye), apply_pauli(left, eye))
        return out


def decompose_lr(h_total: TotalHamiltonian) -> LRTermDecomposition:
    n = h_total.n_modes
    terms = []
    for p in h_total.paulis:
        c = complex(p.coefficient)
        if abs(c.imag) > 1e-12:
            raise HermiticityError(f"string {p.letters} has a complex coefficient")
        terms.append((c.real, p.letters[:n], p.letters[n:]))
    return LRTermDecomposition(tuple(terms), n)


def conjugate_sign(letters: str) -> int:
    """Entrywise conjugation of a Pauli string: ``Y* = -Y``."""
    return -1 if letters.count("Y") % 2 else 1


def forged_expectation(decomp: LRTermDecomposition, layout: HVALayout, theta,
                       weights: SchmidtWeights, frame: np.ndarray | None = None) -> float:
    """``<Psi|H_tot|Psi>`` from one-sided matrix elements.

    The right-side element ``<f_i*|O|f_j*>`` equals
    ``conj(<f_i|O*|f_j>)`` and ``O* = (-1)^{#Y} O`` for a Pauli string.
    """
    if decomp.n_qubits != layout.n_qubits:
        raise ContractViolation("decomposition and ansatz widths differ")
    if frame is None:
        frame = ansatz_frame(layout, theta)
    idx = weights.support
    f = frame[:, idx]
    lam = weights.weights[idx]
    identity = "I" * decomp.n_qubits
    cache: dict[str, np.ndarray] = {}

    def elements(letters: str) -> np.ndarray:
        if letters not in cache:
            if letters == identity:
                cache[letters] = np.eye(len(idx), dtype=complex)
            else:
                cache[letters] = f.conj().T @ apply_pauli(letters, f)
        return cache[letters]

    total = 0j
    for c, left, right in decomp.terms:
        a = elements(left)
        b = (conjugate_sign(right) * elements(right)).conj()
        total += c * (lam @ (a * b) @ lam)
    if abs(total.imag) > IMAG_TOL_FORGED:
        raise HermiticityError(f"forged expectation has imaginary part {total.imag:.3e}")
    return float(total.real)


def assemble_forged_state(layout: HVALayout, theta, weights: SchmidtWeights) -> np.ndarray:
    """Explicit ``2n``-qubit statevector of the forged ansatz (validation only)."""
    frame = ansatz_frame(layout, theta)
    psi = (frame.conj() * weights.weights) @ frame.T
    return psi.reshape(-1)


@dataclass(eq=False)
class ForgingProblem:
    """Everything ``forged_cost`` holds fixed: ``beta`` is not a parameter."""

    h_total: TotalHamiltonian
    layout: HVALayout
    hamiltonian: SparseOperator
    rank: int | None = None
    decomposition: LRTermDecomposition = field(init=False)

    def __post_init__(self):
        self.decomposition = decompose_lr(self.h_total)
        self.hamiltonian = _as_sparse(self.hamiltonian)

    @property
    def beta(self) -> float:
        return self.h_total.beta

    def weights(self, theta, frame=None) -> SchmidtWeights:
        est = energy_estimators(self.layout, theta, self.hamiltonian, frame=frame)
        return schmidt_weights(est, self.beta, self.rank)

    def cost(self, theta) -> float:
        return forged_cost(theta, self)

    __call__ = cost

    def state(self, theta) -> np.ndarray:
        return assemble_forged_state(self.layout, theta, self.weights(theta))


def forged_cost(theta, problem: ForgingProblem) -> float:
    frame = ansatz_frame(problem.layout, theta)
    weights = problem.weights(theta, frame=frame)
    return forged_expectation(problem.decomposition, problem.layout, theta, weights,
                              frame=frame)
