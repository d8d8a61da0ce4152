"""Fermionic Fock space: basis states, ladder-operator algebra, sparse
matrices and the Jordan-Wigner map.

Conventions used throughout the package:

* Mode ``i`` is stored in bit ``i`` of an integer bitmask; a set bit means
  the mode is occupied.  The statevector index of a basis state is its
  bitmask, so qubit ``i`` is the ``i``-th least significant bit.
* The Jordan-Wigner image of ``a_i`` is ``Z_0 ... Z_{i-1} (X_i + iY_i)/2``.
  With occupied = ``|1>`` this reproduces the sign ``(-1)^{#occupied below i}``
  used by :func:`apply_fermion_term`.
* Pauli strings are written with the character at position ``i`` acting on
  qubit ``i`` (``"XZI"`` is ``X_0 Z_1``).
* On a doubled space with ``2n`` modes the left copy owns modes ``0..n-1`` and
  the right copy owns ``n..2n-1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractViolation, ResourceLimitError

QUBIT_CAP = 16
DROP_TOL = 1e-14
MERGE_TOL = 1e-14


@dataclass(frozen=True)
class FockState:
    """Occupation-number basis state stored as a bitmask."""

    bits: int
    n_modes: int

    def __post_init__(self):
        if self.n_modes < 1:
            raise ContractViolation(f"n_modes must be positive, got {self.n_modes}")
        if not 0 <= self.bits < (1 << self.n_modes):
            raise ContractViolation(
                f"bitmask {self.bits} does not fit in {self.n_modes} modes")

    def occupied(self, mode: int) -> bool:
        return bool((self.bits >> mode) & 1)

    def occupations(self) -> tuple[int, ...]:
        return tuple((self.bits >> i) & 1 for i in range(self.n_modes))

    @property
    def particle_number(self) -> int:
        return bin(self.bits).count("1")

    @classmethod
    def from_occupations(cls, occupations: Sequence[int]) -> "FockState":
        bits = 0
        for i, n in enumerate(occupations):
            if n not in (0, 1):
                raise ContractViolation(f"occupation of mode {i} must be 0 or 1")
            bits |= n << i
        return cls(bits, len(occupations))


@dataclass(frozen=True)
class FermionTerm:
    """``coefficient * f_0 f_1 ... f_k`` with ``factors[j] = (mode, dagger)``.

    Factors are listed as written, so the rightmost factor acts first.
    """

    coefficient: complex
    factors: tuple[tuple[int, bool], ...]

    def adjoint(self) -> "FermionTerm":
        return FermionTerm(
            complex(self.coefficient).conjugate(),
            tuple((m, not d) for m, d in reversed(self.factors)))

    def modes(self) -> set[int]:
        return {m for m, _ in self.factors}


_FACTOR_RE = re.compile(r"^(\d+)(\^?)$")


def fermion_term(coefficient: complex, text: str = "") -> FermionTerm:
    """Build a term from a compact string such as ``"0^ 1"`` (a†_0 a_1)."""
    factors = []
    for token in text.split():
        m = _FACTOR_RE.match(token)
        if m is None:
            raise ContractViolation(f"cannot parse ladder factor {token!r}")
        factors.append((int(m.group(1)), m.group(2) == "^"))
    return FermionTerm(complex(coefficient), tuple(factors))


@dataclass(frozen=True)
class FermionOperator:
    """Sum of fermion terms on ``n_modes`` modes."""

    n_modes: int
    terms: tuple[FermionTerm, ...] = ()

    def __post_init__(self):
        if self.n_modes < 1:
            raise ContractViolation("n_modes must be positive")
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            for m, _ in t.factors:
                if not 0 <= m < self.n_modes:
                    raise ContractViolation(
                        f"mode {m} out of range for {self.n_modes} modes")

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        if other.n_modes != self.n_modes:
            raise ContractViolation("cannot add operators on different mode counts")
        return FermionOperator(self.n_modes, self.terms + other.terms)

    def __mul__(self, scalar: complex) -> "FermionOperator":
        return FermionOperator(
            self.n_modes,
            tuple(FermionTerm(t.coefficient * scalar, t.factors) for t in self.terms))

    __rmul__ = __mul__

    def adjoint(self) -> "FermionOperator":
        return FermionOperator(self.n_modes, tuple(t.adjoint() for t in self.terms))

    def conjugate_coefficients(self) -> "FermionOperator":
        return FermionOperator(
            self.n_modes,
            tuple(FermionTerm(complex(t.coefficient).conjugate(), t.factors)
                  for t in self.terms))

    def is_even(self) -> bool:
        """True when every term has an even number of ladder factors."""
        return all(len(t.factors) % 2 == 0 for t in self.terms)


def apply_fermion_term(term: FermionTerm, state: FockState):
    """Act with one fermion term (coefficient ignored) on a basis state.

    Returns ``(phase, new_state)`` with ``phase`` in ``{+1, -1}``, or ``None``
    when the term annihilates the state.
    """
    bits = state.bits
    sign = 1
    for mode, dagger in reversed(term.factors):
        if not 0 <= mode < state.n_modes:
            raise ContractViolation(
                f"mode {mode} out of range for {state.n_modes} modes")
        occ = (bits >> mode) & 1
        if occ == dagger:
            return None
        if bin(bits & ((1 << mode) - 1)).count("1") % 2:
            sign = -sign
        bits ^= 1 << mode
    return sign, FockState(bits, state.n_modes)


def _parity(arr: np.ndarray) -> np.ndarray:
    """Parity (0/1) of the popcount of each entry."""
    arr = arr.astype(np.uint64, copy=True)
    shift = 32
    while shift:
        arr ^= arr >> np.uint64(shift)
        shift //= 2
    return (arr & np.uint64(1)).astype(np.int64)


def _apply_term_all(term: FermionTerm, bits: np.ndarray):
    """Vectorised :func:`apply_fermion_term` over an array of bitmasks."""
    cur = bits.astype(np.int64, copy=True)
    valid = np.ones(cur.shape, dtype=bool)
    sign = np.ones(cur.shape, dtype=np.int64)
    for mode, dagger in reversed(term.factors):
        occ = (cur >> mode) & 1
        valid &= occ != int(dagger)
        below = _parity(cur & ((1 << mode) - 1))
        sign *= 1 - 2 * below
        cur ^= 1 << mode
    return valid, sign, cur


def _check_cap(n_qubits: int, cap: int):
    if n_qubits > cap:
        raise ResourceLimitError(
            f"{n_qubits} qubits exceeds the configured cap of {cap}")


@dataclass(frozen=True)
class SparseOperator:
    """Sparse complex matrix on ``2**n_qubits`` basis states (CSR storage)."""

    matrix: sp.csr_matrix
    n_qubits: int

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        m.sum_duplicates()
        if m.nnz:
            m.data[np.abs(m.data) < DROP_TOL] = 0
            m.eliminate_zeros()
        if m.shape != (1 << self.n_qubits,) * 2:
            raise ContractViolation(
                f"matrix shape {m.shape} does not match {self.n_qubits} qubits")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def expectation(self, vec: np.ndarray) -> complex:
        return complex(np.vdot(vec, self.matrix @ vec))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        diff = self.matrix - self.matrix.conj().T
        return diff.nnz == 0 or float(np.max(np.abs(diff.data))) <= tol

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        if other.n_qubits != self.n_qubits:
            raise ContractViolation("qubit counts differ")
        return SparseOperator(self.matrix + other.matrix, self.n_qubits)


def build_sparse(op: FermionOperator, cap: int = QUBIT_CAP) -> SparseOperator:
    """Matrix of ``op`` in the occupation basis, built term by term."""
    _check_cap(op.n_modes, cap)
    dim = 1 << op.n_modes
    basis = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for term in op.terms:
        if term.coefficient == 0:
            continue
        valid, sign, out = _apply_term_all(term, basis)
        rows.append(out[valid])
        cols.append(basis[valid])
        vals.append(term.coefficient * sign[valid])
    if rows:
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim), dtype=complex)
    else:
        mat = sp.csr_matrix((dim, dim), dtype=complex)
    return SparseOperator(mat.tocsr(), op.n_modes)


# --------------------------------------------------------------------------
# Pauli strings

_PAULI_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


@dataclass(frozen=True)
class PauliString:
    coefficient: complex
    letters: str

    def __post_init__(self):
        if set(self.letters) - set("IXYZ"):
            raise ContractViolation(f"invalid Pauli letters {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def x_mask(self) -> int:
        return sum(1 << i for i, c in enumerate(self.letters) if c in "XY")

    @property
    def z_mask(self) -> int:
        return sum(1 << i for i, c in enumerate(self.letters) if c in "ZY")

    @property
    def n_y(self) -> int:
        return self.letters.count("Y")

    def is_diagonal(self) -> bool:
        return self.x_mask == 0

    def commutes_with(self, other: "PauliString") -> bool:
        """Symplectic commutation test."""
        anti = (bin(self.x_mask & other.z_mask).count("1")
                + bin(self.z_mask & other.x_mask).count("1"))
        return anti % 2 == 0

    def to_sparse(self) -> SparseOperator:
        return pauli_sum_to_sparse([self], self.n_qubits)


def _multiply_letters(a: str, b: str) -> tuple[complex, str]:
    phase = 1
    out = []
    for x, y in zip(a, b):
        p, c = _PAULI_PRODUCT[x, y]
        phase *= p
        out.append(c)
    return phase, "".join(out)


def _pauli_phases(letters: str, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For ``P|b> = phase(b) |b'>`` return ``(b', phase)`` over an array of b."""
    p = PauliString(1, letters)
    flipped = bits ^ p.x_mask
    phase = (1j ** p.n_y) * (1 - 2 * _parity(bits & p.z_mask))
    return flipped, phase


def apply_pauli(letters: str, states: np.ndarray) -> np.ndarray:
    """Apply a unit-coefficient Pauli string along axis 0 of ``states``."""
    dim = states.shape[0]
    basis = np.arange(dim, dtype=np.int64)
    flipped, phase = _pauli_phases(letters, basis)
    out = np.empty_like(states, dtype=complex)
    if states.ndim == 1:
        out[flipped] = phase * states
    else:
        out[flipped] = phase[:, None] * states
    return out


def pauli_sum_to_sparse(paulis: Iterable[PauliString], n_qubits: int,
                        cap: int = QUBIT_CAP) -> SparseOperator:
    _check_cap(n_qubits, cap)
    dim = 1 << n_qubits
    basis = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for p in paulis:
        if p.n_qubits != n_qubits:
            raise ContractViolation("Pauli string length does not match qubit count")
        flipped, phase = _pauli_phases(p.letters, basis)
        rows.append(flipped)
        cols.append(basis)
        vals.append(p.coefficient * phase)
    if not rows:
        return SparseOperator(sp.csr_matrix((dim, dim), dtype=complex), n_qubits)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim), dtype=complex)
    return SparseOperator(mat.tocsr(), n_qubits)


def _ladder_image(mode: int, dagger: bool, n: int, skip_z: bool) -> dict[str, complex]:
    prefix = "I" * mode if skip_z else "Z" * mode
    tail = "I" * (n - mode - 1)
    y = -0.5j if dagger else 0.5j
    return {prefix + "X" + tail: 0.5, prefix + "Y" + tail: y}


def jordan_wigner(op: FermionOperator, skip_z_strings: bool = False,
                  tol: float = MERGE_TOL) -> list[PauliString]:
    """Jordan-Wigner image of ``op`` as merged Pauli strings.

    With ``skip_z_strings`` every ladder operator maps to ``(X ± iY)/2`` on its
    own qubit only.  That map is not an algebra homomorphism, so the result
    depends on how the terms are written; it is meant for the L-R pairing
    terms, written as ``a†_i a†_{n+i}`` plus its explicit adjoint
    ``a_{n+i} a_i``.
    """
    n = op.n_modes
    acc: dict[str, complex] = {}
    identity = "I" * n
    for term in op.terms:
        if term.coefficient == 0:
            continue
        cur = {identity: complex(term.coefficient)}
        for mode, dagger in term.factors:
            img = _ladder_image(mode, dagger, n, skip_z_strings)
            nxt: dict[str, complex] = {}
            for la, ca in cur.items():
                for lb, cb in img.items():
                    ph, lc = _multiply_letters(la, lb)
                    nxt[lc] = nxt.get(lc, 0) + ca * cb * ph
            cur = nxt
        for letters, c in cur.items():
            acc[letters] = acc.get(letters, 0) + c
    return [PauliString(c, letters) for letters, c in sorted(acc.items())
            if abs(c) > tol]


def embed_doubled(op: FermionOperator, side: str) -> FermionOperator:
    """Lift an operator into the doubled space.

    ``side="L"`` keeps mode ``i``; ``side="R"`` moves it to ``n+i`` and
    conjugates coefficients (the right copy carries ``H*``).  ``side="cross"``
    expects an operator already on ``2n`` modes whose terms each touch exactly
    one pair ``(i, n+i)``, and returns it unchanged after validation.
    """
    n = op.n_modes
    if side == "L":
        return FermionOperator(2 * n, op.terms)
    if side == "R":
        terms = tuple(
            FermionTerm(complex(t.coefficient).conjugate(),
                        tuple((m + n, d) for m, d in t.factors))
            for t in op.terms)
        return FermionOperator(2 * n, terms)
    if side == "cross":
        if n % 2:
            raise ContractViolation("cross operators live on an even number of modes")
        half = n // 2
        for t in op.terms:
            modes = t.modes()
            low = [m for m in modes if m < half]
            if len(modes) != 2 or len(low) != 1 or modes != {low[0], low[0] + half}:
                raise ContractViolation(f"term {t} is not of L-R pair form")
        return op
    raise ContractViolation(f"unknown side {side!r}")
