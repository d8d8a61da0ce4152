"""Dense and iterative Hermitian eigensolvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import ContractViolation, ConvergenceError, ResourceLimitError
from .fock import SparseOperator

DENSE_DIM_CAP = 4096
ITERATIVE_DIM_CAP = 1 << 16


@dataclass(frozen=True)
class EigenDecomposition:
    energies: np.ndarray
    vectors: np.ndarray

    def residuals(self, H) -> np.ndarray:
        mat = _as_matrix(H)
        r = mat @ self.vectors - self.vectors * self.energies
        return np.linalg.norm(r, axis=0)


def _as_matrix(H):
    if isinstance(H, SparseOperator):
        return H.matrix
    return H


def _hermitian_dense(H, cap: int) -> np.ndarray:
    mat = _as_matrix(H)
    if mat.shape[0] > cap:
        raise ResourceLimitError(f"dense diagonalisation capped at dimension {cap}")
    dense = mat.toarray() if sp.issparse(mat) else np.asarray(mat, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(dense), initial=0.0)))
    if not np.allclose(dense, dense.conj().T, atol=1e-12 * scale, rtol=0):
        raise ContractViolation("matrix is not Hermitian")
    return dense


def _canonical_phase(vec: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(vec) > 1e-8)[0]
    return vec * (abs(vec[idx]) / vec[idx])


def eig_full(H, cap: int = DENSE_DIM_CAP) -> EigenDecomposition:
    """Complete spectrum in ascending order.

    Each eigenvector is phase-fixed (first non-negligible entry real positive)
    and vectors inside a degenerate block are sorted by their rounded entries,
    so repeated calls give identical bases.
    """
    dense = _hermitian_dense(H, cap)
    energies, vectors = np.linalg.eigh(dense)
    vectors = np.column_stack([_canonical_phase(vectors[:, m])
                               for m in range(vectors.shape[1])])
    spread = max(1.0, float(energies[-1] - energies[0]))
    order = []
    start = 0
    for m in range(1, len(energies) + 1):
        if m == len(energies) or energies[m] - energies[m - 1] > 1e-9 * spread:
            block = list(range(start, m))
            if len(block) > 1:
                keys = {j: tuple(np.round(np.concatenate(
                    [vectors[:, j].real, vectors[:, j].imag]), 8)) for j in block}
                block.sort(key=lambda j: keys[j])
            order.extend(block)
            start = m
    return EigenDecomposition(energies[order], vectors[:, order])


def ground_state(H, tol: float = 1e-9, seed: int = 0,
                 maxiter: int | None = None) -> tuple[float, np.ndarray]:
    """Lowest eigenpair via implicitly restarted Lanczos (matvec only).

    The starting vector is drawn from ``seed`` so results are reproducible.
    Raises :class:`ConvergenceError` if the residual ``||Hv - Ev||`` stays
    above ``tol``.
    """
    mat = _as_matrix(H)
    dim = mat.shape[0]
    if dim > ITERATIVE_DIM_CAP:
        raise ResourceLimitError(f"iterative solver capped at dimension {ITERATIVE_DIM_CAP}")
    diff = sp.csr_matrix(mat - mat.conj().T)
    if diff.nnz and np.max(np.abs(diff.data)) > 1e-12 * max(1.0, abs(mat).max()):
        raise ContractViolation("matrix is not Hermitian")
    if dim <= 16:
        decomp = eig_full(H)
        return float(decomp.energies[0]), decomp.vectors[:, 0]

    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    best = None
    for ncv in (min(dim - 1, 20), min(dim - 1, 60)):
        try:
            _, vecs = eigsh(mat, k=1, which="SA", v0=v0, ncv=ncv, tol=0,
                               maxiter=maxiter or 50 * dim)
        except ArpackNoConvergence as exc:
            if exc.eigenvalues.size == 0:
                continue
            vecs = exc.eigenvectors
        vec = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
        energy = float(np.real(np.vdot(vec, mat @ vec)))
        residual = float(np.linalg.norm(mat @ vec - energy * vec))
        if best is None or residual < best[0]:
            best = (residual, energy, vec)
        if residual <= tol:
            return energy, _canonical_phase(vec)
        v0 = vec
    raise ConvergenceError(
        f"ground state residual {best[0] if best else np.inf:.3e} above {tol:.1e}",
        best_residual=best[0] if best else None)
