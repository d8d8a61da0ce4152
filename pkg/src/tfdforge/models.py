"""Spinless Hubbard ring in real and momentum space, plus the mean-field
frequency correction used to build improved L-R couplings."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractViolation
from .fock import FermionOperator, FermionTerm, FockState

log = logging.getLogger(__name__)

EXHAUSTIVE_MAX_SITES = 12
FIXED_POINT_CAP = 100
TIE_TOL = 1e-12


@dataclass(frozen=True)
class HubbardParams:
    """Periodic spinless Hubbard ring."""

    n_sites: int
    t: float = 1.0
    eps0: float = 0.0
    U: float = 0.0

    def __post_init__(self):
        if self.n_sites < 2:
            raise ContractViolation("the ring needs at least two sites")

    def with_u(self, U: float) -> "HubbardParams":
        return replace(self, U=U)


@dataclass(frozen=True)
class ModeFrequencies:
    values: tuple[float, ...]
    provenance: str = "free"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.provenance not in ("free", "meanfield", "custom"):
            raise ContractViolation(f"unknown provenance {self.provenance!r}")

    def __len__(self):
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class MeanFieldResult:
    frequencies: ModeFrequencies
    density: float
    alpha: float
    n_electrons: int
    occupation: FockState
    energy: float
    converged: bool = True
    method: str = "exhaustive"


def _cosines(n: int) -> np.ndarray:
    return np.cos(2 * np.pi * np.arange(n) / n)


def hubbard_real(params: HubbardParams) -> FermionOperator:
    n = params.n_sites
    terms = []
    for i in range(n):
        j = (i + 1) % n
        terms.append(FermionTerm(params.eps0, ((i, True), (i, False))))
        terms.append(FermionTerm(-params.t, ((i, True), (j, False))))
        terms.append(FermionTerm(-params.t, ((j, True), (i, False))))
        if params.U:
            terms.append(FermionTerm(
                params.U, ((i, True), (i, False), (j, True), (j, False))))
    return FermionOperator(n, terms)


def hubbard_momentum(params: HubbardParams) -> FermionOperator:
    """Fourier-transformed ring: diagonal band plus the momentum-exchange
    interaction ``(U/N) sum_{k,p,q} e^{-2 pi i q/N} a†_{k+q} a_k a†_{p-q} a_p``."""
    n = params.n_sites
    omega = free_frequencies(params).values
    terms = [FermionTerm(omega[k], ((k, True), (k, False))) for k in range(n)]
    if params.U:
        for q in range(n):
            phase = params.U / n * np.exp(-2j * np.pi * q / n)
            for k in range(n):
                for p in range(n):
                    terms.append(FermionTerm(
                        phase,
                        (((k + q) % n, True), (k, False), ((p - q) % n, True), (p, False))))
    return FermionOperator(n, terms)


def free_frequencies(params: HubbardParams) -> ModeFrequencies:
    n = params.n_sites
    return ModeFrequencies(tuple(params.eps0 - 2 * params.t * _cosines(n)), "free")


def mean_field_energy(occupation: FockState, params: HubbardParams) -> float:
    """Energy of the translation-invariant mean-field Hamiltonian, averages
    taken self-consistently in the given occupation pattern.

    The density and cosine-moment pieces each appear twice in the quadratic
    part and once with opposite sign in the constant, leaving
    ``sum_k w_k n_k + (U/N) (N_e^2 - C^2)`` with ``C = sum_p cos(2 pi p/N) n_p``.
    """
    n = params.n_sites
    if occupation.n_modes != n:
        raise ContractViolation("occupation does not match the number of sites")
    occ = np.asarray(occupation.occupations(), dtype=float)
    omega = free_frequencies(params).as_array()
    n_e = occ.sum()
    c = _cosines(n) @ occ
    return float(omega @ occ + params.U / n * (n_e**2 - c**2))


def shifted_frequencies(occupation: FockState, params: HubbardParams):
    """``(w~, rho, alpha)`` for averages taken in ``occupation``."""
    n = params.n_sites
    occ = np.asarray(occupation.occupations(), dtype=float)
    cos = _cosines(n)
    rho = occ.sum() / n
    alpha = float(cos @ occ) / n
    omega = free_frequencies(params).as_array()
    return omega + 2 * params.U * rho - 2 * params.U * alpha * cos, rho, alpha


def _result(occupation: FockState, params: HubbardParams, method: str,
            converged: bool = True) -> MeanFieldResult:
    shifted, rho, alpha = shifted_frequencies(occupation, params)
    return MeanFieldResult(
        frequencies=ModeFrequencies(tuple(shifted), "meanfield"),
        density=rho,
        alpha=alpha,
        n_electrons=occupation.particle_number,
        occupation=occupation,
        energy=mean_field_energy(occupation, params),
        converged=converged,
        method=method,
    )


def _all_energies(params: HubbardParams) -> np.ndarray:
    n = params.n_sites
    bits = np.arange(1 << n)
    occ = ((bits[:, None] >> np.arange(n)) & 1).astype(float)
    omega = free_frequencies(params).as_array()
    n_e = occ.sum(axis=1)
    c = occ @ _cosines(n)
    return occ @ omega + params.U / n * (n_e**2 - c**2)


def _pick(energies: np.ndarray, candidates: np.ndarray) -> int:
    """Lowest energy; among near-ties the smallest bitmask."""
    best = energies.min()
    tied = candidates[energies <= best + TIE_TOL]
    return int(tied.min())


def _fill_lowest(levels: np.ndarray, n_e: int) -> int:
    order = np.argsort(levels, kind="stable")
    return int(sum(1 << int(k) for k in order[:n_e]))


def _filling_search(params: HubbardParams) -> MeanFieldResult:
    n = params.n_sites
    omega = free_frequencies(params).as_array()
    found = []  # (energy, bits, converged)
    for n_e in range(n + 1):
        bits = _fill_lowest(omega, n_e)
        history = [bits]
        converged = False
        for _ in range(FIXED_POINT_CAP):
            shifted, _, _ = shifted_frequencies(FockState(bits, n), params)
            nxt = _fill_lowest(shifted, n_e)
            if nxt == bits:
                converged = True
                break
            if nxt in history:
                break
            history.append(nxt)
            bits = nxt
        if converged:
            candidates = [bits]
        else:
            # cycle or cap: keep the best pattern visited
            candidates = history
        for b in candidates:
            found.append((mean_field_energy(FockState(b, n), params), b, converged))
    energies = np.array([f[0] for f in found])
    patterns = np.array([f[1] for f in found])
    best = _pick(energies, patterns)
    converged = next(f[2] for f in found if f[1] == best)
    if not converged:
        log.warning("mean-field fixed point did not settle; returning best pattern seen")
    return _result(FockState(best, n), params, "filling", converged)


def mean_field_frequencies(params: HubbardParams, method: str = "auto") -> MeanFieldResult:
    """Mean-field corrected frequencies at the lowest-energy occupation.

    ``method="exhaustive"`` scans all ``2**N`` patterns; ``"filling"`` fills the
    ``N_e`` lowest levels for every ``N_e`` and refines the filling to a fixed
    point.  ``"auto"`` scans exhaustively up to twelve sites.
    """
    if method == "auto":
        method = "exhaustive" if params.n_sites <= EXHAUSTIVE_MAX_SITES else "filling"
    if method == "filling":
        return _filling_search(params)
    if method != "exhaustive":
        raise ContractViolation(f"unknown method {method!r}")
    energies = _all_energies(params)
    best = _pick(energies, np.arange(energies.size))
    return _result(FockState(best, params.n_sites), params, "exhaustive")
