"""Experiment drivers producing CSV/JSON tables: overlap sweeps, forged VQE
runs, spectrum reports and mean-field band tables."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .doubled import build_h_total, exact_tfd, state_overlap
from .errors import ContractViolation, ResourceLimitError
from .fock import QUBIT_CAP, build_sparse
from .forging import ForgingProblem, build_layout, energy_estimators
from .models import (
    HubbardParams,
    free_frequencies,
    hubbard_momentum,
    mean_field_frequencies,
)
from .optimize import OptimizerConfig, optimize
from .solver import DENSE_DIM_CAP, eig_full, ground_state

log = logging.getLogger(__name__)

MIN_BETA = 0.05


@dataclass
class ExperimentConfig:
    n: int = 4
    t: float = 1.0
    eps0: float = 0.0
    u: list[float] = field(default_factory=lambda: [1.0])
    beta_min: float = MIN_BETA
    beta_max: float = 5.0
    beta_steps: int = 50
    beta: float = 1.26
    frequencies: str = "meanfield"
    layers: int = 1
    rank: int | None = None
    seed: int = 0
    maxiter: int = 500
    restarts: int = 5
    validate: bool = False
    out: str | None = None

    def __post_init__(self):
        if isinstance(self.u, (int, float)):
            self.u = [float(self.u)]
        self.u = [float(x) for x in self.u]
        if self.beta_min < MIN_BETA:
            raise ContractViolation(f"beta_min must be at least {MIN_BETA}")
        if self.beta_steps < 2:
            raise ContractViolation("the beta grid needs at least two points")
        if self.frequencies not in ("free", "meanfield"):
            raise ContractViolation("frequencies must be 'free' or 'meanfield'")
        if 2 * self.n > QUBIT_CAP:
            raise ResourceLimitError(
                f"2N = {2 * self.n} qubits exceeds the cap of {QUBIT_CAP}")

    def beta_grid(self) -> np.ndarray:
        return np.linspace(self.beta_min, self.beta_max, self.beta_steps)

    def params(self, u: float) -> HubbardParams:
        return HubbardParams(self.n, self.t, self.eps0, u)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ContractViolation(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def load_config(path: str | Path) -> dict:
    """Read a JSON config, or the configuration embedded in an earlier output
    (JSON ``"config"`` key or CSV ``# config:`` header line)."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        return data["config"] if "config" in data and isinstance(data["config"], dict) else data
    for line in text.splitlines():
        if line.startswith("# config:"):
            return json.loads(line[len("# config:"):])
    raise ContractViolation(f"no configuration found in {path}")


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _emit(path, text: str):
    if path == "-":
        sys.stdout.write(text)
    elif path:
        Path(path).write_text(text)


def write_csv(path, header: list[str], rows: list[list], config: ExperimentConfig) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config.to_dict(), sort_keys=True) + "\n")
    buf.write(f"# seed: {config.seed}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    text = buf.getvalue()
    _emit(path, text)
    return text


def read_csv(path) -> list[dict]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _frequencies(config: ExperimentConfig, params: HubbardParams):
    if config.frequencies == "free":
        return free_frequencies(params)
    return mean_field_frequencies(params).frequencies


def overlap_rows(config: ExperimentConfig) -> list[list]:
    """One row ``(beta, u, freq_source, overlap, gs_energy)`` per grid point."""
    rows = []
    for u in config.u:
        params = config.params(u)
        H = hubbard_momentum(params)
        H_sparse = build_sparse(H)
        freqs = _frequencies(config, params)
        for beta in config.beta_grid():
            h_total = build_h_total(H, freqs, beta)
            energy, gs = ground_state(h_total.operator, seed=config.seed)
            overlap = state_overlap(gs, exact_tfd(H_sparse, beta))
            rows.append([beta, u, config.frequencies, overlap, energy])
            log.debug("U=%g beta=%.4g overlap=%.12f", u, beta, overlap)
    return rows


def run_overlap_sweep(config: ExperimentConfig) -> list[dict]:
    rows = overlap_rows(config)
    header = ["beta", "u", "freq_source", "overlap_gs_tfd", "gs_energy"]
    write_csv(config.out, header, rows, config)
    return [dict(zip(header, r)) for r in rows]


def _vqe_single(config: ExperimentConfig, u: float) -> dict:
    params = config.params(u)
    H = hubbard_momentum(params)
    H_sparse = build_sparse(H)
    freqs = _frequencies(config, params)
    h_total = build_h_total(H, freqs, config.beta)
    layout = build_layout(H, hubbard_momentum(params.with_u(0.0)), config.layers)
    problem = ForgingProblem(h_total, layout, H_sparse, rank=config.rank)
    opt_config = OptimizerConfig(maxiter=config.maxiter, restarts=config.restarts,
                                 seed=config.seed)
    result = optimize(problem.cost, None, opt_config, n_params=layout.n_params)
    energies = energy_estimators(layout, result.theta, H_sparse)
    record = {
        "u": u,
        "beta": config.beta,
        "frequencies": list(freqs.values),
        "n_params": layout.n_params,
        "set_sizes": [len(s) for s in layout.sets],
        "theta_opt": result.theta.tolist(),
        "cost": result.cost,
        "cost_history": result.cost_history,
        "restart_costs": result.restart_costs,
        "best_restart": result.restart,
        "converged": result.converged,
        "energy_estimators": energies.tolist(),
        "wall_time_s": result.wall_time,
    }
    if config.validate:
        if H_sparse.dim > DENSE_DIM_CAP:
            raise ResourceLimitError("validation needs a dense spectrum")
        tfd = exact_tfd(H_sparse, config.beta)
        _, gs = ground_state(h_total.operator, seed=config.seed)
        record["overlap_psi_tfd"] = state_overlap(problem.state(result.theta), tfd)
        record["overlap_gs_tfd"] = state_overlap(gs, tfd)
        record["exact_spectrum"] = eig_full(H_sparse).energies.tolist()
    return record


def run_vqe_experiment(config: ExperimentConfig) -> dict:
    start = time.perf_counter()
    runs = [_vqe_single(config, u) for u in config.u]
    timing = {"created": datetime.now(timezone.utc).isoformat(),
              "wall_time_s": time.perf_counter() - start}
    for run in runs:
        timing.setdefault("per_run_s", []).append(run.pop("wall_time_s"))
    out = {"config": config.to_dict(), "seed": config.seed, "runs": runs,
           "converged": all(r["converged"] for r in runs), "timing": timing}
    _emit(config.out, json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out


def spectrum_rows(config: ExperimentConfig, theta=None) -> list[list]:
    """Exact and variational spectra side by side.  ``theta=0`` skips the
    optimisation (used to check the free case)."""
    u = config.u[0]
    params = config.params(u)
    H = hubbard_momentum(params)
    H_sparse = build_sparse(H)
    exact = eig_full(H_sparse).energies
    if theta is None:
        record = _vqe_single(dataclasses.replace(config, u=[u], validate=False), u)
        variational = np.sort(record["energy_estimators"])
    else:
        layout = build_layout(H, hubbard_momentum(params.with_u(0.0)), config.layers)
        theta = np.broadcast_to(np.asarray(theta, float), (layout.n_params,))
        variational = np.sort(energy_estimators(layout, theta, H_sparse))
    return [[m, exact[m], variational[m]] for m in range(len(exact))]


def run_spectrum_report(config: ExperimentConfig, theta=None) -> list[dict]:
    rows = spectrum_rows(config, theta)
    header = ["m", "e_exact", "e_variational"]
    write_csv(config.out, header, rows, config)
    return [dict(zip(header, r)) for r in rows]


def run_meanfield_bands(config: ExperimentConfig) -> list[dict]:
    rows = []
    for u in config.u:
        params = config.params(u)
        free = free_frequencies(params).values
        mf = mean_field_frequencies(params).frequencies.values
        rows.extend([k, free[k], mf[k], u] for k in range(config.n))
    header = ["k", "omega_free", "omega_meanfield", "U"]
    write_csv(config.out, header, rows, config)
    return [dict(zip(header, r)) for r in rows]
