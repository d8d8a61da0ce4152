"""Quasi-Newton (BFGS) minimisation with central finite-difference gradients."""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import line_search

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    fd_step: float = 1e-6
    gtol: float = 1e-6
    ftol_rel: float = 1e-10
    maxiter: int = 500
    restarts: int = 1
    seed: int = 0
    init_scale: float = 0.01


@dataclass
class OptimizationResult:
    theta: np.ndarray
    cost: float
    cost_history: list[float]
    converged: bool
    seed: int
    wall_time: float
    n_evaluations: int
    restart: int = 0
    energies: np.ndarray | None = None
    restart_costs: list[float] = field(default_factory=list)


def central_gradient(cost: Callable, x: np.ndarray, h: float) -> np.ndarray:
    grad = np.empty_like(x)
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = h
        grad[k] = (cost(x + step) - cost(x - step)) / (2 * h)
    return grad


def _bfgs(cost: Callable, x0: np.ndarray, config: OptimizerConfig):
    counter = [0]

    def f(x):
        counter[0] += 1
        return float(cost(x))

    def g(x):
        return central_gradient(f, x, config.fd_step)

    x = np.array(x0, dtype=float)
    fx = f(x)
    gx = g(x)
    inv_hess = np.eye(x.size)
    history = [fx]
    converged = False
    for _ in range(config.maxiter):
        if np.max(np.abs(gx), initial=0.0) < config.gtol:
            converged = True
            break
        direction = -inv_hess @ gx
        if gx @ direction >= 0:  # lost descent, reset curvature
            inv_hess = np.eye(x.size)
            direction = -gx
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # LineSearchWarning: handled below
            alpha, _, _, f_new, _, _ = line_search(f, g, x, direction, gfk=gx,
                                                   old_fval=fx)
        if alpha is None or f_new is None or f_new > fx:
            # backtracking fallback
            alpha, f_new = 1.0, None
            while alpha > 1e-12:
                trial = f(x + alpha * direction)
                if trial <= fx + 1e-4 * alpha * (gx @ direction):
                    f_new = trial
                    break
                alpha *= 0.5
            if f_new is None:
                break
        step = alpha * direction
        x_new = x + step
        g_new = g(x_new)
        y = g_new - gx
        sy = step @ y
        if sy > 1e-16:
            rho = 1.0 / sy
            eye = np.eye(x.size)
            inv_hess = ((eye - rho * np.outer(step, y)) @ inv_hess
                        @ (eye - rho * np.outer(y, step)) + rho * np.outer(step, step))
        rel = abs(fx - f_new) / max(abs(fx), 1e-300)
        x, fx, gx = x_new, f_new, g_new
        history.append(fx)
        if rel < config.ftol_rel:
            converged = True
            break
    return x, fx, history, converged, counter[0]


def optimize(cost: Callable, theta_init=None, config: OptimizerConfig = OptimizerConfig(),
             n_params: int | None = None) -> OptimizationResult:
    """Minimise ``cost`` with BFGS, best of ``config.restarts`` starts.

    The first start uses ``theta_init`` when given; every other start draws
    parameters uniformly from ``[-init_scale, init_scale]`` with a generator
    seeded by ``config.seed``.
    """
    if theta_init is None and n_params is None:
        raise ValueError("either theta_init or n_params is required")
    size = np.size(theta_init) if theta_init is not None else n_params
    rng = np.random.default_rng(config.seed)
    start = time.perf_counter()
    best = None
    costs = []
    evaluations = 0
    for r in range(config.restarts):
        if r == 0 and theta_init is not None:
            x0 = np.asarray(theta_init, dtype=float).ravel()
        else:
            x0 = rng.uniform(-config.init_scale, config.init_scale, size)
        if not np.isfinite(cost(x0)):
            raise ValueError("initial cost is not finite")
        x, fx, history, converged, n_eval = _bfgs(cost, x0, config)
        evaluations += n_eval
        costs.append(fx)
        log.debug("restart %d: cost %.12g converged=%s", r, fx, converged)
        if best is None or fx < best[1]:
            best = (x, fx, history, converged, r)
    x, fx, history, converged, r = best
    return OptimizationResult(
        theta=x, cost=fx, cost_history=history, converged=converged, seed=config.seed,
        wall_time=time.perf_counter() - start, n_evaluations=evaluations, restart=r,
        restart_costs=costs)
