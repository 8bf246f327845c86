"""Derivative-free minimization for the VQE inner loop.

A multi-restart wrapper around a local simplex search.  Restart 0 starts
exactly at theta0 (the warm start); every later restart perturbs theta0
by an independent uniform draw from [-init_range, +init_range] per
coordinate.  The best energy ever evaluated, across all restarts, is
what gets returned -- so the result can never be worse than the warm
start itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .sim import Ansatz, expectation, prepare_state


@dataclass(frozen=True)
class OptimizerConfig:
    max_evals: int = 2000
    f_tol: float = 1e-8
    restarts: int = 100
    init_range: float = float(np.pi)
    seed: int = 0

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if not (np.isfinite(self.f_tol) and self.f_tol > 0):
            raise ValueError("f_tol must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not (np.isfinite(self.init_range) and self.init_range >= 0):
            raise ValueError("init_range must be a finite non-negative real")


@dataclass(frozen=True)
class VQEResult:
    """Outcome of a multi-restart minimization.

    history records (evaluation index, energy) whenever the running best
    improved, plus an (index, inf) marker for every restart killed by a
    non-finite objective value.  energy is the objective value actually
    evaluated at theta_opt, not a re-computation.
    """

    theta_opt: np.ndarray
    energy: float
    evals: int
    restart_index: int
    history: tuple[tuple[int, float], ...]


class AllRestartsAborted(RuntimeError):
    """Every restart hit a non-finite objective value."""


class _AbortRestart(Exception):
    pass


def minimize(objective, theta0, config: OptimizerConfig | None = None) -> VQEResult:
    """Minimize a scalar objective over a parameter vector.

    Deterministic for a fixed config.seed.  A restart whose objective
    goes non-finite is abandoned (and marked in history); if that
    happens to every restart, AllRestartsAborted is raised.
    """
    if config is None:
        config = OptimizerConfig()
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    state = {"evals": 0, "best_f": np.inf, "best_x": None, "best_r": -1}
    history: list[tuple[int, float]] = []

    def wrapped(x, restart):
        state["evals"] += 1
        f = float(objective(np.asarray(x, dtype=float)))
        if not np.isfinite(f):
            raise _AbortRestart
        if f < state["best_f"]:
            state["best_f"] = f
            state["best_x"] = np.array(x, dtype=float)
            state["best_r"] = restart
            history.append((state["evals"], f))
        return f

    if theta0.size == 0:
        try:
            f0 = wrapped(theta0, 0)
        except _AbortRestart:
            history.append((state["evals"], np.inf))
            raise AllRestartsAborted("objective is non-finite at the empty point")
        return VQEResult(
            theta_opt=theta0,
            energy=f0,
            evals=1,
            restart_index=0,
            history=tuple(history),
        )

    rng = np.random.default_rng(config.seed)
    for r in range(config.restarts):
        x0 = theta0.copy()
        if r > 0:
            x0 = x0 + rng.uniform(-config.init_range, config.init_range, theta0.size)
        try:
            _scipy_minimize(
                lambda x: wrapped(x, r),
                x0,
                method="Nelder-Mead",
                options=dict(fatol=config.f_tol, xatol=1e-8, maxfev=config.max_evals),
            )
        except _AbortRestart:
            history.append((state["evals"], np.inf))
    if state["best_x"] is None:
        raise AllRestartsAborted("every restart hit a non-finite objective value")
    return VQEResult(
        theta_opt=state["best_x"],
        energy=state["best_f"],
        evals=state["evals"],
        restart_index=state["best_r"],
        history=tuple(history),
    )


def shift_gradient(ansatz: Ansatz, hamiltonian, theta) -> np.ndarray:
    """Gradient of the circuit energy, one entry per gate parameter.

    RY and RZ use the exact two-point shift rule at +/- pi/2 (their
    generators have eigenvalues +/- 1/2, making the energy a sinusoid in
    each angle).  CRY generators also have a 0 eigenvalue, where the
    two-point rule does not apply, so those entries fall back to a
    central finite difference with step 1e-5.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.n_params,):
        raise ValueError(f"expected {ansatz.n_params} parameters")

    def energy(vec):
        return expectation(prepare_state(ansatz, vec), hamiltonian)

    grad = np.zeros(ansatz.n_params)
    for k, gate in enumerate(ansatz.gates):
        if gate.kind in ("RY", "RZ"):
            step = np.pi / 2.0
            tp = theta.copy()
            tp[k] += step
            tm = theta.copy()
            tm[k] -= step
            grad[k] = (energy(tp) - energy(tm)) / 2.0
        else:
            h = 1e-5
            tp = theta.copy()
            tp[k] += h
            tm = theta.copy()
            tm[k] -= h
            grad[k] = (energy(tp) - energy(tm)) / (2.0 * h)
    return grad
