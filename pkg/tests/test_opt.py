"""Tests for the restarted Nelder-Mead wrapper and parameter-shift gradients."""

import numpy as np
import pytest

from susyqm.model import SuperpotentialSpec, build_hamiltonian
from susyqm.opt import (
    AllRestartsAborted,
    OptimizerConfig,
    VQEResult,
    minimize,
    shift_gradient,
)
from susyqm.sim import Ansatz, Gate, expectation, prepare_state


class TestOptimizerConfig:
    def test_defaults(self):
        cfg = OptimizerConfig()
        assert cfg.max_evals == 2000
        assert cfg.restarts == 100
        assert cfg.f_tol == 1e-8

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(max_evals=0),
            dict(f_tol=0.0),
            dict(restarts=0),
            dict(init_range=-1.0),
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            OptimizerConfig(**kwargs)


class TestMinimize:
    def test_quadratic_bowl(self):
        result = minimize(lambda x: float((x[0] - 1.0) ** 2), [4.0], OptimizerConfig(restarts=1))
        assert isinstance(result, VQEResult)
        assert result.theta_opt[0] == pytest.approx(1.0, abs=1e-4)
        assert result.energy == pytest.approx(0.0, abs=1e-8)

    def test_vector_quadratic(self):
        target = np.array([0.5, -1.5, 2.0])
        result = minimize(
            lambda x: float(np.sum((x - target) ** 2)),
            np.zeros(3),
            OptimizerConfig(restarts=2, seed=1),
        )
        np.testing.assert_allclose(result.theta_opt, target, atol=1e-3)

    def test_energy_is_objective_at_theta_opt(self):
        f = lambda x: float((x[0] + 2.0) ** 2 + 0.1 * np.sin(5 * x[0]))
        result = minimize(f, [0.0], OptimizerConfig(restarts=3, seed=0))
        assert result.energy == pytest.approx(f(result.theta_opt), abs=1e-12)

    def test_never_worse_than_the_starting_point(self):
        # restart 0 evaluates theta0 itself, so the reported minimum can
        # never exceed the objective there
        rng = np.random.default_rng(0)
        for _ in range(5):
            coeffs = rng.normal(size=4)
            f = lambda x: float(
                coeffs[0] * x[0] ** 2 + coeffs[1] * x[0] + coeffs[2] * np.sin(x[0] + coeffs[3])
            )
            theta0 = rng.uniform(-2, 2, size=1)
            result = minimize(f, theta0, OptimizerConfig(restarts=2, max_evals=50, seed=3))
            assert result.energy <= f(theta0) + 1e-12

    def test_restarts_escape_a_local_minimum(self):
        # (x^2-1)^2 + 0.3 x has a local minimum near +0.96 (f ~ +0.29)
        # and the global one near -1.04 (f ~ -0.31)
        f = lambda x: float((x[0] ** 2 - 1.0) ** 2 + 0.3 * x[0])
        stuck = minimize(f, [0.9], OptimizerConfig(restarts=1))
        freed = minimize(f, [0.9], OptimizerConfig(restarts=30, seed=0))
        assert stuck.energy > 0.25
        assert freed.energy < -0.30
        assert freed.theta_opt[0] < 0
        assert freed.restart_index > 0

    def test_history_tracks_improvements(self):
        result = minimize(
            lambda x: float(np.sum(x**2)),
            [3.0, -2.0],
            OptimizerConfig(restarts=4, seed=2),
        )
        finite = [(i, e) for i, e in result.history if np.isfinite(e)]
        energies = [e for _, e in finite]
        indices = [i for i, _ in finite]
        assert all(b < a for a, b in zip(energies, energies[1:]))  # strictly improving
        assert indices == sorted(indices)
        assert indices[-1] <= result.evals
        assert result.energy == pytest.approx(energies[-1], abs=1e-12)

    def test_eval_budget_respected(self):
        calls = []
        f = lambda x: (calls.append(1), float(np.sum(x**2)))[1]
        result = minimize(f, np.ones(5), OptimizerConfig(max_evals=10, restarts=1))
        assert result.evals == len(calls)
        assert result.evals <= 15  # simplex setup may finish the sweep in flight

    def test_non_finite_objective_aborts_that_restart(self):
        # blows up for |x| > 2; the perturbed restarts that wander out
        # there get recorded as aborted and the rest still optimize
        def f(x):
            if abs(x[0]) > 2.0:
                return float("nan")
            return float((x[0] - 1.0) ** 2)

        result = minimize(f, [0.0], OptimizerConfig(restarts=20, seed=5))
        assert result.energy == pytest.approx(0.0, abs=1e-7)
        aborted = [i for i, e in result.history if not np.isfinite(e)]
        assert aborted  # at least one restart drew a start beyond the cliff

    def test_all_restarts_aborted(self):
        with pytest.raises(AllRestartsAborted):
            minimize(lambda x: float("nan"), [0.0], OptimizerConfig(restarts=3))

    def test_empty_parameter_vector(self):
        result = minimize(lambda x: 7.25, np.zeros(0), OptimizerConfig(restarts=5))
        assert result.energy == 7.25
        assert result.evals == 1
        assert result.theta_opt.size == 0

    def test_deterministic_for_fixed_seed(self):
        f = lambda x: float((x[0] ** 2 - 1.0) ** 2 + 0.3 * x[0])
        a = minimize(f, [0.5], OptimizerConfig(restarts=8, seed=13))
        b = minimize(f, [0.5], OptimizerConfig(restarts=8, seed=13))
        assert a.energy == b.energy
        assert np.array_equal(a.theta_opt, b.theta_opt)


def _random_ansatz(rng, n_qubits, n_gates, bits):
    gates = []
    for _ in range(n_gates):
        kind = ["RY", "RZ", "CRY"][rng.integers(3)]
        if kind == "CRY":
            c, t = rng.choice(n_qubits, size=2, replace=False)
            gates.append(Gate("CRY", int(t), control=int(c)))
        else:
            gates.append(Gate(kind, int(rng.integers(n_qubits))))
    return Ansatz(bits, tuple(gates))


def _fd_gradient(ansatz, h, theta, step=1e-6):
    theta = np.asarray(theta, dtype=float)
    grad = np.zeros_like(theta)
    for i in range(len(theta)):
        up = theta.copy()
        dn = theta.copy()
        up[i] += step
        dn[i] -= step
        e_up = expectation(prepare_state(ansatz, up), h)
        e_dn = expectation(prepare_state(ansatz, dn), h)
        grad[i] = (e_up - e_dn) / (2 * step)
    return grad


class TestShiftGradient:
    def test_exact_for_a_single_rotation(self):
        # RY from |0> measured in Z gives E(theta) = cos(theta), so the
        # gradient must equal -sin(theta) to rounding accuracy.
        ansatz = Ansatz("0", (Gate("RY", 0),))
        z = np.diag([1.0, -1.0])
        for th in [0.4, 1.1, -2.2]:
            grad = shift_gradient(ansatz, z, [th])
            assert grad[0] == pytest.approx(-np.sin(th), abs=1e-10)

    def test_matches_finite_differences_on_random_circuits(self):
        h = build_hamiltonian(SuperpotentialSpec("AHO"), 4)
        rng = np.random.default_rng(31)
        for _ in range(50):
            ansatz = _random_ansatz(rng, 3, 3, "100")
            theta = rng.uniform(-np.pi, np.pi, size=3)
            got = shift_gradient(ansatz, h, theta)
            want = _fd_gradient(ansatz, h.matrix, theta)
            assert np.max(np.abs(got - want)) < 1e-6

    def test_controlled_rotation_parameter(self):
        h = build_hamiltonian(SuperpotentialSpec("DW"), 4)
        ansatz = Ansatz(
            "100",
            (Gate("RY", 1), Gate("CRY", 2, control=1), Gate("RY", 0)),
        )
        theta = np.array([0.8, -0.6, 1.2])
        got = shift_gradient(ansatz, h, theta)
        want = _fd_gradient(ansatz, h.matrix, theta)
        assert np.max(np.abs(got - want)) < 1e-6

    def test_parameter_count_check(self):
        ansatz = Ansatz("0", (Gate("RY", 0),))
        with pytest.raises(ValueError, match="parameters"):
            shift_gradient(ansatz, np.diag([1.0, -1.0]), [0.1, 0.2])

    def test_vanishes_at_a_converged_minimum(self):
        # one RY on the boson qubit of the cutoff-2 double well reaches
        # the exact sector minimum, where the gradient must vanish
        h = build_hamiltonian(SuperpotentialSpec("DW"), 2)
        ansatz = Ansatz("00", (Gate("RY", 1),))
        result = minimize(
            lambda th: expectation(prepare_state(ansatz, th), h),
            [0.0],
            OptimizerConfig(restarts=3, seed=0),
        )
        assert result.energy == pytest.approx(0.357233047034, abs=1e-7)
        grad = shift_gradient(ansatz, h, result.theta_opt)
        assert np.max(np.abs(grad)) < 1e-4
