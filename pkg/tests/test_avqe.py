"""Tests for gradient-screened ansatz growth and the fixed-shape variants."""

import json

import numpy as np
import pytest

import susyqm.avqe as avqe_mod
from susyqm.avqe import (
    AvqeAborted,
    AVQETrace,
    avqe_run,
    choose_basis_state,
    extrapolate_ansatz,
    operator_pool,
    pool_gradients,
    truncate_ansatz,
)
from susyqm.model import SuperpotentialSpec, build_hamiltonian, exact_spectrum
from susyqm.opt import AllRestartsAborted, OptimizerConfig, shift_gradient
from susyqm.sim import Ansatz, Gate, expectation, init_basis_state, prepare_state

FAST = OptimizerConfig(restarts=5, seed=0)


class TestOperatorPool:
    def test_size(self):
        assert len(operator_pool(2)) == 2 * 2 + 2
        assert len(operator_pool(3)) == 2 * 3 + 6
        assert len(operator_pool(4)) == 2 * 4 + 12

    def test_order_is_frozen_for_three_qubits(self):
        # screening ties break toward the earliest pool entry, so the
        # ordering is part of the observable behaviour
        want = (
            Gate("RY", 0),
            Gate("RY", 1),
            Gate("RY", 2),
            Gate("RZ", 0),
            Gate("RZ", 1),
            Gate("RZ", 2),
            Gate("CRY", 1, control=0),
            Gate("CRY", 2, control=0),
            Gate("CRY", 0, control=1),
            Gate("CRY", 2, control=1),
            Gate("CRY", 0, control=2),
            Gate("CRY", 1, control=2),
        )
        assert operator_pool(3).entries == want

    def test_needs_a_qubit(self):
        with pytest.raises(ValueError):
            operator_pool(0)


class TestChooseBasisState:
    @pytest.mark.parametrize(
        "kind,cutoff,bits",
        [
            ("HO", 2, "10"),
            ("HO", 8, "1000"),
            ("AHO", 2, "10"),
            ("AHO", 8, "1000"),
            ("AHO", 16, "10000"),
            ("DW", 2, "00"),
            ("DW", 4, "100"),
            ("DW", 8, "0000"),
            ("DW", 16, "00000"),
        ],
    )
    def test_reference_states(self, kind, cutoff, bits):
        assert choose_basis_state(SuperpotentialSpec(kind), cutoff) == bits

    def test_cutoff_validation(self):
        with pytest.raises(ValueError, match="power of two"):
            choose_basis_state(SuperpotentialSpec("HO"), 3)


class TestPoolGradients:
    def test_zero_on_an_eigenstate(self):
        # |10> is an exact eigenstate of the free model, so every probe
        # direction has vanishing first-order response.
        h = build_hamiltonian(SuperpotentialSpec("HO"), 2)
        ansatz = Ansatz("10")
        grads = pool_gradients(ansatz, np.zeros(0), operator_pool(2), h)
        assert len(grads) == len(operator_pool(2))
        assert np.max(np.abs(grads)) < 1e-10

    def test_rz_probes_are_blind_on_real_states(self):
        # RY circuits keep amplitudes real, and a Z/2 generator on a real
        # state produces no first-order energy change
        h = build_hamiltonian(SuperpotentialSpec("AHO"), 4)
        ansatz = Ansatz("100", (Gate("RY", 1), Gate("RY", 2)))
        theta = np.array([0.4, -0.9])
        pool = operator_pool(3)
        grads = np.asarray(pool_gradients(ansatz, theta, pool, h))
        rz = [i for i, g in enumerate(pool.entries) if g.kind == "RZ"]
        ry = [i for i, g in enumerate(pool.entries) if g.kind == "RY"]
        assert np.max(np.abs(grads[rz])) < 1e-12
        assert np.max(np.abs(grads[ry])) > 1e-3

    def test_matches_shift_rule_on_the_appended_parameter(self):
        h = build_hamiltonian(SuperpotentialSpec("DW"), 4)
        pool = operator_pool(3)
        rng = np.random.default_rng(17)
        for _ in range(5):
            gates = tuple(
                Gate("RY", int(rng.integers(3)), theta=float(rng.uniform(-np.pi, np.pi)))
                for _ in range(2)
            )
            ansatz = Ansatz("100", gates)
            theta = np.array([g.theta for g in gates])
            grads = pool_gradients(ansatz, theta, pool, h)
            for i, entry in enumerate(pool.entries):
                candidate = Ansatz("100", gates + (entry,))
                shifted = shift_gradient(candidate, h, np.append(theta, 0.0))
                assert grads[i] == pytest.approx(abs(shifted[-1]), abs=1e-8)


class TestAvqeRun:
    def test_reference_state_already_optimal_at_cutoff_two(self):
        # the quartic model's |10> sits exactly on the (degenerate) ground
        # level, so the very first optimized gate changes nothing and the
        # loop stops after a single step
        spec = SuperpotentialSpec("AHO")
        trace = avqe_run(spec, 2, opt_config=FAST)
        assert len(trace.final_ansatz.gates) == 1
        assert trace.final_energy == pytest.approx(-0.4375, abs=1e-6)
        assert trace.e_exact == pytest.approx(-0.4375, abs=1e-12)
        assert trace.initial_bitstring == "10"

    def test_free_model_is_solved_immediately(self):
        trace = avqe_run(SuperpotentialSpec("HO"), 8, opt_config=FAST)
        assert len(trace.final_ansatz.gates) == 1
        assert abs(trace.final_energy) < 1e-8

    def test_double_well_cutoff_four(self):
        trace = avqe_run(
            SuperpotentialSpec("DW"), 4, opt_config=OptimizerConfig(restarts=20, seed=0)
        )
        assert trace.final_energy == pytest.approx(0.906559871474, abs=1e-4)
        # energy decreases (weakly) step over step and never dips below
        # the exact ground energy
        energies = [s.energy_after for s in trace.steps]
        assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))
        assert all(e >= trace.e_exact - 1e-9 for e in energies)

    def test_trace_is_greedy_consistent(self):
        trace = avqe_run(
            SuperpotentialSpec("DW"), 4, opt_config=OptimizerConfig(restarts=10, seed=0)
        )
        pool = operator_pool(3)
        for step in trace.steps:
            grads = np.asarray(step.gradients)
            assert len(grads) == len(pool)
            chosen = pool.entries[int(np.argmax(grads))]
            assert step.chosen == chosen

    def test_step_bookkeeping(self):
        trace = avqe_run(SuperpotentialSpec("AHO"), 4, opt_config=FAST)
        for i, step in enumerate(trace.steps):
            assert step.step_index == i
            assert step.n_params == i + 1
        assert len(trace.final_theta) == len(trace.final_ansatz.gates)
        assert trace.final_ansatz.initial_bitstring == "100"
        # stored thetas in the final ansatz reproduce the final energy
        h = build_hamiltonian(SuperpotentialSpec("AHO"), 4)
        state = prepare_state(trace.final_ansatz, trace.final_theta)
        assert expectation(state, h) == pytest.approx(trace.final_energy, abs=1e-10)

    def test_bit_reproducible(self):
        a = avqe_run(SuperpotentialSpec("AHO"), 4, opt_config=OptimizerConfig(restarts=3, seed=7))
        b = avqe_run(SuperpotentialSpec("AHO"), 4, opt_config=OptimizerConfig(restarts=3, seed=7))
        assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)

    def test_trace_serializes_to_plain_json(self):
        trace = avqe_run(SuperpotentialSpec("HO"), 4, opt_config=FAST)
        data = trace.to_json()
        text = json.dumps(data)  # must not hit numpy types
        back = json.loads(text)
        assert back["superpotential"]["kind"] == "HO"
        assert back["cutoff"] == 4
        assert back["final_energy"] == trace.final_energy
        assert len(back["steps"]) == len(trace.steps)
        assert isinstance(back["steps"][0]["gradients"], list)

    def test_max_gates_caps_growth(self):
        trace = avqe_run(
            SuperpotentialSpec("DW"),
            4,
            max_gates=1,
            opt_config=FAST,
        )
        assert len(trace.final_ansatz.gates) == 1
        assert len(trace.steps) == 1

    def test_parameter_validation(self):
        with pytest.raises(ValueError, match="threshold"):
            avqe_run(SuperpotentialSpec("HO"), 2, threshold=0.0, opt_config=FAST)
        with pytest.raises(ValueError, match="max_gates"):
            avqe_run(SuperpotentialSpec("HO"), 2, max_gates=0, opt_config=FAST)

    def test_optimizer_failure_surfaces_partial_trace(self, monkeypatch):
        def broken(*args, **kwargs):
            raise AllRestartsAborted("stub failure")

        monkeypatch.setattr(avqe_mod, "minimize", broken)
        with pytest.raises(AvqeAborted) as excinfo:
            avqe_run(SuperpotentialSpec("AHO"), 4, opt_config=FAST)
        trace = excinfo.value.trace
        assert isinstance(trace, AVQETrace)
        assert trace.steps == ()
        # the partial trace still reports the reference-state energy
        h = build_hamiltonian(SuperpotentialSpec("AHO"), 4)
        assert trace.final_energy == pytest.approx(
            expectation(init_basis_state("100"), h), abs=1e-12
        )


class TestTruncateAnsatz:
    def _full(self):
        gates = (
            Gate("RY", 1, theta=0.3),
            Gate("RY", 2, theta=-0.8),
            Gate("CRY", 2, control=1, theta=1.1),
            Gate("RY", 0, theta=0.2),
            Gate("RZ", 1, theta=0.6),
        )
        return Ansatz("100", gates)

    def test_keeps_prefix_and_resets_thetas(self):
        out = truncate_ansatz(self._full(), 3)
        assert len(out.gates) == 3
        assert [g.label() for g in out.gates] == ["RY[1]", "RY[2]", "CRY[1,2]"]
        assert all(g.theta == 0.0 for g in out.gates)
        assert out.initial_bitstring == "100"

    def test_longer_than_source_keeps_everything(self):
        out = truncate_ansatz(self._full(), 99)
        assert len(out.gates) == 5

    def test_k_validation(self):
        with pytest.raises(ValueError, match="k must be"):
            truncate_ansatz(self._full(), 0)


class TestExtrapolateAnsatz:
    def test_free_model_pattern_is_one_gate(self):
        ans = extrapolate_ansatz(SuperpotentialSpec("HO"), 16)
        assert ans.initial_bitstring == "10000"
        assert [g.label() for g in ans.gates] == ["RY[0]"]

    def test_quartic_pattern_tracks_qubit_count(self):
        ans = extrapolate_ansatz(SuperpotentialSpec("AHO"), 32)  # 6 qubits
        assert ans.initial_bitstring == "100000"
        assert [g.label() for g in ans.gates] == ["RY[3]", "RY[2]", "RY[4]", "CRY[4,3]"]

    def test_double_well_pattern_tracks_qubit_count(self):
        ans = extrapolate_ansatz(SuperpotentialSpec("DW"), 16)  # 5 qubits
        assert ans.initial_bitstring == "00000"
        assert [g.label() for g in ans.gates] == ["RY[4]", "CRY[4,3]", "RY[2]", "RY[3]"]

    def test_cutoff_floor_validation(self):
        with pytest.raises(ValueError, match="cutoff >= 8"):
            extrapolate_ansatz(SuperpotentialSpec("AHO"), 4)
        with pytest.raises(ValueError, match="cutoff >= 4"):
            extrapolate_ansatz(SuperpotentialSpec("DW"), 2)

    def _optimize(self, spec, cutoff, ansatz, restarts=20):
        from susyqm.opt import minimize

        h = build_hamiltonian(spec, cutoff)
        result = minimize(
            lambda th: expectation(prepare_state(ansatz, th), h),
            np.zeros(ansatz.n_params),
            OptimizerConfig(restarts=restarts, seed=0),
        )
        return result.energy, exact_spectrum(h, k=1)[0]

    def test_quartic_pattern_stays_close_at_large_cutoff(self):
        spec = SuperpotentialSpec("AHO")
        energy, e0 = self._optimize(spec, 64, extrapolate_ansatz(spec, 64))
        assert energy - e0 < 2e-2
        assert energy >= e0 - 1e-9

    def test_double_well_pattern_stays_close_at_large_cutoff(self):
        spec = SuperpotentialSpec("DW")
        energy, e0 = self._optimize(spec, 32, extrapolate_ansatz(spec, 32))
        assert energy >= e0 - 1e-9
        assert energy - e0 < 5e-2
