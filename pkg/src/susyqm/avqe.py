"""Adaptive ansatz construction by greedy gradient screening.

The loop starts from a physically motivated basis state and, one gate at
a time, appends whichever pool gate has the largest energy gradient at
zero angle, then re-optimizes every angle with the previous optimum as a
warm start.  It stops when the best energy improves by less than the
threshold (the appended probe gate is kept), or at max_gates.

The pool is {RY, RZ, CRY} over all qubits / ordered pairs in a fixed
order, which also serves as the tie-break order for the argmax.  For a
candidate gate with generator G appended at angle 0, the gradient is
|dE/dtheta| = |2 Im <H psi | G psi>|, evaluated with two operator-vector
products; this equals the parameter-shift value and is cross-checked
against it in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .model import (
    QubitHamiltonian,
    SuperpotentialSpec,
    _check_cutoff,
    build_hamiltonian,
    exact_spectrum,
)
from .sim import Ansatz, Gate, expectation, prepare_state, _apply_1q
from .opt import AllRestartsAborted, OptimizerConfig, VQEResult, minimize

_Y_HALF = np.array([[0, -1j], [1j, 0]]) / 2.0
_Z_HALF = np.diag([0.5, -0.5]).astype(complex)


@dataclass(frozen=True)
class OperatorPool:
    """Candidate gates in their fixed screening / tie-break order."""

    entries: tuple[Gate, ...]

    def __len__(self) -> int:
        return len(self.entries)


def operator_pool(n_qubits: int) -> OperatorPool:
    """RY on every qubit, then RZ, then CRY over ordered (control, target) pairs."""
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    entries = [Gate("RY", t) for t in range(n_qubits)]
    entries += [Gate("RZ", t) for t in range(n_qubits)]
    entries += [
        Gate("CRY", t, control=c)
        for c in range(n_qubits)
        for t in range(n_qubits)
        if t != c
    ]
    return OperatorPool(entries=tuple(entries))


def choose_basis_state(spec: SuperpotentialSpec, cutoff: int) -> str:
    """Initial basis state with nonzero ground-state overlap.

    The HO/AHO ground states put the fermion in |1>, the DW ground state
    in |0> -- except at cutoff 4 where the low spectrum shifts and the
    occupied-fermion state |100> works better.
    """
    _check_cutoff(cutoff)
    n = 1 + int(np.log2(cutoff))
    if spec.kind in ("HO", "AHO"):
        return "1" + "0" * (n - 1)
    if cutoff == 4:
        return "100"
    return "0" * n


def _apply_generator(vec: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    """G |psi> for the gate's rotation generator."""
    if gate.kind == "RY":
        return _apply_1q(vec, n, gate.target, _Y_HALF)
    if gate.kind == "RZ":
        return _apply_1q(vec, n, gate.target, _Z_HALF)
    # CRY generator |1><1|_c (x) Y_t / 2: act with Y/2 on the control=1
    # block and zero out the rest
    out = _apply_1q(vec, n, gate.target, _Y_HALF)
    keep = (np.arange(2**n) >> (n - 1 - gate.control)) & 1
    return out * keep


def pool_gradients(
    current: Ansatz, theta, pool: OperatorPool, hamiltonian: QubitHamiltonian
) -> np.ndarray:
    """|dE/dtheta| at zero angle for each pool gate appended to the circuit."""
    psi = prepare_state(current, theta).amplitudes
    h_psi = hamiltonian.matrix @ psi
    n = current.n_qubits
    grads = np.empty(len(pool))
    for i, gate in enumerate(pool.entries):
        grads[i] = abs(2.0 * np.imag(np.vdot(h_psi, _apply_generator(psi, n, gate))))
    return grads


@dataclass(frozen=True)
class AVQEStep:
    step_index: int
    gradients: np.ndarray = field(repr=False)
    chosen: Gate
    energy_after: float
    n_params: int


@dataclass(frozen=True)
class AVQETrace:
    """Complete record of one adaptive run."""

    spec: SuperpotentialSpec
    cutoff: int
    initial_bitstring: str
    steps: tuple[AVQEStep, ...]
    final_ansatz: Ansatz
    final_theta: np.ndarray
    final_energy: float
    e_exact: float

    def to_json(self) -> dict:
        return {
            "superpotential": {
                "kind": self.spec.kind,
                "m": self.spec.m,
                "g": self.spec.g,
                "mu": self.spec.mu,
            },
            "cutoff": self.cutoff,
            "initial_bitstring": self.initial_bitstring,
            "steps": [
                {
                    "step_index": s.step_index,
                    "gradients": [float(g) for g in s.gradients],
                    "chosen": s.chosen.label(),
                    "energy_after": s.energy_after,
                    "n_params": s.n_params,
                }
                for s in self.steps
            ],
            "final_ansatz": self.final_ansatz.to_json(),
            "final_theta": [float(t) for t in self.final_theta],
            "final_energy": self.final_energy,
            "e_exact": self.e_exact,
        }


class AvqeAborted(RuntimeError):
    """Raised when the energy goes non-finite; carries the partial trace."""

    def __init__(self, message: str, trace: AVQETrace):
        super().__init__(message)
        self.trace = trace


def avqe_run(
    spec: SuperpotentialSpec,
    cutoff: int,
    threshold: float = 1e-6,
    max_gates: int = 30,
    opt_config: OptimizerConfig | None = None,
) -> AVQETrace:
    """Grow and optimize an ansatz for the given Hamiltonian.

    Termination: |E_new - E_previous| < threshold (with the probe gate
    kept in the ansatz), or max_gates reached.  At least one gate is
    always appended, so even an exact initial basis state yields a
    one-gate ansatz.  Each step reseeds the optimizer deterministically
    from (opt_config.seed, step), so the full trace is reproducible.
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    if max_gates < 1:
        raise ValueError("max_gates must be >= 1")
    if opt_config is None:
        opt_config = OptimizerConfig()
    hamiltonian = build_hamiltonian(spec, cutoff)
    e_exact = float(exact_spectrum(hamiltonian, k=1)[0])
    bits = choose_basis_state(spec, cutoff)
    pool = operator_pool(hamiltonian.n_qubits)

    ansatz = Ansatz(initial_bitstring=bits)
    theta = np.zeros(0)
    e_prev = expectation(prepare_state(ansatz, theta), hamiltonian)
    steps: list[AVQEStep] = []

    def objective_for(candidate: Ansatz):
        mat = hamiltonian.matrix

        def objective(vec):
            return expectation(prepare_state(candidate, vec), mat)

        return objective

    for step in range(max_gates):
        grads = pool_gradients(ansatz, theta, pool, hamiltonian)
        chosen = pool.entries[int(np.argmax(grads))]
        candidate = replace(ansatz, gates=ansatz.gates + (chosen,))
        theta0 = np.concatenate([theta, [0.0]])
        step_seed = int(np.random.SeedSequence([opt_config.seed, step]).generate_state(1)[0])
        config = replace(opt_config, seed=step_seed)
        try:
            result: VQEResult = minimize(objective_for(candidate), theta0, config)
        except AllRestartsAborted as exc:
            partial = AVQETrace(
                spec=spec,
                cutoff=cutoff,
                initial_bitstring=bits,
                steps=tuple(steps),
                final_ansatz=ansatz,
                final_theta=theta,
                final_energy=e_prev,
                e_exact=e_exact,
            )
            raise AvqeAborted(f"step {step}: {exc}", partial) from exc
        ansatz, theta = candidate, result.theta_opt
        steps.append(
            AVQEStep(
                step_index=step,
                gradients=grads,
                chosen=chosen,
                energy_after=result.energy,
                n_params=candidate.n_params,
            )
        )
        if abs(result.energy - e_prev) < threshold:
            e_prev = result.energy
            break
        e_prev = result.energy

    return AVQETrace(
        spec=spec,
        cutoff=cutoff,
        initial_bitstring=bits,
        steps=tuple(steps),
        final_ansatz=ansatz,
        final_theta=np.asarray(theta, dtype=float),
        final_energy=float(e_prev),
        e_exact=e_exact,
    )


def truncate_ansatz(full: Ansatz, k: int) -> Ansatz:
    """Keep the first min(k, len) gates with their angles reset to zero."""
    if k < 1:
        raise ValueError("k must be >= 1")
    kept = tuple(g.bound(0.0) for g in full.gates[:k])
    return Ansatz(initial_bitstring=full.initial_bitstring, gates=kept)


def extrapolate_ansatz(spec: SuperpotentialSpec, cutoff: int) -> Ansatz:
    """The fixed short ansatz pattern that carries over to any cutoff.

    These are the gate prefixes the adaptive runs keep choosing first,
    written for a register of n = 1 + log2(cutoff) qubits (qubit 0 is
    the fermion, qubit n-1 the least significant boson bit):

    * HO  -- a single RY on the fermion;
    * AHO -- RY(n-3), RY(n-4), RY(n-2), CRY(control=n-2, target=n-3);
    * DW  -- RY(n-1), CRY(control=n-1, target=n-2), RY(n-3), RY(n-2).

    AHO needs at least 4 qubits (cutoff >= 8) and DW at least 3
    (cutoff >= 4) for the pattern's indices to exist.
    """
    _check_cutoff(cutoff)
    n = 1 + int(np.log2(cutoff))
    bits = choose_basis_state(spec, cutoff)
    if spec.kind == "HO":
        gates = (Gate("RY", 0),)
    elif spec.kind == "AHO":
        if n < 4:
            raise ValueError("the AHO pattern needs cutoff >= 8")
        gates = (
            Gate("RY", n - 3),
            Gate("RY", n - 4),
            Gate("RY", n - 2),
            Gate("CRY", n - 3, control=n - 2),
        )
    else:
        if n < 3:
            raise ValueError("the DW pattern needs cutoff >= 4")
        gates = (
            Gate("RY", n - 1),
            Gate("CRY", n - 2, control=n - 1),
            Gate("RY", n - 3),
            Gate("RY", n - 2),
        )
    return Ansatz(initial_bitstring=bits, gates=gates)
