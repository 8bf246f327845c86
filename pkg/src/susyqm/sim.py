"""Dense statevector simulation, exact and shot-based expectation values.

Gates are the rotation set {RY, RZ, CRY}.  States live on N qubits with
qubit 0 as the most significant bit, matching the Hamiltonian encoding.

Shot-based estimation measures one qubit-wise commuting group at a time:
rotate into the group's basis, sample bitstrings, and average the
eigenvalues of each member term.  Noise is optional and has two parts:

* depolarizing gate noise, realized as stochastic Pauli insertion after
  each gate inside every sampled trajectory (probability p1 for 1-qubit
  gates, p2 for CRY; the measurement-basis rotations count as one noisy
  1-qubit gate each);
* readout error, realized as independent classical bit flips on the
  sampled bitstrings (0 read as 1 with probability r01, 1 as 0 with r10).

Everything is deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import QubitHamiltonian
from .pauli import PauliSum, apply_pauli_string, group_commuting

GATE_KINDS = ("RY", "RZ", "CRY")

# fixed trajectory batch size; a constant so sampled results do not
# depend on available memory
_CHUNK = 4096

_H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_HSDG_GATE = _H_GATE @ np.diag([1.0, -1j])  # rotates Y eigenbasis onto Z


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-1j * theta / 2.0), np.exp(1j * theta / 2.0)])


@dataclass(frozen=True)
class Gate:
    """One pool gate: RY/RZ on a target, or CRY with a control qubit."""

    kind: str
    target: int
    control: int | None = None
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if (self.kind == "CRY") != (self.control is not None):
            raise ValueError("control qubit is required for CRY and only for CRY")
        if self.control is not None and self.control == self.target:
            raise ValueError("control and target must differ")
        if self.target < 0 or (self.control is not None and self.control < 0):
            raise ValueError("qubit indices must be non-negative")
        if not np.isfinite(self.theta):
            raise ValueError("theta must be finite")

    def bound(self, theta: float) -> "Gate":
        return replace(self, theta=float(theta))

    def label(self) -> str:
        if self.kind == "CRY":
            return f"CRY[{self.control},{self.target}]"
        return f"{self.kind}[{self.target}]"


@dataclass(frozen=True)
class Ansatz:
    """An initial basis state plus an ordered list of parameterized gates.

    Every gate owns one parameter slot; the stored theta values act as
    defaults and are overridden by the vector passed to prepare_state.
    """

    initial_bitstring: str
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if not self.initial_bitstring or any(
            ch not in "01" for ch in self.initial_bitstring
        ):
            raise ValueError("initial_bitstring must be a non-empty string over {0,1}")
        object.__setattr__(self, "gates", tuple(self.gates))
        n = self.n_qubits
        for g in self.gates:
            if g.target >= n or (g.control is not None and g.control >= n):
                raise ValueError(f"gate {g.label()} out of range for {n} qubits")

    @property
    def n_qubits(self) -> int:
        return len(self.initial_bitstring)

    @property
    def n_params(self) -> int:
        return len(self.gates)

    def bind(self, theta) -> tuple[Gate, ...]:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {theta.shape}")
        return tuple(g.bound(t) for g, t in zip(self.gates, theta))

    def to_json(self) -> dict:
        return {
            "initial_bitstring": self.initial_bitstring,
            "gates": [
                {
                    "kind": g.kind,
                    "target": g.target,
                    "control": g.control,
                    "theta": g.theta,
                }
                for g in self.gates
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Ansatz":
        gates = tuple(
            Gate(
                kind=d["kind"],
                target=int(d["target"]),
                control=None if d.get("control") is None else int(d["control"]),
                theta=float(d.get("theta", 0.0)),
            )
            for d in data.get("gates", [])
        )
        return cls(initial_bitstring=str(data["initial_bitstring"]), gates=gates)


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing gate noise plus classical readout flips."""

    p1: float = 0.0
    p2: float = 0.0
    r01: float = 0.0
    r10: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "r01", "r10"):
            v = getattr(self, name)
            if not (np.isfinite(v) and 0.0 <= v <= 1.0):
                raise ValueError(f"{name} must be a probability in [0, 1]")

    @property
    def has_gate_noise(self) -> bool:
        return self.p1 > 0 or self.p2 > 0

    @property
    def is_zero(self) -> bool:
        return not self.has_gate_noise and self.r01 == 0 and self.r10 == 0


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int


def init_basis_state(bits: str) -> StateVector:
    """|bits> with qubit 0 as the most significant bit ("100" -> index 4)."""
    if not bits or any(ch not in "01" for ch in bits):
        raise ValueError("bits must be a non-empty string over {0,1}")
    n = len(bits)
    amps = np.zeros(2**n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(amplitudes=amps, n_qubits=n)


def _apply_1q(vec: np.ndarray, n: int, t: int, u: np.ndarray) -> np.ndarray:
    psi = vec.reshape((2,) * n)
    psi = np.moveaxis(psi, t, 0)
    out = np.tensordot(u, psi, axes=([1], [0]))
    return np.moveaxis(out, 0, t).reshape(-1)


def _apply_cry(vec: np.ndarray, n: int, c: int, t: int, theta: float) -> np.ndarray:
    # RY on the target within the control=1 subspace
    psi = vec.reshape((2,) * n).copy()
    sub = np.take(psi, 1, axis=c)
    tt = t if t < c else t - 1
    sub = np.moveaxis(sub, tt, 0)
    sub = np.tensordot(ry_matrix(theta), sub, axes=([1], [0]))
    sub = np.moveaxis(sub, 0, tt)
    idx = [slice(None)] * n
    idx[c] = 1
    psi[tuple(idx)] = sub
    return psi.reshape(-1)


def _apply_bound_gate(vec: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    if gate.kind == "RY":
        return _apply_1q(vec, n, gate.target, ry_matrix(gate.theta))
    if gate.kind == "RZ":
        return _apply_1q(vec, n, gate.target, rz_matrix(gate.theta))
    return _apply_cry(vec, n, gate.control, gate.target, gate.theta)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one gate, returning a new state.  Checks norm preservation."""
    n = state.n_qubits
    if gate.target >= n or (gate.control is not None and gate.control >= n):
        raise ValueError(f"gate {gate.label()} out of range for {n} qubits")
    out = _apply_bound_gate(state.amplitudes, n, gate)
    assert abs(np.linalg.norm(out) - np.linalg.norm(state.amplitudes)) < 1e-12
    return StateVector(amplitudes=out, n_qubits=n)


def prepare_state(ansatz: Ansatz, theta=None) -> StateVector:
    """Run the ansatz circuit from its initial basis state.

    theta overrides the gates' stored angles; None uses them as-is.
    """
    if theta is None:
        theta = np.array([g.theta for g in ansatz.gates])
    gates = ansatz.bind(theta)
    n = ansatz.n_qubits
    vec = np.zeros(2**n, dtype=complex)
    vec[int(ansatz.initial_bitstring, 2)] = 1.0
    for g in gates:
        vec = _apply_bound_gate(vec, n, g)
    assert abs(np.linalg.norm(vec) - 1.0) < 1e-12
    return StateVector(amplitudes=vec, n_qubits=n)


def expectation(state: StateVector, observable) -> float:
    """<psi|O|psi> for a QubitHamiltonian, PauliSum, or dense matrix.

    The result must be real to 1e-10 (Hermitian observable); the
    imaginary residue is checked and discarded.
    """
    vec = state.amplitudes
    if isinstance(observable, PauliSum):
        if observable.n_qubits != state.n_qubits:
            raise ValueError("observable and state qubit counts differ")
        val = sum(
            c * np.vdot(vec, apply_pauli_string(s, vec))
            for c, s in observable.terms
        )
    else:
        mat = (
            observable.matrix
            if isinstance(observable, QubitHamiltonian)
            else np.asarray(observable)
        )
        if mat.shape != (vec.shape[0], vec.shape[0]):
            raise ValueError("observable dimension does not match state")
        val = np.vdot(vec, mat @ vec)
    assert abs(np.imag(val)) < 1e-10
    return float(np.real(val))


# --- shot-based estimation ---------------------------------------------


def _batch_apply_1q(amps: np.ndarray, n: int, t: int, u: np.ndarray) -> np.ndarray:
    rows = amps.shape[0]
    a = amps.reshape((rows,) + (2,) * n)
    a = np.moveaxis(a, 1 + t, 1)
    a = np.tensordot(u, a, axes=([1], [1]))
    a = np.moveaxis(a, 0, 1)
    a = np.moveaxis(a, 1, 1 + t)
    return np.ascontiguousarray(a.reshape(rows, -1))


def _batch_apply_cry(amps: np.ndarray, n: int, c: int, t: int, theta: float) -> np.ndarray:
    rows = amps.shape[0]
    a = amps.reshape((rows,) + (2,) * n).copy()
    idx = [slice(None)] * (n + 1)
    idx[1 + c] = 1
    sub = a[tuple(idx)]
    tt = t if t < c else t - 1
    sub = np.moveaxis(sub, 1 + tt, 1)
    sub = np.tensordot(ry_matrix(theta), sub, axes=([1], [1]))
    sub = np.moveaxis(sub, 0, 1)
    sub = np.moveaxis(sub, 1, 1 + tt)
    a[tuple(idx)] = sub
    return a.reshape(rows, -1)


def _batch_pauli(amps: np.ndarray, n: int, t: int, which: int, rows: np.ndarray) -> np.ndarray:
    """Apply X (0), Y (1) or Z (2) on qubit t to a subset of trajectories."""
    a = amps.reshape((amps.shape[0],) + (2,) * n)
    sub = a[rows]
    if which == 0:
        sub = np.flip(sub, axis=1 + t)
    elif which == 1:
        sub = np.flip(sub, axis=1 + t).copy()
        sl0 = [slice(None)] * (n + 1)
        sl0[1 + t] = 0
        sl1 = [slice(None)] * (n + 1)
        sl1[1 + t] = 1
        sub[tuple(sl0)] *= -1j
        sub[tuple(sl1)] *= 1j
    else:
        sub = sub.copy()
        sl1 = [slice(None)] * (n + 1)
        sl1[1 + t] = 1
        sub[tuple(sl1)] *= -1.0
    a[rows] = sub
    return a.reshape(amps.shape[0], -1)


def _noisy_1q(amps, n, t, p1, rng):
    """Depolarize qubit t: with probability p1 insert a uniform X/Y/Z."""
    if p1 <= 0:
        return amps
    rows_total = amps.shape[0]
    hit = rng.random(rows_total) < p1
    which = rng.integers(0, 3, size=rows_total)
    for w in range(3):
        rows = np.where(hit & (which == w))[0]
        if len(rows):
            amps = _batch_pauli(amps, n, t, w, rows)
    return amps


def _noisy_2q(amps, n, c, t, p2, rng):
    """Two-qubit depolarizing: uniform over the 15 non-identity Pauli pairs."""
    if p2 <= 0:
        return amps
    rows_total = amps.shape[0]
    hit = rng.random(rows_total) < p2
    which = rng.integers(1, 16, size=rows_total)
    for w in range(1, 16):
        rows = np.where(hit & (which == w))[0]
        if len(rows) == 0:
            continue
        pc, pt = divmod(w, 4)
        if pc:
            amps = _batch_pauli(amps, n, c, pc - 1, rows)
        if pt:
            amps = _batch_pauli(amps, n, t, pt - 1, rows)
    return amps


def _rotation_gates(basis: str):
    """Single-qubit rotations taking a group's basis onto the Z basis."""
    rots = []
    for q, ch in enumerate(basis):
        if ch == "X":
            rots.append((q, _H_GATE))
        elif ch == "Y":
            rots.append((q, _HSDG_GATE))
    return rots


def _sample_rows(probs: np.ndarray, rng) -> np.ndarray:
    """One outcome index per row of a (rows, dim) probability table."""
    cdf = np.cumsum(probs, axis=1)
    u = rng.random((probs.shape[0], 1)) * cdf[:, -1:]
    idx = (cdf < u).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def sample_expectation(
    state: StateVector | None,
    psum: PauliSum,
    shots: int,
    noise: NoiseModel | None = None,
    seed: int = 0,
    prep: Ansatz | None = None,
    prep_theta=None,
) -> tuple[float, float]:
    """Estimate <H> from measured bitstrings; returns (estimate, stderr).

    Either pass an already-prepared state, or pass prep (an Ansatz) with
    prep_theta so that gate noise can act inside the preparation circuit
    of every trajectory.  With a bare state, gate noise only touches the
    measurement-basis rotations.

    stderr combines the per-group sample variances of the group means;
    it is the standard deviation attributable to shot noise alone.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not isinstance(psum, PauliSum):
        raise TypeError("expected a PauliSum observable")
    if (state is None) == (prep is None):
        raise ValueError("pass exactly one of state or prep")
    noise = noise if noise is not None else NoiseModel()
    n = psum.n_qubits

    prep_gates = None
    base_vec = None
    if prep is not None:
        if prep.n_qubits != n:
            raise ValueError("prep circuit and observable qubit counts differ")
        if prep_theta is None:
            prep_theta = np.array([g.theta for g in prep.gates])
        prep_gates = prep.bind(prep_theta)
        if not noise.has_gate_noise:
            base_vec = prepare_state(prep, prep_theta).amplitudes
    else:
        if state.n_qubits != n:
            raise ValueError("state and observable qubit counts differ")
        base_vec = state.amplitudes

    rng = np.random.default_rng(seed)
    groups = group_commuting(psum)
    total = 0.0
    var_total = 0.0
    for grp in groups:
        rots = _rotation_gates(grp.basis)
        if noise.has_gate_noise:
            bits = _trajectory_bits(
                base_vec, prep, prep_gates, rots, n, shots, noise, rng
            )
        else:
            vec = base_vec
            for q, u in rots:
                vec = _apply_1q(vec, n, q, u)
            probs = np.abs(vec) ** 2
            cdf = np.cumsum(probs)
            idx = np.searchsorted(cdf, rng.random(shots) * cdf[-1])
            idx = np.minimum(idx, probs.shape[0] - 1)
            bits = ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int8)
            bits = _readout_flips(bits, noise, rng)
        vals = np.zeros(shots)
        for i in grp.indices:
            coeff, s = psum.terms[i]
            cols = np.array([ch != "I" for ch in s])
            if cols.any():
                signs = 1.0 - 2.0 * (bits[:, cols].sum(axis=1) % 2)
            else:
                signs = np.ones(shots)
            vals += coeff * signs
        total += vals.mean()
        if shots > 1:
            var_total += vals.var(ddof=1) / shots
    return float(total), float(np.sqrt(var_total))


def _readout_flips(bits: np.ndarray, noise: NoiseModel, rng) -> np.ndarray:
    if noise.r01 > 0 or noise.r10 > 0:
        flip0 = (bits == 0) & (rng.random(bits.shape) < noise.r01)
        flip1 = (bits == 1) & (rng.random(bits.shape) < noise.r10)
        bits = bits ^ flip0 ^ flip1
    return bits


def _trajectory_bits(base_vec, prep, prep_gates, rots, n, shots, noise, rng):
    """Sample bitstrings through noisy trajectories, in fixed-size chunks."""
    out = np.empty((shots, n), dtype=np.int8)
    done = 0
    while done < shots:
        rows = min(_CHUNK, shots - done)
        if prep_gates is not None:
            amps = np.zeros((rows, 2**n), dtype=complex)
            amps[:, int(prep.initial_bitstring, 2)] = 1.0
            for g in prep_gates:
                if g.kind == "RY":
                    amps = _batch_apply_1q(amps, n, g.target, ry_matrix(g.theta))
                    amps = _noisy_1q(amps, n, g.target, noise.p1, rng)
                elif g.kind == "RZ":
                    amps = _batch_apply_1q(amps, n, g.target, rz_matrix(g.theta))
                    amps = _noisy_1q(amps, n, g.target, noise.p1, rng)
                else:
                    amps = _batch_apply_cry(amps, n, g.control, g.target, g.theta)
                    amps = _noisy_2q(amps, n, g.control, g.target, noise.p2, rng)
        else:
            amps = np.tile(base_vec, (rows, 1))
        for q, u in rots:
            amps = _batch_apply_1q(amps, n, q, u)
            amps = _noisy_1q(amps, n, q, noise.p1, rng)
        probs = np.abs(amps) ** 2
        idx = _sample_rows(probs, rng)
        bits = ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int8)
        out[done : done + rows] = _readout_flips(bits, noise, rng)
        done += rows
    return out
