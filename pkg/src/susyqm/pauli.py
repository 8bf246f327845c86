"""Pauli-string decomposition of Hermitian qubit operators.

A Pauli string is written most-significant-qubit first, so "ZX" means
Z on qubit 0 (the fermion) and X on qubit 1.  Decomposition uses the
trace inner product c_s = tr(P_s H) / 2^N, evaluated through the
permutation-and-phase action of each string rather than dense kron
products, which keeps the full expansion cheap up to the sizes used
here (2^7 basis strings of dimension 128 at cutoff 64).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import QubitHamiltonian

PAULI_LETTERS = "IXYZ"

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_string(s: str, n_qubits: int) -> None:
    if len(s) != n_qubits or any(ch not in PAULI_LETTERS for ch in s):
        raise ValueError(f"bad Pauli string {s!r} for {n_qubits} qubits")


def _mask_and_phase(s: str) -> tuple[int, np.ndarray]:
    """Permutation representation of a Pauli string.

    P|k> = phase[k] |k ^ mask> where mask has a bit set for every X or Y
    letter.  phase[k] = i^(#Y) * (-1)^(parity of k over the Y and Z
    positions).
    """
    n = len(s)
    mask = 0
    sign_bits = 0
    n_y = 0
    for pos, ch in enumerate(s):
        if ch not in "IXYZ":
            raise ValueError(f"bad Pauli letter {ch!r}")
        bit = 1 << (n - 1 - pos)
        if ch in "XY":
            mask |= bit
        if ch in "YZ":
            sign_bits |= bit
        if ch == "Y":
            n_y += 1
    k = np.arange(2**n)
    parity = np.zeros(2**n, dtype=np.int64)
    v = k & sign_bits
    while np.any(v):
        parity ^= v & 1
        v >>= 1
    phase = (1j**n_y) * np.where(parity, -1.0, 1.0)
    return mask, phase


def pauli_string_matrix(s: str) -> np.ndarray:
    """Dense matrix of a Pauli string (kron product, fermion first)."""
    mat = np.array([[1.0 + 0j]])
    for ch in s:
        if ch not in PAULI_LETTERS:
            raise ValueError(f"bad Pauli letter {ch!r}")
        mat = np.kron(mat, PAULI_1Q[ch])
    return mat


def apply_pauli_string(s: str, vec: np.ndarray) -> np.ndarray:
    """P @ vec without forming the dense matrix."""
    n = len(s)
    if vec.shape[0] != 2**n:
        raise ValueError("vector dimension does not match string length")
    mask, phase = _mask_and_phase(s)
    k = np.arange(2**n)
    src = k ^ mask
    return phase[src] * vec[src]


@dataclass(frozen=True)
class PauliSum:
    """A real-weighted sum of Pauli strings, the measurable form of H.

    terms is an ordered tuple of (coefficient, string) pairs with no
    duplicate strings; ordering follows the I < X < Y < Z product order
    the decomposition enumerates.
    """

    n_qubits: int
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        seen = set()
        for coeff, s in self.terms:
            _check_string(s, self.n_qubits)
            if not np.isfinite(coeff):
                raise ValueError(f"non-finite coefficient for {s}")
            if s in seen:
                raise ValueError(f"duplicate Pauli string {s}")
            seen.add(s)

    def __len__(self) -> int:
        return len(self.terms)

    def to_json(self) -> list[dict]:
        return [{"coeff": float(c), "string": s} for c, s in self.terms]

    @classmethod
    def from_json(cls, data: list[dict], n_qubits: int | None = None) -> "PauliSum":
        terms = tuple((float(d["coeff"]), str(d["string"])) for d in data)
        if n_qubits is None:
            if not terms:
                raise ValueError("cannot infer qubit count from an empty term list")
            n_qubits = len(terms[0][1])
        return cls(n_qubits=n_qubits, terms=terms)


def decompose(h, threshold: float = 1e-12) -> PauliSum:
    """Expand a Hermitian matrix over all Pauli strings.

    Coefficients are tr(P_s H) / 2^N; anything with |c| <= threshold is
    dropped.  H may be a QubitHamiltonian or a plain 2^N x 2^N array.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    mat = h.matrix if isinstance(h, QubitHamiltonian) else np.asarray(h)
    dim = mat.shape[0]
    n = int(np.log2(dim))
    if mat.shape != (dim, dim) or 2**n != dim:
        raise ValueError("matrix dimension must be a power of two and square")
    if np.max(np.abs(mat - mat.conj().T)) >= 1e-12:
        raise ValueError("matrix is not Hermitian; coefficients would be complex")
    k = np.arange(dim)
    terms = []
    for letters in itertools.product(PAULI_LETTERS, repeat=n):
        s = "".join(letters)
        mask, phase = _mask_and_phase(s)
        # tr(P H) = sum_k phase[k] * H[k, k ^ mask]
        c = np.sum(phase * mat[k, k ^ mask]) / dim
        assert abs(c.imag) < 1e-10
        if abs(c.real) > threshold:
            terms.append((float(c.real), s))
    return PauliSum(n_qubits=n, terms=tuple(terms))


def reconstruct(psum: PauliSum) -> np.ndarray:
    """Sum the weighted strings back into a dense matrix."""
    dim = 2**psum.n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    k = np.arange(dim)
    for coeff, s in psum.terms:
        mask, phase = _mask_and_phase(s)
        mat[k ^ mask, k] += coeff * phase
    return mat


@dataclass(frozen=True)
class MeasurementGroup:
    """Terms measurable in one shared per-qubit basis setting.

    basis holds one letter per qubit ('I' where the group never looks at
    that qubit); indices point into the parent PauliSum's terms.
    """

    basis: str
    indices: tuple[int, ...]


def group_commuting(psum: PauliSum) -> tuple[MeasurementGroup, ...]:
    """Partition terms into qubit-wise commuting groups.

    Greedy first-fit: terms are visited in descending |coefficient|
    (ties broken by string), and each joins the first existing group
    whose basis it does not clash with, else opens a new group.  The
    result is deterministic for a given PauliSum.
    """
    n = psum.n_qubits
    order = sorted(
        range(len(psum.terms)),
        key=lambda i: (-abs(psum.terms[i][0]), psum.terms[i][1]),
    )
    bases: list[list[str]] = []
    members: list[list[int]] = []
    for i in order:
        s = psum.terms[i][1]
        for g, basis in enumerate(bases):
            if all(s[q] == "I" or basis[q] in ("I", s[q]) for q in range(n)):
                for q in range(n):
                    if s[q] != "I":
                        basis[q] = s[q]
                members[g].append(i)
                break
        else:
            bases.append([ch for ch in s])
            members.append([i])
    return tuple(
        MeasurementGroup(basis="".join(b), indices=tuple(m))
        for b, m in zip(bases, members)
    )
