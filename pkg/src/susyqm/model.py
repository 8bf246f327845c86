"""Supersymmetric quantum mechanics on a truncated bosonic mode.

The system pairs one fermion with one boson whose Fock space is cut off
at ``cutoff`` modes.  For a superpotential with first and second
derivatives W'(q), W''(q) the Hamiltonian is

    H = (1/2) * (p^2 + W'(q)^2) + (1/2) * W''(q) * [b+, b]

where b, b+ are the fermionic ladder operators.  Mapping the fermion to
a single qubit turns [b+, b] into -Z, so on qubits

    H = I (x) (1/2)(p^2 + W'(q)^2)  -  Z (x) (1/2) W''(q) * (-1)

i.e. the fermion-down block picks up -W''/2 and the fermion-up block
+W''/2.  Conventions used throughout this package:

* qubit 0 is the fermion and the most significant bit;
* the boson occupation number is stored big-endian on qubits 1..N-1;
* a computational basis index is therefore f * cutoff + n_boson.

Whether supersymmetry survives is read off the ground state: an exact
zero ground energy means it is preserved, while a strictly positive
ground energy (with a near-degenerate pair of lowest states) signals
spontaneous breaking.  At small cutoffs the truncation itself can push
the ground energy negative; that is an artifact, not physics, so the
non-negativity of the spectrum is only meaningful from cutoff >= 8 on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SUPERPOTENTIALS = ("HO", "AHO", "DW")


def _check_cutoff(cutoff: int) -> None:
    if not isinstance(cutoff, (int, np.integer)) or isinstance(cutoff, bool):
        raise ValueError("lambda must be a power of two >= 2")
    if cutoff < 2 or (cutoff & (cutoff - 1)) != 0:
        raise ValueError("lambda must be a power of two >= 2")


@dataclass(frozen=True)
class SuperpotentialSpec:
    """Which superpotential to use and its couplings.

    kind selects the shape of W'(q):

    * ``HO``  -- harmonic oscillator, W' = m q
    * ``AHO`` -- anharmonic oscillator, W' = m q + g q^3
    * ``DW``  -- double well, W' = m q + g (q^2 + mu^2)

    All couplings default to 1.
    """

    kind: str
    m: float = 1.0
    g: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if self.kind not in SUPERPOTENTIALS:
            raise ValueError(
                f"unknown superpotential {self.kind!r}; expected one of {SUPERPOTENTIALS}"
            )
        if not np.isfinite(self.m) or self.m <= 0:
            raise ValueError("m must be a positive finite real")
        if not (np.isfinite(self.g) and np.isfinite(self.mu)):
            raise ValueError("g and mu must be finite reals")


@dataclass(frozen=True)
class BosonOperators:
    """Position and momentum matrices on the truncated Fock space.

    Both are cutoff x cutoff.  q is real symmetric, p is Hermitian with
    purely imaginary entries, and their commutator is i*diag(1, ..., 1,
    1 - cutoff): the truncation artifact sits entirely in the last
    diagonal entry.
    """

    cutoff: int
    q: np.ndarray = field(repr=False)
    p: np.ndarray = field(repr=False)


def make_boson_ops(cutoff: int, m: float = 1.0) -> BosonOperators:
    """Build q and p in the occupation basis, truncated to ``cutoff`` modes.

    The only nonzero entries are on the first off-diagonals:
    q[j, j+1] = sqrt(j+1) / sqrt(2m) and p[j, j+1] = -i sqrt(m/2) sqrt(j+1),
    with q symmetric and p anti-symmetric up to the factor of i.
    """
    _check_cutoff(cutoff)
    if not np.isfinite(m) or m <= 0:
        raise ValueError("m must be a positive finite real")
    q = np.zeros((cutoff, cutoff), dtype=complex)
    p = np.zeros((cutoff, cutoff), dtype=complex)
    for j in range(cutoff - 1):
        c = np.sqrt(j + 1.0)
        q[j, j + 1] = q[j + 1, j] = c / np.sqrt(2.0 * m)
        p[j, j + 1] = -1j * np.sqrt(m / 2.0) * c
        p[j + 1, j] = +1j * np.sqrt(m / 2.0) * c
    return BosonOperators(cutoff=cutoff, q=q, p=p)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def superpotential_derivatives(
    spec: SuperpotentialSpec, ops: BosonOperators
) -> tuple[np.ndarray, np.ndarray]:
    """Matrices for W'(q) and W''(q).

    Powers of q are taken on the truncated matrix with no intermediate
    re-truncation, so e.g. q^3 at cutoff 2 equals 0.5*q rather than 0.
    """
    q = ops.q
    eye = np.eye(ops.cutoff, dtype=complex)
    m, g, mu = spec.m, spec.g, spec.mu
    if spec.kind == "HO":
        return m * q, m * eye
    q2 = q @ q
    if spec.kind == "AHO":
        wp = m * q + g * (q2 @ q)
        wpp = m * eye + 3.0 * g * q2
    else:  # DW
        wp = m * q + g * (q2 + mu**2 * eye)
        wpp = m * eye + 2.0 * g * q
    # q2 @ q is symmetric in exact arithmetic but picks up ~1e-15 rounding
    # skew at large cutoffs; re-symmetrize so H comes out exactly Hermitian
    return 0.5 * (wp + wp.conj().T), 0.5 * (wpp + wpp.conj().T)


@dataclass(frozen=True)
class QubitHamiltonian:
    """Dense Hermitian Hamiltonian on n_qubits = 1 + log2(cutoff) qubits."""

    n_qubits: int
    matrix: np.ndarray = field(repr=False)
    spec: SuperpotentialSpec
    cutoff: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def build_hamiltonian(spec: SuperpotentialSpec, cutoff: int) -> QubitHamiltonian:
    """Assemble H = I (x) (p^2 + W'^2)/2 + Z (x) W''/2 on the full register.

    The fermion factor (I or Z) comes first, making the fermion qubit
    the most significant bit; basis index = f * cutoff + n_boson.
    """
    ops = make_boson_ops(cutoff, spec.m)
    wp, wpp = superpotential_derivatives(spec, ops)
    h_boson = 0.5 * (ops.p @ ops.p + wp @ wp)
    h = np.kron(np.eye(2), h_boson) + np.kron(np.diag([1.0, -1.0]), 0.5 * wpp)
    assert np.max(np.abs(h - h.conj().T)) < 1e-12
    n_qubits = 1 + int(np.log2(cutoff))
    return QubitHamiltonian(n_qubits=n_qubits, matrix=h, spec=spec, cutoff=cutoff)


@dataclass(frozen=True)
class Supercharges:
    """The nilpotent supercharge pair.  Q annihilates the fermion while
    acting with (i p + W') on the boson; Qdag is its adjoint."""

    Q: np.ndarray = field(repr=False)
    Qdag: np.ndarray = field(repr=False)


def build_supercharges(spec: SuperpotentialSpec, cutoff: int) -> Supercharges:
    ops = make_boson_ops(cutoff, spec.m)
    wp, _ = superpotential_derivatives(spec, ops)
    b = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    q_op = np.kron(b, 1j * ops.p + wp)
    return Supercharges(Q=q_op, Qdag=q_op.conj().T)


def interior_projector(cutoff: int) -> np.ndarray:
    """Projector onto boson modes 0..cutoff-3, in both fermion sectors.

    On the truncated space the supersymmetry algebra (1/2){Q, Qdag} = H
    only fails on the top two boson modes; sandwiching with this
    projector removes those boundary rows and columns.
    """
    _check_cutoff(cutoff)
    keep = np.zeros(cutoff)
    keep[: cutoff - 2] = 1.0
    return np.kron(np.eye(2), np.diag(keep))


def exact_spectrum(h, k: int | None = None) -> np.ndarray:
    """The k lowest eigenvalues of a Hermitian matrix, ascending.

    Accepts a QubitHamiltonian or a plain ndarray.  k defaults to the
    full spectrum.  Raises if the matrix is not Hermitian to 1e-12 (the
    guard behind returning real parts only) or if diagonalization fails.
    """
    mat = h.matrix if isinstance(h, QubitHamiltonian) else np.asarray(h)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(mat - mat.conj().T)) >= 1e-12:
        raise ValueError("matrix is not Hermitian; spectrum would be complex")
    if k is None:
        k = mat.shape[0]
    if not 1 <= k <= mat.shape[0]:
        raise ValueError(f"k must be in 1..{mat.shape[0]}")
    evals = np.linalg.eigvalsh(mat)  # raises LinAlgError on non-convergence
    return evals[:k]
