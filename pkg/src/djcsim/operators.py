"""Dense operator algebra on a few qubits.

Basis convention: for ``n`` qubits the computational basis index ``b``
encodes the bitstring of qubits ``1..n`` with qubit 1 as the most
significant bit, i.e. qubit ``k`` holds ``(b >> (n - k)) & 1``.
Every module in the package goes through :func:`bit_of` /
:func:`basis_index` so the convention lives in one place.

Operators are plain ``numpy`` complex arrays. Pulses are stored as
``(term, angle)`` and stand for ``exp(-i * angle * term_matrix)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_QUBITS = 12
ATOL = 1e-12
HERMITIAN_ATOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
# Single-qubit Hadamard W and the Hermitian generator with W = i exp(-i pi/2 h).
W = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
HADAMARD_GENERATOR = (X + Z) / math.sqrt(2)
PROJ_1 = np.array([[0, 0], [0, 1]], dtype=complex)
LOWER = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|


def bit_of(index: int, qubit: int, n_qubits: int) -> int:
    """Value of 1-based ``qubit`` in basis ``index``."""
    return (index >> (n_qubits - qubit)) & 1


def basis_index(bits) -> int:
    """Basis index of a bitstring given as ``'0101'`` or a sequence of 0/1."""
    if isinstance(bits, str):
        return int(bits, 2)
    return int("".join(str(int(b)) for b in bits), 2)


def bitstring(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def ket(bits) -> np.ndarray:
    """Computational basis vector, e.g. ``ket('1010')``."""
    n = len(bits)
    v = np.zeros(2**n, dtype=complex)
    v[basis_index(bits)] = 1.0
    return v


def _check_n_qubits(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")


def embed(local: dict[int, np.ndarray], n_qubits: int) -> np.ndarray:
    """Tensor product placing ``local[k]`` on qubit ``k`` and identity elsewhere."""
    _check_n_qubits(n_qubits)
    for k in local:
        if not 1 <= k <= n_qubits:
            raise ValueError(f"site {k} outside [1, {n_qubits}]")
    factors = [local.get(k, I2) for k in range(1, n_qubits + 1)]
    return reduce(np.kron, factors)


def number_operator(n_qubits: int) -> np.ndarray:
    """Excitation number sum_i |1><1|_i (diagonal)."""
    counts = [bin(b).count("1") for b in range(2**n_qubits)]
    return np.diag(np.asarray(counts, dtype=complex))


def is_hermitian(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.allclose(op, op.conj().T, atol=atol, rtol=0)


def is_unitary(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        return False
    return np.allclose(op.conj().T @ op, np.eye(op.shape[0]), atol=atol, rtol=0)


def n_qubits_of(dim: int) -> int:
    if dim < 2 or dim & (dim - 1):
        raise ValueError(f"dimension {dim} is not a power of two")
    return dim.bit_length() - 1


class TermKind(str, enum.Enum):
    XY = "XY"
    ISING = "Ising"
    LOCAL_Z = "LocalZ"
    # Single-qubit Hadamard primitive, generator (X + Z)/sqrt(2); only used by recovery.
    HADAMARD = "Hadamard"


_N_SITES = {TermKind.XY: 2, TermKind.ISING: 2, TermKind.LOCAL_Z: 1, TermKind.HADAMARD: 1}


@dataclass(frozen=True)
class HamiltonianTerm:
    """One controllable interaction with a real coefficient.

    ``XY`` is T_ij = (X_i X_j + Y_i Y_j)/2, ``Ising`` is Z_i Z_j and
    ``LocalZ`` is Z_i. Sites are 1-based.
    """

    kind: TermKind
    sites: tuple[int, ...]
    coefficient: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", TermKind(self.kind))
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        object.__setattr__(self, "coefficient", float(self.coefficient))
        if len(self.sites) != _N_SITES[self.kind]:
            raise ValueError(f"{self.kind.value} term needs {_N_SITES[self.kind]} site(s), got {self.sites}")
        if len(set(self.sites)) != len(self.sites):
            raise ValueError(f"duplicate sites in {self.sites}")
        if min(self.sites) < 1:
            raise ValueError(f"sites are 1-based, got {self.sites}")

    @classmethod
    def xy(cls, i, j, coefficient=1.0):
        return cls(TermKind.XY, (i, j), coefficient)

    @classmethod
    def ising(cls, i, j, coefficient=1.0):
        return cls(TermKind.ISING, (i, j), coefficient)

    @classmethod
    def local_z(cls, i, coefficient=1.0):
        return cls(TermKind.LOCAL_Z, (i,), coefficient)

    @classmethod
    def hadamard(cls, i):
        return cls(TermKind.HADAMARD, (i,), 1.0)

    @property
    def is_single_qubit(self) -> bool:
        return len(self.sites) == 1

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "sites": list(self.sites), "coefficient": self.coefficient}


def build_term(term: HamiltonianTerm, n_qubits: int) -> np.ndarray:
    """Matrix of ``term`` on ``n_qubits`` qubits."""
    if max(term.sites) > n_qubits:
        raise ValueError(f"site {max(term.sites)} outside [1, {n_qubits}]")
    if term.kind is TermKind.XY:
        i, j = term.sites
        mat = 0.5 * (embed({i: X, j: X}, n_qubits) + embed({i: Y, j: Y}, n_qubits))
    elif term.kind is TermKind.ISING:
        i, j = term.sites
        mat = embed({i: Z, j: Z}, n_qubits)
    elif term.kind is TermKind.LOCAL_Z:
        mat = embed({term.sites[0]: Z}, n_qubits)
    else:
        mat = embed({term.sites[0]: HADAMARD_GENERATOR}, n_qubits)
    return term.coefficient * mat


def exponentiate(op: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i * angle * op) for Hermitian ``op`` via eigendecomposition."""
    op = np.asarray(op, dtype=complex)
    if not is_hermitian(op, atol=HERMITIAN_ATOL):
        raise ValueError("exponentiate expects a Hermitian operator")
    if angle == 0:
        return np.eye(op.shape[0], dtype=complex)
    diag = np.diag(op)
    if np.count_nonzero(op - np.diag(diag)) == 0:
        return np.diag(np.exp(-1j * angle * diag.real))
    evals, evecs = np.linalg.eigh(op)
    return (evecs * np.exp(-1j * angle * evals)) @ evecs.conj().T


def conjugate_with(a: np.ndarray, phi: float, b: np.ndarray) -> np.ndarray:
    """exp(-i phi a) b exp(i phi a)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    u = exponentiate(a, phi)
    return u @ b @ u.conj().T


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Frobenius norm ||u - e^{i gamma} v|| minimised over the global phase gamma.

    The optimum phase is the argument of tr(v^dagger u).
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch {u.shape} vs {v.shape}")
    overlap = np.vdot(v, u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


def operator_distance(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(u) - np.asarray(v)))


@dataclass(frozen=True, eq=False)
class QState:
    """Amplitude vector over ``2**n_qubits`` basis states (qubit 1 = MSB).

    May be sub-normalized; ``normalized`` reports whether the norm is 1.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        n_qubits_of(amps.size)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.amplitudes.size)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def normalized(self) -> bool:
        return abs(self.norm - 1.0) < ATOL

    def normalize(self) -> "QState":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return QState(self.amplitudes / nrm)

    @classmethod
    def from_bits(cls, bits) -> "QState":
        return cls(ket(bits))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


def apply(u: np.ndarray, state: QState) -> QState:
    """Matrix-vector product ``u |state>``."""
    u = np.asarray(u)
    if u.shape != (state.amplitudes.size, state.amplitudes.size):
        raise ValueError(f"operator of shape {u.shape} cannot act on {state.n_qubits} qubits")
    return QState(u @ state.amplitudes)


@dataclass(frozen=True)
class Pulse:
    """``exp(-i * angle * term)``."""

    term: HamiltonianTerm
    angle: float

    def matrix(self, n_qubits: int) -> np.ndarray:
        return exponentiate(build_term(self.term, n_qubits), self.angle)


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered control steps; the first step acts first.

    Each step is a tuple of pulses applied in order. A step normally
    holds one pulse; single-qubit layers group several. ``phase`` is a
    global phase tracked exactly so that the composed unitary is
    ``exp(i*phase) * U_last ... U_first``.
    """

    steps: tuple[tuple[Pulse, ...], ...] = ()
    phase: float = 0.0

    def __post_init__(self):
        steps = tuple(tuple(step) if isinstance(step, (tuple, list)) else (step,) for step in self.steps)
        object.__setattr__(self, "steps", steps)

    @classmethod
    def of(cls, *pulses: Pulse, phase: float = 0.0) -> "PulseSchedule":
        """One step per pulse."""
        return cls(tuple((p,) for p in pulses), phase)

    @property
    def pulses(self) -> tuple[Pulse, ...]:
        return tuple(p for step in self.steps for p in step)

    def __len__(self):
        return len(self.steps)

    def __add__(self, other: "PulseSchedule") -> "PulseSchedule":
        return PulseSchedule(self.steps + other.steps, self.phase + other.phase)

    def max_site(self) -> int:
        return max((max(p.term.sites) for p in self.pulses), default=0)

    def terms_allowed(self, kinds) -> bool:
        kinds = {TermKind(k) for k in kinds}
        return all(p.term.kind in kinds for p in self.pulses)

    def unitary(self, n_qubits: int) -> np.ndarray:
        u = np.eye(2**n_qubits, dtype=complex)
        for p in self.pulses:
            u = p.matrix(n_qubits) @ u
        return np.exp(1j * self.phase) * u

    def prefix_unitaries(self, n_qubits: int):
        """Yield the composed unitary after each pulse (global phase excluded)."""
        u = np.eye(2**n_qubits, dtype=complex)
        for p in self.pulses:
            u = p.matrix(n_qubits) @ u
            yield u

    def to_dict(self) -> dict:
        return {
            "global_phase": self.phase,
            "pulses": [
                {**p.term.to_dict(), "angle": p.angle, "step": k}
                for k, step in enumerate(self.steps)
                for p in step
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PulseSchedule":
        steps: dict[int, list[Pulse]] = {}
        for k, entry in enumerate(doc["pulses"]):
            term = HamiltonianTerm(entry["kind"], tuple(entry["sites"]), entry.get("coefficient", 1.0))
            steps.setdefault(int(entry.get("step", k)), []).append(Pulse(term, float(entry["angle"])))
        ordered = tuple(tuple(steps[k]) for k in sorted(steps))
        return cls(ordered, float(doc.get("global_phase", 0.0)))
