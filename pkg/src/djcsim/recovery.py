"""Block-local recovery after a detected emission, and the post-recovery frame.

A jump on qubit ``2i-1`` leaves pair ``i`` in |00> (from |1~>), a jump on
``2i`` leaves it in |00> (from |0~>). CX1 (odd) and CX2 (even) put the
pair back into the tilde alphabet while touching no other block.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .code_space import CodeSpec, jump_operator
from .encoded_logic import ControlModel, logical_pauli
from .operators import HamiltonianTerm, Pulse, PulseSchedule, QState, X, Z, build_term

CX1 = np.array([[0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1]], dtype=complex)
CX2 = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=complex)

P_ANGLE = 3 * math.pi / 4  # P = exp(-i 3pi/4 Z)
# Literal prefactor e^{-i pi/4} of the published product gives -CX1; one extra pi fixes it.
CX_PREFACTOR_PHASE = -math.pi / 4 + math.pi


def recovery_unitaries() -> tuple[np.ndarray, np.ndarray]:
    return CX1.copy(), CX2.copy()


def _hadamard(q):
    # W = i exp(-i pi/2 h): contributes phase pi/2
    return Pulse(HamiltonianTerm.hadamard(q), math.pi / 2), math.pi / 2


def _pauli_z(q):
    # Z = i exp(-i pi/2 Z)
    return Pulse(HamiltonianTerm.local_z(q), math.pi / 2), math.pi / 2


def _p(q, power=1):
    return Pulse(HamiltonianTerm.local_z(q), power * P_ANGLE), 0.0


def _layer(*items):
    pulses = tuple(p for p, _ in items)
    return pulses, sum(ph for _, ph in items)


def recovery_schedule(block: int, parity: str, model: ControlModel) -> PulseSchedule:
    """Schedule on qubits (2*block-1, 2*block) composing to CX1 (odd) or CX2 (even).

    Structure: (W on one qubit, P on the other), exp(i pi/4 Z Z), (WP, P^2),
    with CX2 obtained by exchanging the roles of the two qubits. The
    XXZ form is 3 steps. In the XY form the Ising step becomes 5 steps,
    (W x XW), exp(i pi/4 T), X, exp(i pi/4 T), (W x W), built on
    exp(i pi/4 X X) = exp(i pi/4 T) X_2 exp(i pi/4 T) X_2.
    """
    model = ControlModel(model)
    if block < 1:
        raise ValueError(f"block index must be >= 1, got {block}")
    if parity not in ("odd", "even"):
        raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")
    q1, q2 = 2 * block - 1, 2 * block
    # a carries W, b carries P (swapped for CX2)
    a, b = (q1, q2) if parity == "odd" else (q2, q1)

    steps, phase = [], CX_PREFACTOR_PHASE

    def add(layer):
        nonlocal phase
        pulses, ph = layer
        steps.append(pulses)
        phase += ph

    add(_layer(_hadamard(a), _p(b)))
    if model is ControlModel.XXZ:
        add(((Pulse(HamiltonianTerm.ising(q1, q2), -math.pi / 4),), 0.0))
    else:
        t = HamiltonianTerm.xy(q1, q2)
        add(_layer(_hadamard(q1), _pauli_z(q2), _hadamard(q2)))
        add(((Pulse(t, -math.pi / 4),), 0.0))
        add(_layer(_hadamard(q2), _pauli_z(q2), _hadamard(q2)))
        add(((Pulse(t, -math.pi / 4),), 0.0))
        add(_layer(_hadamard(q1), _hadamard(q2)))
    add(_layer(_p(a), _hadamard(a), _p(b, 2)))
    return PulseSchedule(tuple(steps), phase)


def jump_parity(qubit: int) -> str:
    return "odd" if qubit % 2 else "even"


def block_of(qubit: int) -> int:
    return (qubit + 1) // 2


def recovery_unitary(qubit: int, n_qubits: int, model: ControlModel = ControlModel.XXZ) -> np.ndarray:
    """Full-register unitary of the recovery triggered by a jump on ``qubit``."""
    if not 1 <= qubit <= n_qubits:
        raise ValueError(f"jump qubit {qubit} outside [1, {n_qubits}]")
    return _cached_recovery(qubit, n_qubits, ControlModel(model)).copy()


@functools.lru_cache(maxsize=256)
def _cached_recovery(qubit, n_qubits, model):
    return recovery_schedule(block_of(qubit), jump_parity(qubit), model).unitary(n_qubits)


def apply_recovery(state: QState, event, code: CodeSpec, model: ControlModel = ControlModel.XXZ) -> QState:
    """Apply the recovery for ``event`` (a JumpEvent or a qubit index)."""
    qubit = getattr(event, "qubit", event)
    return QState(recovery_unitary(qubit, code.n_qubits, model) @ state.amplitudes)


@dataclass(frozen=True, eq=False)
class GeneratorChoice:
    """Operator acting as a logical Pauli in a frame; ``native`` if it is a single control term."""

    label: str
    matrix: np.ndarray
    native: bool


@dataclass(frozen=True, eq=False)
class RecoveryFrame:
    """Image of the logical space after jump on ``jump_qubit`` and recovery."""

    jump_qubit: int
    isometry: np.ndarray
    x_generators: tuple[GeneratorChoice, ...]
    z_generators: tuple[GeneratorChoice, ...]

    def image(self, logical_amplitudes) -> np.ndarray:
        return self.isometry @ np.asarray(logical_amplitudes, dtype=complex)

    def to_dict(self) -> dict:
        cols = []
        for k in range(self.isometry.shape[1]):
            col = self.isometry[:, k]
            cols.append([[int(i), float(col[i].real), float(col[i].imag)] for i in np.flatnonzero(np.abs(col) > 1e-14)])
        return {
            "jump_qubit": self.jump_qubit,
            "isometry": cols,
            "x_generators": [{"label": g.label, "native": g.native} for g in self.x_generators],
            "z_generators": [{"label": g.label, "native": g.native} for g in self.z_generators],
        }


def _acts_as(op: np.ndarray, iso: np.ndarray, logical: np.ndarray, tol: float) -> bool:
    return np.abs(op @ iso - iso @ logical).max() < tol


def _pair_flip_candidates(code: CodeSpec):
    """Signed pair flips s_a T_{2a-1,2a} and their products, fewest factors first."""
    n = code.n_qubits
    flips = {
        a: build_term(HamiltonianTerm.xy(2 * a - 1, 2 * a, code.tilde_factor(a)), n) for a in range(1, code.n_pairs + 1)
    }
    for size in range(1, code.n_pairs + 1):
        for subset in itertools.combinations(range(1, code.n_pairs + 1), size):
            mat = np.eye(2**n, dtype=complex)
            for a in subset:
                mat = flips[a] @ mat
            label = "*".join(f"T{2 * a - 1},{2 * a}" for a in subset)
            yield label, mat, size == 1


def _z_candidates(code: CodeSpec):
    n = code.n_qubits
    odd = [2 * a - 1 for a in range(1, code.n_pairs + 1)]
    for i, j in itertools.combinations(odd, 2):
        yield f"Z{i}Z{j}", build_term(HamiltonianTerm.ising(i, j), n), True
    for i in odd:
        yield f"Z{i}", build_term(HamiltonianTerm.local_z(i), n), False


def _find_generator(candidates, iso, logical, tol):
    for label, mat, native in candidates:
        for sign in (1, -1):
            if _acts_as(sign * mat, iso, logical, tol):
                return GeneratorChoice(("-" if sign < 0 else "") + label, sign * mat, native)
    return None


def derive_recovery_frame(
    code: CodeSpec, jump_qubit: int, model: ControlModel = ControlModel.XXZ, tol: float = 1e-10
) -> RecoveryFrame:
    """Push each logical basis state through jump and recovery and record the image.

    Logical Paulis in the new frame are searched for among the control
    terms (signed pair flips, odd-qubit ZZ); products of pair flips or
    single Z are used only when no single term works and are flagged
    non-native.
    """
    n = code.n_qubits
    s = jump_operator(jump_qubit, n)
    rec = recovery_unitary(jump_qubit, n, model)
    images = rec @ (s @ code.logical_basis)
    norms = np.linalg.norm(images, axis=0)
    if np.any(norms < tol):
        raise ValueError(f"a logical basis state is annihilated by a jump on qubit {jump_qubit}")
    iso = images / norms
    gram = iso.conj().T @ iso
    if np.abs(gram - np.eye(iso.shape[1])).max() > tol:
        raise ValueError(f"post-recovery images for qubit {jump_qubit} are not orthonormal")
    xs, zs = [], []
    for i in range(1, code.n_logical + 1):
        lx = logical_pauli(X, i, code.n_logical)
        lz = logical_pauli(Z, i, code.n_logical)
        gx = _find_generator(_pair_flip_candidates(code), iso, lx, tol)
        gz = _find_generator(_z_candidates(code), iso, lz, tol)
        if gx is None or gz is None:
            raise ValueError(f"no logical generator found for qubit {i} after jump on {jump_qubit}")
        xs.append(gx)
        zs.append(gz)
    return RecoveryFrame(jump_qubit, iso, tuple(xs), tuple(zs))


def logical_fidelity(state, logical_amplitudes, frame) -> float:
    """|<image(a)|state>|^2, image through ``frame`` (a RecoveryFrame, a CodeSpec
    for the pristine encoding, or an explicit isometry matrix)."""
    psi = np.asarray(state, dtype=complex).ravel()
    amps = np.asarray(logical_amplitudes, dtype=complex).ravel()
    if isinstance(frame, RecoveryFrame):
        iso = frame.isometry
    elif isinstance(frame, CodeSpec):
        iso = frame.logical_basis
    else:
        iso = np.asarray(frame, dtype=complex)
    if iso.shape != (psi.size, amps.size):
        raise ValueError(f"frame of shape {iso.shape} does not match state {psi.size} / logical {amps.size}")
    ref = iso @ amps
    ref = ref / np.linalg.norm(ref)
    return float(abs(np.vdot(ref, psi)) ** 2)


def composite_gram(code: CodeSpec, jump_qubit: int, model: ControlModel = ControlModel.XXZ) -> np.ndarray:
    """Gram matrix of (recovery . jump . encode) on the logical basis, scaled to unit trace per column."""
    n = code.n_qubits
    k = recovery_unitary(jump_qubit, n, model) @ jump_operator(jump_qubit, n) @ code.logical_basis
    gram = k.conj().T @ k
    return gram / np.real(np.trace(gram)) * gram.shape[0]


def is_block_local(schedule: PulseSchedule, block: int) -> bool:
    sites = {s for p in schedule.pulses for s in p.term.sites}
    return sites <= {2 * block - 1, 2 * block}

