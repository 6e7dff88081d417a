"""Ground-state preparation of the pairwise XY Hamiltonian and encoded readout.

Cooling is modeled as exact ground-state extraction. With couplings
J_i on pairs (2i-1, 2i), J_i T has the singlet (|01>-|10>)/sqrt(2) as
ground state for J_i > 0 and the triplet (|01>+|10>)/sqrt(2) for J_i < 0,
each at energy -|J_i|; |00> and |11> sit at zero. Readout of logical
qubit j rotates with the encoded Hadamard and then asks whether pair j
is in its ground-type state.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .code_space import CodeSpec, build_code
from .encoded_logic import ControlModel, GateKind, LogicalGate, compile_gate
from .operators import HamiltonianTerm, QState, build_term

SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
TRIPLET = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2)


class Outcome(str, enum.Enum):
    SINGLET = "singlet"
    TRIPLET = "triplet"
    OTHER = "other"


@dataclass(frozen=True, eq=False)
class PrepReport:
    ground_state: QState
    ground_energy: float
    gap: float
    pair_gap: float
    in_code_space: bool
    overlap_with_code_projector: float
    code: CodeSpec

    def to_dict(self) -> dict:
        return {
            "ground_energy": self.ground_energy,
            "gap": self.gap,
            "pair_gap": self.pair_gap,
            "in_code_space": self.in_code_space,
            "overlap_with_code_projector": self.overlap_with_code_projector,
            "pair_signs": list(self.code.pair_signs),
        }


def pairwise_xy_hamiltonian(couplings) -> np.ndarray:
    """sum_i J_i T_{2i-1,2i}."""
    couplings = [float(j) for j in couplings]
    n = 2 * len(couplings)
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i, j in enumerate(couplings, start=1):
        h += build_term(HamiltonianTerm.xy(2 * i - 1, 2 * i, j), n)
    return h


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.flatnonzero(np.abs(v) > 1e-9)[0])
    return v * (abs(v[k]) / v[k])


def pair_sector_gap(couplings) -> float:
    """Lowest excitation that keeps every pair singly occupied: flip the weakest pair s<->t."""
    return 2 * min(abs(float(j)) for j in couplings)


def prepare_ground_state(couplings, n_pairs: int | None = None) -> PrepReport:
    """Diagonalize the pairwise XY Hamiltonian and compare its ground state with the code.

    ``gap`` is E_1 - E_0 from the full spectrum. ``pair_gap`` is the gap
    within the sector where each pair holds one excitation.
    """
    couplings = [float(j) for j in couplings]
    if n_pairs is not None and len(couplings) != n_pairs:
        raise ValueError(f"need {n_pairs} couplings, got {len(couplings)}")
    if any(j == 0 for j in couplings):
        raise ValueError("every pair coupling must be nonzero; a zero coupling leaves the pair degenerate")
    code = build_code(len(couplings), [1 if j > 0 else -1 for j in couplings])
    evals, evecs = np.linalg.eigh(pairwise_xy_hamiltonian(couplings))
    ground = _fix_phase(evecs[:, 0])
    overlap = float(np.real(np.vdot(ground, code.projector() @ ground)))
    return PrepReport(
        ground_state=QState(ground),
        ground_energy=float(evals[0]),
        gap=float(evals[1] - evals[0]),
        pair_gap=pair_sector_gap(couplings),
        in_code_space=abs(overlap - 1) < 1e-10,
        overlap_with_code_projector=overlap,
        code=code,
    )


@functools.lru_cache(maxsize=64)
def pair_projectors(pair: int, n_qubits: int) -> dict[Outcome, np.ndarray]:
    """Singlet, triplet and complement projectors on pair ``(2*pair-1, 2*pair)`` (cached; read-only)."""
    if not 1 <= pair <= n_qubits // 2:
        raise ValueError(f"pair {pair} outside [1, {n_qubits // 2}]")
    a, b = 2 * pair - 1, 2 * pair
    t = build_term(HamiltonianTerm.xy(a, b), n_qubits)
    q = 0.5 * (np.eye(2**n_qubits) - build_term(HamiltonianTerm.ising(a, b), n_qubits))
    out = {
        Outcome.SINGLET: 0.5 * (q - t),
        Outcome.TRIPLET: 0.5 * (q + t),
        Outcome.OTHER: np.eye(2**n_qubits) - q,
    }
    for p in out.values():
        p.setflags(write=False)
    return out


def singlet_triplet_measure(state: QState, pair: int, rng: np.random.Generator):
    """Projective singlet / triplet / other measurement on one pair.

    Returns ``(outcome, collapsed_state, probabilities)`` with
    probabilities ordered (singlet, triplet, other).
    """
    if not state.normalized:
        raise ValueError("state must be normalized")
    projectors = pair_projectors(pair, state.n_qubits)
    psi = state.amplitudes
    images = [projectors[o] @ psi for o in Outcome]
    probs = np.array([float(np.vdot(v, v).real) for v in images])
    probs = np.clip(probs, 0, None)
    probs = probs / probs.sum()
    k = int(rng.choice(3, p=probs))
    collapsed = images[k] / np.linalg.norm(images[k])
    return list(Outcome)[k], QState(collapsed), probs


def ground_type(code: CodeSpec, pair: int) -> Outcome:
    """Pair outcome read as logical 0: singlet if J > 0, triplet if J < 0."""
    return Outcome.SINGLET if code.pair_signs[pair - 1] > 0 else Outcome.TRIPLET


def readout_probabilities(state: QState, j: int, code: CodeSpec, model: ControlModel = ControlModel.XY) -> dict:
    """Exact Born probabilities of bit 0, bit 1 and 'other' for :func:`encoded_readout`."""
    rotated = _rotate(state, j, code, model)
    projectors = pair_projectors(j, code.n_qubits)
    zero = ground_type(code, j)
    one = Outcome.TRIPLET if zero is Outcome.SINGLET else Outcome.SINGLET
    p = {o: float(np.vdot(rotated, projectors[o] @ rotated).real) for o in Outcome}
    return {0: p[zero], 1: p[one], None: p[Outcome.OTHER]}


def _rotate(state: QState, j: int, code: CodeSpec, model: ControlModel) -> np.ndarray:
    if not 1 <= j <= code.n_logical:
        raise ValueError(f"logical index {j} outside [1, {code.n_logical}]")
    return _hadamard_unitary(code, j, ControlModel(model)) @ state.amplitudes


@functools.lru_cache(maxsize=64)
def _hadamard_unitary(code: CodeSpec, j: int, model: ControlModel) -> np.ndarray:
    return compile_gate(LogicalGate(GateKind.HADAMARD, (j,), ()), code, model).unitary(code.n_qubits)


def encoded_readout(state: QState, j: int, code: CodeSpec, model: ControlModel = ControlModel.XY, rng=None):
    """Read logical qubit ``j``: encoded Hadamard, then singlet/triplet on pair j.

    Returns ``(bit, collapsed_state)``; ``bit`` is None when the pair
    was found outside the singlet/triplet span (leakage).
    """
    if rng is None:
        rng = np.random.default_rng()
    weight = float(np.vdot(state.amplitudes, code.projector() @ state.amplitudes).real)
    if abs(weight - 1) > 1e-8:
        warnings.warn(f"readout state has weight {weight:.6g} in the code space", RuntimeWarning, stacklevel=2)
    rotated = QState(_rotate(state, j, code, model))
    outcome, collapsed, _ = singlet_triplet_measure(rotated, j, rng)
    if outcome is Outcome.OTHER:
        return None, collapsed
    return (0 if outcome is ground_type(code, j) else 1), collapsed


def read_all(state: QState, code: CodeSpec, model: ControlModel = ControlModel.XY, rng=None) -> tuple:
    """Read logical qubits 1..n-1 in order; returns the bit tuple (None marks 'other')."""
    if rng is None:
        rng = np.random.default_rng()
    bits = []
    for j in range(1, code.n_logical + 1):
        bit, state = encoded_readout(state, j, code, model, rng)
        bits.append(bit)
    return tuple(bits)
