"""Encoded gates for the pair codes, compiled to XY / XXZ pulse schedules.

Logical rotations follow the convention ``RotX(t) = exp(-i t sigma_x)``
(no factor 1/2), so a stored pulse angle is literally the rotation
angle. Logical qubit 1 is the most significant bit of a logical index.

The Ising-from-XY construction conjugates T_{2a-1,2b-1} by
``exp(-i pi/4 T_{2a,2b-1})`` and ``exp(-i pi/2 T_{2a-1,2a})``. On the
full register this yields ``Z_{2a-1}Z_{2b-1} - Z_{2a-1}Z_{2a}``; on the
pair-occupied subspace (every pair holds one excitation, which contains
every code word) the second term is the constant ``+1``. The schedule
carries the matching global phase, so on that subspace it equals
``exp(-i theta Z_{2a-1} Z_{2b-1})`` exactly.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .code_space import CodeSpec, check_qecc, dfs_projector, QeccCheckResult
from .operators import (
    W,
    X,
    Z,
    I2,
    HamiltonianTerm,
    Pulse,
    PulseSchedule,
    TermKind,
    build_term,
    is_unitary,
    phase_distance,
)

ANGLE_EPS = 1e-14


class ControlModel(str, enum.Enum):
    XY = "XY"
    XXZ = "XXZ"

    @property
    def allowed_kinds(self) -> frozenset:
        if self is ControlModel.XY:
            return frozenset({TermKind.XY})
        return frozenset({TermKind.XY, TermKind.ISING})


def _check_logical(code: CodeSpec, i: int) -> None:
    if not 1 <= i <= code.n_logical:
        raise ValueError(f"logical index {i} outside [1, {code.n_logical}]")


def xbar_term(code: CodeSpec, i: int) -> HamiltonianTerm:
    """T_{2i-1,2i} with the pair sign folded in, so it acts as +sigma_x."""
    _check_logical(code, i)
    return HamiltonianTerm.xy(2 * i - 1, 2 * i, code.tilde_factor(i))


def zbar_sites(code: CodeSpec, i: int) -> tuple[int, int]:
    _check_logical(code, i)
    return (2 * i - 1, 2 * code.n_pairs - 1)


def logical_generators(code: CodeSpec, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Physical matrices of the encoded sigma_x and sigma_z on logical qubit ``i``."""
    xbar = build_term(xbar_term(code, i), code.n_qubits)
    zbar = build_term(HamiltonianTerm.ising(*zbar_sites(code, i)), code.n_qubits)
    return xbar, zbar


def restrict(op: np.ndarray, code: CodeSpec) -> np.ndarray:
    """V^dagger op V on the logical basis V."""
    v = code.logical_basis
    return v.conj().T @ op @ v


def logical_pauli(pauli: np.ndarray, i: int, n_logical: int) -> np.ndarray:
    """``pauli`` on logical qubit ``i`` of ``n_logical`` (qubit 1 = MSB)."""
    out = np.array([[1.0 + 0j]])
    for k in range(1, n_logical + 1):
        out = np.kron(out, pauli if k == i else I2)
    return out


def ising_via_xy(i: int, j: int, theta: float) -> PulseSchedule:
    """Five-step XY realization of exp(-i theta Z_i Z_j) for odd qubits ``i``, ``j``."""
    if i % 2 == 0 or j % 2 == 0:
        raise ValueError(f"the XY recoupling sequence couples odd-indexed qubits, got {i}, {j}")
    if i == j:
        raise ValueError("qubits must differ")
    outer = HamiltonianTerm.xy(i + 1, j)
    inner = HamiltonianTerm.xy(i, i + 1)
    center = HamiltonianTerm.xy(i, j)
    return PulseSchedule.of(
        Pulse(outer, math.pi / 4),
        Pulse(inner, math.pi / 2),
        Pulse(center, 2 * theta),
        Pulse(inner, -math.pi / 2),
        Pulse(outer, -math.pi / 4),
        phase=theta,
    )


def ising_schedule(i: int, j: int, theta: float, model: ControlModel) -> PulseSchedule:
    model = ControlModel(model)
    if model is ControlModel.XXZ:
        return PulseSchedule.of(Pulse(HamiltonianTerm.ising(i, j), theta))
    return ising_via_xy(i, j, theta)


def zbar_schedule(code: CodeSpec, i: int, theta: float, model: ControlModel) -> PulseSchedule:
    return ising_schedule(*zbar_sites(code, i), theta, model)


def xbar_schedule(code: CodeSpec, i: int, theta: float) -> PulseSchedule:
    return PulseSchedule.of(Pulse(xbar_term(code, i), theta))


def euler_angles(target) -> tuple[float, float, float, float]:
    """(alpha, theta, beta, gamma) with target = e^{i gamma} e^{-i beta Z} e^{-i theta X} e^{-i alpha Z}."""
    u = np.asarray(target, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u, atol=1e-10):
        raise ValueError("target must be a 2x2 unitary")
    det = np.linalg.det(u)
    v = u / cmath.sqrt(det)
    a, b = v[0, 0], v[0, 1]
    theta = math.atan2(abs(b), abs(a))
    if abs(b) < 1e-14:
        plus, minus = -cmath.phase(a), 0.0
    elif abs(a) < 1e-14:
        plus, minus = 0.0, cmath.phase(b) + math.pi / 2
    else:
        plus, minus = -cmath.phase(a), cmath.phase(b) + math.pi / 2
    alpha = (plus + minus) / 2
    beta = (plus - minus) / 2
    m = _rz(beta) @ _rx(theta) @ _rz(alpha)
    gamma = cmath.phase(np.vdot(m, u))
    return alpha, theta, beta, gamma


def _rx(t):
    return math.cos(t) * I2 - 1j * math.sin(t) * X


def _rz(t):
    return np.diag([cmath.exp(-1j * t), cmath.exp(1j * t)])


def _single_axis(u: np.ndarray):
    """Detect a pure Z or X rotation up to global phase: ('z'|'x', angle, phase) or None."""
    if abs(u[0, 1]) < 1e-13 and abs(u[1, 0]) < 1e-13:
        t = (cmath.phase(u[1, 1]) - cmath.phase(u[0, 0])) / 2
        return "z", t, cmath.phase(np.vdot(_rz(t), u))
    if abs(u[0, 0] - u[1, 1]) < 1e-13 and abs(u[0, 1] - u[1, 0]) < 1e-13:
        a, b = u[0, 0], u[0, 1]
        g = cmath.phase(a) if abs(a) > 1e-13 else cmath.phase(b) + math.pi / 2
        bb = b * cmath.exp(-1j * g)
        if abs(bb.real) < 1e-12:
            t = math.atan2(-bb.imag, abs(a))
            return "x", t, cmath.phase(np.vdot(_rx(t), u))
    return None


def euler_synthesize(target, i: int, code: CodeSpec, model: ControlModel) -> PulseSchedule:
    """Schedule acting as ``target`` on logical qubit ``i`` (exactly, phase included)."""
    u = np.asarray(target, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u, atol=1e-10):
        raise ValueError("target must be a 2x2 unitary")
    if np.allclose(u, u[0, 0] * I2, atol=1e-13):
        return PulseSchedule((), cmath.phase(u[0, 0]))
    axis = _single_axis(u)
    if axis is not None:
        kind, t, gamma = axis
        sched = zbar_schedule(code, i, t, model) if kind == "z" else xbar_schedule(code, i, t)
        return sched + PulseSchedule((), gamma)
    alpha, theta, beta, gamma = euler_angles(u)
    sched = PulseSchedule((), gamma)
    if abs(alpha) > ANGLE_EPS:
        sched = sched + zbar_schedule(code, i, alpha, model)
    if abs(theta) > ANGLE_EPS:
        sched = sched + xbar_schedule(code, i, theta)
    if abs(beta) > ANGLE_EPS:
        sched = sched + zbar_schedule(code, i, beta, model)
    return sched


def encoded_cp(code: CodeSpec, i: int, j: int, model: ControlModel) -> PulseSchedule:
    """Controlled phase between logical qubits ``i`` and ``j``.

    The raw pulse is exp(+i pi/4 Zbar_i Zbar_j) = exp(i pi/4 Z_{2i-1}Z_{2j-1});
    the single-qubit Zbar corrections and the global phase are read off
    its logical diagonal.
    """
    _check_logical(code, i)
    _check_logical(code, j)
    if i == j:
        raise ValueError("CP needs two distinct logical qubits")
    raw = ising_schedule(2 * i - 1, 2 * j - 1, -math.pi / 4, model)
    diag = np.diag(restrict(raw.unitary(code.n_qubits), code))
    n = code.n_logical

    def d(x, y):
        idx = (x << (n - i)) | (y << (n - j))
        return diag[idx]

    beta = cmath.phase(d(0, 0) / d(0, 1)) / 2
    alpha = cmath.phase(d(0, 0) / d(1, 0)) / 2
    gamma = alpha + beta - cmath.phase(d(0, 0))
    return (
        raw
        + zbar_schedule(code, i, alpha, model)
        + zbar_schedule(code, j, beta, model)
        + PulseSchedule((), gamma)
    )


class GateKind(str, enum.Enum):
    ROT_X = "RotX"
    ROT_Z = "RotZ"
    EULER = "Euler"
    HADAMARD = "Hadamard"
    CP = "CP"


_N_TARGETS = {GateKind.ROT_X: 1, GateKind.ROT_Z: 1, GateKind.EULER: 1, GateKind.HADAMARD: 1, GateKind.CP: 2}
_N_PARAMS = {GateKind.ROT_X: 1, GateKind.ROT_Z: 1, GateKind.EULER: 3, GateKind.HADAMARD: 0, GateKind.CP: 0}


@dataclass(frozen=True)
class LogicalGate:
    """One logical gate. ``Euler`` params are (alpha, theta, beta)."""

    kind: GateKind
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        try:
            kind = GateKind(self.kind)
        except ValueError:
            raise ValueError(f"unknown gate kind {self.kind!r}") from None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.targets) != _N_TARGETS[kind]:
            raise ValueError(f"{kind.value} takes {_N_TARGETS[kind]} target(s), got {self.targets}")
        if len(self.params) != _N_PARAMS[kind]:
            raise ValueError(f"{kind.value} takes {_N_PARAMS[kind]} parameter(s), got {self.params}")

    def matrix(self) -> np.ndarray:
        """2x2 (or 4x4 for CP) logical matrix."""
        if self.kind is GateKind.ROT_X:
            return _rx(self.params[0])
        if self.kind is GateKind.ROT_Z:
            return _rz(self.params[0])
        if self.kind is GateKind.EULER:
            alpha, theta, beta = self.params
            return _rz(beta) @ _rx(theta) @ _rz(alpha)
        if self.kind is GateKind.HADAMARD:
            return W.copy()
        return np.diag([1, 1, 1, -1]).astype(complex)

    def to_dict(self) -> dict:
        return {"gate": self.kind.value, "targets": list(self.targets), "params": list(self.params)}

    @classmethod
    def from_dict(cls, doc: dict) -> "LogicalGate":
        return cls(doc["gate"], tuple(doc["targets"]), tuple(doc.get("params", ())))


def logical_circuit_unitary(circuit, n_logical: int) -> np.ndarray:
    """Reference logical unitary by direct small-matrix products."""
    dim = 2**n_logical
    total = np.eye(dim, dtype=complex)
    for gate in circuit:
        gate = gate if isinstance(gate, LogicalGate) else LogicalGate.from_dict(gate)
        if gate.kind is GateKind.CP:
            i, j = gate.targets
            diag = np.ones(dim, dtype=complex)
            for b in range(dim):
                if (b >> (n_logical - i)) & 1 and (b >> (n_logical - j)) & 1:
                    diag[b] = -1
            op = np.diag(diag)
        else:
            op = np.array([[1.0 + 0j]])
            for k in range(1, n_logical + 1):
                op = np.kron(op, gate.matrix() if k == gate.targets[0] else I2)
        total = op @ total
    return total


def compile_gate(gate: LogicalGate, code: CodeSpec, model: ControlModel) -> PulseSchedule:
    for t in gate.targets:
        _check_logical(code, t)
    if gate.kind is GateKind.ROT_X:
        return xbar_schedule(code, gate.targets[0], gate.params[0])
    if gate.kind is GateKind.ROT_Z:
        return zbar_schedule(code, gate.targets[0], gate.params[0], model)
    if gate.kind is GateKind.CP:
        return encoded_cp(code, *gate.targets, model)
    return euler_synthesize(gate.matrix(), gate.targets[0], code, model)


def compile_circuit(circuit, code: CodeSpec, model: ControlModel) -> PulseSchedule:
    """Concatenated schedule for ``circuit`` (gates applied in list order)."""
    model = ControlModel(model)
    sched = PulseSchedule()
    for gate in circuit:
        gate = gate if isinstance(gate, LogicalGate) else LogicalGate.from_dict(gate)
        sched = sched + compile_gate(gate, code, model)
    return sched


def logical_distance(schedule: PulseSchedule, code: CodeSpec, target: np.ndarray) -> float:
    """Phase-insensitive distance between the restricted schedule and ``target``.

    Amplitude that leaves the logical span shows up as a shortfall in the
    restricted block and therefore as distance.
    """
    return phase_distance(restrict(schedule.unitary(code.n_qubits), code), target)


def generator_dictionary(code: CodeSpec, model: ControlModel) -> list[np.ndarray]:
    """Matrices of every term the compiler may emit for ``code`` under ``model``."""
    model = ControlModel(model)
    n = code.n_pairs
    terms = [HamiltonianTerm.xy(2 * a - 1, 2 * a) for a in range(1, n + 1)]
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            if model is ControlModel.XXZ:
                terms.append(HamiltonianTerm.ising(2 * a - 1, 2 * b - 1))
            else:
                terms.append(HamiltonianTerm.xy(2 * a, 2 * b - 1))
                terms.append(HamiltonianTerm.xy(2 * a - 1, 2 * b - 1))
    return [build_term(t, code.n_qubits) for t in terms]


def reachable_code_space(code: CodeSpec, model: ControlModel, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of the smallest subspace containing the logical span
    and invariant under every term of :func:`generator_dictionary`.

    Its orthogonal complement inside the logical span's closure holds the
    auxiliary (|2_L>-type) states visited by compiled gates.
    """
    gens = generator_dictionary(code, model)
    # orthonormalize first so a damaged basis cannot stall the projection
    u, s, _ = np.linalg.svd(code.logical_basis, full_matrices=False)
    basis = u[:, s > tol]
    frontier = basis
    while frontier.shape[1] and basis.shape[1] < basis.shape[0]:
        cand = np.column_stack([g @ frontier for g in gens])
        cand = cand - basis @ (basis.conj().T @ cand)
        if np.abs(cand).max(initial=0) < tol:
            break
        u, s, _ = np.linalg.svd(cand, full_matrices=False)
        new = u[:, s > tol]
        new = new - basis @ (basis.conj().T @ new)
        new, _ = np.linalg.qr(new)
        basis = np.column_stack([basis, new])
        frontier = new
    return basis


def auxiliary_states(code: CodeSpec, model: ControlModel) -> np.ndarray:
    """Reachable states orthogonal to the logical span."""
    reach = reachable_code_space(code, model)
    return reach[:, code.logical_dim :]


@dataclass
class LeakageReport:
    """Worst-case leakage over schedule prefixes and logical inputs.

    ``dfs_leakage`` is the norm outside the balanced-bitstring DFS,
    ``code_leakage`` the norm outside the reachable code space.
    """

    dfs_leakage: float
    code_leakage: float
    per_prefix_dfs: list[float] = field(default_factory=list)
    per_prefix_code: list[float] = field(default_factory=list)
    reachable_dim: int = 0
    reachable_qecc: QeccCheckResult | None = None

    def to_dict(self) -> dict:
        return {
            "dfs_leakage": self.dfs_leakage,
            "code_leakage": self.code_leakage,
            "per_prefix_dfs": self.per_prefix_dfs,
            "per_prefix_code": self.per_prefix_code,
            "reachable_dim": self.reachable_dim,
            "reachable_space_qecc": None if self.reachable_qecc is None else self.reachable_qecc.to_dict(),
        }


def leakage_check(schedule, code: CodeSpec, model: ControlModel = ControlModel.XY) -> LeakageReport:
    """Track every logical basis state through each prefix of ``schedule``.

    ``schedule`` may also be a sequence of unitaries (one per step), which
    lets callers inject operations outside the control vocabulary.
    """
    n = code.n_qubits
    if isinstance(schedule, PulseSchedule):
        prefixes = list(schedule.prefix_unitaries(n))
    else:
        prefixes, u = [], np.eye(2**n, dtype=complex)
        for step in schedule:
            u = np.asarray(step) @ u
            prefixes.append(u)
    reach = reachable_code_space(code, model)
    p_dfs = dfs_projector(n)
    p_reach = reach @ reach.conj().T
    eye = np.eye(2**n)
    dfs_out, code_out = [], []
    for u in prefixes:
        states = u @ code.logical_basis
        dfs_out.append(float(np.linalg.norm((eye - p_dfs) @ states, axis=0).max()))
        code_out.append(float(np.linalg.norm((eye - p_reach) @ states, axis=0).max()))
    return LeakageReport(
        dfs_leakage=max(dfs_out, default=0.0),
        code_leakage=max(code_out, default=0.0),
        per_prefix_dfs=dfs_out,
        per_prefix_code=code_out,
        reachable_dim=reach.shape[1],
        reachable_qecc=check_qecc(list(reach.T)),
    )
