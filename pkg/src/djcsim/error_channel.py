"""Quantum trajectories with detected emission jumps and collective dephasing kicks.

Stepping is first order: in each slice of length ``delta`` the jump on
qubit ``i`` fires with probability ``kappa_i * delta * ||S_i psi||^2``;
otherwise the state evolves under the conditional Hamiltonian and is
renormalized. Pulses of a schedule run back to back (``tau`` time units
per radian of pulse angle) and are cut into slices no longer than ``dt``.

Per-trajectory seeds come from ``numpy.random.SeedSequence(master).spawn``,
so trajectory ``k`` of an ensemble depends only on ``(master, k)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .code_space import CodeSpec, jump_operator
from .encoded_logic import ControlModel
from .operators import PulseSchedule, QState, bit_of, build_term, is_hermitian, n_qubits_of
from .recovery import recovery_unitary

MAX_RATE_DT = 0.05


def occupation_matrix(n_qubits: int) -> np.ndarray:
    """(2^n, n) 0/1 matrix: entry [b, i-1] is the value of qubit i in basis state b."""
    return np.array([[bit_of(b, q, n_qubits) for q in range(1, n_qubits + 1)] for b in range(2**n_qubits)], dtype=float)


def sz_eigenvalues(n_qubits: int) -> np.ndarray:
    """Diagonal of S_z = sum_i Z_i."""
    occ = occupation_matrix(n_qubits)
    return n_qubits - 2 * occ.sum(axis=1)


def dephasing_kick(state: QState, phi: float) -> QState:
    """exp(-i phi S_z) |state>."""
    sz = sz_eigenvalues(state.n_qubits)
    return QState(np.exp(-1j * phi * sz) * state.amplitudes)


def _check_rates(rates, n_qubits=None) -> np.ndarray:
    rates = np.asarray(rates, dtype=float).ravel()
    if np.any(rates < 0):
        raise ValueError(f"emission rates must be >= 0, got {rates}")
    if n_qubits is not None and rates.size != n_qubits:
        raise ValueError(f"need {n_qubits} rates, got {rates.size}")
    return rates


def conditional_hamiltonian(h_s, rates) -> np.ndarray:
    """H_C = H_S - (i/2) sum_i kappa_i S_i^dag S_i."""
    h_s = np.asarray(h_s, dtype=complex)
    if not is_hermitian(h_s, atol=1e-10):
        raise ValueError("system Hamiltonian must be Hermitian")
    n = n_qubits_of(h_s.shape[0])
    rates = _check_rates(rates, n)
    decay = occupation_matrix(n) @ rates
    return h_s - 0.5j * np.diag(decay)


def conditional_propagator(h_s, rates, t: float) -> np.ndarray:
    """exp(-i H_C t); non-Hermitian, so computed with a general matrix exponential."""
    return scipy.linalg.expm(-1j * t * conditional_hamiltonian(h_s, rates))


@dataclass(frozen=True)
class JumpEvent:
    time: float
    qubit: int


@dataclass(frozen=True)
class TrajectoryConfig:
    """Noise, timing and control for one trajectory.

    ``t_final`` defaults to the schedule duration; the register idles
    (H_S = 0) after the schedule until ``t_final``. Dephasing kicks draw
    a uniform angle from ``dephasing_range`` at each of ``dephasing_times``.
    """

    rates: tuple[float, ...]
    dt: float
    seed: int = 0
    recovery_enabled: bool = True
    schedule: PulseSchedule = field(default_factory=PulseSchedule)
    tau: float = 1.0
    t_final: float | None = None
    dephasing_times: tuple[float, ...] = ()
    dephasing_range: tuple[float, float] = (0.0, 2 * math.pi)
    sample_times: tuple[float, ...] = ()
    model: ControlModel = ControlModel.XXZ

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        object.__setattr__(self, "dephasing_times", tuple(sorted(float(t) for t in self.dephasing_times)))
        object.__setattr__(self, "sample_times", tuple(sorted(float(t) for t in self.sample_times)))
        object.__setattr__(self, "model", ControlModel(self.model))
        _check_rates(self.rates)
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.dt * max(self.rates, default=0.0) >= MAX_RATE_DT:
            raise ValueError(f"dt * max(kappa) = {self.dt * max(self.rates):.3g} violates the first-order bound {MAX_RATE_DT}")
        if self.t_final is not None and self.t_final < self.schedule_duration - 1e-12:
            raise ValueError(f"t_final={self.t_final} is shorter than the schedule ({self.schedule_duration})")

    @property
    def schedule_duration(self) -> float:
        return self.tau * sum(abs(p.angle) for p in self.schedule.pulses)

    @property
    def duration(self) -> float:
        return self.schedule_duration if self.t_final is None else float(self.t_final)


@dataclass(eq=False)
class TrajectoryRecord:
    """Outcome of one trajectory.

    ``logical_fidelity`` scores the final state against the noiseless
    image of the initial logical state when no jump occurred, and
    against the record-conditioned frame otherwise (see
    :func:`run_trajectory`).
    """

    events: list[JumpEvent]
    recoveries: list[int]
    final_state: QState
    logical_fidelity: float
    logical_amplitudes: np.ndarray
    samples: dict[float, np.ndarray] = field(default_factory=dict)
    seed: int | None = None

    @property
    def n_jumps(self) -> int:
        return len(self.events)

    @property
    def first_jump_qubit(self) -> int:
        return self.events[0].qubit if self.events else 0

    def __eq__(self, other):
        if not isinstance(other, TrajectoryRecord):
            return NotImplemented
        return (
            self.events == other.events
            and self.recoveries == other.recoveries
            and np.array_equal(self.final_state.amplitudes, other.final_state.amplitudes)
            and self.logical_fidelity == other.logical_fidelity
            and self.samples.keys() == other.samples.keys()
            and all(np.array_equal(self.samples[t], other.samples[t]) for t in self.samples)
        )


def _polar_isometry(k: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(k, full_matrices=False)
    return u @ vh


def _segments(config: TrajectoryConfig, n_qubits: int):
    """(generator, duration) pieces: one per pulse, then the idle tail."""
    segs = []
    for pulse in config.schedule.pulses:
        if pulse.angle == 0:
            continue
        gen = build_term(pulse.term, n_qubits) * (math.copysign(1.0, pulse.angle) / config.tau)
        segs.append((gen, config.tau * abs(pulse.angle)))
    tail = config.duration - config.schedule_duration
    if tail > 1e-12:
        segs.append((None, tail))
    return segs


def run_trajectory(
    initial: QState,
    config: TrajectoryConfig,
    code: CodeSpec | None = None,
    rng: np.random.Generator | None = None,
) -> TrajectoryRecord:
    """Simulate one trajectory from ``initial``.

    With ``code`` given, ``initial`` must lie in its logical span and is
    scored as an encoded state; without it the register is bare, the
    logical map is the identity and no recovery is applied.

    Scoring: the no-jump reference is the noiseless schedule applied to
    the initial state. After jumps, a reference map is propagated
    alongside the state using only record-known operations (schedule,
    conditional decay, detected jumps, recoveries; not the random
    dephasing angles), and its polar isometry is the frame. For a
    single jump with no schedule this is the recovery frame.
    """
    if not initial.normalized:
        raise ValueError("initial state must be normalized")
    n = initial.n_qubits
    rates = _check_rates(config.rates, n)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    if code is not None:
        if code.n_qubits != n:
            raise ValueError("code and initial state disagree on the number of qubits")
        emap = np.asarray(code.logical_basis)
    else:
        emap = np.eye(2**n, dtype=complex)
    amps = emap.conj().T @ initial.amplitudes
    if abs(np.linalg.norm(amps) - 1) > 1e-10:
        raise ValueError("initial state is not inside the code's logical span")

    occ_t = occupation_matrix(n).T.copy()
    decay = rates @ occ_t
    recover = config.recovery_enabled and code is not None
    recoveries_by_qubit = {q: recovery_unitary(q, n, config.model) for q in range(1, n + 1)} if recover else {}
    jumps = [jump_operator(q, n) for q in range(1, n + 1)]
    sz = sz_eigenvalues(n)

    psi = initial.amplitudes.copy()
    kref = emap.astype(complex).copy()
    events: list[JumpEvent] = []
    recoveries: list[int] = []
    samples: dict[float, np.ndarray] = {}
    kicks = list(config.dephasing_times)
    sample_times = list(config.sample_times)
    lo, hi = config.dephasing_range
    propagators: dict = {}

    def handle_marks(t_now):
        # kicks at an instant act before that instant is sampled
        nonlocal psi
        while kicks and kicks[0] <= t_now + 1e-12:
            kicks.pop(0)
            phi = rng.uniform(lo, hi)
            psi = np.exp(-1j * phi * sz) * psi
        while sample_times and sample_times[0] <= t_now + 1e-12:
            samples[sample_times.pop(0)] = psi.copy()

    t = 0.0
    handle_marks(t)
    for seg_id, (gen, duration) in enumerate(_segments(config, n)):
        t_seg_end = t + duration
        while t < t_seg_end - 1e-12:
            pending = [m for m in kicks[:1] + sample_times[:1] if t + 1e-12 < m < t_seg_end - 1e-12]
            t_stop = min(pending) if pending else t_seg_end
            span = t_stop - t
            n_slices = max(1, math.ceil(span / config.dt - 1e-9))
            delta = span / n_slices
            key = (seg_id, round(delta, 15))
            if key not in propagators:
                h = np.zeros((2**n, 2**n), dtype=complex) if gen is None else gen
                propagators[key] = conditional_propagator(h, rates, delta)
            prop = propagators[key]
            for _ in range(n_slices):
                pops = psi.real**2 + psi.imag**2
                r = rng.random()
                if r < delta * (decay @ pops):
                    probs = rates * delta * (occ_t @ pops)
                    qubit = int(np.searchsorted(np.cumsum(probs), r, side="right")) + 1
                    psi = jumps[qubit - 1] @ psi
                    kref = jumps[qubit - 1] @ kref
                    events.append(JumpEvent(t + delta, qubit))
                    if recover:
                        rec = recoveries_by_qubit[qubit]
                        psi = rec @ psi
                        kref = rec @ kref
                        recoveries.append(qubit)
                    kref = kref / math.sqrt((kref.real**2 + kref.imag**2).sum())
                else:
                    psi = prop @ psi
                    kref = prop @ kref
                psi = psi / math.sqrt((psi.real**2 + psi.imag**2).sum())
                t += delta
            t = t_stop
            handle_marks(t)

    phase = np.exp(1j * config.schedule.phase)
    psi = phase * psi
    if events:
        frame = _polar_isometry(kref)
    else:
        frame = config.schedule.unitary(n) @ emap if config.schedule.pulses else phase * emap
    ref = frame @ amps
    ref = ref / np.linalg.norm(ref)
    fidelity = float(abs(np.vdot(ref, psi)) ** 2)
    return TrajectoryRecord(
        events=events,
        recoveries=recoveries,
        final_state=QState(psi),
        logical_fidelity=min(fidelity, 1.0 + 1e-12),
        logical_amplitudes=amps,
        samples=samples,
        seed=config.seed,
    )


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@dataclass
class EnsembleResult:
    records: list[TrajectoryRecord]
    master_seed: int

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([r.logical_fidelity for r in self.records])

    @property
    def n_jumps(self) -> np.ndarray:
        return np.array([r.n_jumps for r in self.records])

    def summary(self) -> dict:
        f = self.fidelities
        n = f.size
        jumps = self.n_jumps
        hist = {int(k): int(v) for k, v in zip(*np.unique(jumps, return_counts=True))}
        by_jumps = {int(k): float(f[jumps == k].mean()) for k in hist}
        std = float(f.std(ddof=1)) if n > 1 else 0.0
        return {
            "n_trajectories": n,
            "master_seed": self.master_seed,
            "mean_fidelity": float(f.mean()) if n else float("nan"),
            "std_fidelity": std,
            "stderr_fidelity": std / math.sqrt(n) if n else float("nan"),
            "jump_histogram": hist,
            "mean_fidelity_by_jumps": by_jumps,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trajectory_id", "n_jumps", "first_jump_qubit", "logical_fidelity"])
            for k, rec in enumerate(self.records):
                writer.writerow([k, rec.n_jumps, rec.first_jump_qubit, format(rec.logical_fidelity, ".17g")])


def run_ensemble(
    config: TrajectoryConfig,
    n_trajectories: int,
    code: CodeSpec | None = None,
    initial=None,
    master_seed: int = 0,
) -> EnsembleResult:
    """Independent trajectories seeded by ``SeedSequence(master_seed).spawn(n)``.

    ``initial`` is a fixed QState, a callable ``rng -> QState``, or None
    for a Haar-random logical state per trajectory (drawn from that
    trajectory's own generator before it runs).
    """
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be >= 1")
    n_qubits = len(config.rates)
    dim = code.logical_dim if code is not None else 2**n_qubits
    children = np.random.SeedSequence(master_seed).spawn(n_trajectories)
    records = []
    for child in children:
        rng = np.random.default_rng(child)
        if initial is None:
            amps = haar_state(dim, rng)
            state = QState(code.logical_basis @ amps) if code is not None else QState(amps)
        elif callable(initial):
            state = initial(rng)
        else:
            state = initial
        seed = int(child.generate_state(1)[0])
        records.append(run_trajectory(state, config, code, rng=rng))
        records[-1].seed = seed
    return EnsembleResult(records, master_seed)
