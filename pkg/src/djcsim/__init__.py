"""Detected-jump-correcting codes: construction, encoded XY/XXZ logic, recovery and trajectories."""

from .code_space import CodeSpec, QeccCheckResult, build_code, check_qecc, decode, dfs_basis, encode, jump_operator
from .encoded_logic import (
    ControlModel,
    GateKind,
    LogicalGate,
    compile_circuit,
    compile_gate,
    encoded_cp,
    euler_synthesize,
    ising_via_xy,
    leakage_check,
    reachable_code_space,
)
from .error_channel import (
    JumpEvent,
    TrajectoryConfig,
    TrajectoryRecord,
    conditional_hamiltonian,
    dephasing_kick,
    run_ensemble,
    run_trajectory,
)
from .estimators import DJCEncoder, EncodedCircuitCompiler
from .operators import HamiltonianTerm, Pulse, PulseSchedule, QState, TermKind
from .prep_measure import PrepReport, encoded_readout, prepare_ground_state, singlet_triplet_measure
from .recovery import CX1, CX2, RecoveryFrame, derive_recovery_frame, recovery_schedule

__version__ = "0.1.0"
