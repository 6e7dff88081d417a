"""Acceptance criteria 1-11, one check function each.

Each ``criterion_N`` returns ``(passed, detail)``. The pytest tests assert
on them, and the pass/fail lines are printed in the terminal summary
(see conftest) or directly when run as ``python3 tests/test_acceptance.py``.
Criterion 4 is expected to fail as stated; see the detail line.
"""

import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import haar_unitary, haar_vector  # noqa: E402

from djcsim.code_space import auxiliary_code_states, build_code, check_qecc, dfs_projector, encode, jump_operator  # noqa: E402
from djcsim.encoded_logic import (  # noqa: E402
    ControlModel,
    GateKind,
    LogicalGate,
    compile_circuit,
    euler_synthesize,
    ising_via_xy,
    leakage_check,
    logical_circuit_unitary,
    logical_generators,
    restrict,
)
from djcsim.error_channel import TrajectoryConfig, conditional_propagator, dephasing_kick, run_ensemble  # noqa: E402
from djcsim.operators import HamiltonianTerm, QState, X, Z, build_term, exponentiate, ket, phase_distance  # noqa: E402
from djcsim.prep_measure import SINGLET, TRIPLET, encoded_readout, prepare_ground_state, read_all, readout_probabilities  # noqa: E402
from djcsim.recovery import CX1, CX2, composite_gram, derive_recovery_frame, logical_fidelity, recovery_schedule, recovery_unitary  # noqa: E402

R2 = math.sqrt(2)
RESULTS: dict[int, tuple[bool, str]] = {}

TITLES = {
    1: "code construction (4 qubits)",
    2: "generalized code (6 qubits)",
    3: "encoded single-qubit action",
    4: "Ising-from-XY identity",
    5: "recovery decompositions",
    6: "end-to-end protection",
    7: "trajectory statistics",
    8: "collective dephasing immunity",
    9: "ground-state preparation",
    10: "encoded readout",
    11: "comparative protection",
}


def _rx(t):
    return math.cos(t) * np.eye(2) - 1j * math.sin(t) * X


def _rz(t):
    return math.cos(t) * np.eye(2) - 1j * math.sin(t) * Z


def criterion_1():
    start = time.perf_counter()
    code = build_code(2, (-1, -1))
    words = [(ket("1010") + ket("0101")) / R2, (ket("0110") + ket("1001")) / R2]
    word_err = max(float(np.abs(code.logical_basis[:, k] - w).max()) for k, w in enumerate(words))
    q = check_qecc(code, tol=1e-12)
    aux = check_qecc(code, extra_states=auxiliary_code_states(), tol=1e-12)
    lam_err = max(abs(lam - 0.5) for lam in q.lambdas)
    elapsed = time.perf_counter() - start
    ok = word_err < 1e-12 and q.passed and lam_err < 1e-12 and aux.passed and elapsed < 1.0
    lams = ", ".join(f"{lam:.12g}" for lam in q.lambdas)
    return ok, f"word err {word_err:.1e}, Lambda={lams}, with |2_L> pass={aux.passed}, {elapsed:.3f}s"


def criterion_2():
    code = build_code(3)
    q = check_qecc(code, tol=1e-12)
    spread = max(q.lambdas) - min(q.lambdas)
    rate = Fraction(int(math.log2(code.logical_dim)), code.n_qubits)
    ok = q.passed and len(q.lambdas) == 6 and spread < 1e-12 and rate == Fraction(1, 3)
    return ok, f"Lambda={q.lambdas[0]:.12g} (spread {spread:.1e}, offdiag {q.max_offdiag:.1e}), rate={rate}"


def criterion_3():
    rng = np.random.default_rng(3)
    worst = 0.0
    for signs in [(-1, -1), (1, 1), (1, -1)]:
        code = build_code(2, signs)
        xbar, zbar = logical_generators(code, 1)
        for theta in rng.uniform(-math.pi, math.pi, 20):
            worst = max(worst, float(np.linalg.norm(restrict(exponentiate(xbar, theta), code) - _rx(theta))))
            worst = max(worst, float(np.linalg.norm(restrict(exponentiate(zbar, theta), code) - _rz(theta))))
    code = build_code(3, (1, -1, -1))
    fid = 1.0
    for k in range(100):
        u = haar_unitary(2, rng)
        target = u / np.sqrt(np.linalg.det(u))
        i = 1 + k % 2
        model = (ControlModel.XY, ControlModel.XXZ)[k % 2]
        sched = euler_synthesize(target, i, code, model)
        full = np.kron(target, np.eye(2)) if i == 1 else np.kron(np.eye(2), target)
        got = restrict(sched.unitary(code.n_qubits), code)
        fid = min(fid, abs(np.trace(full.conj().T @ got) / 4) ** 2)
    ok = worst < 1e-10 and fid >= 1 - 1e-8
    return ok, f"rotation distance {worst:.1e}, worst Euler fidelity 1-{1 - fid:.1e}"


def _pair_occupied_projector(n):
    keep = [k for k in range(2**n) if all(((k >> (n - 2 * a)) & 1) != ((k >> (n - 2 * a + 1)) & 1) for a in range(1, n // 2 + 1))]
    p = np.zeros((2**n, 2**n))
    p[keep, keep] = 1
    return p


def criterion_4():
    theta = 0.37
    full, sub = {}, {}
    for n in (4, 6, 8):
        got = ising_via_xy(1, 3, theta).unitary(n)
        want = exponentiate(build_term(HamiltonianTerm.ising(1, 3), n), theta)
        full[n] = phase_distance(got, want)
        p = _pair_occupied_projector(n)
        sub[n] = float(np.abs((got - want) @ p).max())
    code = build_code(2, (-1, -1))
    one = code.logical_basis[:, 1]
    span = np.column_stack([one, auxiliary_code_states()[0]])
    proj = span @ span.conj().T
    prefix_leak = max(float(np.linalg.norm(u @ one - proj @ u @ one)) for u in ising_via_xy(1, 3, theta).prefix_unitaries(4))
    # the weaker claim: a bare T13 pulse keeps |1_L> in span{|1_L>, |2_L>}
    t13 = build_term(HamiltonianTerm.xy(1, 3), 4)
    bare_leak = max(float(np.linalg.norm((np.eye(16) - proj) @ exponentiate(t13, a) @ one)) for a in np.linspace(-2, 2, 9))
    reach_leak = leakage_check(ising_via_xy(1, 3, theta), code, ControlModel.XY).code_leakage
    ok = max(full.values()) < 1e-10 and prefix_leak < 1e-12
    detail = (
        f"literal: full-register distance {', '.join(f'{n}q {d:.2f}' for n, d in full.items())}, "
        f"prefix leakage from |1_L> {prefix_leak:.2f} | on pair-occupied states: {max(sub.values()):.1e}, "
        f"bare T13 leakage {bare_leak:.1e}, prefixes outside reachable code space {reach_leak:.1e}"
    )
    return ok, detail


def criterion_5():
    dists = {}
    for model, steps in ((ControlModel.XXZ, 3), (ControlModel.XY, 7)):
        for parity, target in (("odd", CX1), ("even", CX2)):
            sched = recovery_schedule(1, parity, model)
            d = float(np.linalg.norm(sched.unitary(2) - target))
            dists[f"{model.value}/{parity}"] = (d, len(sched) == steps)
    ok = all(d < 1e-10 and right_len for d, right_len in dists.values())
    return ok, ", ".join(f"{k} {d:.1e} steps ok={s}" for k, (d, s) in dists.items())


def criterion_6():
    rng = np.random.default_rng(6)
    worst_fid, worst_gram = 0.0, 0.0
    for n_pairs in (2, 3):
        code = build_code(n_pairs)
        n = code.n_qubits
        for model in (ControlModel.XXZ, ControlModel.XY):
            for q in range(1, n + 1):
                frame = derive_recovery_frame(code, q, model)
                s, rec = jump_operator(q, n), recovery_unitary(q, n, model)
                for _ in range(50):
                    amps = haar_vector(code.logical_dim, rng)
                    psi = s @ encode(code, amps).amplitudes
                    psi = rec @ (psi / np.linalg.norm(psi))
                    worst_fid = max(worst_fid, abs(1 - logical_fidelity(psi, amps, frame)))
                gram = composite_gram(code, q, model)
                worst_gram = max(worst_gram, float(np.abs(gram - np.eye(code.logical_dim)).max()))
    ok = worst_fid < 1e-10 and worst_gram < 1e-10
    return ok, f"max |1-F| {worst_fid:.1e}, max Gram residual {worst_gram:.1e}"


def criterion_7():
    kappa, times = 1.0, (0.25, 0.5, 1.0)
    code = build_code(2)
    cfg = TrajectoryConfig(rates=(kappa,) * 4, dt=0.01, t_final=1.0, sample_times=times, recovery_enabled=False)
    ens = run_ensemble(cfg, 10_000, code, initial=code.state(0), master_seed=7)
    occ = np.array([[int(b) for b in format(k, "04b")] for k in range(16)])
    worst_z = 0.0
    for t in times:
        pops = np.array([np.abs(r.samples[t]) ** 2 @ occ for r in ens.records])
        mean = pops.mean(axis=0)
        se = pops.std(axis=0, ddof=1) / math.sqrt(len(pops))
        worst_z = max(worst_z, float(np.max(np.abs(mean - 0.5 * math.exp(-kappa * t)) / se)))
    # DFS claim: conditional evolution is the global decay factor times the unitary part
    rng = np.random.default_rng(70)
    p = dfs_projector(4)
    h = sum(build_term(HamiltonianTerm.xy(i, j, rng.normal()), 4) for i in range(1, 5) for j in range(i + 1, 5))
    dist = 0.0
    for t in (0.3, 1.0, 2.5):
        decay = math.exp(-kappa * 4 * t / 4)
        dist = max(dist, float(np.linalg.norm((conditional_propagator(np.zeros((16, 16)), [kappa] * 4, t) - decay * np.eye(16)) @ p)))
        dist = max(dist, float(np.linalg.norm((conditional_propagator(h, [kappa] * 4, t) - decay * exponentiate(h, t)) @ p)))
    ok = worst_z < 3 and dist < 1e-8
    return ok, f"worst population deviation {worst_z:.2f} SE, DFS conditional distance {dist:.1e}"


def criterion_8():
    rng = np.random.default_rng(8)
    worst = 0.0
    for code in (build_code(2), build_code(3, (1, -1, 1))):
        for phi in rng.uniform(0, 2 * math.pi, 20):
            for k in range(code.logical_dim):
                v = code.logical_basis[:, k]
                worst = max(worst, float(np.linalg.norm(dephasing_kick(QState(v), phi).amplitudes - v)))
    control = (ket("0000") + ket("0101")) / R2
    kicked = dephasing_kick(QState(control), 1.1).amplitudes
    relative = abs(1 - abs(np.vdot(control, kicked)))
    ok = worst < 1e-12 and relative > 1e-3
    return ok, f"code-state distance {worst:.1e}, control-state overlap loss {relative:.3f}"


def criterion_9():
    worst = 0.0
    for n in (2, 3):
        for sign in (1, -1):
            rep = prepare_ground_state([sign * 1.0] * n)
            worst = max(worst, abs(rep.overlap_with_code_projector - 1))
    prod_err = 0.0
    for n in (2, 3):
        code = build_code(n, (1,) * n)
        prod = SINGLET
        for _ in range(n - 1):
            prod = np.kron(prod, SINGLET)
        plus = encode(code, np.full(code.logical_dim, 1 / math.sqrt(code.logical_dim))).amplitudes
        prod_err = max(prod_err, float(np.linalg.norm(prod - plus)))
    trip = np.kron(TRIPLET, TRIPLET)
    trip_overlap = float(np.real(np.vdot(trip, build_code(2, (-1, -1)).projector() @ trip)))
    ok = worst < 1e-10 and prod_err < 1e-10
    return ok, f"max |1-overlap| {worst:.1e}, product identity distance {prod_err:.1e}, triplet product in code {trip_overlap:.12g}"


def criterion_10():
    rng = np.random.default_rng(10)
    code = build_code(2, (1, 1))
    det = []
    for k in range(2):
        p = readout_probabilities(code.state(k), 1, code)
        bits = {encoded_readout(code.state(k), 1, code, rng=rng)[0] for _ in range(200)}
        det.append(abs(p[k] - 1) < 1e-12 and bits == {k})
    shots = 10_000
    plus = encode(code, [1 / R2, 1 / R2])
    ones = sum(encoded_readout(plus, 1, code, rng=rng)[0] for _ in range(shots))
    z_balanced = abs(ones - shots / 2) / math.sqrt(shots / 4)
    # prepare -> compute -> readout on three pairs
    rep = prepare_ground_state([1.0, -1.0, 1.0])
    circ = [LogicalGate(GateKind.EULER, (1,), (0.4, 0.9, -0.2)), LogicalGate(GateKind.CP, (1, 2)),
            LogicalGate(GateKind.EULER, (2,), (1.1, 0.5, 0.3))]
    state = QState(compile_circuit(circ, rep.code, ControlModel.XY).unitary(6) @ rep.ground_state.amplitudes)
    born = np.abs(logical_circuit_unitary(circ, 2) @ (rep.code.logical_basis.conj().T @ rep.ground_state.amplitudes)) ** 2
    n_round = 4000
    counts = np.zeros(4)
    for _ in range(n_round):
        bits = read_all(state, rep.code, ControlModel.XY, rng)
        counts[2 * bits[0] + bits[1]] += 1
    expected = n_round * born
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    dof = 3
    z_chi2 = (chi2 - dof) / math.sqrt(2 * dof)
    ok = all(det) and z_balanced < 3 and z_chi2 < 3
    return ok, f"deterministic={det}, balanced {ones}/{shots} ({z_balanced:.2f} sigma), chi2={chi2:.2f} on {dof} dof ({z_chi2:.2f} sigma)"


def criterion_11():
    kappa, t = 1.0, 0.2
    n = 10_000
    code = build_code(2)
    enc_cfg = TrajectoryConfig(rates=(kappa,) * 4, dt=0.01, t_final=t, model=ControlModel.XXZ)
    bare_cfg = TrajectoryConfig(rates=(kappa,), dt=0.01, t_final=t)
    enc = run_ensemble(enc_cfg, n, code, master_seed=11).summary()
    bare = run_ensemble(bare_cfg, n, None, master_seed=11).summary()
    gap = enc["mean_fidelity"] - bare["mean_fidelity"]
    sigma = math.hypot(enc["stderr_fidelity"], bare["stderr_fidelity"])
    ok = gap > 5 * sigma
    return ok, (f"encoded {enc['mean_fidelity']:.5f}+-{enc['stderr_fidelity']:.1e}, "
                f"bare {bare['mean_fidelity']:.5f}+-{bare['stderr_fidelity']:.1e}, gap {gap / sigma:.1f} sigma")


CHECKS = {k: globals()[f"criterion_{k}"] for k in TITLES}


def evaluate(k):
    ok, detail = CHECKS[k]()
    RESULTS[k] = (ok, detail)
    return ok, detail


def format_line(k):
    ok, detail = RESULTS[k]
    return f"criterion {k:2d} [{'PASS' if ok else 'FAIL'}] {TITLES[k]}: {detail}"


@pytest.mark.parametrize("k", [1, 2, 3, 5, 6, 8, 9])
def test_criterion(k):
    ok, detail = evaluate(k)
    print(format_line(k))
    assert ok, detail


def test_criterion_4():
    """Fails as literally stated; the subspace form and the bare-T13 span claim hold (see detail)."""
    ok, detail = evaluate(4)
    print(format_line(4))
    assert ok, detail


@pytest.mark.slow
@pytest.mark.parametrize("k", [7, 10, 11])
def test_statistical_criterion(k):
    ok, detail = evaluate(k)
    print(format_line(k))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k in TITLES:
        evaluate(k)
        print(format_line(k), flush=True)
        failed += not RESULTS[k][0]
    print(f"{len(TITLES) - failed}/{len(TITLES)} criteria pass")
    sys.exit(1 if failed else 0)
