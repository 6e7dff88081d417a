"""Command-line harness: ``verify``, ``compile``, ``simulate``, ``prep-check``.

Each command reads one JSON config (``--config``), writes its outputs
into ``--out`` and exits 0 on success, 1 when a verification check
fails and 2 when the config is invalid or the run is refused.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from .code_space import CodeSpec, build_code, check_qecc, collective_operator, dfs_basis, encode
from .encoded_logic import (
    ControlModel,
    LogicalGate,
    compile_circuit,
    leakage_check,
    logical_circuit_unitary,
    logical_distance,
    logical_generators,
    logical_pauli,
    reachable_code_space,
    restrict,
)
from .error_channel import TrajectoryConfig, run_ensemble
from .io import read_json, write_report
from .operators import PulseSchedule, QState, X, Z
from .prep_measure import prepare_ground_state, read_all, readout_probabilities

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
TOL = 1e-10

_SIGNS = {"type": "array", "items": {"enum": [1, -1]}}
_MODEL = {"enum": ["XY", "XXZ"]}
_N_PAIRS = {"type": "integer", "minimum": 2, "maximum": 6}
_GATE = {
    "type": "object",
    "required": ["gate", "targets"],
    "properties": {
        "gate": {"enum": ["RotX", "RotZ", "Euler", "Hadamard", "CP"]},
        "targets": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1, "maxItems": 2},
        "params": {"type": "array", "items": {"type": "number"}},
    },
    "additionalProperties": False,
}
_CIRCUIT = {"type": "array", "items": _GATE}
_AMPS = {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}}

SCHEMAS = {
    "verify": {
        "type": "object",
        "properties": {
            "n_pairs": _N_PAIRS,
            "pair_signs": _SIGNS,
            "model": _MODEL,
            "code_file": {"type": "string"},
            "seed": {"type": "integer", "minimum": 0},
        },
        "anyOf": [{"required": ["n_pairs"]}, {"required": ["code_file"]}],
        "additionalProperties": False,
    },
    "compile": {
        "type": "object",
        "required": ["n_pairs", "circuit"],
        "properties": {"n_pairs": _N_PAIRS, "pair_signs": _SIGNS, "model": _MODEL, "circuit": _CIRCUIT,
                       "seed": {"type": "integer", "minimum": 0}},
        "additionalProperties": False,
    },
    "simulate": {
        "type": "object",
        "required": ["kappa", "dt", "n_trajectories"],
        "properties": {
            "mode": {"enum": ["encoded", "bare"]},
            "n_pairs": _N_PAIRS,
            "pair_signs": _SIGNS,
            "model": _MODEL,
            "n_bare_qubits": {"type": "integer", "minimum": 1, "maximum": 12},
            "kappa": {"oneOf": [{"type": "number", "minimum": 0}, {"type": "array", "items": {"type": "number", "minimum": 0}}]},
            "dt": {"type": "number", "exclusiveMinimum": 0},
            "tau": {"type": "number", "exclusiveMinimum": 0},
            "t_final": {"type": "number", "minimum": 0},
            "n_trajectories": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
            "recovery": {"type": "boolean"},
            "circuit": _CIRCUIT,
            "initial": _AMPS,
            "dephasing": {
                "type": "object",
                "required": ["times"],
                "properties": {
                    "times": {"type": "array", "items": {"type": "number", "minimum": 0}},
                    "low": {"type": "number"},
                    "high": {"type": "number"},
                },
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
    "prep-check": {
        "type": "object",
        "required": ["couplings"],
        "properties": {
            "couplings": {"type": "array", "items": {"type": "number", "not": {"const": 0}}, "minItems": 2, "maxItems": 6},
            "model": _MODEL,
            "circuit": _CIRCUIT,
            "shots": {"type": "integer", "minimum": 0},
            "seed": {"type": "integer", "minimum": 0},
        },
        "additionalProperties": False,
    },
}


class ConfigError(ValueError):
    pass


def validate_config(command: str, config) -> dict:
    """Schema check; the error message names the offending field."""
    try:
        jsonschema.validate(config, SCHEMAS[command])
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "(top level)"
        raise ConfigError(f"config field {where}: {err.message}") from None
    return config


def _code_from(config) -> CodeSpec:
    n = config["n_pairs"]
    signs = config.get("pair_signs")
    if signs is not None and len(signs) != n:
        raise ConfigError(f"config field pair_signs: need {n} entries, got {len(signs)}")
    return build_code(n, signs)


def _circuit_from(config, code: CodeSpec) -> list[LogicalGate]:
    gates = []
    for k, doc in enumerate(config.get("circuit", [])):
        try:
            gate = LogicalGate.from_dict(doc)
        except ValueError as err:
            raise ConfigError(f"config field circuit/{k}: {err}") from None
        bad = [t for t in gate.targets if t > code.n_logical]
        if bad:
            raise ConfigError(f"config field circuit/{k}/targets: qubit {bad[0]} outside [1, {code.n_logical}]")
        gates.append(gate)
    return gates


def cmd_verify(config, seed, out: Path) -> tuple[int, dict]:
    if "code_file" in config:
        try:
            code = CodeSpec.from_dict(read_json(config["code_file"]))
        except (OSError, KeyError, TypeError, ValueError) as err:
            raise ConfigError(f"config field code_file: cannot load code ({err})") from None
    else:
        code = _code_from(config)
    model = ControlModel(config.get("model", "XY"))
    n = code.n_qubits
    basis = code.logical_basis

    balanced = {int(b, 2) for b in dfs_basis(n)}
    outside = [i for i in range(2**n) if i not in balanced]
    dfs_leak = float(np.abs(basis[outside, :]).max(initial=0.0))
    c_residual = float(np.abs(collective_operator(n) @ basis - code.n_pairs * basis).max())
    ortho = float(np.abs(basis.conj().T @ basis - np.eye(code.logical_dim)).max())
    qecc = check_qecc(code)
    # rate from the measured logical dimension against (n-1)/(2n)
    dim = code.logical_dim
    rate = Fraction(dim.bit_length() - 1, n) if dim & (dim - 1) == 0 else Fraction(0)
    rate_ok = rate == Fraction(code.n_pairs - 1, 2 * code.n_pairs)

    algebra = []
    proj = code.projector()
    for i in range(1, code.n_logical + 1):
        xbar, zbar = logical_generators(code, i)
        res_x = float(np.abs(restrict(xbar, code) - logical_pauli(X, i, code.n_logical)).max())
        res_z = float(np.abs(restrict(zbar, code) - logical_pauli(Z, i, code.n_logical)).max())
        leak = max(float(np.abs((np.eye(2**n) - proj) @ g @ proj).max()) for g in (xbar, zbar))
        algebra.append({"logical_qubit": i, "x_residual": res_x, "z_residual": res_z, "leakage": leak})

    reach = reachable_code_space(code, model)
    reach_qecc = check_qecc(list(reach.T))
    dfs_states = list(np.eye(2**n, dtype=complex)[:, sorted(balanced)].T)
    dfs_qecc = check_qecc(dfs_states)

    checks = {
        "dfs_membership": dfs_leak < TOL and c_residual < TOL,
        "orthonormal": ortho < TOL,
        "qecc": qecc.passed,
        "rate": rate_ok,
        "generator_algebra": all(max(a["x_residual"], a["z_residual"], a["leakage"]) < TOL for a in algebra),
    }
    body = {
        "n_pairs": code.n_pairs,
        "pair_signs": list(code.pair_signs),
        "model": model.value,
        "checks": checks,
        "pass": all(checks.values()),
        "dfs_leakage": dfs_leak,
        "collective_eigen_residual": c_residual,
        "orthonormality_residual": ortho,
        "qecc": qecc.to_dict(),
        "rate": str(rate),
        "generator_algebra": algebra,
        # informational: which larger spaces also satisfy the jump condition
        "reachable_space": {"dim": int(reach.shape[1]), "qecc": reach_qecc.to_dict()},
        "full_dfs": {"dim": len(dfs_states), "qecc": dfs_qecc.to_dict()},
    }
    write_report(out / "report.json", "verify", body)
    return (EXIT_OK if body["pass"] else EXIT_FAIL), body


def cmd_compile(config, seed, out: Path) -> tuple[int, dict]:
    code = _code_from(config)
    model = ControlModel(config.get("model", "XY"))
    circuit = _circuit_from(config, code)
    schedule = compile_circuit(circuit, code, model)
    target = logical_circuit_unitary(circuit, code.n_logical)
    dist = logical_distance(schedule, code, target)
    leak = leakage_check(schedule, code, model)
    allowed = schedule.terms_allowed(model.allowed_kinds)
    verification = {
        "logical_distance": dist,
        "native_terms_only": allowed,
        "n_steps": len(schedule),
        "n_pulses": len(schedule.pulses),
        "leakage": leak.to_dict(),
        "pass": dist < 1e-8 and allowed,
    }
    body = {
        "n_pairs": code.n_pairs,
        "pair_signs": list(code.pair_signs),
        "model": model.value,
        "circuit": [g.to_dict() for g in circuit],
        "schedule": schedule.to_dict(),
        "verification": verification,
    }
    write_report(out / "schedule.json", "compile", body)
    return (EXIT_OK if verification["pass"] else EXIT_FAIL), body


def cmd_simulate(config, seed, out: Path) -> tuple[int, dict]:
    mode = config.get("mode", "encoded")
    model = ControlModel(config.get("model", "XXZ"))
    if mode == "encoded":
        if "n_pairs" not in config:
            raise ConfigError("config field n_pairs: required in encoded mode")
        code = _code_from(config)
        n_qubits = code.n_qubits
        circuit = _circuit_from(config, code)
        schedule = compile_circuit(circuit, code, model)
    else:
        code = None
        n_qubits = config.get("n_bare_qubits", 1)
        if config.get("circuit"):
            raise ConfigError("config field circuit: not available in bare mode")
        schedule = PulseSchedule()
    kappa = config["kappa"]
    rates = [float(kappa)] * n_qubits if not isinstance(kappa, list) else [float(k) for k in kappa]
    if len(rates) != n_qubits:
        raise ConfigError(f"config field kappa: need {n_qubits} rates, got {len(rates)}")
    deph = config.get("dephasing", {})
    try:
        tc = TrajectoryConfig(
            rates=tuple(rates),
            dt=config["dt"],
            recovery_enabled=config.get("recovery", True),
            schedule=schedule,
            tau=config.get("tau", 1.0),
            t_final=config.get("t_final"),
            dephasing_times=tuple(deph.get("times", ())),
            dephasing_range=(deph.get("low", 0.0), deph.get("high", 2 * math.pi)),
            model=model,
        )
    except ValueError as err:
        raise ConfigError(f"config field dt/kappa/t_final: {err}") from None
    initial = None
    if "initial" in config:
        amps = np.array([complex(re, im) for re, im in config["initial"]])
        amps = amps / np.linalg.norm(amps)
        dim = code.logical_dim if code is not None else 2**n_qubits
        if amps.size != dim:
            raise ConfigError(f"config field initial: need {dim} amplitudes, got {amps.size}")
        initial = encode(code, amps) if code is not None else QState(amps)
    ens = run_ensemble(tc, config["n_trajectories"], code, initial=initial, master_seed=seed)
    ens.write_csv(out / "trajectories.csv")
    body = {
        "mode": mode,
        "model": model.value,
        "n_qubits": n_qubits,
        "rates": rates,
        "dt": tc.dt,
        "tau": tc.tau,
        "t_final": tc.duration,
        "recovery": tc.recovery_enabled and code is not None,
        "seed_rule": "numpy SeedSequence(seed).spawn(n_trajectories)",
        "summary": ens.summary(),
    }
    write_report(out / "report.json", "simulate", body)
    return EXIT_OK, body


def cmd_prep_check(config, seed, out: Path) -> tuple[int, dict]:
    couplings = config["couplings"]
    model = ControlModel(config.get("model", "XY"))
    rep = prepare_ground_state(couplings)
    code = rep.code
    circuit = _circuit_from(config, code)
    state = rep.ground_state
    if circuit:
        state = QState(compile_circuit(circuit, code, model).unitary(code.n_qubits) @ state.amplitudes)
    target = logical_circuit_unitary(circuit, code.n_logical) @ (code.logical_basis.conj().T @ rep.ground_state.amplitudes)
    born = np.abs(target) ** 2

    shots = config.get("shots", 0)
    rng = np.random.default_rng(seed)
    counts = np.zeros(code.logical_dim, dtype=int)
    n_other = 0
    with open(out / "readout.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["shot", "logical_index", "bit"])
        for shot in range(shots):
            bits = read_all(state, code, model, rng)
            if None in bits:
                n_other += 1
            else:
                counts[int("".join(map(str, bits)), 2)] += 1
            for j, bit in enumerate(bits, start=1):
                writer.writerow([shot, j, "other" if bit is None else bit])
    first = readout_probabilities(state, 1, code, model)
    body = {
        "couplings": couplings,
        "model": model.value,
        "prep": rep.to_dict(),
        "circuit": [g.to_dict() for g in circuit],
        "born_probabilities": born.tolist(),
        "first_qubit_readout_probabilities": {"0": first[0], "1": first[1], "other": first[None]},
        "shots": shots,
        "counts": counts.tolist(),
        "other_outcomes": n_other,
        "pass": rep.in_code_space,
    }
    write_report(out / "report.json", "prep-check", body)
    return (EXIT_OK if body["pass"] else EXIT_FAIL), body


COMMANDS = {"verify": cmd_verify, "compile": cmd_compile, "simulate": cmd_simulate, "prep-check": cmd_prep_check}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="djcsim", description="Detected-jump-correcting code toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides config 'seed')")
        p.add_argument("--out", default=".", help="output directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from None
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON: {err}") from None
        validate_config(args.command, config)
        seed = args.seed if args.seed is not None else config.get("seed", 0)
        if seed < 0:
            raise ConfigError("seed must be non-negative")
        out.mkdir(parents=True, exist_ok=True)
        code, body = COMMANDS[args.command](config, seed, out)
    except ConfigError as err:
        print(f"djcsim {args.command}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    status = "pass" if code == EXIT_OK else "FAIL"
    print(f"djcsim {args.command}: {status} ({out})")
    return code


if __name__ == "__main__":
    sys.exit(main())
