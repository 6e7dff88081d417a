"""DFS of balanced bitstrings, the pair-encoded DJC codes and the QECC check.

A code on ``n_pairs`` pairs uses ``2 * n_pairs`` physical qubits and
encodes ``n_pairs - 1`` logical qubits. Pair ``i`` holds qubits
``(2i-1, 2i)`` with the two-level alphabet

    |0~>_i = |0_{2i-1} 1_{2i}>,   |1~>_i = -sign(J_i) |1_{2i-1} 0_{2i}>

and the logical basis state for bits ``e_1..e_{n-1}`` is the equal
superposition of ``|e~_1 ... e~_{n-1} 0~_n>`` and its pairwise NOT
``|(1-e_1)~ ... (1-e_{n-1})~ 1~_n>``, each branch carrying its own
tilde sign factors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .operators import ATOL, MAX_QUBITS, QState, basis_index, bit_of, embed, LOWER, n_qubits_of


def dfs_basis(n_qubits: int) -> list[str]:
    """Bitstrings with exactly ``n_qubits/2`` ones, lexicographic order."""
    if n_qubits % 2 or n_qubits < 2:
        raise ValueError(f"the balanced DFS needs an even number of qubits, got {n_qubits}")
    if n_qubits > MAX_QUBITS:
        raise ValueError(f"n_qubits must be <= {MAX_QUBITS}")
    half = n_qubits // 2
    return [format(b, f"0{n_qubits}b") for b in range(2**n_qubits) if bin(b).count("1") == half]


def dfs_projector(n_qubits: int) -> np.ndarray:
    diag = np.zeros(2**n_qubits)
    for bits in dfs_basis(n_qubits):
        diag[basis_index(bits)] = 1.0
    return np.diag(diag).astype(complex)


def collective_operator(n_qubits: int, rates=None) -> np.ndarray:
    """C = sum_i kappa_i |1><1|_i; unit rates by default."""
    rates = np.ones(n_qubits) if rates is None else np.asarray(rates, dtype=float)
    diag = np.zeros(2**n_qubits)
    for b in range(2**n_qubits):
        diag[b] = sum(rates[q - 1] for q in range(1, n_qubits + 1) if bit_of(b, q, n_qubits))
    return np.diag(diag).astype(complex)


def jump_operator(i: int, n_qubits: int) -> np.ndarray:
    """S_i = |0><1| on qubit ``i``."""
    if not 1 <= i <= n_qubits:
        raise ValueError(f"qubit {i} outside [1, {n_qubits}]")
    return embed({i: LOWER}, n_qubits)


def _sign(x: float) -> int:
    if x == 0:
        raise ValueError("coupling sign must be nonzero")
    return 1 if x > 0 else -1


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """A DJC code on ``n_pairs`` pairs.

    ``logical_basis`` has shape ``(2**(2n), 2**(n-1))``; column ``k`` is
    the logical basis state whose bits are the binary digits of ``k``
    with logical qubit 1 most significant.
    """

    n_pairs: int
    pair_signs: tuple[int, ...]
    logical_basis: np.ndarray

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_pairs

    @property
    def n_logical(self) -> int:
        return self.n_pairs - 1

    @property
    def logical_dim(self) -> int:
        return self.logical_basis.shape[1]

    @property
    def rate(self) -> Fraction:
        return Fraction(self.n_logical, self.n_qubits)

    def tilde_factor(self, pair: int) -> int:
        """Sign s_i with |1~>_i = s_i |1_{2i-1} 0_{2i}>."""
        return -self.pair_signs[pair - 1]

    def state(self, k: int) -> QState:
        return QState(self.logical_basis[:, k])

    def projector(self) -> np.ndarray:
        return self.logical_basis @ self.logical_basis.conj().T

    def to_dict(self) -> dict:
        basis = []
        for k in range(self.logical_dim):
            col = self.logical_basis[:, k]
            basis.append([[int(idx), float(col[idx].real), float(col[idx].imag)] for idx in np.flatnonzero(np.abs(col) > 0)])
        return {"n_pairs": self.n_pairs, "pair_signs": list(self.pair_signs), "logical_basis": basis}

    @classmethod
    def from_dict(cls, doc: dict) -> "CodeSpec":
        n_pairs = int(doc["n_pairs"])
        dim = 2 ** (2 * n_pairs)
        columns = []
        for entries in doc["logical_basis"]:
            col = np.zeros(dim, dtype=complex)
            for idx, re, im in entries:
                col[int(idx)] += complex(re, im)
            columns.append(col)
        basis = np.column_stack(columns) if columns else np.zeros((dim, 0), dtype=complex)
        basis.setflags(write=False)
        return cls(n_pairs, tuple(int(s) for s in doc["pair_signs"]), basis)


def tilde_bits(pair_value: int) -> tuple[int, int]:
    """Physical bits of |0~> = |01> or |1~> = |10>."""
    return (0, 1) if pair_value == 0 else (1, 0)


def pair_product_state(values, pair_signs) -> np.ndarray:
    """|v~_1 ... v~_n> including the tilde sign factors."""
    bits = []
    amp = 1.0
    for v, sign in zip(values, pair_signs):
        bits.extend(tilde_bits(v))
        if v == 1:
            amp *= -sign
    out = np.zeros(2 ** len(bits), dtype=complex)
    out[basis_index(bits)] = amp
    return out


def build_code(n_pairs: int, pair_signs=None) -> CodeSpec:
    """Logical basis of the pair-encoded DJC code.

    ``pair_signs[i]`` is sign(J_{2i-1,2i}); the default is all ``-1``,
    which gives the ``+`` branch of the four-qubit code.
    """
    if n_pairs < 2:
        raise ValueError(f"n_pairs must be >= 2, got {n_pairs}")
    if 2 * n_pairs > MAX_QUBITS:
        raise ValueError(f"n_pairs must be <= {MAX_QUBITS // 2}")
    if pair_signs is None:
        pair_signs = (-1,) * n_pairs
    pair_signs = tuple(_sign(s) for s in pair_signs)
    if len(pair_signs) != n_pairs:
        raise ValueError(f"need {n_pairs} pair signs, got {len(pair_signs)}")
    columns = []
    for eps in itertools.product((0, 1), repeat=n_pairs - 1):
        first = pair_product_state((*eps, 0), pair_signs)
        flipped = pair_product_state((*(1 - e for e in eps), 1), pair_signs)
        columns.append((first + flipped) / math.sqrt(2))
    basis = np.column_stack(columns)
    basis.setflags(write=False)
    return CodeSpec(n_pairs, pair_signs, basis)


def encode(code: CodeSpec, logical_amplitudes) -> QState:
    amps = np.asarray(logical_amplitudes, dtype=complex).ravel()
    if amps.size != code.logical_dim:
        raise ValueError(f"expected {code.logical_dim} logical amplitudes, got {amps.size}")
    nrm = np.linalg.norm(amps)
    if abs(nrm - 1) > 1e-10:
        raise ValueError(f"logical amplitudes must be normalized (norm {nrm})")
    return QState(code.logical_basis @ amps)


def decode(code: CodeSpec, state) -> np.ndarray:
    """Logical amplitudes <e_L|state> (projection; no renormalization)."""
    return code.logical_basis.conj().T @ np.asarray(state, dtype=complex)


def auxiliary_code_states(n_pairs: int = 2) -> list[np.ndarray]:
    """The named |2_L>-type state for the four-qubit code: (|0011> + |1100>)/sqrt(2)."""
    if n_pairs != 2:
        raise ValueError("the auxiliary state is only named for the four-qubit code; use reachable_code_space")
    v = np.zeros(16, dtype=complex)
    v[basis_index("0011")] = v[basis_index("1100")] = 1 / math.sqrt(2)
    return [v]


@dataclass(frozen=True)
class QeccCheckResult:
    """Outcome of the known-location QECC condition.

    ``lambdas[i]`` is the common diagonal value for jump operator i+1,
    ``max_offdiag`` the largest |<m|S^dag S|n>| with m != n, and
    ``max_diag_spread`` the largest diagonal disagreement.
    """

    lambdas: tuple[float, ...]
    max_offdiag: float
    max_diag_spread: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_offdiag < self.tol and self.max_diag_spread < self.tol

    def to_dict(self) -> dict:
        return {
            "lambdas": list(self.lambdas),
            "max_offdiag": self.max_offdiag,
            "max_diag_spread": self.max_diag_spread,
            "tol": self.tol,
            "pass": self.passed,
        }


def check_qecc(code, jump_ops=None, extra_states=(), tol: float = ATOL) -> QeccCheckResult:
    """Evaluate <psi_m| S_i^dag S_i |psi_n> = Lambda_i delta_mn.

    ``code`` is a :class:`CodeSpec` or a sequence of state vectors.
    ``jump_ops`` defaults to every single-qubit emission operator.
    """
    if isinstance(code, CodeSpec):
        states = list(code.logical_basis.T)
    else:
        states = [np.asarray(s, dtype=complex).ravel() for s in code]
    states += [np.asarray(s, dtype=complex).ravel() for s in extra_states]
    basis = np.column_stack(states)
    n_qubits = n_qubits_of(basis.shape[0])
    if jump_ops is None:
        jump_ops = [jump_operator(i, n_qubits) for i in range(1, n_qubits + 1)]
    lambdas, offdiag, spread = [], 0.0, 0.0
    for s in jump_ops:
        images = s @ basis
        gram = images.conj().T @ images
        diag = np.real(np.diag(gram))
        off = gram - np.diag(np.diag(gram))
        offdiag = max(offdiag, float(np.abs(off).max()) if off.size else 0.0)
        spread = max(spread, float(diag.max() - diag.min()))
        lambdas.append(float(diag.mean()))
    return QeccCheckResult(tuple(lambdas), offdiag, spread, tol)
