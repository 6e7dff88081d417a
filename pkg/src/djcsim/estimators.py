"""scikit-learn style wrappers around the code and the compiler.

The fit / transform split only partly applies: ``fit`` builds the code
(or compiles the circuit) from hyperparameters and ignores the data,
and the data are complex amplitude rows, which sklearn's own
validators reject, so validation is done here.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .code_space import build_code, decode
from .encoded_logic import ControlModel, compile_circuit, logical_circuit_unitary


def check_complex_array(x, n_features: int | None = None, normalized: bool = False, atol: float = 1e-10) -> np.ndarray:
    """2-D complex array, optionally with fixed width and unit-norm rows."""
    arr = np.asarray(x)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array of amplitude rows, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValueError(f"expected numeric amplitudes, got dtype {arr.dtype}")
    arr = arr.astype(complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("amplitudes contain NaN or inf")
    if n_features is not None and arr.shape[1] != n_features:
        raise ValueError(f"expected {n_features} amplitudes per row, got {arr.shape[1]}")
    if normalized:
        norms = np.linalg.norm(arr, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1) > atol)
        if bad.size:
            raise ValueError(f"row {bad[0]} is not normalized (norm {norms[bad[0]]:.6g})")
    return arr


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted; call fit first")


class DJCEncoder(TransformerMixin, BaseEstimator):
    """Encode logical amplitude rows into physical states of a pair code.

    >>> enc = DJCEncoder(n_pairs=2).fit()
    >>> enc.transform([[1, 0]]).shape
    (1, 16)
    """

    def __init__(self, n_pairs: int = 2, pair_signs=None):
        self.n_pairs = n_pairs
        self.pair_signs = pair_signs

    def fit(self, X=None, y=None):
        self.code_ = build_code(self.n_pairs, self.pair_signs)
        self.n_features_in_ = self.code_.logical_dim
        return self

    def transform(self, X):
        _check_fitted(self, "code_")
        amps = check_complex_array(X, self.n_features_in_, normalized=True)
        return amps @ self.code_.logical_basis.T

    def inverse_transform(self, X):
        """Logical amplitudes by projection; leaked weight is dropped, not renormalized."""
        _check_fitted(self, "code_")
        states = check_complex_array(X, self.code_.logical_basis.shape[0])
        return np.stack([decode(self.code_, s) for s in states])


class EncodedCircuitCompiler(TransformerMixin, BaseEstimator):
    """Compile a logical circuit once, then apply it to encoded states.

    ``fit(circuit)`` takes a list of LogicalGate (or their dicts);
    ``transform`` maps physical state rows through the schedule and
    ``score`` returns the mean logical fidelity against the ideal circuit.
    """

    def __init__(self, n_pairs: int = 2, pair_signs=None, model: str = "XY"):
        self.n_pairs = n_pairs
        self.pair_signs = pair_signs
        self.model = model

    def fit(self, X, y=None):
        self.code_ = build_code(self.n_pairs, self.pair_signs)
        self.schedule_ = compile_circuit(list(X), self.code_, ControlModel(self.model))
        self.unitary_ = self.schedule_.unitary(self.code_.n_qubits)
        self.logical_unitary_ = logical_circuit_unitary(list(X), self.code_.n_logical)
        self.n_features_in_ = self.unitary_.shape[0]
        return self

    def transform(self, X):
        _check_fitted(self, "unitary_")
        states = check_complex_array(X, self.n_features_in_)
        return states @ self.unitary_.T

    def score(self, X, y=None):
        """Mean |<E U_L a | U E a>|^2 over logical amplitude rows ``X``."""
        _check_fitted(self, "unitary_")
        amps = check_complex_array(X, self.code_.logical_dim, normalized=True)
        basis = self.code_.logical_basis
        got = (amps @ basis.T) @ self.unitary_.T
        want = (amps @ self.logical_unitary_.T) @ basis.T
        return float(np.mean(np.abs(np.sum(want.conj() * got, axis=1)) ** 2))
