"""scikit-learn style front end.

``ConcordantSimulator().fit(circuit)`` converts once; afterwards
``predict_proba`` returns the exact outcome distribution and ``sample``
draws shots. ``DenseOracle`` exposes the dense ground truth through the
same interface so the two can be swapped in comparisons.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from .circuit import Circuit, circuit_from_dict, parse_circuit
from .converter import TOL_EDGE, ConvertedProgram, convert
from .exceptions import CircuitError
from .oracle import TOL_COMMUTATOR, dense_simulate, first_discord_step, is_concordant, measurement_distribution
from .sampler import ENUM_LIMIT, exact_output_distribution, run_shots
from .smallmat import TOL_DEGENERACY, TOL_RANK, TOL_UNITARY


def check_circuit(X, *, tol_unitary: float = TOL_UNITARY) -> Circuit:
    """Accept a ``Circuit``, a document dict, or JSON text."""
    if isinstance(X, Circuit):
        return X
    if isinstance(X, dict):
        return circuit_from_dict(X, tol_unitary=tol_unitary)
    if isinstance(X, (str, bytes)):
        return parse_circuit(X, tol_unitary=tol_unitary)
    raise CircuitError(f"cannot interpret {type(X).__name__} as a circuit")


def check_seed(seed) -> int:
    if seed is None:
        return 0
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def _check_positive(name, value):
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
        raise ValueError(f"{name} must be a positive number, got {value!r}")


def _as_array(dist: dict[str, float]):
    classes = np.array(list(dist))
    return classes, np.array([dist[h] for h in classes])


class ConcordantSimulator(BaseEstimator):
    """Converts a concordant circuit and answers distribution / sampling
    queries from the converted program.

    Fitted attributes: ``circuit_``, ``program_``, ``classes_`` (outcome
    bitstrings in the order used by ``predict_proba``).
    """

    def __init__(self, tol_unitary=TOL_UNITARY, tol_rank=TOL_RANK, tol_degeneracy=TOL_DEGENERACY,
                 tol_edge=TOL_EDGE, enum_limit=ENUM_LIMIT, random_state=0):
        self.tol_unitary = tol_unitary
        self.tol_rank = tol_rank
        self.tol_degeneracy = tol_degeneracy
        self.tol_edge = tol_edge
        self.enum_limit = enum_limit
        self.random_state = random_state

    def _validate_params(self):
        for name in ("tol_unitary", "tol_rank", "tol_degeneracy", "tol_edge"):
            _check_positive(name, getattr(self, name))
        if not isinstance(self.enum_limit, (int, np.integer)) or self.enum_limit < 1:
            raise ValueError("enum_limit must be a positive integer")
        check_seed(self.random_state)

    def fit(self, X, y=None):
        self._validate_params()
        self.circuit_ = check_circuit(X, tol_unitary=self.tol_unitary)
        self.program_: ConvertedProgram = convert(
            self.circuit_, tol_rank=self.tol_rank, tol_degeneracy=self.tol_degeneracy, tol_edge=self.tol_edge
        )
        m = len(self.circuit_.measured)
        self.classes_ = np.array([format(h, f"0{m}b") if m else "" for h in range(2**m)])
        return self

    def transform(self, X=None) -> dict:
        """The converted program as a document."""
        check_is_fitted(self, "program_")
        return self.program_.to_dict()

    def output_distribution(self) -> dict[str, float]:
        check_is_fitted(self, "program_")
        return exact_output_distribution(self.program_, self.enum_limit)

    def predict_proba(self, X=None) -> np.ndarray:
        _, p = _as_array(self.output_distribution())
        return p

    def sample(self, n_shots: int) -> list[str]:
        check_is_fitted(self, "program_")
        if not isinstance(n_shots, (int, np.integer)) or n_shots < 1:
            raise ValueError("n_shots must be a positive integer")
        return run_shots(self.program_, int(n_shots), check_seed(self.random_state))

    def predict(self, X=None, n_shots: int = 1) -> np.ndarray:
        return np.array(self.sample(n_shots))


class DenseOracle(BaseEstimator):
    """Brute-force density-matrix reference for small circuits."""

    def __init__(self, tol_unitary=TOL_UNITARY, tol_commutator=TOL_COMMUTATOR):
        self.tol_unitary = tol_unitary
        self.tol_commutator = tol_commutator

    def fit(self, X, y=None):
        _check_positive("tol_unitary", self.tol_unitary)
        _check_positive("tol_commutator", self.tol_commutator)
        self.circuit_ = check_circuit(X, tol_unitary=self.tol_unitary)
        self.states_ = dense_simulate(self.circuit_)
        m = len(self.circuit_.measured)
        self.classes_ = np.array([format(h, f"0{m}b") if m else "" for h in range(2**m)])
        return self

    def transform(self, X=None) -> np.ndarray:
        check_is_fitted(self, "states_")
        return self.states_[-1]

    def output_distribution(self) -> dict[str, float]:
        check_is_fitted(self, "states_")
        return measurement_distribution(self.states_[-1], self.circuit_.measured, self.circuit_.n_qubits)

    def predict_proba(self, X=None) -> np.ndarray:
        _, p = _as_array(self.output_distribution())
        return p

    def is_concordant(self) -> bool:
        check_is_fitted(self, "states_")
        return all(is_concordant(r, self.tol_commutator, self.circuit_.n_qubits) for r in self.states_)

    def first_discord_step(self):
        check_is_fitted(self, "states_")
        return first_discord_step(self.circuit_, self.tol_commutator)


__all__ = ["ConcordantSimulator", "DenseOracle", "check_circuit", "check_seed", "NotFittedError"]
