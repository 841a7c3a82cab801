"""Circuit data model and the JSON interchange document.

A document looks like::

    {"qubits": 2,
     "init": [[[1, 2], [1, 2]],         # (p_k(0), p_k(1)) per qubit
              [[2, 3], [1, 3]]],
     "gates": [{"q": 0, "m": [[re, im], ...]},          # 4 entries
               {"q": [0, 1], "gate": "CNOT"}],           # alias sugar
     "measure": [0, 1]}                                  # optional

Two-qubit matrices are row-major in ``kron(q_k, q_l)`` order for ``q = [k, l]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .exceptions import CircuitError
from .smallmat import TOL_UNITARY, unitarity_error

_S = 1 / np.sqrt(2)

ALIASES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": np.array([[_S, _S], [_S, -_S]], dtype=complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}

_SWAP = ALIASES["SWAP"]


@dataclass(frozen=True, eq=False)
class Gate:
    qubits: tuple[int, ...]
    matrix: np.ndarray

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        return self.qubits == other.qubits and np.array_equal(self.matrix, other.matrix)

    def __repr__(self):
        return f"Gate(qubits={self.qubits})"


@dataclass(frozen=True)
class Circuit:
    """A conventional computation: diagonal product input, gates, terminal
    single-qubit measurements. ``init[k]`` is ``p_k(0)``."""

    n_qubits: int
    init: tuple[Fraction, ...]
    gates: tuple[Gate, ...] = ()
    measured: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        if self.measured is None:
            object.__setattr__(self, "measured", tuple(range(self.n_qubits)))

    @property
    def init_pairs(self) -> list[tuple[Fraction, Fraction]]:
        return [(p, 1 - p) for p in self.init]

    @property
    def n_two_qubit(self) -> int:
        return sum(1 for g in self.gates if g.arity == 2)


def make_gate(qubits, matrix, n_qubits: int, *, index=None, tol_unitary: float = TOL_UNITARY) -> Gate:
    """Validate one gate; two-qubit targets are reordered to ascending."""
    if isinstance(qubits, (int, np.integer)):
        qubits = (int(qubits),)
    qubits = tuple(int(q) for q in qubits)
    m = np.asarray(matrix, dtype=complex)
    if len(qubits) not in (1, 2):
        raise CircuitError(f"gate {index}: gates act on one or two qubits", index=index)
    if any(q < 0 or q >= n_qubits for q in qubits):
        raise CircuitError(f"gate {index}: target out of range for {n_qubits} qubits", index=index)
    if len(set(qubits)) != len(qubits):
        raise CircuitError(f"gate {index}: duplicate targets {qubits}", index=index)
    dim = 2 ** len(qubits)
    if m.shape != (dim, dim):
        raise CircuitError(f"gate {index}: expected a {dim}x{dim} matrix, got shape {m.shape}", index=index)
    if not np.all(np.isfinite(m)):
        raise CircuitError(f"gate {index}: non-finite matrix entry", index=index)
    err = unitarity_error(m)
    if err > tol_unitary:
        raise CircuitError(f"gate {index}: matrix is not unitary (error {err:.3g})", index=index)
    if len(qubits) == 2 and qubits[0] > qubits[1]:
        qubits = (qubits[1], qubits[0])
        m = _SWAP @ m @ _SWAP
    return Gate(qubits, m)


def make_circuit(n_qubits, init, gates=(), measured=None, *, tol_unitary: float = TOL_UNITARY) -> Circuit:
    """Build a validated circuit.

    ``init`` holds ``p_k(0)`` per qubit (Fraction-compatible values, or
    ``[num, den]`` pairs); ``gates`` holds ``Gate`` objects or
    ``(qubits, matrix)`` pairs.
    """
    if not isinstance(n_qubits, (int, np.integer)) or isinstance(n_qubits, bool) or n_qubits < 1:
        raise CircuitError("qubit count must be a positive integer", field="qubits")
    n = int(n_qubits)
    init = list(init)
    if n == 1 and len(init) == 2 and _is_row(init):
        init = [init]
    if len(init) != n:
        raise CircuitError(f"init has {len(init)} rows for {n} qubits", field="init")
    probs = []
    for k, p in enumerate(init):
        probs.append(_parse_probability(p, k))
    built = []
    for t, g in enumerate(gates):
        if isinstance(g, Gate):
            g = (g.qubits, g.matrix)
        built.append(make_gate(g[0], g[1], n, index=t, tol_unitary=tol_unitary))
    if measured is None:
        measured = range(n)
    meas = []
    for i, q in enumerate(measured):
        if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or not 0 <= q < n:
            raise CircuitError(f"measure[{i}]: qubit {q!r} out of range", index=i, field="measure")
        meas.append(int(q))
    if len(set(meas)) != len(meas):
        raise CircuitError("measure: duplicate qubit", field="measure")
    return Circuit(n, tuple(probs), tuple(built), tuple(sorted(meas)))


def _exact(x, k) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise ValueError
    if isinstance(x, (list, tuple)):
        if len(x) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in x) or x[1] == 0:
            raise ValueError
        return Fraction(x[0], x[1])
    return Fraction(x)


def _is_row(p) -> bool:
    """``[p0, p1]`` with each entry exact; plain integer pairs count only
    when they are a valid row (``[1, 0]`` or ``[0, 1]``)."""
    if not isinstance(p, (list, tuple)) or len(p) != 2:
        return False
    if all(isinstance(x, (list, tuple)) for x in p):
        return True
    return all(isinstance(x, int) and not isinstance(x, bool) for x in p) and p[0] + p[1] == 1 and min(p) >= 0


def _parse_probability(p, k) -> Fraction:
    """``p_k(0)`` from a row ``[p0, p1]``, a ``[num, den]`` pair, or a
    Fraction-compatible scalar. Floats are rejected."""
    try:
        if _is_row(p):
            p0, p1 = _exact(p[0], k), _exact(p[1], k)
        else:
            p0, p1 = _exact(p, k), None
    except (ValueError, TypeError, ZeroDivisionError):
        raise CircuitError(f"init[{k}]: expected [[num, den], [num, den]], got {p!r}", index=k, field="init") from None
    if p1 is not None and (p0 + p1 != 1 or p1 < 0):
        raise CircuitError(f"init[{k}]: bad probability row {p0}, {p1} (must be nonnegative and sum to 1)",
                           index=k, field="init")
    val = p0
    if not 0 <= val <= 1:
        raise CircuitError(f"init[{k}]: probability {val} outside [0, 1]", index=k, field="init")
    return val


# ---------------------------------------------------------------------------
# documents


def _matrix_from_doc(m, t):
    if isinstance(m, str):
        try:
            return ALIASES[m.upper()]
        except KeyError:
            raise CircuitError(f"gate {t}: unknown gate alias {m!r}", index=t) from None
    if not isinstance(m, list) or len(m) not in (4, 16):
        raise CircuitError(f"gate {t}: 'm' must list 4 or 16 [re, im] pairs", index=t)
    vals = []
    for e in m:
        if (
            not isinstance(e, (list, tuple))
            or len(e) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in e)
        ):
            raise CircuitError(f"gate {t}: matrix entries must be [re, im] pairs", index=t)
        vals.append(complex(e[0], e[1]))
    d = 2 if len(vals) == 4 else 4
    return np.array(vals, dtype=complex).reshape(d, d)


def circuit_from_dict(doc: dict, *, tol_unitary: float = TOL_UNITARY) -> Circuit:
    if not isinstance(doc, dict):
        raise CircuitError("circuit document must be an object")
    for key in ("qubits", "init"):
        if key not in doc:
            raise CircuitError(f"missing field {key!r}", field=key)
    n = doc["qubits"]
    if not isinstance(doc["init"], list):
        raise CircuitError("'init' must be an array", field="init")
    gates_doc = doc.get("gates", [])
    if not isinstance(gates_doc, list):
        raise CircuitError("'gates' must be an array", field="gates")
    gates = []
    for t, g in enumerate(gates_doc):
        if not isinstance(g, dict) or "q" not in g:
            raise CircuitError(f"gate {t}: expected an object with 'q'", index=t)
        q = g["q"]
        if isinstance(q, bool) or not (isinstance(q, int) or (isinstance(q, list) and all(isinstance(x, int) for x in q))):
            raise CircuitError(f"gate {t}: 'q' must be an index or [k, l]", index=t)
        if "m" in g:
            m = _matrix_from_doc(g["m"], t)
        elif "gate" in g:
            m = _matrix_from_doc(str(g["gate"]), t)
        else:
            raise CircuitError(f"gate {t}: needs 'm' or 'gate'", index=t)
        gates.append((q, m))
    measured = doc.get("measure")
    if measured is not None and not isinstance(measured, list):
        raise CircuitError("'measure' must be an array", field="measure")
    return make_circuit(n, doc["init"], gates, measured, tol_unitary=tol_unitary)


def parse_circuit(text: str | bytes, *, tol_unitary: float = TOL_UNITARY) -> Circuit:
    """Parse and validate a circuit document."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                           line=exc.lineno, column=exc.colno) from None
    return circuit_from_dict(doc, tol_unitary=tol_unitary)


def circuit_to_dict(c: Circuit) -> dict[str, Any]:
    gates = []
    for g in c.gates:
        q: Any = g.qubits[0] if g.arity == 1 else list(g.qubits)
        m = [[float(z.real), float(z.imag)] for z in g.matrix.reshape(-1)]
        gates.append({"q": q, "m": m})
    return {
        "qubits": c.n_qubits,
        "init": [[[p.numerator, p.denominator], [(1 - p).numerator, (1 - p).denominator]] for p in c.init],
        "gates": gates,
        "measure": list(c.measured),
    }


def serialize_circuit(c: Circuit, indent: int | None = None) -> str:
    return json.dumps(circuit_to_dict(c), indent=indent)


def gate_on(name_or_matrix, qubits: Sequence[int] | int) -> tuple:
    """Convenience for building gate lists: ``gate_on("CNOT", (0, 1))``."""
    m = ALIASES[name_or_matrix.upper()] if isinstance(name_or_matrix, str) else name_or_matrix
    return (qubits, m)
