"""Dense density-matrix ground truth for small circuits.

States are full ``2^n x 2^n`` arrays in kron order (qubit 0 is the most
significant index bit). Nothing here is clever on purpose: it exists to be
obviously right, and is capped at ten qubits.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Mapping

import numpy as np

from .circuit import Circuit, Gate
from .exceptions import ResourceLimitError

MAX_QUBITS = 10
TOL_COMMUTATOR = 1e-8

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _check_size(n: int, limit: int = MAX_QUBITS) -> None:
    if n > limit:
        raise ResourceLimitError(f"dense oracle is limited to {limit} qubits, got {n}")


def initial_density(c: Circuit) -> np.ndarray:
    _check_size(c.n_qubits)
    diag = np.ones(1)
    for p0 in c.init:
        p = float(p0)
        diag = np.kron(diag, [p, 1.0 - p])
    return np.diag(diag).astype(complex)


def apply_gate(rho: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """``G rho G^dagger`` with ``G`` padded by identities, via tensor contraction."""
    qs = list(gate.qubits)
    a = len(qs)
    g = gate.matrix.reshape((2,) * (2 * a))
    t = rho.reshape((2,) * (2 * n))
    # rows: contract gate input axes with the row axes of the targets
    t = np.tensordot(g, t, axes=(list(range(a, 2 * a)), qs))
    t = np.moveaxis(t, list(range(a)), qs)
    cols = [n + q for q in qs]
    t = np.tensordot(t, g.conj(), axes=(cols, list(range(a, 2 * a))))
    t = np.moveaxis(t, list(range(2 * n - a, 2 * n)), cols)
    return t.reshape(2**n, 2**n)


def iter_states(c: Circuit) -> Iterator[np.ndarray]:
    """Yield the state before any gate, then after each gate in turn."""
    rho = initial_density(c)
    yield rho
    for gate in c.gates:
        rho = apply_gate(rho, gate, c.n_qubits)
        yield rho


def dense_simulate(c: Circuit) -> list[np.ndarray]:
    """All states ``[rho^0, rho^1, ...]``; ``rho^t`` follows ``t`` gates."""
    return list(iter_states(c))


def final_state(c: Circuit) -> np.ndarray:
    rho = None
    for rho in iter_states(c):
        pass
    return rho


def measurement_distribution(rho: np.ndarray, measured, n: int | None = None) -> dict[str, float]:
    """Marginal outcome distribution on ``measured`` (ascending), keyed by
    bitstrings, every outcome present."""
    dim = rho.shape[0]
    if n is None:
        n = dim.bit_length() - 1
    measured = sorted(measured)
    probs = np.real(np.diag(rho)).reshape((2,) * n)
    drop = tuple(q for q in range(n) if q not in measured)
    marg = probs.sum(axis=drop) if drop else probs
    marg = np.asarray(marg).reshape(-1)
    m = len(measured)
    return {format(i, f"0{m}b") if m else "": float(marg[i]) for i in range(2**m)}


def tvd(p: Mapping[str, float], q: Mapping[str, float]) -> float:
    if set(p) != set(q):
        raise ValueError("distributions are over different outcome spaces")
    return 0.5 * sum(abs(p[h] - q[h]) for h in p)


# ---------------------------------------------------------------------------
# concordance


def qubit_margins(rho: np.ndarray, n: int | None = None) -> np.ndarray:
    """Per-qubit distance from a classical (zero-discord) cut.

    Writing ``rho = sum_r C_r (x) F_r`` around qubit ``k``, the Bloch parts
    ``a_r`` of the ``C_r`` must all be parallel. The three Pauli slices
    ``T_a = 1/2 tr_k((sigma_a (x) I) rho)``, flattened into real rows, have
    singular values whose squares are the eigenvalues of ``sum_r a_r a_r^T``,
    so ``sum_{i<j} s_i^2 s_j^2 = sum_{r<s} |a_r x a_s|^2``. The margin
    ``2 sqrt(...)`` bounds every pairwise commutator ``||[C_r, C_s]||_max``
    from above and is zero exactly when they all vanish. Working from
    singular values rather than the Gram matrix keeps round-off linear.
    """
    dim = rho.shape[0]
    if n is None:
        n = dim.bit_length() - 1
    _check_size(n)
    t = rho.reshape((2,) * (2 * n))
    out = np.zeros(n)
    rest = 2 ** (n - 1)
    for k in range(n):
        tk = np.moveaxis(t, (k, n + k), (0, n)).reshape(2, rest, 2, rest)
        slices = [0.5 * np.einsum("ba,ambn->mn", s, tk).reshape(-1) for s in _PAULI]
        T = np.array(slices)
        X = np.concatenate([T.real, T.imag], axis=1)
        sv = np.zeros(3)
        found = np.linalg.svd(X, compute_uv=False)
        sv[: len(found)] = found
        s1, s2, s3 = sv
        e2 = (s1 * s2) ** 2 + (s1 * s3) ** 2 + (s2 * s3) ** 2
        out[k] = 2.0 * np.sqrt(e2)
    return out


def concordance_margin(rho: np.ndarray, n: int | None = None) -> float:
    return float(np.max(qubit_margins(rho, n))) if rho.shape[0] > 1 else 0.0


def is_concordant(rho: np.ndarray, tol: float = TOL_COMMUTATOR, n: int | None = None) -> bool:
    return concordance_margin(rho, n) <= tol


def _hermitian_basis(dim: int) -> list[np.ndarray]:
    basis = []
    s = 1 / np.sqrt(2)
    for x in range(dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[x, x] = 1
        basis.append(m)
    for x, y in itertools.combinations(range(dim), 2):
        m = np.zeros((dim, dim), dtype=complex)
        m[x, y] = m[y, x] = s
        basis.append(m)
        m = np.zeros((dim, dim), dtype=complex)
        m[x, y] = 1j * s
        m[y, x] = -1j * s
        basis.append(m)
    return basis


def pairwise_commutator_norm(rho: np.ndarray, n: int | None = None, limit: int = 4) -> float:
    """Reference check by literal expansion in a Hermitian operator basis;
    returns the largest ``||[C_r, C_s]||_max`` over qubits and pairs.
    Cost grows like ``16^n``, so this is for cross-checking tiny cases."""
    dim = rho.shape[0]
    if n is None:
        n = dim.bit_length() - 1
    _check_size(n, limit)
    t = rho.reshape((2,) * (2 * n))
    rest = 2 ** (n - 1)
    F = _hermitian_basis(rest)
    worst = 0.0
    for k in range(n):
        tk = np.moveaxis(t, (k, n + k), (0, n)).reshape(2, rest, 2, rest)
        # C_r = tr_rest((I (x) F_r) rho)
        C = [np.einsum("nm,ambn->ab", f, tk) for f in F]
        for a, b in itertools.combinations(C, 2):
            worst = max(worst, float(np.max(np.abs(a @ b - b @ a))))
    return worst


def first_discord_step(c: Circuit, tol: float = TOL_COMMUTATOR):
    """Index (0-based) of the first gate after which the state is not
    concordant, or ``None``. The input state is diagonal, hence concordant."""
    for t, rho in enumerate(iter_states(c)):
        if t == 0:
            continue
        if not is_concordant(rho, tol, c.n_qubits):
            return t - 1
    return None


def oracle_distribution(c: Circuit) -> dict[str, float]:
    return measurement_distribution(final_state(c), c.measured, c.n_qubits)
