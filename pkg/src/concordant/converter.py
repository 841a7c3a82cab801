"""Convert a concordant circuit into a classical permutation plus a product
eigenbasis change.

The converter keeps a frame ``U = (x)_k U_k`` in which the current state is
diagonal, together with an affine map ``P`` sending initial eigenstate
labels to current ones. One-qubit gates only rotate the frame. For a
two-qubit gate ``G`` on ``(k, l)``:

1. diagnose which local labels are degenerate on the pair (exactly, through
   ``P`` and the rational input state);
2. find local rotations ``V_k, V_l`` that keep the post-gate state diagonal,
   given that degeneracy;
3. read off the induced two-bit permutation from the overlap graph between
   old and new eigenvectors, and fold it into ``P``.

If step 2 or 3 is impossible the state after the gate is not concordant and
:class:`~concordant.exceptions.DiscordError` is raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .affine import LABELS, TRANSPOSITIONS, AffineMap, ProductState, canonicalize_state, pair_degeneracies, to_bitstring
from .circuit import Circuit
from .exceptions import DiscordError, InconsistencyError
from .smallmat import (
    TOL_DEGENERACY,
    TOL_RANK,
    canonical_phase,
    complete_local_basis,
    factor_product_vector,
    max_abs,
    product_pair_in_subspace,
)

TOL_EDGE = 1e-9

_I2 = np.eye(2, dtype=complex)
_X2 = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class DegeneracyClasses:
    """Partition of the four local labels, each class sorted, classes
    ordered by their smallest label."""

    classes: tuple[tuple[int, ...], ...]

    @property
    def pattern(self) -> tuple[int, ...]:
        return tuple(sorted((len(c) for c in self.classes), reverse=True))

    def class_of(self, label: int) -> int:
        for i, c in enumerate(self.classes):
            if label in c:
                return i
        raise KeyError(label)

    def as_strings(self) -> list[list[str]]:
        return [[LABELS[i] for i in c] for c in self.classes]


def classes_from_flags(flags) -> DegeneracyClasses:
    """Partition generated by the marked transpositions.

    ``flags`` lines up with ``TRANSPOSITIONS``. The marked relation must
    already be transitive; anything else means the exact test is broken.
    """
    parent = list(range(4))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    marked = set()
    for (u, v), f in zip(TRANSPOSITIONS, flags):
        if f:
            marked.add((u, v))
            parent[find(v)] = find(u)
    groups: dict[int, list[int]] = {}
    for x in range(4):
        groups.setdefault(find(x), []).append(x)
    classes = tuple(sorted((tuple(sorted(g)) for g in groups.values()), key=lambda c: c[0]))
    for c in classes:
        for i, u in enumerate(c):
            for v in c[i + 1:]:
                if (u, v) not in marked:
                    raise InconsistencyError(f"degeneracy relation not transitive: {u} ~ {v} implied but not marked")
    return DegeneracyClasses(classes)


def diagnose_degeneracy(P: AffineMap, rho: ProductState, qubits: tuple[int, int]) -> DegeneracyClasses:
    k, l = qubits
    return classes_from_flags(pair_degeneracies(P, rho, k, l))


def class_marker_matrix(W: np.ndarray, classes: DegeneracyClasses) -> np.ndarray:
    """``H = sum_c (1 + c) W Pi_c W^dagger`` with coordinate projectors ``Pi_c``."""
    H = np.zeros((4, 4), dtype=complex)
    for c, members in enumerate(classes.classes):
        cols = W[:, list(members)]
        H += (1 + c) * (cols @ cols.conj().T)
    return H


def _local_basis(directions, tol, gate_index):
    if not directions:
        return _I2.copy()
    d0 = canonical_phase(directions[0])
    for d in directions[1:]:
        ov = abs(np.vdot(d0, d)) ** 2
        if tol < ov < 1 - tol:
            raise DiscordError(gate_index, "inconsistent-local-basis",
                               f"local factors overlap {ov:.3g}, neither parallel nor orthogonal")
    basis = complete_local_basis(d0)
    if abs(basis[0, 1]) > abs(basis[0, 0]):
        basis = basis[:, ::-1].copy()
    return basis


def solve_new_basis(W: np.ndarray, classes: DegeneracyClasses, *, tol_rank: float = TOL_RANK,
                    tol_degeneracy: float = TOL_DEGENERACY, gate_index: int | None = None):
    """Local rotations ``(V_k, V_l)`` with ``(V_k (x) V_l)^dagger H (V_k (x) V_l)``
    diagonal, where ``H`` marks each class subspace ``W span(c)``.

    ``W`` is the gate written in the current frame. Every new basis vector
    has to lie inside one class subspace; singleton classes therefore force
    product eigenvectors, and a pair of two-dimensional classes forces an
    orthogonal product pair inside one of them.
    """
    W = np.asarray(W, dtype=complex)
    pattern = classes.pattern
    left, right = [], []
    for members in classes.classes:
        if len(members) == 1:
            pv = factor_product_vector(W[:, members[0]], tol_rank)
            if pv is None:
                raise DiscordError(gate_index, "no-product-eigenvector",
                                   f"image of label {LABELS[members[0]]} is entangled")
            left.append(pv.left)
            right.append(pv.right)
    if pattern == (2, 2):
        a, b = classes.classes[0]
        found = product_pair_in_subspace(W[:, a], W[:, b], tol_rank)
        if found.continuum:
            if found.fixed_side == "left":
                left.append(found.vectors[0].left)
            else:
                right.append(found.vectors[0].right)
        elif found.orthogonal_pair:
            for pv in found.vectors:
                left.append(pv.left)
                right.append(pv.right)
        else:
            raise DiscordError(gate_index, "subspace-has-no-product-pair",
                               f"{len(found.vectors)} product direction(s), no orthogonal pair")
    Vk = _local_basis(left, tol_degeneracy, gate_index)
    Vl = _local_basis(right, tol_degeneracy, gate_index)
    V = np.kron(Vk, Vl)
    D = V.conj().T @ class_marker_matrix(W, classes) @ V
    off = max_abs(D - np.diag(np.diag(D)))
    if off > tol_degeneracy:
        raise DiscordError(gate_index, "inconsistent-local-basis", f"residual off-diagonal {off:.3g}")
    return Vk, Vl


def overlap_weights(W: np.ndarray, Vk: np.ndarray, Vl: np.ndarray) -> np.ndarray:
    """``O[j, i] = |<j| (V_k (x) V_l)^dagger W |i>|^2``."""
    return np.abs(np.kron(Vk, Vl).conj().T @ W) ** 2


def extract_permutation(W: np.ndarray, Vk: np.ndarray, Vl: np.ndarray, classes: DegeneracyClasses | None = None,
                        *, tol_edge: float = TOL_EDGE, gate_index: int | None = None) -> tuple[int, ...]:
    """Two-bit permutation old label -> new label read from the overlap graph.

    Old and new labels in one connected component are matched in ascending
    order. ``classes`` is accepted for symmetry with the solver and used only
    to sanity-check that no component straddles two classes.
    """
    O = overlap_weights(W, Vk, Vl)
    edges = O > tol_edge
    seen_old, seen_new = set(), set()
    perm = [None] * 4
    for start in range(4):
        if start in seen_old:
            continue
        olds, news = {start}, set()
        frontier = [("o", start)]
        while frontier:
            side, x = frontier.pop()
            if side == "o":
                for j in np.flatnonzero(edges[:, x]).tolist():
                    if j not in news:
                        news.add(j)
                        frontier.append(("n", j))
            else:
                for i in np.flatnonzero(edges[x, :]).tolist():
                    if i not in olds:
                        olds.add(i)
                        frontier.append(("o", i))
        seen_old |= olds
        seen_new |= news
        if len(olds) != len(news):
            raise DiscordError(gate_index, "component-count-mismatch",
                               f"component has {len(olds)} old and {len(news)} new labels")
        if classes is not None and len({classes.class_of(i) for i in olds}) > 1:
            raise InconsistencyError(f"gate {gate_index}: overlap component spans several degeneracy classes")
        for i, j in zip(sorted(olds), sorted(news)):
            perm[i] = j
    return tuple(perm)


# ---------------------------------------------------------------------------


def _mat_to_doc(m):
    return [[float(z.real), float(z.imag)] for z in np.asarray(m).reshape(-1)]


def _mat_from_doc(entries, d=2):
    return np.array([complex(a, b) for a, b in entries], dtype=complex).reshape(d, d)


@dataclass
class AuditRecord:
    gate_index: int
    qubits: tuple[int, int]
    classes: DegeneracyClasses
    perm: tuple[int, ...]
    v_k: np.ndarray
    v_l: np.ndarray

    @property
    def pattern(self) -> tuple[int, ...]:
        return self.classes.pattern

    def to_dict(self) -> dict:
        return {
            "t": self.gate_index,
            "q": list(self.qubits),
            "classes": self.classes.as_strings(),
            "R": {LABELS[i]: LABELS[j] for i, j in enumerate(self.perm)},
            "V": [_mat_to_doc(self.v_k), _mat_to_doc(self.v_l)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditRecord":
        classes = DegeneracyClasses(tuple(tuple(LABELS.index(s) for s in c) for c in d["classes"]))
        perm = tuple(LABELS.index(d["R"][s]) for s in LABELS)
        vk, vl = (_mat_from_doc(m) for m in d["V"])
        return cls(int(d["t"]), tuple(d["q"]), classes, perm, vk, vl)


@dataclass
class ConvertedProgram:
    """Output of :func:`convert`: the accumulated label map ``P``, the final
    local bases ``U_final`` (flips included), and a per-gate audit log."""

    P: AffineMap
    U_final: list[np.ndarray]
    flips: int
    state: ProductState
    measured: tuple[int, ...]
    audit: list[AuditRecord] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.P.n

    def patterns(self) -> set[tuple[int, ...]]:
        return {rec.pattern for rec in self.audit}

    def to_dict(self) -> dict:
        n = self.n
        return {
            "format": "concordant-program",
            "version": __version__,
            "qubits": n,
            "init": [[[p0.numerator, p0.denominator], [(1 - p0).numerator, (1 - p0).denominator]]
                     for p0 in self.physical_p0()],
            "measure": list(self.measured),
            "A": [format(r, "x") for r in self.P.rows],
            "b": format(self.P.offset, "x"),
            "flips": to_bitstring(self.flips, n),
            "U": [_mat_to_doc(u) for u in self.U_final],
            "audit": [rec.to_dict() for rec in self.audit],
        }

    def physical_p0(self):
        out = []
        for k, (p0, p1) in enumerate(self.state.probs):
            out.append(p1 if (self.flips >> k) & 1 else p0)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ConvertedProgram":
        from fractions import Fraction

        n = int(d["qubits"])
        rows = [int(r, 16) for r in d["A"]]
        if len(rows) != n:
            raise ValueError("program has the wrong number of rows")
        P = AffineMap.from_matrix(rows, int(d["b"], 16))
        pairs = [(Fraction(r[0][0], r[0][1]), Fraction(r[1][0], r[1][1])) for r in d["init"]]
        state, flips = canonicalize_state(pairs)
        if to_bitstring(flips, n) != d["flips"]:
            raise ValueError("flip record does not match the initial state")
        U = [_mat_from_doc(m) for m in d["U"]]
        audit = [AuditRecord.from_dict(r) for r in d.get("audit", [])]
        return cls(P, U, flips, state, tuple(d["measure"]), audit)


def initial_frame(flips: int, n: int) -> list[np.ndarray]:
    return [(_X2 if (flips >> k) & 1 else _I2).copy() for k in range(n)]


def convert(circuit: Circuit, *, tol_rank: float = TOL_RANK, tol_degeneracy: float = TOL_DEGENERACY,
            tol_edge: float = TOL_EDGE) -> ConvertedProgram:
    """Run the conversion; raises :class:`DiscordError` at the first gate
    that cannot be absorbed."""
    state, flips = canonicalize_state(circuit.init_pairs)
    n = circuit.n_qubits
    U = initial_frame(flips, n)
    P = AffineMap.identity(n)
    audit = []
    for t, gate in enumerate(circuit.gates):
        if gate.arity == 1:
            k = gate.qubits[0]
            U[k] = gate.matrix @ U[k]
            continue
        k, l = gate.qubits
        frame = np.kron(U[k], U[l])
        W = frame.conj().T @ gate.matrix @ frame
        classes = diagnose_degeneracy(P, state, (k, l))
        Vk, Vl = solve_new_basis(W, classes, tol_rank=tol_rank, tol_degeneracy=tol_degeneracy, gate_index=t)
        perm = extract_permutation(W, Vk, Vl, classes, tol_edge=tol_edge, gate_index=t)
        P.fold(perm, k, l)
        U[k] = U[k] @ Vk
        U[l] = U[l] @ Vl
        audit.append(AuditRecord(t, (k, l), classes, perm, Vk, Vl))
    return ConvertedProgram(P, U, flips, state, circuit.measured, audit)
