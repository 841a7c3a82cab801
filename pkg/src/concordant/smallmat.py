"""Dense complex linear algebra on 2x2 and 4x4 matrices.

Everything here is deterministic: returned vectors are phase-canonicalized
(largest-magnitude entry made real positive, ties to the lowest index) so
that the converter's output is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_UNITARY = 1e-9
TOL_RANK = 1e-8
TOL_DEGENERACY = 1e-7

_TIE = 1e-12


def canonical_phase(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    top = mags.max()
    if top == 0:
        return v.copy()
    i = int(np.flatnonzero(mags >= top - _TIE)[0])
    return v * (np.conj(v[i]) / mags[i])


def max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def unitarity_error(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    return max_abs(m.conj().T @ m - np.eye(m.shape[0]))


def is_unitary(m: np.ndarray, tol: float = TOL_UNITARY) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and unitarity_error(m) <= tol


def is_hermitian(m: np.ndarray, tol: float = 1e-9) -> bool:
    return max_abs(m - m.conj().T) <= tol


# ---------------------------------------------------------------------------
# eigensolvers


def _eig2(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, d = h[0, 0].real, h[1, 1].real
    b = h[0, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    r = np.hypot(half, abs(b))
    w = np.array([mean - r, mean + r])
    if abs(b) <= 1e-300:
        order = [0, 1] if a <= d else [1, 0]
        return w, np.eye(2, dtype=complex)[:, order]
    vecs = []
    for lam in w:
        c1 = np.array([b, lam - a], dtype=complex)
        c2 = np.array([lam - d, np.conj(b)], dtype=complex)
        c = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
        vecs.append(c / np.linalg.norm(c))
    return w, np.column_stack(vecs)


def _jacobi(h: np.ndarray, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(max_abs(a), 1e-300)
    for _ in range(max_sweeps):
        off = max(abs(a[p, q]) for p in range(n) for q in range(p + 1, n))
        if off <= 1e-16 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # J = D R with D = diag(1, .., conj(phase) at q, ..)
                j = np.eye(n, dtype=complex)
                j[p, p] = c
                j[p, q] = s
                j[q, p] = -s * np.conj(phase)
                j[q, q] = c * np.conj(phase)
                a = j.conj().T @ a @ j
                v = v @ j
    return np.real(np.diag(a)).copy(), v


def eig_hermitian(h: np.ndarray, tol_degeneracy: float = TOL_DEGENERACY, tol: float = 1e-9):
    """Eigendecomposition of a Hermitian 2x2 or 4x4 matrix.

    Returns ``(w, V, groups)``: ascending eigenvalues, orthonormal
    eigenvectors as columns, and index groups of eigenvalues lying within
    ``tol_degeneracy`` of a neighbour.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape not in ((2, 2), (4, 4)):
        raise ValueError(f"expected a 2x2 or 4x4 matrix, got {h.shape}")
    if not is_hermitian(h, tol):
        raise ValueError("matrix is not Hermitian")
    if tol_degeneracy <= 0:
        raise ValueError("tol_degeneracy must be positive")
    h = 0.5 * (h + h.conj().T)
    w, v = _eig2(h) if h.shape == (2, 2) else _jacobi(h)
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = np.column_stack([canonical_phase(v[:, i]) for i in order])
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] <= tol_degeneracy:
            groups[-1].append(i)
        else:
            groups.append([i])
    return w, v, groups


# ---------------------------------------------------------------------------
# product structure


@dataclass(frozen=True)
class ProductVector4:
    """``left (x) right == exp(i * phase) * source`` for unit 2-vectors."""

    left: np.ndarray
    right: np.ndarray
    phase: float = 0.0

    @property
    def vector(self) -> np.ndarray:
        return np.kron(self.left, self.right)


def factor_product_vector(v: np.ndarray, tol_rank: float = TOL_RANK) -> ProductVector4 | None:
    """Split a unit 4-vector into two qubit factors, or return ``None`` when
    the 2x2 reshape has ``|det| > tol_rank``."""
    v = np.asarray(v, dtype=complex).reshape(4)
    m = v.reshape(2, 2)
    if abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) > tol_rank:
        return None
    norms = np.linalg.norm(m, axis=1)
    row = m[int(np.argmax(norms))]
    right = canonical_phase(row / np.linalg.norm(row))
    left = m @ right.conj()
    left = canonical_phase(left / np.linalg.norm(left))
    overlap = np.vdot(v, np.kron(left, right))
    return ProductVector4(left, right, float(np.angle(overlap)))


@dataclass(frozen=True)
class SubspaceProducts:
    """Product vectors found in a two-dimensional subspace.

    ``vectors`` holds the distinct product directions (at most two) unless
    ``continuum`` is set, in which case every vector of the span is a
    product and ``vectors`` is the canonical orthogonal pair; ``fixed_side``
    then says which factor ("left" or "right") is common to the span.
    """

    vectors: tuple[ProductVector4, ...]
    continuum: bool = False
    fixed_side: str | None = None

    @property
    def orthogonal_pair(self) -> bool:
        if len(self.vectors) != 2:
            return False
        a, b = self.vectors
        return abs(np.vdot(a.vector, b.vector)) ** 2 <= TOL_RANK


def _mixed_det(a: np.ndarray, b: np.ndarray) -> complex:
    return a[0, 0] * b[1, 1] + a[1, 1] * b[0, 0] - a[0, 1] * b[1, 0] - a[1, 0] * b[0, 1]


def _quadratic_roots(p: complex, q: complex, r: complex) -> list[complex]:
    disc = np.sqrt(complex(q * q - 4 * p * r))
    s1 = q + disc
    s2 = q - disc
    big = s1 if abs(s1) >= abs(s2) else s2
    if big == 0:
        return [0j, 0j]
    x1 = -big / (2 * p)
    x2 = -2 * r / big
    return [x1, x2]


def product_pair_in_subspace(u: np.ndarray, v: np.ndarray, tol: float = TOL_RANK) -> SubspaceProducts:
    """Find the product vectors ``a u + b v`` (up to scale) in span{u, v}.

    Product vectors satisfy ``det(a U + b V) = 0`` for the 2x2 reshapes, a
    binary quadratic ``A a^2 + B a b + C b^2 = 0``.
    """
    u = np.asarray(u, dtype=complex).reshape(4)
    v = np.asarray(v, dtype=complex).reshape(4)
    gram = np.array([[np.vdot(u, u), np.vdot(u, v)], [np.vdot(v, u), np.vdot(v, v)]])
    if max_abs(gram - np.eye(2)) > 1e-7:
        raise ValueError("u and v must be orthonormal")
    um, vm = u.reshape(2, 2), v.reshape(2, 2)
    A = um[0, 0] * um[1, 1] - um[0, 1] * um[1, 0]
    C = vm[0, 0] * vm[1, 1] - vm[0, 1] * vm[1, 0]
    B = _mixed_det(um, vm)

    if max(abs(A), abs(B), abs(C)) <= tol:
        fu = factor_product_vector(u, 10 * tol)
        fv = factor_product_vector(v, 10 * tol)
        if fu is None or fv is None:  # pragma: no cover - guarded by the quadratic
            return SubspaceProducts(())
        basis = np.eye(2, dtype=complex)
        if abs(np.vdot(fu.left, fv.left)) ** 2 >= 0.5:
            alpha = fu.left
            pair = tuple(ProductVector4(alpha, basis[i]) for i in range(2))
            return SubspaceProducts(pair, continuum=True, fixed_side="left")
        beta = fu.right
        pair = tuple(ProductVector4(basis[i], beta) for i in range(2))
        return SubspaceProducts(pair, continuum=True, fixed_side="right")

    # projective roots (a : b)
    if max(abs(A), abs(C)) <= tol:
        roots = [(1.0, 0.0), (0.0, 1.0)]
    elif abs(A) >= abs(C):
        roots = [(t, 1.0) for t in _quadratic_roots(A, B, C)]
    else:
        roots = [(1.0, s) for s in _quadratic_roots(C, B, A)]

    found: list[ProductVector4] = []
    for a, b in roots:
        w = a * u + b * v
        w = w / np.linalg.norm(w)
        pv = factor_product_vector(w, max(tol, 1e-6))
        if pv is None:
            continue
        if any(abs(np.vdot(x.vector, pv.vector)) ** 2 >= 1 - 1e-7 for x in found):
            continue
        found.append(pv)
    return SubspaceProducts(tuple(found))


def complete_local_basis(w: np.ndarray) -> np.ndarray:
    """2x2 unitary whose first column is ``w``; the second column is its
    orthogonal complement, phase-canonicalized."""
    w = np.asarray(w, dtype=complex).reshape(2)
    if abs(np.linalg.norm(w) - 1) > 1e-9:
        raise ValueError("w must be a unit vector")
    perp = canonical_phase(np.array([-np.conj(w[1]), np.conj(w[0])]))
    return np.column_stack([w, perp])
