"""Affine maps on GF(2)^n and exact commutation tests against product states.

Bit vectors are plain Python ints: bit ``k`` holds the standard-basis state
of qubit ``k``. Rows of the forward matrix and columns of the inverse matrix
are stored as ints too, so folding a two-bit permutation touches O(1) words
per row and the per-gate cost is linear in ``n / wordsize``.

A two-qubit local label is ``2 * x_k + x_l`` for the ordered pair ``(k, l)``,
matching the row order of a 4x4 gate matrix written as ``kron(q_k, q_l)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .exceptions import InvalidTargetError, ResourceLimitError, StateError

LABELS = ("00", "01", "10", "11")

# The six transpositions of the four local labels.
TRANSPOSITIONS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

BRUTE_FORCE_LIMIT = 20


# ---------------------------------------------------------------------------
# bit vector helpers


def bits_to_int(bits: Iterable[int]) -> int:
    v = 0
    for k, b in enumerate(bits):
        if b:
            v |= 1 << k
    return v


def int_to_bits(v: int, n: int) -> list[int]:
    return [(v >> k) & 1 for k in range(n)]


def to_bitstring(v: int, n: int) -> str:
    """Qubit 0 first: ``to_bitstring(0b01, 2) == "10"``."""
    return "".join("1" if (v >> k) & 1 else "0" for k in range(n))


def from_bitstring(s: str) -> int:
    if any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")
    return bits_to_int(c == "1" for c in s)


def bit_array(v: int, n: int) -> np.ndarray:
    """Unpack the low ``n`` bits of ``v`` into a boolean array."""
    raw = v.to_bytes(max(1, (n + 7) // 8), "little")
    return np.unpackbits(np.frombuffer(raw, np.uint8), count=n, bitorder="little").astype(bool)


def perm_to_affine(perm: Sequence[int]) -> tuple[tuple[tuple[int, int], tuple[int, int]], tuple[int, int]]:
    """Write a permutation of the four two-bit labels as ``y -> E y + f``.

    Every element of S4 is affine on two bits, so this never fails for a
    genuine bijection. Returns ``(E, f)`` with ``E[row][col]`` indexed by
    (k, l) and ``f = (f_k, f_l)``.
    """
    if sorted(perm) != [0, 1, 2, 3]:
        raise ValueError(f"not a permutation of the four labels: {perm!r}")
    f = perm[0]
    ck = perm[2] ^ f
    cl = perm[1] ^ f
    if perm[3] != ck ^ cl ^ f:
        raise ValueError("two-bit permutation is not affine")  # unreachable for bijections
    E = ((ck >> 1, cl >> 1), (ck & 1, cl & 1))
    return E, (f >> 1, f & 1)


def _inverse_2x2(E):
    (a, b), (c, d) = E
    if (a & d) ^ (b & c) != 1:
        raise ValueError("singular 2x2 matrix over GF(2)")
    return ((d, b), (c, a))


def _check_pair(n: int, k: int, l: int) -> None:
    if k == l or not (0 <= k < n) or not (0 <= l < n):
        raise InvalidTargetError(f"invalid qubit pair ({k}, {l}) for n={n}")


def transposition_perm(u: int, v: int) -> tuple[int, int, int, int]:
    p = [0, 1, 2, 3]
    p[u], p[v] = v, u
    return tuple(p)


# ---------------------------------------------------------------------------
# affine maps


class AffineMap:
    """Invertible map ``x -> A x + b`` on n-bit vectors, with its inverse.

    ``rows[r]`` holds row ``r`` of ``A``; ``inv_cols[c]`` holds column ``c`` of
    ``A^-1``. The inverse is maintained incrementally by :meth:`fold`.
    """

    __slots__ = ("n", "rows", "offset", "inv_cols", "inv_offset")

    def __init__(self, n, rows, offset, inv_cols, inv_offset):
        self.n = n
        self.rows = rows
        self.offset = offset
        self.inv_cols = inv_cols
        self.inv_offset = inv_offset

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        if n < 1:
            raise ValueError("n must be at least 1")
        unit = [1 << k for k in range(n)]
        return cls(n, list(unit), 0, list(unit), 0)

    @classmethod
    def from_matrix(cls, rows: Sequence[int], offset: int = 0) -> "AffineMap":
        """Build from forward rows, inverting over GF(2) by elimination."""
        n = len(rows)
        mask = (1 << n) - 1
        work = [(r & mask) | (1 << (n + i)) for i, r in enumerate(rows)]
        for col in range(n):
            pivot = next((i for i in range(col, n) if (work[i] >> col) & 1), None)
            if pivot is None:
                raise ValueError("matrix is singular over GF(2)")
            work[col], work[pivot] = work[pivot], work[col]
            for i in range(n):
                if i != col and (work[i] >> col) & 1:
                    work[i] ^= work[col]
        inv_rows = [w >> n for w in work]
        inv_cols = _transpose(inv_rows, n)
        m = cls(n, [r & mask for r in rows], offset & mask, inv_cols, 0)
        m.inv_offset = m._inverse_linear(offset & mask)
        return m

    def copy(self) -> "AffineMap":
        return AffineMap(self.n, list(self.rows), self.offset, list(self.inv_cols), self.inv_offset)

    # -- queries --------------------------------------------------------

    def _check_vec(self, v: int) -> None:
        if v < 0 or v >> self.n:
            raise ValueError(f"vector {v:#x} does not fit in {self.n} bits")

    def apply(self, v: int) -> int:
        self._check_vec(v)
        y = self.offset
        for r, row in enumerate(self.rows):
            if (row & v).bit_count() & 1:
                y ^= 1 << r
        return y

    def _inverse_linear(self, v: int) -> int:
        y = 0
        while v:
            low = v & -v
            y ^= self.inv_cols[low.bit_length() - 1]
            v ^= low
        return y

    def apply_inverse(self, v: int) -> int:
        self._check_vec(v)
        return self._inverse_linear(v) ^ self.inv_offset

    def matrix(self) -> np.ndarray:
        """Dense ``A`` as an (n, n) uint8 array."""
        return np.array([bit_array(r, self.n) for r in self.rows], dtype=np.uint8)

    def inverse_matrix(self) -> np.ndarray:
        return np.array([bit_array(c, self.n) for c in self.inv_cols], dtype=np.uint8).T.copy()

    @property
    def inv_rows(self) -> list[int]:
        return _transpose(self.inv_cols, self.n)

    def __eq__(self, other):
        if not isinstance(other, AffineMap):
            return NotImplemented
        return self.n == other.n and self.rows == other.rows and self.offset == other.offset

    def __repr__(self):
        return f"AffineMap(n={self.n}, offset={to_bitstring(self.offset, self.n)!r})"

    # -- updates --------------------------------------------------------

    def fold(self, perm: Sequence[int], k: int, l: int) -> "AffineMap":
        """In place: replace this map by ``R o self`` where ``R`` permutes the
        labels of bits (k, l) by ``perm`` and fixes the rest. Returns self."""
        _check_pair(self.n, k, l)
        E, (fk, fl) = perm_to_affine(perm)
        (ekk, ekl), (elk, ell) = E
        rk, rl = self.rows[k], self.rows[l]
        self.rows[k] = (rk if ekk else 0) ^ (rl if ekl else 0)
        self.rows[l] = (rk if elk else 0) ^ (rl if ell else 0)
        bk, bl = (self.offset >> k) & 1, (self.offset >> l) & 1
        nk = (ekk & bk) ^ (ekl & bl) ^ fk
        nl = (elk & bk) ^ (ell & bl) ^ fl
        off = self.offset & ~((1 << k) | (1 << l))
        self.offset = off | (nk << k) | (nl << l)

        # inverse: A_inv <- A_inv o E^-1 on columns k, l; b_inv picks up A_inv E^-1 f
        (ikk, ikl), (ilk, ill) = _inverse_2x2(E)
        ck, cl = self.inv_cols[k], self.inv_cols[l]
        gk = (ikk & fk) ^ (ikl & fl)
        gl = (ilk & fk) ^ (ill & fl)
        self.inv_offset ^= (ck if gk else 0) ^ (cl if gl else 0)
        self.inv_cols[k] = (ck if ikk else 0) ^ (cl if ilk else 0)
        self.inv_cols[l] = (ck if ikl else 0) ^ (cl if ill else 0)
        return self

    def compose(self, inner: "AffineMap") -> "AffineMap":
        """Return ``self o inner``."""
        if inner.n != self.n:
            raise ValueError("dimension mismatch")
        rows = []
        for row in self.rows:
            acc = 0
            r = row
            while r:
                low = r & -r
                acc ^= inner.rows[low.bit_length() - 1]
                r ^= low
            rows.append(acc)
        offset = self._linear(inner.offset) ^ self.offset
        inv_cols = [inner._inverse_linear(c) for c in self.inv_cols]
        inv_offset = inner._inverse_linear(self.inv_offset) ^ inner.inv_offset
        return AffineMap(self.n, rows, offset, inv_cols, inv_offset)

    def _linear(self, v: int) -> int:
        y = 0
        for r, row in enumerate(self.rows):
            if (row & v).bit_count() & 1:
                y ^= 1 << r
        return y


def _transpose(rows: Sequence[int], n: int) -> list[int]:
    cols = [0] * n
    for r, row in enumerate(rows):
        x = row
        while x:
            low = x & -x
            cols[low.bit_length() - 1] |= 1 << r
            x ^= low
    return cols


def identity(n: int) -> AffineMap:
    return AffineMap.identity(n)


def fold_local_perm(P: AffineMap, perm: Sequence[int], qubits: tuple[int, int]) -> AffineMap:
    """Functional form of :meth:`AffineMap.fold`; ``P`` is left untouched."""
    k, l = qubits
    return P.copy().fold(perm, k, l)


def apply(P: AffineMap, v: int) -> int:
    return P.apply(v)


def apply_inverse(P: AffineMap, v: int) -> int:
    return P.apply_inverse(v)


# ---------------------------------------------------------------------------
# involutions


@dataclass(frozen=True)
class AffineInvolution:
    """Self-inverse map ``x -> M x + c``; rows of ``M`` are ints."""

    n: int
    rows: tuple[int, ...]
    offset: int

    def apply(self, v: int) -> int:
        y = self.offset
        for r, row in enumerate(self.rows):
            if (row & v).bit_count() & 1:
                y ^= 1 << r
        return y

    def apply_many(self, vs: np.ndarray) -> np.ndarray:
        """Vectorized apply for ``n <= 62``; ``vs`` is an int64 array."""
        if self.n > 62:
            raise ValueError("apply_many supports n <= 62")
        out = np.full(vs.shape, self.offset, dtype=np.int64)
        for r, row in enumerate(self.rows):
            out ^= _popcount_parity(vs & row) << r
        return out

    def matrix(self) -> np.ndarray:
        return np.array([bit_array(r, self.n) for r in self.rows], dtype=np.uint8)


def _popcount_parity(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64)
    for shift in (32, 16, 8, 4, 2, 1):
        x ^= x >> np.uint64(shift)
    return (x & np.uint64(1)).astype(np.int64)


def conjugated_involution(P: AffineMap, q: Sequence[int], qubits: tuple[int, int]) -> AffineInvolution:
    """Explicit form of ``P^-1 o Q o P`` for a transposition ``q`` of two
    local labels on ``qubits``.

    ``q`` is either a pair of labels ``(u, v)`` or a 4-entry permutation that
    swaps exactly two labels.
    """
    k, l = qubits
    _check_pair(P.n, k, l)
    q = tuple(q)
    if len(q) == 2:
        u, v = q
        if u == v or not {u, v} <= {0, 1, 2, 3}:
            raise ValueError(f"not a transposition of labels: {q!r}")
        perm = transposition_perm(u, v)
    elif len(q) == 4:
        perm = q
        moved = [i for i in range(4) if perm[i] != i]
        if sorted(perm) != [0, 1, 2, 3] or len(moved) != 2:
            raise ValueError(f"not a transposition of labels: {q!r}")
    else:
        raise ValueError(f"not a transposition of labels: {q!r}")

    ((ekk, ekl), (elk, ell)), (fk, fl) = perm_to_affine(perm)
    # Q(y) = y + D y + f on bits (k, l), with D = E + I
    dkk, dkl, dlk, dll = ekk ^ 1, ekl, elk, ell ^ 1
    ak, al = P.rows[k], P.rows[l]
    bk, bl = (P.offset >> k) & 1, (P.offset >> l) & 1
    zrow_k = (ak if dkk else 0) ^ (al if dkl else 0)
    zrow_l = (ak if dlk else 0) ^ (al if dll else 0)
    zc_k = (dkk & bk) ^ (dkl & bl) ^ fk
    zc_l = (dlk & bk) ^ (dll & bl) ^ fl
    col_k, col_l = P.inv_cols[k], P.inv_cols[l]
    rows = []
    for r in range(P.n):
        row = 1 << r
        if (col_k >> r) & 1:
            row ^= zrow_k
        if (col_l >> r) & 1:
            row ^= zrow_l
        rows.append(row)
    offset = (col_k if zc_k else 0) ^ (col_l if zc_l else 0)
    return AffineInvolution(P.n, tuple(rows), offset)


# ---------------------------------------------------------------------------
# product states


@dataclass(frozen=True)
class ProductState:
    """Diagonal product state: ``probs[k] = (p_k(0), p_k(1))`` as Fractions.

    ``flips`` records qubits whose labels were exchanged by
    :func:`canonicalize_state`.
    """

    probs: tuple[tuple[Fraction, Fraction], ...]
    flips: int = 0

    @property
    def n(self) -> int:
        return len(self.probs)

    @cached_property
    def is_canonical(self) -> bool:
        return all(p1 <= p0 for p0, p1 in self.probs)

    def joint(self, v: int) -> Fraction:
        out = Fraction(1)
        for k, pair in enumerate(self.probs):
            out *= pair[(v >> k) & 1]
        return out

    def ratios(self) -> list[Fraction]:
        return [p1 / p0 for p0, p1 in self.probs]

    @cached_property
    def encoding(self) -> "RatioEncoding":
        return RatioEncoding.from_state(self)


def canonicalize_state(raw) -> tuple[ProductState, int]:
    """Relabel qubits so that ``p(1) <= p(0)`` everywhere.

    ``raw`` is a sequence of ``(p0, p1)`` pairs of rationals (anything
    ``Fraction`` accepts). Returns the canonical state and the flip mask.
    """
    probs = []
    flips = 0
    for k, pair in enumerate(raw):
        try:
            p0, p1 = (Fraction(x) for x in pair)
        except (TypeError, ValueError) as exc:
            raise StateError(f"qubit {k}: malformed probability pair {pair!r}") from exc
        if p0 < 0 or p1 < 0 or p0 + p1 != 1:
            raise StateError(f"qubit {k}: probabilities {p0}, {p1} must be nonnegative and sum to 1")
        if p1 > p0:
            p0, p1 = p1, p0
            flips |= 1 << k
        probs.append((p0, p1))
    if not probs:
        raise StateError("state has no qubits")
    return ProductState(tuple(probs), flips), flips


def commutes_with_product_state(S: AffineInvolution, rho: ProductState) -> bool:
    """Exact commutation test of an affine involution with a canonical
    diagonal product state, evaluated on the zero vector and the n unit
    vectors only."""
    if not rho.is_canonical:
        raise StateError("state must be canonical (p(1) <= p(0) on every qubit)")
    if S.n != rho.n:
        raise ValueError("dimension mismatch")
    for v in [0] + [1 << j for j in range(rho.n)]:
        if rho.joint(v) != rho.joint(S.apply(v)):
            return False
    return True


def brute_force_commutes(S: AffineInvolution, rho: ProductState) -> bool:
    """Check ``p(v) == p(S v)`` on all 2^n vectors (test-support oracle)."""
    n = rho.n
    if n > BRUTE_FORCE_LIMIT:
        raise ResourceLimitError(f"brute force limited to n <= {BRUTE_FORCE_LIMIT}, got {n}")
    if S.n != n:
        raise ValueError("dimension mismatch")
    # shared denominators per qubit, so joint probabilities compare as integers
    table = [1]
    for p0, p1 in rho.probs:
        a0, a1 = p0.numerator * p1.denominator, p1.numerator * p0.denominator
        table = [t * a0 for t in table] + [t * a1 for t in table]
    vs = np.arange(1 << n, dtype=np.int64)
    images = S.apply_many(vs)
    return all(table[v] == table[w] for v, w in zip(vs.tolist(), images.tolist()))


# ---------------------------------------------------------------------------
# fast path used by the converter


def coprime_base(values: Iterable[int]) -> list[int]:
    """Pairwise coprime integers > 1 over which every input factors."""
    base: list[int] = []
    for x0 in values:
        stack = [x0]
        while stack:
            x = stack.pop()
            if x <= 1:
                continue
            for i, q in enumerate(base):
                g = gcd(x, q)
                if g > 1:
                    base.pop(i)
                    stack.extend((g, q // g, x // g))
                    break
            else:
                base.append(x)
    return sorted(set(base))


def _exponents(x: int, base: Sequence[int]) -> dict[int, int]:
    out = {}
    for i, q in enumerate(base):
        if x == 1:
            break
        e = 0
        while x % q == 0:
            x //= q
            e += 1
        if e:
            out[i] = e
    if x != 1:
        raise ValueError("value does not factor over the base")  # unreachable
    return out


@dataclass
class RatioEncoding:
    """Exact encoding of products of the ratios ``e_k = p_k(1)/p_k(0)``.

    Each distinct nonzero ratio gets a class id; its integer exponent vector
    over a coprime base makes products of ratios comparable by vector
    equality. Zero ratios (pure qubits) are counted separately.
    """

    zero: np.ndarray            # bool, e_k == 0
    eclass: np.ndarray          # int, class id of e_k (-1 where zero)
    exps_t: sparse.csr_matrix   # (base, classes) exponent matrix
    double_lookup: dict         # key(2 * exps[c]) -> c
    n_classes: int

    @classmethod
    def from_state(cls, rho: ProductState) -> "RatioEncoding":
        ratios = rho.ratios()
        zero = np.array([e == 0 for e in ratios], dtype=bool)
        distinct: dict[Fraction, int] = {}
        eclass = np.full(len(ratios), -1, dtype=np.int64)
        for k, e in enumerate(ratios):
            if e != 0:
                eclass[k] = distinct.setdefault(e, len(distinct))
        values = sorted(distinct, key=distinct.get)
        ints = {v.numerator for v in values} | {v.denominator for v in values}
        base = coprime_base(sorted(ints))
        data, ri, ci = [], [], []
        lookup = {}
        for c, e in enumerate(values):
            vec: dict[int, int] = {}
            for i, a in _exponents(e.numerator, base).items():
                vec[i] = vec.get(i, 0) + a
            for i, a in _exponents(e.denominator, base).items():
                vec[i] = vec.get(i, 0) - a
            items = sorted((i, a) for i, a in vec.items() if a)
            for i, a in items:
                ri.append(i)
                ci.append(c)
                data.append(a)
            lookup[(tuple(i for i, _ in items), tuple(2 * a for _, a in items))] = c
        exps_t = sparse.csr_matrix(
            (np.array(data, dtype=np.int64), (np.array(ri, dtype=np.int64), np.array(ci, dtype=np.int64))),
            shape=(max(1, len(base)), max(1, len(values))),
        )
        return cls(zero, eclass, exps_t, lookup, len(values))

    def summarize(self, mask: np.ndarray) -> tuple[int, tuple]:
        """Zero count and exponent key of the product of ratios over ``mask``."""
        z = int(np.count_nonzero(mask & self.zero))
        members = self.eclass[mask & ~self.zero]
        if members.size == 0:
            return z, ((), ())
        counts = np.bincount(members, minlength=self.exps_t.shape[1])
        L = self.exps_t @ counts
        idx = np.flatnonzero(L)
        return z, (tuple(idx.tolist()), tuple(L[idx].tolist()))


_EMPTY_KEY = ((), ())


def pair_degeneracies(P: AffineMap, rho: ProductState, k: int, l: int) -> tuple[bool, ...]:
    """For each transposition in ``TRANSPOSITIONS``, whether ``P^-1 Q P``
    commutes with ``rho``.

    Same decision as :func:`commutes_with_product_state` on the conjugated
    involution, computed without materializing it: ``S(x) = x + A_inv d``
    where ``d`` ranges over span{e_k, e_l}, so only three difference vectors
    occur and their ratio products are summarized once.
    """
    _check_pair(P.n, k, l)
    if not rho.is_canonical:
        raise StateError("state must be canonical (p(1) <= p(0) on every qubit)")
    n = P.n
    enc = rho.encoding
    bk, bl = (P.offset >> k) & 1, (P.offset >> l) & 1
    lab = 2 * (bit_array(P.rows[k], n) ^ bool(bk)).astype(np.int64) + (bit_array(P.rows[l], n) ^ bool(bl))
    lab0 = 2 * bk + bl
    ck, cl = P.inv_cols[k], P.inv_cols[l]
    deltas = {2: ck, 1: cl, 3: ck ^ cl}
    info = {}
    for w, d in deltas.items():
        mask = bit_array(d, n)
        z, key = enc.summarize(mask)
        unit = z == 0 and key == _EMPTY_KEY
        match = enc.double_lookup.get(key) if z == 0 else None
        info[w] = (mask, z, unit, match)

    out = []
    for u, v in TRANSPOSITIONS:
        mask, z, unit, match = info[u ^ v]
        ok = True
        if lab0 in (u, v) and not unit:
            ok = False
        if ok:
            hit = (lab == u) | (lab == v)
            outside = hit & ~mask
            inside = hit & mask
            if not unit and np.any(outside & ~enc.zero):
                ok = False
            elif z < 2 and np.any(inside & enc.zero):
                ok = False
            else:
                nz = inside & ~enc.zero
                if np.any(nz) and (match is None or np.any(enc.eclass[nz] != match)):
                    ok = False
        out.append(ok)
    return tuple(out)
