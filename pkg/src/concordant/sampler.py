"""Sampling and exact output distributions for converted programs.

A shot draws initial labels ``i`` from the product input, maps them to
``j = P i``, and measures each qubit of ``(x)_k U_k |j_k>`` in the
computational basis.

Randomness comes from Philox (counter-based). Input bits use exact
rational thresholds: bit ``k`` is 1 iff a raw 64-bit draw ``u`` satisfies
``u >= ceil(p_k(0) * 2^64)``, which happens with probability exactly
``1 - ceil(p_k(0) 2^64) / 2^64``, i.e. within ``2^-64`` of ``p_k(1)`` and
exact for dyadic ``p_k(0)``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .affine import ProductState, bit_array, bits_to_int
from .converter import ConvertedProgram
from .exceptions import ResourceLimitError

ENUM_LIMIT = 20
BLOCK = 4096
_TWO64 = 1 << 64


def _ceil_threshold(p0: Fraction) -> int:
    num = p0.numerator << 64
    return -(-num // p0.denominator)


def thresholds(rho: ProductState) -> list[int]:
    """Per-qubit integer thresholds in ``[0, 2^64]``."""
    return [_ceil_threshold(p0) for p0, _ in rho.probs]


def make_rng(seed: int, block: int = 0) -> np.random.Generator:
    """Independent substream ``block`` of the run keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed) % _TWO64, counter=[0, int(block), 0, 0]))


def _uniform53(raw: np.ndarray) -> np.ndarray:
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def _threshold_bits(raw: np.ndarray, thr: list[int]) -> np.ndarray:
    """``raw`` has shape ``(shots, n)`` of uint64; returns 0/1 uint8."""
    out = np.zeros(raw.shape, dtype=np.uint8)
    for k, t in enumerate(thr):
        if t >= _TWO64:
            continue
        out[:, k] = raw[:, k] >= np.uint64(t)
    return out


def sample_initial(rho: ProductState, rng: np.random.Generator) -> int:
    """One label vector ``i`` as an int (bit k = qubit k)."""
    raw = rng.bit_generator.random_raw(rho.n).reshape(1, -1)
    return bits_to_int(_threshold_bits(raw, thresholds(rho))[0].tolist())


def measurement_probs(prog: ConvertedProgram) -> np.ndarray:
    """``q[k, j] = |<1| U_k |j>|^2``: chance of reading 1 on qubit ``k`` in
    eigenstate ``j``."""
    return np.array([np.abs(u[1, :]) ** 2 for u in prog.U_final])


def _measure(prog: ConvertedProgram, j: int, uniforms: np.ndarray) -> str:
    q1 = measurement_probs(prog)
    bits = []
    for idx, k in enumerate(prog.measured):
        jk = (j >> k) & 1
        bits.append("1" if uniforms[idx] < q1[k, jk] else "0")
    return "".join(bits)


def run_shot(prog: ConvertedProgram, rng: np.random.Generator) -> str:
    """One outcome bitstring over the measured qubits (ascending)."""
    i = sample_initial(prog.state, rng)
    j = prog.P.apply(i)
    raw = rng.bit_generator.random_raw(len(prog.measured))
    return _measure(prog, j, _uniform53(np.atleast_1d(raw)))


def _bit_matrix(prog: ConvertedProgram):
    n = prog.n
    A = np.zeros((n, n), dtype=np.float32)
    for r, row in enumerate(prog.P.rows):
        A[r] = bit_array(row, n)
    b = bit_array(prog.P.offset, n).astype(np.uint8)
    return A, b


def run_shots(prog: ConvertedProgram, shots: int, seed: int = 0, block: int = BLOCK) -> list[str]:
    """``shots`` outcomes; shot ``s`` depends only on ``seed`` and ``s``.

    Shots are drawn in fixed blocks, block ``b`` from substream ``b``, so a
    block can be regenerated alone and results do not depend on scheduling.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    n = prog.n
    m = len(prog.measured)
    thr = thresholds(prog.state)
    A, b = _bit_matrix(prog)
    q1 = measurement_probs(prog)
    meas = np.array(prog.measured, dtype=int)
    out: list[str] = []
    for blk, start in enumerate(range(0, shots, block)):
        count = min(block, shots - start)
        rng = make_rng(seed, blk)
        raw = rng.bit_generator.random_raw(block * (n + m)).reshape(block, n + m)[:count]
        i_bits = _threshold_bits(raw[:, :n], thr)
        # j = A i + b over GF(2); exact because each dot product is <= n < 2^24
        j_bits = (i_bits.astype(np.float32) @ A.T).astype(np.int64) & 1
        j_bits ^= b
        u = _uniform53(raw[:, n:])
        jm = j_bits[:, meas]
        p = q1[meas[None, :], jm]
        h = (u < p).astype(np.uint8)
        out.extend("".join(map(str, row)) for row in h.tolist())
    return out


def frequencies(shots: list[str], m: int) -> dict[str, float]:
    counts = {format(h, f"0{m}b") if m else "": 0 for h in range(2**m)}
    for s in shots:
        counts[s] += 1
    total = max(len(shots), 1)
    return {h: c / total for h, c in counts.items()}


def exact_output_distribution(prog: ConvertedProgram, enum_limit: int = ENUM_LIMIT) -> dict[str, float]:
    """Outcome probabilities by summing over every initial label.

    ``Pr[h] = sum_i p(i) prod_{k measured} |<h_k| U_k |(P i)_k>|^2``.
    """
    n = prog.n
    if n > enum_limit:
        raise ResourceLimitError(f"exact enumeration is limited to {enum_limit} qubits, got {n}")
    rho = prog.state
    # joint input weights over all labels, qubit k = bit k
    weights = np.ones(1)
    for p0, p1 in rho.probs:
        weights = np.concatenate([weights * float(p0), weights * float(p1)])
    labels = np.arange(2**n, dtype=np.int64)
    A, b = _bit_matrix(prog)
    i_bits = ((labels[:, None] >> np.arange(n)) & 1).astype(np.float32)
    j_bits = (i_bits @ A.T).astype(np.int64) & 1
    j_bits ^= b
    meas = list(prog.measured)
    m = len(meas)
    # aggregate input weight by the measured bits of j
    key = np.zeros(2**n, dtype=np.int64)
    for idx, k in enumerate(meas):
        key |= j_bits[:, k] << (m - 1 - idx)
    mass = np.bincount(key, weights=weights, minlength=2**m)
    # Q[k][h, j] = |<h|U_k|j>|^2 ; contract one measured qubit at a time
    dist = mass.reshape((2,) * m) if m else mass.reshape(())
    for idx, k in enumerate(meas):
        Q = np.abs(prog.U_final[k]) ** 2
        dist = np.moveaxis(np.tensordot(Q, dist, axes=([1], [idx])), 0, idx)
    flat = np.asarray(dist).reshape(-1)
    return {format(h, f"0{m}b") if m else "": float(flat[h]) for h in range(2**m)}


def shot_bound(dist: dict[str, float], shots: int, sigmas: float = 4.0) -> float:
    """``sigmas``-sigma envelope on the TVD between empirical and exact."""
    return 0.5 * sigmas * sum(np.sqrt(p * (1 - p) / shots) for p in dist.values())
