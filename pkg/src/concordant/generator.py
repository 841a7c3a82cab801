"""Random circuit corpora: concordant by construction, degeneracy-heavy, and
oracle-certified discordant.

Concordant circuits are built backwards from the converter's own picture.
A running product frame ``B`` (one 2x2 unitary per qubit) and label map
``P`` describe the state at every step; each two-qubit gate is then
``B'_{kl} R Y B_{kl}^dagger`` with ``R`` a classical reversible two-bit gate,
``B'`` a fresh local frame, and ``Y`` (adversarial mode only) a unitary
that mixes labels only inside the current degeneracy classes. Every such
gate keeps the state diagonal in ``B'``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import unitary_group

from .affine import AffineMap, canonicalize_state, pair_degeneracies
from .circuit import Circuit, make_circuit
from .converter import classes_from_flags, initial_frame
from .exceptions import GenerationError
from .oracle import MAX_QUBITS, concordance_margin, iter_states

INIT_MODES = ("generic-rationals", "with-ties", "mixed-pure")
GATE_MODES = ("permutation-only", "full-concordant", "adversarial")

TIE_VALUES = (Fraction(1, 2), Fraction(2, 3), Fraction(1), Fraction(0), Fraction(1, 3), Fraction(3, 4))
PERMUTATIONS = tuple(itertools.permutations(range(4)))

_X2 = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class GenSpec:
    n: int
    depth: int
    seed: int = 0
    init_mode: str = "generic-rationals"
    gate_mode: str = "full-concordant"
    one_qubit_rate: float = 0.3

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("generator needs n >= 2")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"unknown init mode {self.init_mode!r}")
        if self.gate_mode not in GATE_MODES:
            raise ValueError(f"unknown gate mode {self.gate_mode!r}")


@dataclass
class GeneratedCircuit:
    """A circuit with the frame and label map it was built from."""

    circuit: Circuit
    P: AffineMap
    U: list[np.ndarray]


@dataclass
class DiscordantCase:
    circuit: Circuit
    first_discord: int
    margin: float


def _primes(count: int) -> list[int]:
    limit = 64
    while True:
        sieve = np.ones(limit + 1, dtype=bool)
        sieve[:2] = False
        for p in range(2, int(limit**0.5) + 1):
            if sieve[p]:
                sieve[p * p:: p] = False
        primes = np.flatnonzero(sieve).tolist()
        if len(primes) >= count:
            return primes
        limit *= 2


def random_init(n: int, mode: str, rng: np.random.Generator) -> list[Fraction]:
    """``p_k(0)`` per qubit.

    ``generic-rationals`` gives ratios ``p1/p0`` equal to ``1/q`` or ``q`` for
    distinct primes ``q``, so all joint probabilities are distinct.
    """
    if mode == "generic-rationals":
        pool = _primes(2 * n + 8)[1:]
        chosen = rng.choice(len(pool), size=n, replace=False)
        out = []
        for idx in chosen:
            q = pool[int(idx)]
            out.append(Fraction(q, q + 1) if rng.random() < 0.5 else Fraction(1, q + 1))
        return out
    if mode == "with-ties":
        return [TIE_VALUES[int(rng.integers(len(TIE_VALUES)))] for _ in range(n)]
    if mode == "mixed-pure":
        generic = random_init(n, "generic-rationals", rng)
        out = []
        for p in generic:
            r = rng.random()
            out.append(Fraction(int(rng.integers(2))) if r < 0.3 else Fraction(1, 2) if r < 0.45 else p)
        return out
    raise ValueError(f"unknown init mode {mode!r}")


def perm_matrix(perm) -> np.ndarray:
    """``R |i> = |perm[i]>``."""
    R = np.zeros((4, 4), dtype=complex)
    for i, j in enumerate(perm):
        R[j, i] = 1
    return R


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)


def _class_mixer(classes, rng) -> np.ndarray:
    Y = np.zeros((4, 4), dtype=complex)
    for c in classes.classes:
        idx = list(c)
        Y[np.ix_(idx, idx)] = haar_unitary(len(idx), rng) if len(idx) > 1 else np.exp(2j * np.pi * rng.random())
    return Y


def _pair(n, rng):
    k, l = rng.choice(n, size=2, replace=False).tolist()
    return int(k), int(l)


def _build(spec: GenSpec, init: list[Fraction], rng: np.random.Generator, depth: int | None = None):
    n = spec.n
    depth = spec.depth if depth is None else depth
    state, flips = canonicalize_state([(p, 1 - p) for p in init])
    B = initial_frame(flips, n)
    P = AffineMap.identity(n)
    gates = []
    perm_only = spec.gate_mode == "permutation-only"
    for _ in range(depth):
        if rng.random() < spec.one_qubit_rate:
            k = int(rng.integers(n))
            g = _X2 if perm_only else haar_unitary(2, rng)
            B[k] = g @ B[k]
            gates.append(((k,), g))
            continue
        k, l = _pair(n, rng)
        lo, hi = min(k, l), max(k, l)
        perm = PERMUTATIONS[int(rng.integers(24))]
        core = perm_matrix(perm)
        if spec.gate_mode == "adversarial":
            classes = classes_from_flags(pair_degeneracies(P, state, lo, hi))
            core = core @ _class_mixer(classes, rng)
        new_lo, new_hi = (B[lo], B[hi]) if perm_only else (haar_unitary(2, rng), haar_unitary(2, rng))
        G = np.kron(new_lo, new_hi) @ core @ np.kron(B[lo], B[hi]).conj().T
        P.fold(perm, lo, hi)
        B[lo], B[hi] = new_lo, new_hi
        gates.append(((lo, hi), G))
    circuit = make_circuit(n, init, gates)
    return GeneratedCircuit(circuit, P, B)


def gen_concordant(spec: GenSpec) -> GeneratedCircuit:
    """Circuit concordant for its input by construction, with the frame and
    label map used to build it."""
    rng = np.random.default_rng(spec.seed)
    init = random_init(spec.n, spec.init_mode, rng)
    return _build(spec, init, rng)


def gen_degenerate(spec: GenSpec) -> Circuit:
    """Tie-heavy inputs with gates that rotate inside degenerate classes."""
    if spec.init_mode != "with-ties":
        raise ValueError("gen_degenerate needs init_mode='with-ties'")
    rng = np.random.default_rng(spec.seed)
    init = random_init(spec.n, "with-ties", rng)
    adv = GenSpec(spec.n, spec.depth, spec.seed, "with-ties", "adversarial", spec.one_qubit_rate)
    return _build(adv, init, rng).circuit


def gen_discordant(spec: GenSpec, attempts: int = 100, min_margin: float = 1e-6) -> DiscordantCase:
    """A concordant prefix followed by a generic entangling gate, returned
    only once the dense oracle certifies a discordant step."""
    if spec.n > min(8, MAX_QUBITS):
        raise ValueError("discordant generation is certified densely and limited to n <= 8")
    rng = np.random.default_rng(spec.seed)
    for _ in range(attempts):
        init = random_init(spec.n, spec.init_mode, rng)
        prefix_spec = GenSpec(spec.n, spec.depth, spec.seed, spec.init_mode,
                              "full-concordant" if spec.gate_mode == "permutation-only" else spec.gate_mode,
                              spec.one_qubit_rate)
        prefix = _build(prefix_spec, init, rng, depth=int(rng.integers(0, spec.depth + 1)))
        k, l = _pair(spec.n, rng)
        gates = [(g.qubits, g.matrix) for g in prefix.circuit.gates]
        gates.append(((k, l), haar_unitary(4, rng)))
        circuit = make_circuit(spec.n, init, gates)
        for t, rho in enumerate(iter_states(circuit)):
            if t == 0:
                continue
            margin = concordance_margin(rho, circuit.n_qubits)
            if margin > 1e-8:
                if margin >= min_margin:
                    return DiscordantCase(circuit, t - 1, margin)
                break
    raise GenerationError(f"no certified discordant circuit after {attempts} attempts")
