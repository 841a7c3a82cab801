from fractions import Fraction as F

import numpy as np
import pytest

from concordant.circuit import serialize_circuit
from concordant.converter import convert
from concordant.exceptions import DiscordError, GenerationError
from concordant.generator import (
    GATE_MODES,
    INIT_MODES,
    GenSpec,
    gen_concordant,
    gen_degenerate,
    gen_discordant,
    random_init,
)
from concordant.oracle import final_state, first_discord_step, is_concordant, oracle_distribution
from concordant.sampler import exact_output_distribution

from conftest import frame_matrix


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec(1, 3)
    with pytest.raises(ValueError):
        GenSpec(3, -1)
    with pytest.raises(ValueError):
        GenSpec(3, 3, init_mode="weird")
    with pytest.raises(ValueError):
        GenSpec(3, 3, gate_mode="weird")


def test_generic_init_has_distinct_joint_probabilities():
    rng = np.random.default_rng(0)
    init = random_init(6, "generic-rationals", rng)
    joint = set()
    for x in range(64):
        p = F(1)
        for k, p0 in enumerate(init):
            p *= p0 if not (x >> k) & 1 else 1 - p0
        joint.add(p)
    assert len(joint) == 64


def test_depth_zero():
    g = gen_concordant(GenSpec(3, 0, 1))
    assert g.circuit.gates == ()
    prog = convert(g.circuit)
    assert prog.P.rows == [1, 2, 4] and prog.P.offset == 0


def test_seeded_determinism():
    for mode in GATE_MODES:
        a = gen_concordant(GenSpec(4, 10, 42, "mixed-pure", mode)).circuit
        b = gen_concordant(GenSpec(4, 10, 42, "mixed-pure", mode)).circuit
        assert serialize_circuit(a) == serialize_circuit(b)
    c = gen_discordant(GenSpec(3, 5, 9))
    d = gen_discordant(GenSpec(3, 5, 9))
    assert serialize_circuit(c.circuit) == serialize_circuit(d.circuit) and c.first_discord == d.first_discord


def test_permutation_only_gates_are_permutations():
    g = gen_concordant(GenSpec(5, 30, 3, "generic-rationals", "permutation-only"))
    for gate in g.circuit.gates:
        m = np.abs(gate.matrix)
        assert np.array_equal(m, np.round(m)) and np.allclose(m.sum(axis=0), 1)


def test_ground_truth_frame_diagonalizes():
    for s, (im, gm) in enumerate([(i, g) for i in INIT_MODES for g in GATE_MODES]):
        g = gen_concordant(GenSpec(4, 15, s, im, gm))
        U = frame_matrix(g.U)
        sigma = U.conj().T @ final_state(g.circuit) @ U
        assert np.abs(sigma - np.diag(np.diag(sigma))).max() <= 1e-9


def test_full_concordant_example():
    g = gen_concordant(GenSpec(5, 20, 0, "generic-rationals", "full-concordant"))
    prog = convert(g.circuit)
    U = frame_matrix(prog.U_final)
    sigma = U.conj().T @ final_state(g.circuit) @ U
    assert np.abs(sigma - np.diag(np.diag(sigma))).max() <= 1e-8


def test_concordant_corpus_converts_and_matches():
    for s in range(30):
        spec = GenSpec(2 + s % 6, 20, 1000 + s, INIT_MODES[s % 3], GATE_MODES[s % 3])
        c = gen_concordant(spec).circuit
        prog = convert(c)
        exact = exact_output_distribution(prog)
        oracle = oracle_distribution(c)
        assert max(abs(exact[h] - oracle[h]) for h in exact) <= 1e-8


def test_degenerate_examples():
    from concordant.affine import canonicalize_state, identity
    from concordant.converter import diagnose_degeneracy

    rho, _ = canonicalize_state([(F(1, 2), F(1, 2))] * 2)
    assert diagnose_degeneracy(identity(2), rho, (0, 1)).pattern == (4,)
    rho, _ = canonicalize_state([(F(2, 3), F(1, 3))] * 2)
    assert diagnose_degeneracy(identity(2), rho, (0, 1)).pattern == (2, 1, 1)
    with pytest.raises(ValueError):
        gen_degenerate(GenSpec(3, 5, 0, "generic-rationals"))
    patterns = set()
    for s in range(30):
        c = gen_degenerate(GenSpec(2 + s % 3, 12, s, "with-ties"))
        prog = convert(c)
        patterns |= prog.patterns()
    assert {(2, 1, 1), (2, 2), (4,)} <= patterns


def test_discordant_cases_are_certified_and_detected():
    for s in range(12):
        case = gen_discordant(GenSpec(2 + s % 6, 6, 77 + s, INIT_MODES[s % 3], GATE_MODES[s % 3]))
        assert first_discord_step(case.circuit) == case.first_discord
        assert case.margin >= 1e-6
        with pytest.raises(DiscordError):
            convert(case.circuit)


def test_discordant_generation_exhaustion():
    # two pure qubits stay pure; a Haar gate always entangles, so this succeeds,
    # but a zero attempt budget must raise
    with pytest.raises(GenerationError):
        gen_discordant(GenSpec(2, 2, 0), attempts=0)
    with pytest.raises(ValueError):
        gen_discordant(GenSpec(9, 2, 0))


def test_classical_and_local_circuits_never_discordant():
    for s in range(10):
        g = gen_concordant(GenSpec(4, 15, s, "with-ties", "permutation-only"))
        assert first_discord_step(g.circuit) is None
    g = gen_concordant(GenSpec(4, 15, 0, "generic-rationals", "full-concordant"))
    local = [gate for gate in g.circuit.gates if gate.arity == 1]
    from concordant.circuit import make_circuit

    c = make_circuit(4, g.circuit.init, local)
    assert is_concordant(final_state(c))
    assert first_discord_step(c) is None
