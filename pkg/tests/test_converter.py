import json
from fractions import Fraction as F

import numpy as np
import pytest

from concordant.affine import from_bitstring, identity
from concordant.circuit import ALIASES
from concordant.converter import (
    ConvertedProgram,
    DegeneracyClasses,
    classes_from_flags,
    class_marker_matrix,
    convert,
    extract_permutation,
    overlap_weights,
    solve_new_basis,
)
from concordant.exceptions import DiscordError, InconsistencyError
from concordant.generator import GenSpec, gen_concordant, gen_discordant
from concordant.oracle import final_state, is_concordant, iter_states

from conftest import circuit, concordant_corpus, frame_matrix

I2 = np.eye(2)
SINGLETONS = DegeneracyClasses(((0,), (1,), (2,), (3,)))
MIDDLE = DegeneracyClasses(((0,), (1, 2), (3,)))
H = ALIASES["H"]


def partial_swap(theta):
    W = np.eye(4, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    W[1, 1], W[1, 2], W[2, 1], W[2, 2] = c, -s, s, c
    return W


def test_swap_singletons_keeps_frame():
    Vk, Vl = solve_new_basis(ALIASES["SWAP"], SINGLETONS)
    assert np.allclose(Vk, I2) and np.allclose(Vl, I2)
    assert extract_permutation(ALIASES["SWAP"], Vk, Vl) == (0, 2, 1, 3)


def test_cnot_singletons_is_a_permutation():
    Vk, Vl = solve_new_basis(ALIASES["CNOT"], SINGLETONS)
    assert np.allclose(Vk, I2) and np.allclose(Vl, I2)
    assert extract_permutation(ALIASES["CNOT"], Vk, Vl) == (0, 1, 3, 2)


def test_partial_swap_inside_degenerate_pair():
    W = partial_swap(np.pi / 4)
    Vk, Vl = solve_new_basis(W, MIDDLE)
    assert np.allclose(Vk, I2) and np.allclose(Vl, I2)
    V = np.kron(Vk, Vl)
    D = V.conj().T @ class_marker_matrix(W, MIDDLE) @ V
    assert np.allclose(D, np.diag(np.diag(D)))
    O = overlap_weights(W, Vk, Vl)
    assert np.allclose(sorted(O[O > 1e-9].tolist()), [0.5, 0.5, 0.5, 0.5, 1, 1])
    assert extract_permutation(W, Vk, Vl, MIDDLE) == (0, 1, 2, 3)


def test_local_gate_absorbed_by_frame():
    W = np.kron(H, I2)
    assert extract_permutation(W, H, I2) == (0, 1, 2, 3)
    Vk, Vl = solve_new_basis(W, SINGLETONS)
    assert np.allclose(np.abs(np.kron(Vk, Vl).conj().T @ W), np.eye(4), atol=1e-12)
    assert extract_permutation(W, Vk, Vl) == (0, 1, 2, 3)


def test_entangling_gate_on_singletons_fails():
    W = ALIASES["CNOT"] @ np.kron(H, I2)
    with pytest.raises(DiscordError) as info:
        solve_new_basis(W, SINGLETONS, gate_index=7)
    assert info.value.gate_index == 7 and info.value.reason == "no-product-eigenvector"


def test_two_two_without_product_pair():
    # classes {00,01},{10,11}; W maps them onto two spans with no orthogonal product pair
    rng = np.random.default_rng(0)
    W = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    with pytest.raises(DiscordError) as info:
        solve_new_basis(W, DegeneracyClasses(((0, 1), (2, 3))), gate_index=0)
    assert info.value.reason in ("subspace-has-no-product-pair", "inconsistent-local-basis")


def test_component_mismatch():
    # For an exactly unitary W every component is balanced, so this guard only
    # fires when thresholding or noise breaks that; feed it a broken W directly.
    W = np.eye(4, dtype=complex)
    W[0, 1], W[1, 1] = 1, 0
    with pytest.raises(DiscordError) as info:
        extract_permutation(W, I2, I2, gate_index=3)
    assert info.value.reason == "component-count-mismatch" and info.value.gate_index == 3


def test_transitivity_violation_is_internal_error():
    # marks 00~01 and 01~10 but not 00~10
    flags = (True, False, False, False, False, False)
    assert classes_from_flags(flags).classes == ((0, 1), (2,), (3,))
    with pytest.raises(InconsistencyError):
        classes_from_flags((True, False, False, True, False, False))


def test_convert_cnot_generic():
    c = circuit(2, [F(2, 3), F(3, 5)], [("CNOT", (0, 1))])
    prog = convert(c)
    assert prog.P.matrix().tolist() == [[1, 0], [1, 1]] and prog.P.offset == 0
    assert all(np.allclose(u, I2) for u in prog.U_final)
    assert prog.audit[0].pattern == (1, 1, 1, 1)


def test_convert_single_x():
    prog = convert(circuit(1, [F(1, 3)], [("X", 0)]))
    # p(0)=1/3 is flipped: frame starts at X, then X is applied
    assert prog.P == identity(1)
    assert np.allclose(prog.U_final[0], ALIASES["X"] @ ALIASES["X"])
    prog = convert(circuit(1, [F(2, 3)], [("X", 0)]))
    assert np.allclose(prog.U_final[0], ALIASES["X"])


def test_convert_h_then_cnot_on_fair_control():
    c = circuit(2, [F(1, 2), F(2, 3)], [("H", 0), ("CNOT", (0, 1))])
    prog = convert(c)
    U = frame_matrix(prog.U_final)
    sigma = U.conj().T @ final_state(c) @ U
    assert np.abs(sigma - np.diag(np.diag(sigma))).max() <= 1e-8


def test_convert_h_then_cnot_on_biased_control_fails():
    c = circuit(2, [F(2, 3), F(2, 3)], [("H", 0), ("CNOT", (0, 1))])
    with pytest.raises(DiscordError) as info:
        convert(c)
    assert info.value.gate_index == 1
    states = list(iter_states(c))
    assert not is_concordant(states[info.value.gate_index + 1])


def test_spectrum_preservation(small_corpus):
    for c in small_corpus:
        prog = convert(c)
        U = frame_matrix(prog.U_final)
        sigma = U.conj().T @ final_state(c) @ U
        assert np.abs(sigma - np.diag(np.diag(sigma))).max() <= 1e-8
        diag = np.real(np.diag(sigma))
        n = c.n_qubits
        for idx in range(2**n):
            # dense index: qubit 0 is the most significant bit
            j = from_bitstring(format(idx, f"0{n}b"))
            i = prog.P.apply_inverse(j)
            assert abs(diag[idx] - float(prog.state.joint(i))) <= 1e-8


def test_generic_inputs_give_singletons():
    for s in range(20):
        g = gen_concordant(GenSpec(5, 20, s, "generic-rationals", "full-concordant"))
        prog = convert(g.circuit)
        assert all(rec.pattern == (1, 1, 1, 1) for rec in prog.audit)


def test_permutation_only_matches_composed_permutation():
    for s in range(10):
        g_circ = gen_concordant(GenSpec(6, 12, s, "with-ties", "permutation-only")).circuit
        prog = convert(g_circ)
        f = prog.flips
        # one-qubit X gates are absorbed into the frame, permutations into P
        g = f
        for gate in g_circ.gates:
            if gate.arity == 1:
                g ^= 1 << gate.qubits[0]
        for k, u in enumerate(prog.U_final):
            assert np.allclose(u, ALIASES["X"] if (g >> k) & 1 else I2)
        # reference: push basis states through the gate matrices
        n = g_circ.n_qubits
        for x in range(2**n):
            y = x
            for gate in g_circ.gates:
                if gate.arity == 1:
                    y ^= 1 << gate.qubits[0]
                else:
                    k, l = gate.qubits
                    label = 2 * ((y >> k) & 1) + ((y >> l) & 1)
                    new = int(np.argmax(np.abs(gate.matrix[:, label])))
                    y = (y & ~((1 << k) | (1 << l))) | ((new >> 1) << k) | ((new & 1) << l)
            assert prog.P.apply(x ^ f) ^ g == y


def test_determinism_and_serialization():
    for c in concordant_corpus(15, seed0=100):
        a, b = convert(c), convert(c)
        da, db = json.dumps(a.to_dict()), json.dumps(b.to_dict())
        assert da == db
        back = ConvertedProgram.from_dict(json.loads(da))
        assert back.P == a.P and back.flips == a.flips and back.measured == a.measured
        assert all(np.array_equal(x, y) for x, y in zip(back.U_final, a.U_final))
        assert json.dumps(back.to_dict()) == da


def test_every_discord_error_is_corroborated():
    for s in range(15):
        case = gen_discordant(GenSpec(2 + s % 5, 8, 500 + s, "generic-rationals", "full-concordant"))
        with pytest.raises(DiscordError) as info:
            convert(case.circuit)
        states = list(iter_states(case.circuit))
        assert not is_concordant(states[info.value.gate_index + 1])
