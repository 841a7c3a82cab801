from fractions import Fraction as F

import numpy as np
import pytest

from concordant.exceptions import ResourceLimitError
from concordant.oracle import (
    concordance_margin,
    dense_simulate,
    first_discord_step,
    initial_density,
    is_concordant,
    measurement_distribution,
    pairwise_commutator_norm,
    tvd,
)

from conftest import circuit, frame_matrix

Z0, Z1 = np.diag([1.0, 0]), np.diag([0, 1.0])
PLUS = np.full((2, 2), 0.5)


def random_state(n, rng, rank=None):
    d = 2**n
    a = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    r = a @ a.conj().T
    return r / np.trace(r)


def test_dense_examples():
    assert len(dense_simulate(circuit(2, [F(1, 2), F(1, 3)]))) == 1
    final = dense_simulate(circuit(1, [F(1)], [("X", 0)]))[-1]
    assert np.allclose(final, Z1)
    final = dense_simulate(circuit(2, [F(1, 2), F(1)], [("CNOT", (0, 1))]))[-1]
    assert np.allclose(final, 0.5 * (np.kron(Z0, Z0) + np.kron(Z1, Z1)))


def test_gate_embedding_against_kron():
    rng = np.random.default_rng(0)
    c = circuit(3, [F(1, 3), F(2, 5), F(1, 7)], [(np.linalg.qr(rng.normal(size=(4, 4)))[0], (0, 2)),
                                                   (np.linalg.qr(rng.normal(size=(2, 2)))[0], 1)])
    rho = initial_density(c)
    g0, g1 = c.gates
    P = np.eye(8)[[0, 2, 1, 3, 4, 6, 5, 7]]  # swap qubits 1 and 2 in kron order
    G0 = P @ np.kron(g0.matrix, np.eye(2)) @ P
    G1 = np.kron(np.kron(np.eye(2), g1.matrix), np.eye(2))
    ref = G1 @ G0 @ rho @ G0.conj().T @ G1.conj().T
    assert np.allclose(dense_simulate(c)[-1], ref)


def test_trace_and_spectrum_preserved(small_corpus):
    for c in small_corpus[:20]:
        states = dense_simulate(c)
        spec0 = np.sort(np.linalg.eigvalsh(states[0]))
        for r in states:
            assert abs(np.trace(r) - 1) <= 1e-9
            assert np.allclose(np.sort(np.linalg.eigvalsh(r)), spec0, atol=1e-9)


def test_measurement_examples():
    bell = 0.5 * (np.kron(Z0, Z0) + np.kron(Z1, Z1))
    assert measurement_distribution(bell, [0, 1]) == {"00": 0.5, "01": 0.0, "10": 0.0, "11": 0.5}
    assert measurement_distribution(bell, [0]) == {"0": 0.5, "1": 0.5}
    assert measurement_distribution(np.kron(Z0, Z1), [0, 1])["01"] == 1.0


def test_concordance_examples():
    assert is_concordant(np.kron(np.diag([0.3, 0.7]), np.diag([0.6, 0.4])))
    assert is_concordant(0.5 * (np.kron(Z0, Z0) + np.kron(Z1, Z1)))
    mixed = 0.5 * (np.kron(Z0, Z0) + np.kron(Z1, PLUS))
    assert not is_concordant(mixed)
    assert pairwise_commutator_norm(mixed) > 1e-3


def test_margin_bounds_literal_commutators():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3):
        for rank in (1, 2, None):
            r = random_state(n, rng, rank)
            assert concordance_margin(r) >= pairwise_commutator_norm(r) - 1e-12
    # and both vanish together on concordant states
    for _ in range(10):
        us = [np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0] for _ in range(3)]
        U = frame_matrix(us)
        r = U @ np.diag(rng.dirichlet(np.ones(8))) @ U.conj().T
        assert concordance_margin(r) <= 1e-12 and pairwise_commutator_norm(r) <= 1e-12


def test_verdict_is_product_covariant():
    rng = np.random.default_rng(2)
    for _ in range(20):
        r = random_state(3, rng, rank=2)
        us = [np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0] for _ in range(3)]
        U = frame_matrix(us)
        assert abs(concordance_margin(r) - concordance_margin(U @ r @ U.conj().T)) <= 1e-10


def test_first_discord_step_examples():
    classical = circuit(3, [F(2, 3), F(1, 5), F(1, 2)], [("CNOT", (0, 1)), ("SWAP", (1, 2)), ("X", 0)])
    assert first_discord_step(classical) is None
    assert first_discord_step(circuit(1, [F(2, 3)], [("H", 0)])) is None
    assert first_discord_step(circuit(2, [F(2, 3), F(2, 3)], [("H", 0), ("CNOT", (0, 1))])) == 1
    # a local rotation after correlation never changes concordance
    assert first_discord_step(circuit(2, [F(1, 2), F(2, 3)], [("CNOT", (0, 1)), ("H", 0)])) is None


def test_tvd_examples():
    p = {"0": 0.75, "1": 0.25}
    assert tvd(p, p) == 0
    assert tvd({"0": 1.0, "1": 0.0}, {"0": 0.0, "1": 1.0}) == 1
    assert tvd(p, {"0": 0.25, "1": 0.75}) == 0.5
    with pytest.raises(ValueError):
        tvd({"0": 1.0}, {"00": 1.0})


def test_size_limit():
    with pytest.raises(ResourceLimitError):
        initial_density(circuit(11, [F(1, 2)] * 11))
