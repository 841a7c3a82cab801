import json
from fractions import Fraction as F

import numpy as np
import pytest

from concordant.circuit import ALIASES, circuit_from_dict, circuit_to_dict, make_circuit, parse_circuit, serialize_circuit
from concordant.exceptions import CircuitError

from conftest import concordant_corpus, degenerate_corpus


def entries(m):
    return [[float(z.real), float(z.imag)] for z in np.asarray(m, dtype=complex).reshape(-1)]


def test_minimal_document():
    c = parse_circuit('{"qubits": 1, "init": [[1, 2], [1, 2]], "gates": [], "measure": [0]}')
    assert c.n_qubits == 1 and c.init == (F(1, 2),) and c.gates == () and c.measured == (0,)


def test_row_form_and_compact_form_agree():
    a = parse_circuit('{"qubits": 2, "init": [[[2, 3], [1, 3]], [[1, 1], [0, 1]]]}')
    b = parse_circuit('{"qubits": 2, "init": [[2, 3], [1, 0]]}')
    assert a == b
    assert a.measured == (0, 1)


def test_cnot_entries():
    doc = {"qubits": 2, "init": [[1, 2], [1, 2]], "gates": [{"q": [0, 1], "m": entries(ALIASES["CNOT"])}]}
    c = circuit_from_dict(doc)
    assert c.gates[0].qubits == (0, 1)
    assert np.array_equal(c.gates[0].matrix, ALIASES["CNOT"])


def test_non_unitary_names_gate():
    bad = np.eye(2) * 1.05
    doc = {"qubits": 1, "init": [[1, 2]], "gates": [{"q": 0, "gate": "X"}, {"q": 0, "m": entries(bad)}]}
    with pytest.raises(CircuitError) as info:
        circuit_from_dict(doc)
    assert info.value.index == 1
    assert "gate 1" in str(info.value)


def test_syntax_error_has_location():
    with pytest.raises(CircuitError) as info:
        parse_circuit('{"qubits": 1,\n "init": [[1, 2]],,}')
    assert info.value.line == 2 and info.value.column is not None


@pytest.mark.parametrize("init, msg", [
    ([[[1, 2], [1, 3]]], "sum to 1"),
    ([[0.5, 0.5]], "expected"),
    ([[1, 0, 0]], "expected"),
    ([[3, 2]], "outside"),
])
def test_bad_probability_rows(init, msg):
    with pytest.raises(CircuitError) as info:
        circuit_from_dict({"qubits": 1, "init": init})
    assert msg in str(info.value) and info.value.index == 0


def test_targets_validated():
    with pytest.raises(CircuitError):
        make_circuit(2, [F(1, 2)] * 2, [((0, 0), ALIASES["SWAP"])])
    with pytest.raises(CircuitError):
        make_circuit(2, [F(1, 2)] * 2, [((0, 2), ALIASES["SWAP"])])
    with pytest.raises(CircuitError):
        make_circuit(2, [F(1, 2)] * 2, [((0, 1), ALIASES["X"])])
    with pytest.raises(CircuitError):
        make_circuit(2, [F(1, 2)] * 2, measured=[0, 0])


def test_descending_targets_are_normalized():
    c = make_circuit(2, [F(1, 2)] * 2, [((1, 0), ALIASES["CNOT"])])
    g = c.gates[0]
    assert g.qubits == (0, 1)
    # control on qubit 1, target qubit 0
    assert np.array_equal(g.matrix, ALIASES["SWAP"] @ ALIASES["CNOT"] @ ALIASES["SWAP"])


def test_round_trip_examples():
    texts = [
        '{"qubits": 1, "init": [[1, 2], [1, 2]], "measure": [0]}',
        json.dumps({"qubits": 2, "init": [[1, 2], [1, 2]], "gates": [{"q": [0, 1], "m": entries(ALIASES["CNOT"])}]}),
        json.dumps({"qubits": 2, "init": [[2, 3], [1, 1]], "gates": [{"q": 1, "gate": "H"}], "measure": [1]}),
    ]
    for t in texts:
        c = parse_circuit(t)
        assert parse_circuit(serialize_circuit(c)) == c


def test_round_trip_corpus():
    corpus = concordant_corpus(180) + degenerate_corpus(20)
    for c in corpus:
        again = parse_circuit(serialize_circuit(c))
        assert again == c
    assert circuit_to_dict(corpus[0])["init"][0][0][1] > 0
