from fractions import Fraction

import numpy as np
import pytest

from concordant.circuit import ALIASES, make_circuit
from concordant.generator import GATE_MODES, INIT_MODES, GenSpec, gen_concordant, gen_degenerate


def frame_matrix(us):
    out = np.ones((1, 1), dtype=complex)
    for u in us:
        out = np.kron(out, u)
    return out


def circuit(n, p0s, gates=(), measured=None):
    return make_circuit(n, [Fraction(p) for p in p0s], [(q, ALIASES[g] if isinstance(g, str) else g)
                                                        for g, q in gates], measured)


def concordant_corpus(count, seed0=0, max_n=7, depth=25):
    """Mixed init and gate modes, n in [2, max_n]."""
    out = []
    for s in range(count):
        n = 2 + s % (max_n - 1)
        spec = GenSpec(n, depth if s % 2 else depth // 2, seed0 + s, INIT_MODES[s % 3], GATE_MODES[(s // 3) % 3])
        out.append(gen_concordant(spec).circuit)
    return out


def degenerate_corpus(count, seed0=0):
    return [gen_degenerate(GenSpec(2 + s % 4, 15, seed0 + s, "with-ties")) for s in range(count)]


@pytest.fixture(scope="session")
def small_corpus():
    return concordant_corpus(40) + degenerate_corpus(20)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
