"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 discordant step, 4 resource bound,
1 internal fault.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .circuit import Circuit, circuit_from_dict, circuit_to_dict
from .converter import TOL_EDGE, ConvertedProgram, convert
from .exceptions import CircuitError, DiscordError, GenerationError, InconsistencyError, ResourceLimitError
from .generator import GATE_MODES, INIT_MODES, GenSpec, gen_concordant, gen_degenerate, gen_discordant
from .oracle import (
    TOL_COMMUTATOR,
    MAX_QUBITS,
    dense_simulate,
    measurement_distribution,
    qubit_margins,
)
from .sampler import ENUM_LIMIT, exact_output_distribution, run_shots
from .smallmat import TOL_DEGENERACY, TOL_RANK, TOL_UNITARY

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_DISCORD, EXIT_RESOURCE = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _sample_names() -> list[str]:
    root = resources.files("concordant") / "samples"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_input(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    path = Path(source)
    if path.is_file():
        return path.read_text()
    name = source[:-5] if source.endswith(".json") else source
    name = name.split("/")[-1] if source.startswith("samples/") else name
    if name in _sample_names():
        return (resources.files("concordant") / "samples" / f"{name}.json").read_text()
    raise InputError(f"no such file or bundled sample: {source!r}")


def load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                           line=exc.lineno, column=exc.colno) from None
    if not isinstance(doc, dict):
        raise CircuitError("document must be a JSON object")
    return doc


def _tolerances(args) -> dict:
    return {
        "unitary": args.tol_unitary,
        "rank": args.tol_rank,
        "degeneracy": args.tol_degeneracy,
        "edge": args.tol_edge,
        "commutator": args.tol_commutator,
        "enum_limit": args.enum_limit,
    }


def _meta(args, **extra) -> dict:
    meta = {"tool": "concordant", "version": __version__, "command": args.command, "seed": args.seed,
            "tolerances": _tolerances(args)}
    meta.update(extra)
    return meta


def _emit(args, payload: dict, text_lines: list[str], out) -> None:
    meta = payload["meta"]
    if args.format == "structured":
        out.write(json.dumps(payload, indent=None if args.command == "run" else 2) + "\n")
        return
    out.write(f"# concordant {meta['version']}\n")
    out.write(f"# command: {meta['command']}\n")
    out.write(f"# seed: {meta['seed']}\n")
    tol = meta["tolerances"]
    out.write("# tolerances: " + " ".join(f"{k}={v}" for k, v in tol.items()) + "\n")
    for k, v in meta.items():
        if k not in ("tool", "version", "command", "seed", "tolerances"):
            out.write(f"# {k}: {v}\n")
    for line in text_lines:
        out.write(line + "\n")


def _circuit(args) -> Circuit:
    doc = load_document(read_input(args.input))
    return circuit_from_dict(doc, tol_unitary=args.tol_unitary)


def _convert(args, circuit: Circuit) -> ConvertedProgram:
    return convert(circuit, tol_rank=args.tol_rank, tol_degeneracy=args.tol_degeneracy, tol_edge=args.tol_edge)


def _dist_lines(dist: dict[str, float]) -> list[str]:
    return [f"{h} {p:.17g}" for h, p in dist.items()]


def cmd_convert(args, out):
    prog = _convert(args, _circuit(args))
    doc = prog.to_dict()
    lines = [f"A {row}" for row in doc["A"]] + [f"b {doc['b']}", f"flips {doc['flips']}"]
    for rec in doc["audit"]:
        classes = " ".join("{" + ",".join(c) + "}" for c in rec["classes"])
        perm = " ".join(f"{a}->{b}" for a, b in rec["R"].items())
        lines.append(f"gate {rec['t']} q={rec['q']} classes={classes} R: {perm}")
    payload = {"meta": _meta(args, two_qubit_gates=len(doc["audit"])), "program": doc}
    _emit(args, payload, lines, out)


def _program_for_run(args) -> ConvertedProgram:
    doc = load_document(read_input(args.input))
    if doc.get("format") == "concordant-program":
        return ConvertedProgram.from_dict(doc)
    if "program" in doc and isinstance(doc["program"], dict):
        return ConvertedProgram.from_dict(doc["program"])
    return _convert(args, circuit_from_dict(doc, tol_unitary=args.tol_unitary))


def cmd_run(args, out):
    if args.shots < 1:
        raise InputError("--shots must be at least 1")
    prog = _program_for_run(args)
    shots = run_shots(prog, args.shots, args.seed)
    payload = {"meta": _meta(args, shots=args.shots, rng="philox"), "shots": shots}
    _emit(args, payload, shots, out)


def cmd_dist(args, out):
    prog = _program_for_run(args)
    dist = exact_output_distribution(prog, args.enum_limit)
    _emit(args, {"meta": _meta(args), "distribution": dist}, _dist_lines(dist), out)


def cmd_oracle(args, out):
    circuit = _circuit(args)
    if circuit.n_qubits > MAX_QUBITS:
        raise ResourceLimitError(f"dense oracle is limited to {MAX_QUBITS} qubits")
    states = dense_simulate(circuit)
    dist = measurement_distribution(states[-1], circuit.measured, circuit.n_qubits)
    _emit(args, {"meta": _meta(args), "distribution": dist}, _dist_lines(dist), out)


def cmd_check(args, out):
    circuit = _circuit(args)
    if circuit.n_qubits > MAX_QUBITS:
        raise ResourceLimitError(f"dense oracle is limited to {MAX_QUBITS} qubits")
    steps = []
    first = None
    for t, rho in enumerate(dense_simulate(circuit)):
        margin = float(qubit_margins(rho, circuit.n_qubits).max())
        steps.append(margin)
        if first is None and t > 0 and margin > args.tol_commutator:
            first = t - 1
    concordant = first is None
    payload = {"meta": _meta(args), "concordant": concordant, "first_discord_step": first,
               "margins": steps}
    lines = [f"concordant {str(concordant).lower()}", f"first_discord_step {first if first is not None else 'none'}"]
    lines += [f"state {t} margin {m:.3e}" for t, m in enumerate(steps)]
    _emit(args, payload, lines, out)


def cmd_gen(args, out):
    spec = GenSpec(args.qubits, args.depth, args.seed, args.init_mode, args.gate_mode)
    extra = {"kind": args.kind, "qubits": args.qubits, "depth": args.depth,
             "init_mode": args.init_mode, "gate_mode": args.gate_mode}
    if args.kind == "concordant":
        circuit = gen_concordant(spec).circuit
    elif args.kind == "degenerate":
        spec = GenSpec(args.qubits, args.depth, args.seed, "with-ties", "adversarial")
        circuit = gen_degenerate(spec)
    else:
        case = gen_discordant(spec)
        circuit = case.circuit
        extra["first_discord_step"] = case.first_discord
        extra["margin"] = case.margin
    doc = circuit_to_dict(circuit)
    doc["meta"] = _meta(args, **extra)
    out.write(json.dumps(doc, indent=None if args.format == "structured" else 1) + "\n")


COMMANDS = {
    "convert": (cmd_convert, "convert a circuit into a permutation and product basis"),
    "run": (cmd_run, "sample measurement shots"),
    "dist": (cmd_dist, "exact output distribution by enumeration"),
    "oracle": (cmd_oracle, "output distribution from dense simulation"),
    "check": (cmd_check, "dense concordance check of every step"),
    "gen": (cmd_gen, "generate a random circuit"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="concordant", description="Classical simulation of concordant circuits.")
    parser.add_argument("--version", action="version", version=f"concordant {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol-unitary", type=float, default=TOL_UNITARY)
    common.add_argument("--tol-rank", type=float, default=TOL_RANK)
    common.add_argument("--tol-degeneracy", type=float, default=TOL_DEGENERACY)
    common.add_argument("--tol-edge", type=float, default=TOL_EDGE)
    common.add_argument("--tol-commutator", type=float, default=TOL_COMMUTATOR)
    common.add_argument("--enum-limit", type=int, default=ENUM_LIMIT)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name != "gen":
            p.add_argument("input", nargs="?", default="-", help="path, '-' for stdin, or a bundled sample name")
        if name == "run":
            p.add_argument("--shots", type=int, default=1000)
        if name == "gen":
            p.add_argument("--kind", choices=("concordant", "degenerate", "discordant"), default="concordant")
            p.add_argument("--qubits", type=int, default=4)
            p.add_argument("--depth", type=int, default=10)
            p.add_argument("--init-mode", choices=INIT_MODES, default="generic-rationals")
            p.add_argument("--gate-mode", choices=GATE_MODES, default="full-concordant")
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if args.seed < 0:
        err.write("error: --seed must be non-negative\n")
        return EXIT_INPUT
    handler = COMMANDS[args.command][0]
    try:
        handler(args, out)
    except DiscordError as exc:
        err.write(f"discord at gate {exc.gate_index}: {exc.reason}\n")
        payload = {"meta": _meta(args), "error": "discord", "gate_index": exc.gate_index,
                   "reason": exc.reason, "detail": exc.detail}
        if args.format == "structured":
            out.write(json.dumps(payload) + "\n")
        else:
            out.write(f"# discord gate {exc.gate_index} reason {exc.reason}\n")
        return EXIT_DISCORD
    except (ResourceLimitError, GenerationError) as exc:
        err.write(f"resource limit: {exc}\n")
        return EXIT_RESOURCE
    except (CircuitError, InputError, ValueError, KeyError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    except InconsistencyError as exc:
        err.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
