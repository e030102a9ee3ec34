"""Command-line front end: ``qsym <command> ...``."""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import sys
import time

from . import census
from .action_checker import diagonal_action, doubling_action, verify_action
from .certifier import SoundnessFault, certify
from .cstar_engine import DomainError, NormalFormTruncated, dimension, normal_form
from .families import list_families, make_family
from .graph_core import (
    GraphError,
    adjacency_matrix,
    canonical_ordering,
    check_property_R,
    emit_dot,
    format_graph,
    parse_graph,
)

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

# (family, parameter) candidates tried by `classify`, keyed by vertex count
_CLASSIFY_PARAMS = {
    "P": lambda n: [(n,)] if n >= 2 else [],
    "T": lambda n: [()] if n == 2 else [],
    "L_odd": lambda n: [(n,)],
    "L_bar": lambda n: [(n,)],
    "M": lambda n: [(n - 1,)] if n >= 2 else [],
    "K2": lambda n: [()] if n == 2 else [],
    "L11": lambda n: [()] if n == 2 else [],
    "Gamma0": lambda n: [()] if n == 3 else [],
    "P23": lambda n: [()] if n == 5 else [],
    "L2prime": lambda n: [()] if n == 2 else [],
    "L3sup2": lambda n: [()] if n == 2 else [],
}


class CliError(Exception):
    pass


def _read_graph(path: str):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None
    digest = hashlib.sha256(data).hexdigest()
    return parse_graph(data.decode("utf-8")), digest


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _same_up_to_order(g, h) -> bool:
    if len(g.vertices) != len(h.vertices) or len(g.edges) != len(h.edges):
        return False
    target = adjacency_matrix(h).entries
    order = canonical_ordering(g)
    if order is not None and adjacency_matrix(g, order).entries == target:
        return True
    if len(g.vertices) > 7:
        return False
    return any(adjacency_matrix(g, p).entries == target for p in itertools.permutations(g.vertices))


def match_family(g):
    n = len(g.vertices)
    for name, params_for in _CLASSIFY_PARAMS.items():
        for params in params_for(n):
            try:
                spec = make_family(name, params)
            except GraphError:
                continue
            if _same_up_to_order(g, spec.graph):
                return spec
    return None


# ---------------------------------------------------------------------------
# commands; each returns (digest, result payload, optional derivation, text)

def cmd_check_r(args):
    g, digest = _read_graph(args.graph)
    report = check_property_R(g)
    d = report.to_dict()
    text = "holds (R)" if report.holds else "fails (R): violated " + ", ".join(d["violated"])
    return digest, d, None, text


def cmd_order(args):
    g, digest = _read_graph(args.graph)
    order = canonical_ordering(g)
    if order is None:
        return digest, {"ordering": None, "matrix": None}, None, "no canonical ordering: (R) fails"
    m = adjacency_matrix(g, order).as_lists()
    text = "ordering: " + " ".join(order) + "\n" + "\n".join(" ".join(map(str, r)) for r in m)
    return digest, {"ordering": list(order), "matrix": m}, None, text


def _certify_payload(args, g):
    verdict = certify(g, antipode=not args.no_antipode, cap=args.selector_cap)
    payload = verdict.to_dict(trace=args.trace)
    derivation = payload.pop("steps") if args.trace else None
    return verdict, payload, derivation


def cmd_certify(args):
    g, digest = _read_graph(args.graph)
    verdict, payload, derivation = _certify_payload(args, g)
    text = _verdict_text(verdict, derivation)
    return digest, payload, derivation, text


def cmd_classify(args):
    g, digest = _read_graph(args.graph)
    verdict, payload, derivation = _certify_payload(args, g)
    spec = match_family(g)
    payload["property_R"] = check_property_R(g).to_dict()
    payload["family"] = spec.to_dict() if spec else None
    text = _verdict_text(verdict, derivation)
    if spec:
        params = ",".join(map(str, spec.parameters))
        text += f"\nfamily: {spec.name}({params})  algebra: {spec.algebra_label}"
    return digest, payload, derivation, text


def _verdict_text(verdict, steps) -> str:
    lines = [f"verdict: {verdict.kind}"]
    lines += [f"  {c}" for c in verdict.citations]
    if verdict.residual_pairs:
        lines.append("residual pairs: " + " ".join(f"({e},{f})" for e, f in verdict.residual_pairs))
    for i, step in enumerate(steps or []):
        lines.append(f"{i:4d} {step['rule']} {step['params']} -> {', '.join(step['produced'])}")
    return "\n".join(lines)


def cmd_nf(args):
    g, digest = _read_graph(args.graph)
    try:
        result = normal_form(args.word, g, cap=args.cap, order=args.order)
    except NormalFormTruncated as exc:
        payload = {"normal_form": str(exc.partial), "terms": exc.partial.to_json(), "truncated": True}
        return digest, payload, None, f"{exc.partial}  (truncated: {exc})"
    payload = {"normal_form": str(result), "terms": result.to_json(), "truncated": False}
    return digest, payload, None, str(result)


def cmd_dim(args):
    g, digest = _read_graph(args.graph)
    d = dimension(g)
    return digest, {"dimension": d}, None, str(d)


def cmd_family(args):
    if args.list or args.name is None:
        rows = [{"name": n, "arity": a, "citation": c} for n, a, c in list_families()]
        text = "\n".join(f"{r['name']:8s} arity {r['arity']}  {r['citation']}" for r in rows)
        return _digest("family --list"), {"families": rows}, None, text
    spec = make_family(args.name, args.params)
    payload = spec.to_dict()
    payload["graph"] = format_graph(spec.graph)
    digest = _digest(" ".join(["family", args.name, *map(str, args.params)]))
    return digest, payload, None, payload["graph"].rstrip("\n")


def cmd_verify_action(args):
    g, digest = _read_graph(args.graph)
    if args.doubling:
        action = doubling_action(g, *args.doubling)
    else:
        action = diagonal_action(g)
    report = verify_action(g, action)
    payload = {"action": action.to_dict(), **report.to_dict()}
    lines = [f"{action.label}: {'ok' if report.ok else 'FAILED'} ({len(report.checks)} checks)"]
    for c in report.failures:
        lines.append(f"  violated: {c.relation}  residual {c.residual}")
    return digest, payload, None, "\n".join(lines)


def cmd_emit_dot(args):
    g, digest = _read_graph(args.graph)
    dot = emit_dot(g)
    return digest, {"dot": dot}, None, dot.rstrip("\n")


def cmd_selfcheck(args):
    summary = census.selfcheck_ordering(iso_classes=args.iso)
    text = "\n".join(f"{k}: {v}" for k, v in sorted(summary.counts.items()))
    text += f"\ntotal {summary.total}, mismatches {len(summary.mismatches)}"
    for m in summary.mismatches:
        text += f"\n  mismatch: {[list(r) for r in m]}"
    return _digest(f"selfcheck iso={args.iso}"), summary.to_dict(), None, text


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsym", description="Quantum symmetry tools for graph C*-algebras.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, graph=True):
        p = sub.add_parser(name, help=help_text)
        if graph:
            p.add_argument("graph", help="graph file (edge-list format)")
        p.add_argument("--json", action="store_true", help="print a JSON report")
        p.set_defaults(func=func)
        return p

    add("check-r", cmd_check_r, "check property (R)")
    add("order", cmd_order, "canonical vertex ordering")
    for name, func in (("certify", cmd_certify), ("classify", cmd_classify)):
        p = add(name, func, "decide rigidity of the quantum symmetry")
        p.add_argument("--trace", action="store_true", help="include the derivation steps")
        p.add_argument("--no-antipode", action="store_true", help="disable the antipode rule")
        p.add_argument("--selector-cap", type=int, default=None, help="partition selector cap")
    p = add("nf", cmd_nf, "normal form of a generator word")
    p.add_argument("word", help='word such as "S*.e11 S.e12"')
    p.add_argument("--cap", type=int, default=8, help="path length cap on cyclic graphs")
    p.add_argument("--order", choices=["ltr", "rtl"], default="ltr")
    add("dim", cmd_dim, "dimension of C*(graph) for acyclic graphs")
    p = add("family", cmd_family, "print a named family graph", graph=False)
    p.add_argument("name", nargs="?")
    p.add_argument("params", nargs="*", type=int)
    p.add_argument("--list", action="store_true")
    p = add("verify-action", cmd_verify_action, "check an action against the graph relations")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--doubling", nargs=2, metavar=("E1", "E2"))
    group.add_argument("--diagonal", action="store_true")
    add("emit-dot", cmd_emit_dot, "emit Graphviz DOT")
    p = add("selfcheck", cmd_selfcheck, "census check of the canonical ordering criterion", graph=False)
    p.add_argument("--iso", action="store_true", help="one graph per isomorphism class")
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    start = time.perf_counter()
    command = list(argv if argv is not None else sys.argv[1:])
    status = EXIT_OK
    try:
        digest, result, derivation, text = args.func(args)
        if args.command == "selfcheck" and result["mismatches"]:
            status = EXIT_DOMAIN
    except (CliError, GraphError, DomainError, SoundnessFault, UnicodeDecodeError) as exc:
        if args.json:
            print(json.dumps({"command": command, "error": str(exc)}, indent=2), file=stdout)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.json:
        report = {
            "command": command,
            "input_digest": digest,
            "result": result,
            "derivation": derivation,
            "timing": {"seconds": round(time.perf_counter() - start, 6)},
        }
        print(json.dumps(report, indent=2), file=stdout)
    else:
        print(text, file=stdout)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
