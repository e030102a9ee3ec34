"""Independent models used to cross-check certifier flags."""

from __future__ import annotations

import itertools

from .action_checker import ActionSpec
from .graph_core import DirectedMultigraph


def edge_automorphisms(g: DirectedMultigraph):
    """Edge permutations induced by vertex permutations preserving multiplicities.

    Parallel copies may be matched in any order, so each vertex automorphism
    contributes a product of bijections between parallel classes.
    """
    classes: dict = {}
    for e in g.edges:
        classes.setdefault((e.source, e.range), []).append(e.id)
    for perm in itertools.permutations(g.vertices):
        pi = dict(zip(g.vertices, perm))
        if any(len(classes.get((pi[s], pi[r]), [])) != len(ids) for (s, r), ids in classes.items()):
            continue
        keys = list(classes)
        choices = [itertools.permutations(classes[(pi[s], pi[r])]) for s, r in keys]
        for images in itertools.product(*choices):
            sigma = {}
            for (s, r), image in zip(keys, images):
                sigma.update(zip(classes[(s, r)], image))
            yield sigma


def flags_consistent_with_automorphisms(g: DirectedMultigraph, flags) -> list[str]:
    """Flags contradicted by the classical action of the automorphism group."""
    bad = []
    autos = list(edge_automorphisms(g))
    for flag in flags:
        if flag[0] == "ZERO":
            _, e, f = flag
            if any(sigma[f] == e for sigma in autos):
                bad.append(f"ZERO({e},{f}) but some automorphism maps {f} to {e}")
        else:
            e = flag[1]
            if any(sigma[e] != e for sigma in autos):
                bad.append(f"ONE({e}) but some automorphism moves {e}")
    return bad


def flags_consistent_with_action(a: ActionSpec, flags) -> list[str]:
    """Check ZERO(e,f) => q_ef = 0 and ONE(e) => q_ee* q_ee = 1 in an explicit action."""
    q = {}
    for e, row in a.coeffs.items():
        for f, c in row:
            q[(f, e)] = q[(f, e)] + c if (f, e) in q else c
    bad = []
    for flag in flags:
        if flag[0] == "ZERO":
            _, e, f = flag
            c = q.get((e, f))
            if c is not None and not c.is_zero():
                bad.append(f"ZERO({e},{f}) but q = {c}")
        else:
            e = flag[1]
            c = q.get((e, e))
            unit = type(c).unit(a.algebra) if c is not None else None
            if c is None or c.star() * c != unit:
                bad.append(f"ONE({e}) but q*q = {c.star() * c if c is not None else 0}")
    return bad
