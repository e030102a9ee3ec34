"""Exhaustive enumeration of small connected digraphs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .graph_core import (
    check_property_R,
    exists_canonical_permutation,
    graph_from_matrix,
    is_connected,
)

Matrix = tuple  # tuple[tuple[int, ...], ...]


def _permute(m: Matrix, order) -> Matrix:
    return tuple(tuple(m[i][j] for j in order) for i in order)


def canonical_form(m: Matrix) -> Matrix:
    """Lexicographically least matrix over all simultaneous row/column permutations."""
    return min(_permute(m, order) for order in itertools.permutations(range(len(m))))


def _connected(m: Matrix) -> bool:
    n = len(m)
    return all(any(m[v][j] or m[j][v] for j in range(n)) for v in range(n))


def matrices(n: int, max_mult: int):
    for flat in itertools.product(range(max_mult + 1), repeat=n * n):
        m = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(n))
        if _connected(m):
            yield m


def census_matrices(iso_classes: bool = True):
    """Connected digraphs with <= 3 vertices and multiplicity <= 2, plus simple 4-vertex ones."""
    plan = [(1, 2), (2, 2), (3, 2), (4, 1)]
    for n, mult in plan:
        seen = set()
        for m in matrices(n, mult):
            if iso_classes:
                c = canonical_form(m)
                if c in seen:
                    continue
                seen.add(c)
                m = c
            yield m


@dataclass
class SelfcheckSummary:
    total: int = 0
    counts: dict = field(default_factory=dict)
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "counts": dict(sorted(self.counts.items())),
            "mismatches": [[list(r) for r in m] for m in self.mismatches],
        }


def selfcheck_ordering(iso_classes: bool = False) -> SelfcheckSummary:
    """Property (R) versus existence of a canonical ordering, on the whole census."""
    summary = SelfcheckSummary()
    for m in census_matrices(iso_classes):
        g = graph_from_matrix(m)
        assert is_connected(g)
        holds = check_property_R(g).holds
        canon = exists_canonical_permutation(g) is not None
        key = f"n={len(m)} {'R' if holds else 'not R'}"
        summary.counts[key] = summary.counts.get(key, 0) + 1
        summary.total += 1
        if holds != canon:
            summary.mismatches.append(m)
    return summary
