import pytest

from qsym.action_checker import doubling_action
from qsym.census import canonical_form, census_matrices, selfcheck_ordering
from qsym.certifier import certify, saturate
from qsym.families import NOT_RIGID_PARALLEL_EDGES
from qsym.graph_core import graph_from_matrix
from qsym.oracles import edge_automorphisms, flags_consistent_with_action, flags_consistent_with_automorphisms

CENSUS = list(census_matrices(iso_classes=True))


def test_census_class_counts():
    by_size = {}
    for m in CENSUS:
        by_size[len(m)] = by_size.get(len(m), 0) + 1
    # one vertex: loop or double loop
    assert by_size[1] == 2
    assert sum(by_size.values()) == len(CENSUS)
    assert len(set(CENSUS)) == len(CENSUS)


def test_canonical_form_is_invariant():
    m = ((0, 1, 0), (0, 0, 2), (1, 0, 0))
    p = ((0, 2, 0), (0, 0, 1), (1, 0, 0))
    assert canonical_form(m) == canonical_form(p)


def test_selfcheck_iso_classes():
    summary = selfcheck_ordering(iso_classes=True)
    assert summary.ok, summary.mismatches
    assert summary.total == len(CENSUS)
    assert summary.counts["n=1 R"] == 1


def test_automorphisms_of_k2():
    autos = list(edge_automorphisms(graph_from_matrix([[0, 1], [1, 0]])))
    assert {"e12": "e21", "e21": "e12"} in autos and len(autos) == 2
    double = list(edge_automorphisms(graph_from_matrix([[0, 2], [0, 0]])))
    assert len(double) == 2


def test_oracles_catch_a_wrong_flag():
    g = graph_from_matrix([[0, 1], [1, 0]])
    assert flags_consistent_with_automorphisms(g, {("ZERO", "e12", "e21")})
    h = graph_from_matrix([[1, 2], [0, 0]])
    a = doubling_action(h, "e12_1", "e12_2")
    assert flags_consistent_with_action(a, {("ZERO", "e12_1", "e12_2")})
    assert flags_consistent_with_action(a, {("ONE", "e12_1")})
    assert not flags_consistent_with_action(a, {("ONE", "e11"), ("ZERO", "e11", "e12_1")})


def test_census_saturation_is_sound():
    """Every derived flag must hold in every explicit action we can build.

    Two independent models: the classical action of the graph's automorphism
    group, and the doubling on each parallel pair.
    """
    problems = []
    for m in CENSUS:
        g = graph_from_matrix(m)
        result = saturate(g)
        edges = len(g.edges)
        assert result.state_changes <= edges * edges + edges
        bad = flags_consistent_with_automorphisms(g, result.state.flags)
        seen = set()
        for e in g.edges:
            twins = [f.id for f in g.edges if (f.source, f.range) == (e.source, e.range)]
            if len(twins) == 2 and tuple(twins) not in seen:
                seen.add(tuple(twins))
                bad += flags_consistent_with_action(doubling_action(g, *twins), result.state.flags)
        if bad:
            problems.append((m, bad))
    assert not problems, problems[:3]


@pytest.mark.parametrize("m", [m for m in CENSUS if any(x >= 2 for row in m for x in row)][:40])
def test_parallel_edges_never_rigid(m):
    assert certify(graph_from_matrix(m)).kind == NOT_RIGID_PARALLEL_EDGES

