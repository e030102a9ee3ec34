import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsym.action_checker import verify_action
from qsym.certifier import (
    INCONCLUSIVE,
    K2_CITATION,
    L11_CITATION,
    ONE,
    FlagMatrix,
    Selector,
    SoundnessFault,
    Z,
    certify,
    enumerate_selectors,
    init_state,
    replay,
    rule_antipode,
    rule_balance,
    rule_column,
    rule_l1,
    rule_l2,
    rule_l3,
    rule_partition,
    rule_unitarity,
    saturate,
)
from qsym.families import KNOWN_LARGER, NOT_RIGID_PARALLEL_EDGES, RIGID, fixture_specs, make_family
from qsym.graph_core import DirectedMultigraph, PreconditionError, graph_from_matrix, is_connected


def fam(name, *params):
    return make_family(name, params).graph


def state_with(g, *flags):
    s = init_state(g)
    s.flags.update(flags)
    return s


LBAR2 = fam("L_bar", 2)  # loops e11, e22 and the edge e12


# ---------------------------------------------------------------------------
# initial state

def test_init_state_sizes():
    assert init_state(fam("P", 2)).size() == 1
    t = init_state(fam("T"))
    assert t.size() == 4 and not t.flags
    assert init_state(fam("L_odd", 3)).size() == 36


def test_init_state_rejects_disconnected():
    with pytest.raises(PreconditionError):
        init_state(DirectedMultigraph.build([1, 2, 3], [("a", 1, 2)]))


# ---------------------------------------------------------------------------
# individual rules

def test_l1_examples():
    p3 = fam("P", 3)
    assert rule_l1(p3, init_state(p3), "e12", "e12").produced == (Z("e12", "e23"),)
    g0 = fam("Gamma0")
    assert rule_l1(g0, init_state(g0), "e12", "e12").produced == (Z("e12", "e23"),)
    t = fam("T")
    assert not rule_l1(t, init_state(t), "e11", "e12").applicable


def test_l1_needs_upstream_zeros():
    p3 = fam("P", 3)
    # upstream of s(e23) is e12, so ZERO(e12, h) is required
    assert not rule_l1(p3, init_state(p3), "e12", "e23").applicable
    lb = fam("L_bar", 3)
    s = init_state(lb)
    assert not rule_l1(lb, s, "e22", "e23").applicable
    s.flags.update({Z("e12", "e22"), Z("e22", "e22")})
    assert not rule_l1(lb, s, "e22", "e23").applicable


def test_l2_examples():
    t = fam("T")
    assert rule_l2(t, init_state(t), "e11", "e12").produced == (Z("e12", "e11"),)
    p4 = fam("P", 4)
    assert Z("e34", "e12") in rule_l2(p4, init_state(p4), "e12", "e34").produced
    lb = fam("L_bar", 3)
    s = init_state(lb)
    assert not any(rule_l2(lb, s, h, e).applicable for h in lb.edge_ids for e in lb.edge_ids)


def test_l2_covers_all_edges_into_the_sink():
    m2 = fam("M", 2)  # vertex 3 is a sink fed by e13 and e23
    produced = rule_l2(m2, init_state(m2), "e11", "e23").produced
    assert set(produced) == {Z("e13", "e11"), Z("e23", "e11")}


def test_l3_examples():
    s = state_with(LBAR2, Z("e11", "e22"))
    assert rule_l3(LBAR2, s, "e12", "e11", "backward").produced == (Z("e11", "e12"),)
    assert not rule_l3(LBAR2, init_state(LBAR2), "e12", "e11", "backward").applicable
    with pytest.raises(PreconditionError):
        rule_l3(LBAR2, init_state(LBAR2), "e11", "e12", "forward")


def test_l3_forward():
    s = state_with(LBAR2, Z("e11", "e12"))
    assert rule_l3(LBAR2, s, "e12", "e11", "forward").produced == (Z("e11", "e22"),)


def test_antipode_examples():
    g0 = fam("Gamma0")
    assert rule_antipode(g0, state_with(g0, Z("e12", "e23")), "e12", "e23").produced == (Z("e23", "e12"),)
    t = fam("T")
    assert rule_antipode(t, state_with(t, Z("e12", "e11")), "e12", "e11").produced == (Z("e11", "e12"),)
    both = state_with(t, Z("e12", "e11"), Z("e11", "e12"))
    firing = rule_antipode(t, both, "e12", "e11")
    assert firing.applicable and firing.produced == ()


def test_unitarity_examples():
    t = fam("T")
    assert rule_unitarity(t, state_with(t, Z("e11", "e12")), "e11").produced == (ONE("e11"),)
    assert rule_unitarity(t, state_with(t, ONE("e12")), "e12").produced == (Z("e12", "e11"),)
    p2 = fam("P", 2)
    assert rule_unitarity(p2, init_state(p2), "e12").produced == (ONE("e12"),)
    assert not rule_unitarity(t, init_state(t), "e11").applicable


def test_column_rule():
    t = fam("T")
    assert rule_column(t, state_with(t, Z("e12", "e11")), "e11").produced == (ONE("e11"),)
    assert rule_column(t, state_with(t, ONE("e11")), "e11").produced == (Z("e12", "e11"),)


def test_balance_examples():
    g0 = fam("Gamma0")
    s = state_with(g0, Z("e23", "e12"))
    assert rule_balance(g0, s, "e12", "e32", "3").produced == (Z("e23", "e32"),)
    p4 = fam("P", 4)
    s = init_state(p4)
    pairs = [(e, f) for e in p4.edge_ids for f in p4.edge_ids]
    assert not any(rule_balance(p4, s, e, f, w).applicable for e, f in pairs for w in p4.vertices)
    done = state_with(g0, Z("e23", "e12"), Z("e23", "e32"))
    assert rule_balance(g0, done, "e12", "e32", "3").produced == ()


def test_selector_examples():
    first = next(enumerate_selectors(fam("T")))
    assert first.choice == (("1", "In", "e11"), ("2", "In", "e12"))
    (p3,) = list(enumerate_selectors(fam("P", 3)))
    assert p3.out_vertices == ("1",)
    assert p3.in_edges() == [("2", "e12"), ("3", "e23")]
    l9 = next(enumerate_selectors(fam("L_odd", 5)))
    assert l9.in_edges() == [("1", "e11"), ("2", "e12"), ("3", "e23"), ("4", "e34"), ("5", "e45")]


def test_selectors_respect_cap_and_sources():
    g = fam("L_odd", 5)
    assert len(list(enumerate_selectors(g))) == 1 * 2 * 3 * 4 * 5
    assert len(list(enumerate_selectors(g, cap=7))) == 7
    trace = []
    assert list(enumerate_selectors(fam("P23"), trace=trace)) == []
    assert "2 vertices without in-edges" in trace[0]


def test_selector_cap_env(monkeypatch):
    monkeypatch.setenv("QSYM_SELECTOR_CAP", "3")
    assert len(list(enumerate_selectors(fam("L_odd", 5)))) == 3


def test_partition_examples():
    t = fam("T")
    sel = next(enumerate_selectors(t))
    assert rule_partition(t, state_with(t, Z("e12", "e11")), sel, "2").produced == (ONE("e12"),)
    sel = next(enumerate_selectors(LBAR2))
    firing = rule_partition(LBAR2, state_with(LBAR2, Z("e11", "e12")), sel, "1")
    assert ONE("e11") in firing.produced
    assert set(firing.produced) == {ONE("e11"), Z("e11", "e22")}
    p3 = fam("P", 3)
    (sel,) = list(enumerate_selectors(p3))
    assert not rule_partition(p3, init_state(p3), sel, "1").applicable


def test_partition_out_term_must_vanish():
    p3 = fam("P", 3)
    (sel,) = list(enumerate_selectors(p3))
    # at u = 2 the Out contribution from vertex 1 involves q_{e23,e12}
    assert not rule_partition(p3, init_state(p3), sel, "2").applicable
    firing = rule_partition(p3, state_with(p3, Z("e23", "e12")), sel, "2")
    assert firing.applicable and Z("e23", "e12") in firing.consumed


def test_partition_restricts_the_single_surviving_row():
    sel = Selector((("1", "In", "e11"), ("2", "In", "e12")))
    s = state_with(LBAR2, Z("e22", "e11"), Z("e22", "e12"))
    firing = rule_partition(LBAR2, s, sel, "2")
    # row e22 is gone; row e12 keeps Q_{e12,e11} and Q_{e12,e12}, so q_{e12,e22} = 0
    assert not firing.fault
    assert firing.produced == (Z("e12", "e22"),)


# ---------------------------------------------------------------------------
# saturation and verdicts

def test_saturate_examples():
    result = saturate(fam("P", 3))
    assert result.state.all_offdiagonal_zero()
    assert all(result.state.one(e) for e in result.state.edges)
    k2 = saturate(fam("K2"))
    assert k2.state.unknown_pairs()
    assert saturate(fam("L_odd", 5)).state.all_offdiagonal_zero()


def test_saturation_is_deterministic():
    a, b = saturate(fam("M", 3)), saturate(fam("M", 3))
    assert [s.to_dict() for s in a.derivation.steps] == [s.to_dict() for s in b.derivation.steps]


def test_certify_examples():
    assert certify(fam("M", 3)).kind == RIGID
    v = certify(fam("L2prime"))
    assert v.kind == NOT_RIGID_PARALLEL_EDGES
    assert verify_action(v.action.graph, v.action).ok
    assert certify(fam("Gamma0")).kind == RIGID


def test_known_larger_citations():
    k2 = certify(fam("K2"))
    assert k2.kind == KNOWN_LARGER and k2.citations == [K2_CITATION]
    assert k2.residual_pairs == [("e12", "e21"), ("e21", "e12")]
    l11 = certify(fam("L11"))
    assert l11.kind == KNOWN_LARGER and l11.citations == [L11_CITATION]
    # relabelled K2 still matches
    relabelled = DirectedMultigraph.build(["b", "a"], [("x", "a", "b"), ("y", "b", "a")])
    assert certify(relabelled).kind == KNOWN_LARGER


def test_inconclusive_outside_known_patterns():
    three_cycle = graph_from_matrix([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    v = certify(three_cycle)
    assert v.kind == INCONCLUSIVE
    assert len(v.residual_pairs) == 6


def test_certify_rejects_disconnected():
    with pytest.raises(PreconditionError):
        certify(DirectedMultigraph.build([1, 2, 3], [("a", 1, 2)]))


@pytest.mark.parametrize("spec", fixture_specs(), ids=lambda s: s.name)
def test_fixture_verdicts_and_replay(spec):
    v = certify(spec.graph)
    assert v.kind == spec.expected_verdict
    if v.derivation is not None:
        assert replay(spec.graph, v.derivation).flags == v.state.flags
        edges = len(spec.graph.edges)
        assert v.state_changes <= edges * edges + edges


@pytest.mark.parametrize("n", range(2, 7))
def test_paths_certify_without_antipode(n):
    v = certify(fam("P", n), antipode=False)
    assert v.kind == RIGID
    assert "antipode" not in v.derivation.rules_used()


def test_trace_records_antipode_use():
    v = certify(fam("T"))
    assert "antipode" in v.derivation.rules_used()
    assert "antipode" not in certify(fam("T"), antipode=False).derivation.rules_used()


def test_replay_rejects_tampering():
    g = fam("Gamma0")
    d = saturate(g).derivation
    dropped = dataclasses.replace(d, steps=d.steps[1:])
    with pytest.raises(SoundnessFault):
        replay(g, dropped)
    step = d.steps[0]
    forged = dataclasses.replace(step, produced=step.produced + (Z("e32", "e12"),))
    with pytest.raises(SoundnessFault):
        replay(g, dataclasses.replace(d, steps=[forged] + d.steps[1:]))


def test_verdict_json_shape():
    out = certify(fam("T")).to_dict()
    assert list(out)[:5] == ["verdict", "rules_used", "steps", "residual_pairs", "citations"]
    assert out["flags"] == [["1", "0"], ["0", "1"]]


# ---------------------------------------------------------------------------
# properties

small_matrix = st.integers(1, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=n, max_size=n)
)


@settings(max_examples=80, deadline=None)
@given(small_matrix, st.randoms(use_true_random=False))
def test_saturation_commutes_with_relabelling(m, rnd):
    g = graph_from_matrix(m)
    if not is_connected(g):
        return
    n = len(m)
    perm = list(range(n))
    rnd.shuffle(perm)
    h = graph_from_matrix([[m[perm[i]][perm[j]] for j in range(n)] for i in range(n)])
    # vertex i+1 of h is vertex perm[i]+1 of g
    vmap = {str(perm[i] + 1): str(i + 1) for i in range(n)}
    emap = {e.id: f"e{vmap[e.source]}{vmap[e.range]}" for e in g.edges}

    def rename(flag):
        return (flag[0],) + tuple(emap[x] for x in flag[1:])

    a, b = saturate(g).state, saturate(h).state
    assert {rename(f) for f in a.flags} == b.flags


def test_flag_matrix_table():
    s = FlagMatrix(("a", "b"), {Z("a", "b"), ONE("a")})
    assert s.as_table() == [["1", "0"], ["?", "?"]]
    assert s.unknown_pairs() == [("b", "a")]
