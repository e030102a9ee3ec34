"""Saturation engine over vanishing flags of the coefficient matrix (q_ef).

A linear action is ``alpha(S_e) = sum_f S_f (x) q_fe`` and ``Q_fe = q_fe* q_fe``.
Flags are monotone facts about it:

* ``("ZERO", e, f)``: q_ef = 0 (e != f)
* ``("ONE", e)``: Q_ee = 1

Every rule is a pure function ``(graph, state, *params) -> Firing``.  The
saturation loop applies firings until nothing changes, and a derivation can be
replayed by re-running each recorded rule against a fresh state.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

from .action_checker import ActionSpec, doubling_action, parallel_pair, verify_action
from .families import KNOWN_LARGER, NOT_RIGID_PARALLEL_EDGES, RIGID
from .graph_core import (
    DirectedMultigraph,
    PreconditionError,
    adjacency_matrix,
    is_connected,
    spanning_path,
)

INCONCLUSIVE = "INCONCLUSIVE"
DEFAULT_SELECTOR_CAP = 100_000

CITE = {
    "l1": "vanishing lemma: q_ef = 0 for s(f) = r(h) when nothing upstream of s(e) reaches h",
    "l2": "vanishing lemma: q_eh = 0 when r(e) is a sink and r(h) is not",
    "l3": "loop lemma: q_ef = 0 for all f in s^-1(r(h)) <=> q_eh = 0",
    "antipode": "antipode kappa applied to q_ef = 0 gives q_fe = 0",
    "unitarity": "Q_gg = 1 <=> Q_gk = 0 for all k != g (row sums of Q equal 1)",
    "column": "F^-1 U* F U = 1 with F positive diagonal: sum_k F_kk Q_ki = F_ii",
    "balance": "S_e* S_e = S_f* S_f for r(e) = r(f); compare p_w coefficients",
    "partition": "sum_v p_v = 1; compare p_u coefficients (linear independence of {p_u})",
}
K2_CITATION = "quantum symmetry is the doubling D_phi(C(S^1) * C(S^1))"
L11_CITATION = "quantum symmetry is isomorphic to H_2^{infinity+}"
FREE_PRODUCT_CITATION = "Q_tau^Lin is isomorphic to the free product of |E| copies of C(S^1)"
DOUBLING_CITATION = ("the doubling D_phi(C(S^1)^{*|E|}) acts by swapping a parallel pair, "
                     "so Q_tau^Lin is not the free product of |E| circles")


class SoundnessFault(RuntimeError):
    """A rule produced a contradiction; this is a bug in the engine, not a fact about the graph."""

    def __init__(self, message: str, derivation: Derivation | None = None):
        super().__init__(message)
        self.derivation = derivation


def Z(e: str, f: str) -> tuple:
    return ("ZERO", e, f)


def ONE(e: str) -> tuple:
    return ("ONE", e)


def flag_str(flag: tuple) -> str:
    return f"ZERO({flag[1]},{flag[2]})" if flag[0] == "ZERO" else f"ONE({flag[1]})"


@dataclass
class FlagMatrix:
    edges: tuple[str, ...]
    flags: set = field(default_factory=set)
    notes: list = field(default_factory=list)

    def zero(self, e: str, f: str) -> bool:
        return Z(e, f) in self.flags

    def one(self, e: str) -> bool:
        return ONE(e) in self.flags

    def copy(self) -> FlagMatrix:
        return FlagMatrix(self.edges, set(self.flags), list(self.notes))

    def unknown_pairs(self) -> list[tuple[str, str]]:
        return [(e, f) for e in self.edges for f in self.edges if e != f and not self.zero(e, f)]

    def all_offdiagonal_zero(self) -> bool:
        return not self.unknown_pairs()

    def size(self) -> int:
        return len(self.edges) ** 2

    def as_table(self) -> list[list[str]]:
        rows = []
        for e in self.edges:
            row = []
            for f in self.edges:
                if e == f:
                    row.append("1" if self.one(e) else "?")
                else:
                    row.append("0" if self.zero(e, f) else "?")
            rows.append(row)
        return rows


@dataclass
class Firing:
    applicable: bool
    consumed: tuple = ()
    produced: tuple = ()
    note: str = ""
    fault: str = ""


NOT_APPLICABLE = Firing(False)


@dataclass
class Step:
    rule: str
    params: tuple
    consumed: tuple
    produced: tuple
    citation: str

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "params": [list(p) if isinstance(p, tuple) else p for p in self.params],
            "consumed": [flag_str(f) for f in self.consumed],
            "produced": [flag_str(f) for f in self.produced],
            "citation": self.citation,
        }


@dataclass
class Derivation:
    steps: list[Step] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)

    def rules_used(self) -> list[str]:
        return sorted({s.rule for s in self.steps})


def _new_flags(state: FlagMatrix, produced) -> tuple:
    seen, out = set(), []
    for flag in produced:
        if flag not in state.flags and flag not in seen:
            seen.add(flag)
            out.append(flag)
    return tuple(out)


def _fire(state: FlagMatrix, consumed, produced) -> Firing:
    return Firing(True, tuple(consumed), _new_flags(state, produced))


# ---------------------------------------------------------------------------
# rules

def init_state(g: DirectedMultigraph) -> FlagMatrix:
    if not is_connected(g):
        raise PreconditionError("certifier needs a connected graph")
    return FlagMatrix(g.edge_ids)


def rule_l1(g: DirectedMultigraph, state: FlagMatrix, h: str, e: str) -> Firing:
    targets = g.out_edges(g.r(h))
    if not targets:
        return NOT_APPLICABLE
    upstream = g.in_edges(g.s(e))
    # ZERO(h,h) is not a flag, so h itself upstream blocks the rule
    if any(k == h or not state.zero(k, h) for k in upstream):
        return NOT_APPLICABLE
    return _fire(state, [Z(k, h) for k in upstream], [Z(e, f) for f in targets if f != e])


def rule_l2(g: DirectedMultigraph, state: FlagMatrix, h: str, e: str) -> Firing:
    if not g.out_edges(g.r(h)) or g.out_edges(g.r(e)):
        return NOT_APPLICABLE
    return _fire(state, [], [Z(k, h) for k in g.in_edges(g.r(e)) if k != h])


def _l3_hypothesis(g: DirectedMultigraph, state: FlagMatrix, h: str, e: str):
    if not g.edge(e).is_loop:
        raise PreconditionError(f"rule l3 needs a loop, {e} is not one")
    if h == e or not g.out_edges(g.r(h)):
        return None
    others = [k for k in g.in_edges(g.s(e)) if k != e]
    if any(k == h or not state.zero(k, h) for k in others):
        return None
    return [Z(k, h) for k in others]


def rule_l3(g: DirectedMultigraph, state: FlagMatrix, h: str, e: str, direction: str) -> Firing:
    base = _l3_hypothesis(g, state, h, e)
    if base is None:
        return NOT_APPLICABLE
    targets = g.out_edges(g.r(h))
    # q_ee is never zero, so f = e in the family makes the backward side false
    if direction == "forward":
        if not state.zero(e, h) or e in targets:
            return NOT_APPLICABLE
        return _fire(state, base + [Z(e, h)], [Z(e, f) for f in targets])
    if direction == "backward":
        if e in targets or not all(state.zero(e, f) for f in targets):
            return NOT_APPLICABLE
        return _fire(state, base + [Z(e, f) for f in targets], [Z(e, h)])
    raise ValueError(f"unknown direction {direction!r}")


def rule_antipode(g: DirectedMultigraph, state: FlagMatrix, e: str, f: str) -> Firing:
    if not state.zero(e, f):
        return NOT_APPLICABLE
    return _fire(state, [Z(e, f)], [Z(f, e)])


def rule_unitarity(g: DirectedMultigraph, state: FlagMatrix, e: str) -> Firing:
    others = [k for k in state.edges if k != e]
    if state.one(e):
        return _fire(state, [ONE(e)], [Z(e, k) for k in others])
    if all(state.zero(e, k) for k in others):
        return _fire(state, [Z(e, k) for k in others], [ONE(e)])
    return NOT_APPLICABLE


def rule_column(g: DirectedMultigraph, state: FlagMatrix, i: str) -> Firing:
    others = [k for k in state.edges if k != i]
    if state.one(i):
        return _fire(state, [ONE(i)], [Z(k, i) for k in others])
    if all(state.zero(k, i) for k in others):
        return _fire(state, [Z(k, i) for k in others], [ONE(i)])
    return NOT_APPLICABLE


def rule_balance(g: DirectedMultigraph, state: FlagMatrix, e: str, f: str, w: str) -> Firing:
    if e == f or g.r(e) != g.r(f):
        return NOT_APPLICABLE
    ks = g.in_edges(w)
    left = [k for k in ks]
    # a diagonal summand Q_ee is never known to vanish
    if e not in left and all(state.zero(k, e) for k in left):
        return _fire(state, [Z(k, e) for k in left], [Z(k, f) for k in ks if k != f])
    return NOT_APPLICABLE


# ---------------------------------------------------------------------------
# selectors and the partition rule

@dataclass(frozen=True)
class Selector:
    """For each vertex, ``("In", h)`` with r(h) = v or ``("Out", None)``."""

    choice: tuple  # ((vertex, kind, edge|None), ...)

    @property
    def out_vertices(self) -> tuple[str, ...]:
        return tuple(v for v, kind, _ in self.choice if kind == "Out")

    def in_edges(self) -> list[tuple[str, str]]:
        return [(v, h) for v, kind, h in self.choice if kind == "In"]

    def to_param(self) -> tuple:
        return tuple(f"{v}:{h}" if kind == "In" else f"{v}:Out" for v, kind, h in self.choice)


def selector_cap() -> int:
    value = os.environ.get("QSYM_SELECTOR_CAP")
    return int(value) if value else DEFAULT_SELECTOR_CAP


def _preferred_in_edges(g: DirectedMultigraph) -> dict[str, str]:
    preferred: dict[str, str] = {}
    path = spanning_path(g)
    if path is not None:
        for eid in path.edges:
            preferred[g.r(eid)] = eid
        first = path.anchor if not path.edges else g.s(path.edges[0])
        loops = [k for k in g.in_edges(first) if g.edge(k).is_loop]
        if loops:
            preferred[first] = loops[0]
    return preferred


def enumerate_selectors(g: DirectedMultigraph, cap: int | None = None, trace: list | None = None):
    """Canonical spanning-path selector first, then single deviations, then the rest."""
    cap = selector_cap() if cap is None else cap
    sources = g.sources()
    if len(sources) >= 2:
        if trace is not None:
            trace.append(f"no partition selectors: {len(sources)} vertices without in-edges")
        return
    preferred = _preferred_in_edges(g)
    options = []
    for v in g.vertices:
        ins = list(g.in_edges(v))
        if not ins:
            options.append([(v, "Out", None)])
            continue
        if v in preferred:
            ins.remove(preferred[v])
            ins.insert(0, preferred[v])
        options.append([(v, "In", h) for h in ins])
    base = tuple(opt[0] for opt in options)
    emitted = set()
    count = 0

    def candidates():
        yield base
        for i, opt in enumerate(options):
            for alt in opt[1:]:
                yield base[:i] + (alt,) + base[i + 1:]
        yield from itertools.product(*options)

    for choice in candidates():
        if choice in emitted:
            continue
        if count >= cap:
            if trace is not None:
                trace.append(f"selector enumeration stopped at cap {cap}")
            return
        emitted.add(choice)
        count += 1
        yield Selector(choice)


def rule_partition(g: DirectedMultigraph, state: FlagMatrix, sel: Selector, u: str) -> Firing:
    out_vs = sel.out_vertices
    if u in out_vs:
        return NOT_APPLICABLE
    consumed = []
    # with an Out vertex o, its contribution at p_u must vanish for the p_u
    # coefficient to read as a plain sum of Q's
    for o in out_vs:
        for k in g.out_edges(u):
            for f in g.out_edges(o):
                if k == f or not state.zero(k, f):
                    return NOT_APPLICABLE
                consumed.append(Z(k, f))
    survivors = []
    for g_edge in g.in_edges(u):
        for _, h in sel.in_edges():
            if g_edge != h and state.zero(g_edge, h):
                consumed.append(Z(g_edge, h))
            else:
                survivors.append((g_edge, h))
    if not survivors:
        return Firing(True, tuple(consumed), (), fault=f"partition at {u} has no surviving summand")
    rows = {k for k, _ in survivors}
    if len(rows) != 1:
        return NOT_APPLICABLE
    (row,) = rows
    cols = {h for _, h in survivors}
    produced = [Z(row, k) for k in state.edges if k != row and k not in cols]
    note = ""
    if cols == {row}:
        produced.append(ONE(row))
    elif len(survivors) == 1:
        note = f"Q_{row},{survivors[0][1]} forced to 1 at vertex {u}"
    firing = _fire(state, consumed, produced)
    firing.note = note
    return firing


# ---------------------------------------------------------------------------
# saturation

RULES = {
    "l1": rule_l1,
    "l2": rule_l2,
    "l3": rule_l3,
    "antipode": rule_antipode,
    "unitarity": rule_unitarity,
    "column": rule_column,
    "balance": rule_balance,
    "partition": rule_partition,
}


def _instances(g: DirectedMultigraph, selectors: list[Selector], antipode: bool):
    edges = sorted(g.edge_ids)
    loops = [e for e in edges if g.edge(e).is_loop]
    for h in edges:
        for e in edges:
            yield "l1", (h, e)
    for h in edges:
        for e in edges:
            yield "l2", (h, e)
    for h in edges:
        for e in loops:
            yield "l3", (h, e, "forward")
            yield "l3", (h, e, "backward")
    if antipode:
        for e in edges:
            for f in edges:
                if e != f:
                    yield "antipode", (e, f)
    for e in edges:
        yield "unitarity", (e,)
    for e in edges:
        yield "column", (e,)
    for e in edges:
        for f in edges:
            if e != f and g.r(e) == g.r(f):
                for w in sorted(g.vertices):
                    if g.in_edges(w):
                        yield "balance", (e, f, w)
    for sel in selectors:
        for u in g.vertices:
            if u not in sel.out_vertices:
                yield "partition", (sel, u)


@dataclass
class SaturationResult:
    state: FlagMatrix
    derivation: Derivation
    state_changes: int
    passes: int


def saturate(g: DirectedMultigraph, *, antipode: bool = True, cap: int | None = None) -> SaturationResult:
    state = init_state(g)
    derivation = Derivation()
    selectors = list(enumerate_selectors(g, cap, derivation.trace))
    instances = list(_instances(g, selectors, antipode))
    changes = passes = 0
    changed = True
    while changed:
        changed = False
        passes += 1
        for rule, params in instances:
            firing = RULES[rule](g, state, *params)
            if not firing.applicable:
                continue
            if firing.fault:
                raise SoundnessFault(firing.fault, derivation)
            if firing.note and firing.note not in state.notes:
                state.notes.append(firing.note)
                derivation.trace.append(firing.note)
            if not firing.produced:
                continue
            state.flags.update(firing.produced)
            changes += len(firing.produced)
            changed = True
            shown = tuple(p.to_param() if isinstance(p, Selector) else p for p in params)
            derivation.steps.append(Step(rule, shown, firing.consumed, firing.produced, CITE[rule]))
    return SaturationResult(state, derivation, changes, passes)


def _parse_selector(g: DirectedMultigraph, param: tuple) -> Selector:
    choice = []
    for item in param:
        v, _, h = item.rpartition(":")
        choice.append((v, "Out", None) if h == "Out" else (v, "In", h))
    sel = Selector(tuple(choice))
    for v, kind, h in sel.choice:
        if kind == "In" and g.r(h) != v:
            raise PreconditionError(f"selector picks {h} at {v} but r({h}) = {g.r(h)}")
    return sel


def replay(g: DirectedMultigraph, derivation: Derivation) -> FlagMatrix:
    """Re-run every recorded step on a fresh state; raises SoundnessFault on any mismatch."""
    state = init_state(g)
    for i, step in enumerate(derivation.steps):
        params = step.params
        if step.rule == "partition":
            params = (_parse_selector(g, tuple(params[0])), params[1])
        missing = [f for f in step.consumed if f not in state.flags]
        if missing:
            raise SoundnessFault(f"step {i} ({step.rule}) consumes unknown flags {missing}")
        firing = RULES[step.rule](g, state, *params)
        if not firing.applicable or firing.fault:
            raise SoundnessFault(f"step {i} ({step.rule}) is not applicable on replay")
        if set(firing.produced) != set(step.produced):
            raise SoundnessFault(f"step {i} ({step.rule}) produces {firing.produced} on replay")
        state.flags.update(firing.produced)
    return state


# ---------------------------------------------------------------------------
# verdicts

@dataclass
class Verdict:
    kind: str
    derivation: Derivation | None = None
    state: FlagMatrix | None = None
    action: ActionSpec | None = None
    citations: list[str] = field(default_factory=list)
    residual_pairs: list[tuple[str, str]] = field(default_factory=list)
    state_changes: int = 0

    def to_dict(self, trace: bool = True) -> dict:
        out = {
            "verdict": self.kind,
            "rules_used": self.derivation.rules_used() if self.derivation else [],
            "steps": [s.to_dict() for s in self.derivation.steps] if (self.derivation and trace) else [],
            "residual_pairs": [list(p) for p in self.residual_pairs],
            "citations": list(self.citations),
        }
        if self.state is not None:
            out["flags"] = self.state.as_table()
            out["edges"] = list(self.state.edges)
            out["notes"] = list(self.state.notes)
        if self.action is not None:
            out["action"] = self.action.to_dict()
        if self.derivation and self.derivation.trace:
            out["trace"] = list(self.derivation.trace)
        return out


def _matches(g: DirectedMultigraph, pattern: list[list[int]]) -> bool:
    if len(g.vertices) != len(pattern):
        return False
    for order in itertools.permutations(g.vertices):
        if [list(r) for r in adjacency_matrix(g, order).entries] == pattern:
            return True
    return False


def certify(g: DirectedMultigraph, *, antipode: bool = True, cap: int | None = None) -> Verdict:
    if not is_connected(g):
        raise PreconditionError("certifier needs a connected graph")
    pair = parallel_pair(g)
    if pair is not None:
        action = doubling_action(g, *pair)
        report = verify_action(g, action)
        if not report.ok:
            raise SoundnessFault(f"doubling on {pair} fails: {[c.relation for c in report.failures]}")
        return Verdict(NOT_RIGID_PARALLEL_EDGES, action=action, citations=[DOUBLING_CITATION])
    result = saturate(g, antipode=antipode, cap=cap)
    state = result.state
    common = dict(derivation=result.derivation, state=state, state_changes=result.state_changes)
    if state.all_offdiagonal_zero() and not state.notes:
        return Verdict(RIGID, citations=[FREE_PRODUCT_CITATION], **common)
    residual = state.unknown_pairs()
    if _matches(g, [[0, 1], [1, 0]]):
        return Verdict(KNOWN_LARGER, citations=[K2_CITATION], residual_pairs=residual, **common)
    if _matches(g, [[1, 0], [0, 1]]):
        return Verdict(KNOWN_LARGER, citations=[L11_CITATION], residual_pairs=residual, **common)
    return Verdict(INCONCLUSIVE, residual_pairs=residual, **common)
