"""Linear coactions on a graph C*-algebra and symbolic checks of their relations.

An action is fixed by ``alpha(S_e) = sum_f S_f (x) c_fe``.  Coefficients live
in a direct sum of ``k`` copies of the group algebra of the free group on
letters ``z_i`` (``k = 1`` is the free product of circles, ``k = 2`` carries
the doubling).  Words are kept freely reduced, so a coefficient is zero iff
all its rational weights cancel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .cstar_engine import LinComb, Monomial, canonical, mono_mul, mono_star, mono_str
from .graph_core import DirectedMultigraph, GraphError

Word = tuple  # tuple[(letter, +1 | -1), ...]


def _reduce_concat(a: Word, b: Word) -> Word:
    out = list(a)
    for x in b:
        if out and out[-1][0] == x[0] and out[-1][1] == -x[1]:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _word_inverse(w: Word) -> Word:
    return tuple((name, -sign) for name, sign in reversed(w))


def word_str(w: Word) -> str:
    if not w:
        return "1"
    return "".join(name if sign > 0 else name + "*" for name, sign in w)


@dataclass(frozen=True)
class CoeffAlgebra:
    k: int
    letters: frozenset

    def check(self, other: CoeffAlgebra):
        if self != other:
            raise GraphError("coefficients belong to different algebras")


@dataclass(eq=False)
class CoeffWord:
    """Element of the k-slot coefficient algebra: ``{(slot, word): weight}``."""

    algebra: CoeffAlgebra
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {key: Fraction(c) for key, c in self.terms.items() if c != 0}

    @classmethod
    def zero(cls, alg: CoeffAlgebra) -> CoeffWord:
        return cls(alg, {})

    @classmethod
    def unit(cls, alg: CoeffAlgebra) -> CoeffWord:
        return cls(alg, {(slot, ()): 1 for slot in range(alg.k)})

    @classmethod
    def letter(cls, alg: CoeffAlgebra, name: str, slots=None, inverse: bool = False) -> CoeffWord:
        if name not in alg.letters:
            raise GraphError(f"unknown letter {name!r}")
        slots = range(alg.k) if slots is None else slots
        return cls(alg, {(slot, ((name, -1 if inverse else 1),)): 1 for slot in slots})

    def __add__(self, other: CoeffWord) -> CoeffWord:
        self.algebra.check(other.algebra)
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0) + c
        return CoeffWord(self.algebra, out)

    def __sub__(self, other: CoeffWord) -> CoeffWord:
        return self + other.scale(-1)

    def scale(self, c) -> CoeffWord:
        return CoeffWord(self.algebra, {key: c * x for key, x in self.terms.items()})

    def __mul__(self, other: CoeffWord) -> CoeffWord:
        return coeff_multiply(self, other)

    def star(self) -> CoeffWord:
        return CoeffWord(self.algebra, {(slot, _word_inverse(w)): c for (slot, w), c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoeffWord):
            return NotImplemented
        return self.algebra == other.algebra and self.terms == other.terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        slots = []
        for slot in range(self.algebra.k):
            parts = [f"{c}*{word_str(w)}" if c != 1 else word_str(w)
                     for (s, w), c in sorted(self.terms.items()) if s == slot]
            slots.append(" + ".join(parts) if parts else "0")
        return slots[0] if self.algebra.k == 1 else "(" + ", ".join(slots) + ")"

    __repr__ = __str__


def coeff_multiply(a: CoeffWord, b: CoeffWord) -> CoeffWord:
    a.algebra.check(b.algebra)
    out: dict = {}
    for (s1, w1), c1 in a.terms.items():
        for (s2, w2), c2 in b.terms.items():
            if s1 != s2:
                continue
            key = (s1, _reduce_concat(w1, w2))
            out[key] = out.get(key, 0) + c1 * c2
    return CoeffWord(a.algebra, out)


# ---------------------------------------------------------------------------
# tensors  C*(graph) (x) coefficient algebra

@dataclass(eq=False)
class Tensor:
    graph: DirectedMultigraph
    algebra: CoeffAlgebra
    terms: dict = field(default_factory=dict)  # (monomial, (slot, word)) -> Fraction

    def __post_init__(self):
        self.terms = {key: Fraction(c) for key, c in self.terms.items() if c != 0}

    @classmethod
    def simple(cls, x: LinComb, c: CoeffWord) -> Tensor:
        out = {}
        for m, a in x.terms.items():
            for key, b in c.terms.items():
                out[(m, key)] = a * b
        return cls(x.graph, c.algebra, out)

    def __add__(self, other: Tensor) -> Tensor:
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0) + c
        return Tensor(self.graph, self.algebra, out)

    def __sub__(self, other: Tensor) -> Tensor:
        return self + Tensor(other.graph, other.algebra, {k: -c for k, c in other.terms.items()})

    def __mul__(self, other: Tensor) -> Tensor:
        g = self.graph
        out: dict = {}
        for (m1, (s1, w1)), c1 in self.terms.items():
            for (m2, (s2, w2)), c2 in other.terms.items():
                if s1 != s2:
                    continue
                m = mono_mul(g, m1, m2)
                if m is None:
                    continue
                key = (m, (s1, _reduce_concat(w1, w2)))
                out[key] = out.get(key, 0) + c1 * c2
        return Tensor(g, self.algebra, out)

    def star(self) -> Tensor:
        return Tensor(self.graph, self.algebra,
                      {(mono_star(m), (s, _word_inverse(w))): c for (m, (s, w)), c in self.terms.items()})

    def components(self) -> dict:
        """Group by coefficient basis element: ``{(slot, word): LinComb}``."""
        groups: dict = {}
        for (m, key), c in self.terms.items():
            groups.setdefault(key, {})[m] = c
        return {key: LinComb(self.graph, terms) for key, terms in groups.items()}

    def canonical(self) -> Tensor:
        out = {}
        for key, x in self.components().items():
            for m, c in canonical(x).terms.items():
                out[(m, key)] = c
        return Tensor(self.graph, self.algebra, out)

    def is_zero_in_algebra(self) -> bool:
        return not self.canonical().terms

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (m, (slot, w)), c in sorted(self.terms.items(), key=lambda kv: str(kv[0])):
            coef = "" if c == 1 else f"{c}*"
            slot_txt = word_str(w) if self.algebra.k == 1 else f"[{slot}]{word_str(w)}"
            parts.append(f"{coef}{mono_str(m)} (x) {slot_txt}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# actions

@dataclass
class ActionSpec:
    graph: DirectedMultigraph
    algebra: CoeffAlgebra
    # alpha(S_e) = sum over (f, c) in coeffs[e] of S_f (x) c
    coeffs: dict
    label: str = ""

    def __post_init__(self):
        for e, row in self.coeffs.items():
            if not self.graph.has_edge(e):
                raise GraphError(f"action references unknown edge {e!r}")
            for f, c in row:
                if not self.graph.has_edge(f):
                    raise GraphError(f"action references unknown edge {f!r}")
                self.algebra.check(c.algebra)

    def alpha_S(self, e: str) -> Tensor:
        out = Tensor(self.graph, self.algebra)
        for f, c in self.coeffs.get(e, []):
            out = out + Tensor.simple(LinComb.S(self.graph, f), c)
        return out

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "slots": self.algebra.k,
            "alpha": {e: [[f, str(c)] for f, c in row] for e, row in self.coeffs.items()},
        }


def _letter_names(g: DirectedMultigraph) -> dict[str, str]:
    return {e: f"z{i}" for i, e in enumerate(g.edge_ids, start=1)}


def diagonal_action(g: DirectedMultigraph) -> ActionSpec:
    names = _letter_names(g)
    alg = CoeffAlgebra(1, frozenset(names.values()))
    coeffs = {e: [(e, CoeffWord.letter(alg, names[e]))] for e in g.edge_ids}
    return ActionSpec(g, alg, coeffs, label="diagonal")


def doubling_action(g: DirectedMultigraph, e1: str, e2: str) -> ActionSpec:
    """Swap-twisted action of the doubling on a pair of parallel edges."""
    a, b = g.edge(e1), g.edge(e2)
    if e1 == e2 or a.source != b.source or a.range != b.range:
        raise GraphError(f"{e1} and {e2} are not distinct parallel edges")
    names = _letter_names(g)
    alg = CoeffAlgebra(2, frozenset(names.values()))
    z1, z2 = names[e1], names[e2]
    coeffs = {}
    for e in g.edge_ids:
        if e == e1:
            coeffs[e] = [(e1, CoeffWord.letter(alg, z1, [0])), (e2, CoeffWord.letter(alg, z2, [1]))]
        elif e == e2:
            coeffs[e] = [(e2, CoeffWord.letter(alg, z2, [0])), (e1, CoeffWord.letter(alg, z1, [1]))]
        else:
            coeffs[e] = [(e, CoeffWord.letter(alg, names[e]))]
    return ActionSpec(g, alg, coeffs, label=f"doubling({e1},{e2})")


def parallel_pair(g: DirectedMultigraph) -> tuple[str, str] | None:
    first: dict = {}
    for e in g.edges:
        key = (e.source, e.range)
        if key in first:
            return first[key], e.id
        first[key] = e.id
    return None


@dataclass
class RelationCheck:
    relation: str
    passed: bool
    residual: str = ""


@dataclass
class ActionReport:
    ok: bool
    checks: list[RelationCheck]

    def __bool__(self) -> bool:
        return self.ok

    @property
    def failures(self) -> list[RelationCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [{"relation": c.relation, "passed": c.passed, "residual": c.residual}
                       for c in self.checks],
        }


def _projection_images(g: DirectedMultigraph, a: ActionSpec, checks: list[RelationCheck]) -> dict:
    """alpha(p_v): from any in-edge h (all choices must agree), else from the out-edges."""
    S = {e: a.alpha_S(e) for e in g.edge_ids}
    images = {}
    for v in g.vertices:
        ins = g.in_edges(v)
        if ins:
            candidates = [(h, S[h].star() * S[h]) for h in ins]
            h0, first = candidates[0]
            images[v] = first
            for h, other in candidates[1:]:
                diff = (other - first).canonical()
                checks.append(RelationCheck(f"alpha(S_{h})* alpha(S_{h}) = alpha(S_{h0})* alpha(S_{h0})",
                                            not diff.terms, str(diff) if diff.terms else ""))
        elif g.out_edges(v):
            total = Tensor(g, a.algebra)
            for f in g.out_edges(v):
                total = total + S[f] * S[f].star()
            images[v] = total
        else:
            raise RuntimeError(f"isolated vertex {v} in action check")
    return images


def verify_action(g: DirectedMultigraph, a: ActionSpec) -> ActionReport:
    """Check that alpha respects the defining relations of the graph algebra."""
    checks: list[RelationCheck] = []

    def record(label: str, residual: Tensor):
        residual = residual.canonical()
        checks.append(RelationCheck(label, not residual.terms, str(residual) if residual.terms else ""))

    S = {e: a.alpha_S(e) for e in g.edge_ids}
    P = _projection_images(g, a, checks)
    for v in g.vertices:
        outs = g.out_edges(v)
        if outs and g.in_edges(v):
            total = Tensor(g, a.algebra)
            for f in outs:
                total = total + S[f] * S[f].star()
            record(f"alpha(p_{v}) = sum alpha(S_f) alpha(S_f)* over s(f)={v}", P[v] - total)
    for v in g.vertices:
        record(f"alpha(p_{v}) self-adjoint", P[v] - P[v].star())
        for w in g.vertices:
            want = P[v] if v == w else Tensor(g, a.algebra)
            record(f"alpha(p_{v}) alpha(p_{w}) = {'alpha(p_' + v + ')' if v == w else '0'}",
                   P[v] * P[w] - want)
    unit = Tensor.simple(LinComb.unit(g), CoeffWord.unit(a.algebra))
    total = Tensor(g, a.algebra)
    for v in g.vertices:
        total = total + P[v]
    record("sum alpha(p_v) = 1 (x) 1", total - unit)
    return ActionReport(all(c.passed for c in checks), checks)


def cross_terms(a: ActionSpec, e: str) -> list[tuple[str, str, CoeffWord]]:
    """Coefficients ``c_f* c_f'`` of the mixed terms ``S_f* S_f'`` (f != f') in alpha(S_e)* alpha(S_e).

    The graph side of these terms already vanishes; for the doubling the
    coefficient side vanishes too, by slot orthogonality.
    """
    row = a.coeffs.get(e, [])
    out = []
    for (f, c), (f2, c2) in itertools.product(row, repeat=2):
        if f != f2:
            out.append((f, f2, c.star() * c2))
    return out
