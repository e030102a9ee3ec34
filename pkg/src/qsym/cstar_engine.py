"""Exact symbolic arithmetic in a graph C*-algebra.

Elements are finite rational combinations of path monomials ``S_gamma S_mu*``
with ``r(gamma) = r(mu)``.  A monomial is stored as ``(gamma, mu, v)`` where
``gamma`` and ``mu`` are edge-id tuples and ``v`` their common range; the
vertex projection ``p_v`` is ``((), (), v)``.

Products use only ``S_e* S_e = p_r(e)`` and ``S_e* S_f = 0`` (e != f), which
makes them associative on the nose.  The relation
``p_v = sum_{s(f)=v} S_f S_f*`` is applied by :func:`canonical`:

* acyclic graphs: every monomial is pushed down until its range is a sink
  (the sink basis, a basis of the finite dimensional algebra);
* otherwise: for each non-sink vertex the first outgoing edge is *special*
  and ``S_{g f} S_{m f}*`` with ``f`` special is rewritten through the
  relation.  Monomials not ending in a common special edge form a basis of
  the Leavitt path algebra, which sits inside the C*-algebra, so the result
  is again a true normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

from .graph_core import DirectedMultigraph, GraphError

Monomial = tuple  # (gamma: tuple[str, ...], mu: tuple[str, ...], v: str)

DEFAULT_PATH_CAP = 8


class DomainError(ValueError):
    """Argument lies outside the domain of the operation."""


class NormalFormTruncated(RuntimeError):
    """Path length cap exceeded on a graph with cycles."""

    def __init__(self, message: str, partial: LinComb):
        super().__init__(message)
        self.partial = partial


# ---------------------------------------------------------------------------
# monomials

def _source(g: DirectedMultigraph, path: tuple, anchor: str) -> str:
    return g.s(path[0]) if path else anchor


def mono_mul(g: DirectedMultigraph, a: Monomial, b: Monomial) -> Monomial | None:
    """``(S_g S_m*)(S_d S_n*)``; ``None`` when the product vanishes."""
    gamma, mu, v = a
    delta, nu, w = b
    if _source(g, mu, v) != _source(g, delta, w):
        return None
    k, l = len(mu), len(delta)
    if k <= l and delta[:k] == mu:
        return (gamma + delta[k:], nu, w)
    if l < k and mu[:l] == delta:
        return (gamma, nu + mu[l:], v)
    return None


def mono_star(m: Monomial) -> Monomial:
    gamma, mu, v = m
    return (mu, gamma, v)


def mono_str(m: Monomial) -> str:
    gamma, mu, v = m
    if not gamma and not mu:
        return f"p_{v}"
    parts = []
    if gamma:
        parts.append("S_" + ".".join(gamma))
    if mu:
        parts.append("S*_" + ".".join(mu))
    return " ".join(parts)


def _mono_key(m: Monomial):
    gamma, mu, v = m
    return (len(gamma) + len(mu), gamma, mu, v)


# ---------------------------------------------------------------------------
# linear combinations

Scalar = Union[int, Fraction]


@dataclass(eq=False)
class LinComb:
    graph: DirectedMultigraph
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.terms = {m: Fraction(c) for m, c in self.terms.items() if c != 0}

    # constructors
    @classmethod
    def zero(cls, g: DirectedMultigraph) -> LinComb:
        return cls(g, {})

    @classmethod
    def mono(cls, g: DirectedMultigraph, m: Monomial, coeff: Scalar = 1) -> LinComb:
        return cls(g, {m: coeff})

    @classmethod
    def p(cls, g: DirectedMultigraph, v: str) -> LinComb:
        if v not in g.vertices:
            raise GraphError(f"unknown vertex {v!r}")
        return cls.mono(g, ((), (), v))

    @classmethod
    def S(cls, g: DirectedMultigraph, e: str) -> LinComb:
        return cls.mono(g, ((e,), (), g.edge(e).range))

    @classmethod
    def Sstar(cls, g: DirectedMultigraph, e: str) -> LinComb:
        return cls.mono(g, ((), (e,), g.edge(e).range))

    @classmethod
    def unit(cls, g: DirectedMultigraph) -> LinComb:
        return cls(g, {((), (), v): 1 for v in g.vertices})

    # algebra
    def _same(self, other: LinComb):
        if not isinstance(other, LinComb):
            raise TypeError(f"expected LinComb, got {type(other).__name__}")
        if other.graph is not self.graph and other.graph != self.graph:
            raise GraphError("operands belong to different graphs")

    def __add__(self, other: LinComb) -> LinComb:
        self._same(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return LinComb(self.graph, out)

    def __neg__(self) -> LinComb:
        return LinComb(self.graph, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: LinComb) -> LinComb:
        return self + (-other)

    def scale(self, c: Scalar) -> LinComb:
        return LinComb(self.graph, {m: c * x for m, x in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, LinComb):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def star(self) -> LinComb:
        return star(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinComb):
            return NotImplemented
        return self.graph == other.graph and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def max_path_length(self) -> int:
        return max((max(len(g), len(m)) for g, m, _ in self.terms), default=0)

    def items(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(sorted(self.terms.items(), key=lambda kv: _mono_key(kv[0])))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = []
        for m, c in self.items():
            if c == 1:
                out.append(mono_str(m))
            elif c == -1:
                out.append("-" + mono_str(m))
            else:
                out.append(f"{c}*{mono_str(m)}")
        return " + ".join(out).replace("+ -", "- ")

    __repr__ = __str__

    def to_json(self) -> list:
        return [[list(m[0]), list(m[1]), m[2], str(c)] for m, c in self.items()]


def star(t: LinComb) -> LinComb:
    # rational coefficients are self-conjugate
    return LinComb(t.graph, {mono_star(m): c for m, c in t.terms.items()})


def multiply(a: LinComb, b: LinComb) -> LinComb:
    a._same(b)
    g = a.graph
    out: dict = {}
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            m = mono_mul(g, m1, m2)
            if m is not None:
                out[m] = out.get(m, 0) + c1 * c2
    return LinComb(g, out)


# ---------------------------------------------------------------------------
# canonical forms

@lru_cache(maxsize=256)
def _acyclic(g: DirectedMultigraph) -> bool:
    return g.is_acyclic()


def _special_edges(g: DirectedMultigraph) -> dict[str, str]:
    out = {}
    for e in g.edges:
        out.setdefault(e.source, e.id)
    return out


def _expand_to_sinks(t: LinComb) -> LinComb:
    g = t.graph
    out_edges = {v: g.out_edges(v) for v in g.vertices}
    done: dict = {}
    todo = list(t.terms.items())
    while todo:
        (gamma, mu, v), c = todo.pop()
        outs = out_edges[v]
        if not outs:
            done[(gamma, mu, v)] = done.get((gamma, mu, v), 0) + c
            continue
        for f in outs:
            todo.append(((gamma + (f,), mu + (f,), g.r(f)), c))
    return LinComb(g, done)


def _contract_special(t: LinComb) -> LinComb:
    g = t.graph
    special = _special_edges(g)
    done: dict = {}
    todo = list(t.terms.items())
    while todo:
        m, c = todo.pop()
        gamma, mu, v = m
        if gamma and mu and gamma[-1] == mu[-1]:
            f = gamma[-1]
            u = g.s(f)
            if special[u] == f:
                gp, mp = gamma[:-1], mu[:-1]
                todo.append(((gp, mp, u), c))
                for f2 in g.out_edges(u):
                    if f2 != f:
                        todo.append(((gp + (f2,), mp + (f2,), g.r(f2)), -c))
                continue
        done[m] = done.get(m, 0) + c
    return LinComb(g, done)


def canonical(t: LinComb) -> LinComb:
    """Unique representative of ``t`` in the algebra (see module docstring)."""
    if _acyclic(t.graph):
        return _expand_to_sinks(t)
    return _contract_special(t)


def equal_in_algebra(a: LinComb, b: LinComb) -> bool:
    return canonical(a - b).is_zero()


# ---------------------------------------------------------------------------
# generator words

@dataclass(frozen=True)
class Atom:
    kind: str  # "p", "S" or "S*"
    name: str

    def __str__(self) -> str:
        return f"{self.kind}.{self.name}"


GeneratorWord = Sequence[Atom]


def parse_word(text: str) -> list[Atom]:
    """Whitespace separated atoms ``p.v``, ``S.e``, ``S*.e``."""
    atoms = []
    for tok in text.split():
        kind, sep, name = tok.partition(".")
        if not sep or kind not in ("p", "S", "S*") or not name:
            raise DomainError(f"bad atom {tok!r}; expected p.v, S.e or S*.e")
        atoms.append(Atom(kind, name))
    return atoms


def atom_value(g: DirectedMultigraph, atom: Atom) -> LinComb:
    if atom.kind == "p":
        return LinComb.p(g, atom.name)
    if atom.kind == "S":
        return LinComb.S(g, atom.name)
    return LinComb.Sstar(g, atom.name)


def evaluate_word(g: DirectedMultigraph, word: GeneratorWord, order: str = "ltr") -> LinComb:
    """Raw product of the atoms, folding left-to-right or right-to-left."""
    values = [atom_value(g, a) for a in word]
    if not values:
        return LinComb.unit(g)
    if order == "ltr":
        acc = values[0]
        for x in values[1:]:
            acc = multiply(acc, x)
    elif order == "rtl":
        acc = values[-1]
        for x in reversed(values[:-1]):
            acc = multiply(x, acc)
    else:
        raise ValueError(f"unknown order {order!r}")
    return acc


def normal_form(word: GeneratorWord | str, g: DirectedMultigraph, *,
                cap: int = DEFAULT_PATH_CAP, order: str = "ltr") -> LinComb:
    if isinstance(word, str):
        word = parse_word(word)
    result = canonical(evaluate_word(g, word, order))
    if not _acyclic(g) and result.max_path_length() > cap:
        raise NormalFormTruncated(f"path length exceeds cap {cap}", result)
    return result


# ---------------------------------------------------------------------------
# finite dimensional case

def paths_ending_at(g: DirectedMultigraph) -> dict[str, int]:
    """Number of paths (including the empty one) ending at each vertex; DAG only."""
    memo: dict[str, int] = {}

    def count(v: str) -> int:
        if v not in memo:
            memo[v] = 1 + sum(count(g.s(e)) for e in g.in_edges(v))
        return memo[v]

    return {v: count(v) for v in g.vertices}


def dimension(g: DirectedMultigraph) -> int:
    if not g.is_acyclic():
        raise GraphError("dimension is only defined for graphs without loops or cycles")
    counts = paths_ending_at(g)
    return sum(counts[v] ** 2 for v in g.sinks())


def sink_basis(g: DirectedMultigraph) -> list[Monomial]:
    """All ``S_gamma S_mu*`` with ``gamma, mu`` ending at a common sink."""
    if not g.is_acyclic():
        raise GraphError("sink basis needs an acyclic graph")
    ending: dict[str, list[tuple]] = {}

    def paths_to(v: str) -> list[tuple]:
        if v not in ending:
            ps = [()]
            for e in g.in_edges(v):
                ps.extend(p + (e,) for p in paths_to(g.s(e)))
            ending[v] = ps
        return ending[v]

    return [(a, b, v) for v in g.sinks() for a in paths_to(v) for b in paths_to(v)]


# ---------------------------------------------------------------------------
# the state on V_{2,+}

def tau(t: LinComb) -> Fraction:
    """Linear extension of ``tau(S_e S_f*) = delta_ef`` and ``tau(p_u) = 1`` (u a sink).

    ``p_v`` for a vertex emitting edges is first rewritten as
    ``sum_{s(f)=v} S_f S_f*``.
    """
    g = t.graph
    total = Fraction(0)
    for (gamma, mu, v), c in t.terms.items():
        if not gamma and not mu:
            total += c * max(1, len(g.out_edges(v)))
        elif len(gamma) == 1 and len(mu) == 1:
            total += c if gamma == mu else 0
        else:
            raise DomainError(f"{mono_str((gamma, mu, v))} is outside the domain of tau")
    return total


def f_matrix(g: DirectedMultigraph) -> list[list[Fraction]]:
    """``F[e][f] = tau(S_e* S_f)`` in edge order."""
    ids = g.edge_ids
    return [[tau(multiply(LinComb.Sstar(g, e), LinComb.S(g, f))) for f in ids] for e in ids]


# ---------------------------------------------------------------------------
# self test

@dataclass
class CKReport:
    ok: bool
    failures: list[str]
    checked: int

    def __bool__(self) -> bool:
        return self.ok


def verify_ck_relations(g: DirectedMultigraph) -> CKReport:
    failures: list[str] = []
    checked = 0

    def expect(cond: bool, label: str):
        nonlocal checked
        checked += 1
        if not cond:
            failures.append(label)

    def nf(x: LinComb) -> LinComb:
        return canonical(x)

    p = {v: LinComb.p(g, v) for v in g.vertices}
    S = {e: LinComb.S(g, e) for e in g.edge_ids}
    Ss = {e: LinComb.Sstar(g, e) for e in g.edge_ids}
    one = LinComb.unit(g)

    for e in g.edge_ids:
        expect(nf(Ss[e] * S[e] - p[g.r(e)]).is_zero(), f"S_{e}* S_{e} = p_{g.r(e)}")
    for v in g.vertices:
        outs = g.out_edges(v)
        if outs:
            rhs = LinComb.zero(g)
            for f in outs:
                rhs = rhs + S[f] * Ss[f]
            expect(nf(p[v] - rhs).is_zero(), f"p_{v} = sum S_f S_f* over s(f)={v}")
        for w in g.vertices:
            want = p[v] if v == w else LinComb.zero(g)
            expect(nf(p[v] * p[w] - want).is_zero(), f"p_{v} p_{w} orthogonality")
        expect(star(p[v]) == p[v], f"p_{v} self-adjoint")
    generators = list(p.values()) + list(S.values()) + list(Ss.values())
    for x in generators:
        expect(nf(one * x - x).is_zero() and nf(x * one - x).is_zero(), f"sum p_v is a unit on {x}")
    for e in g.edge_ids:
        for f in g.edge_ids:
            if e != f:
                expect(nf(Ss[e] * S[f]).is_zero(), f"S_{e}* S_{f} = 0")
            expect((not nf(S[e] * S[f]).is_zero()) == (g.r(e) == g.s(f)),
                   f"S_{e} S_{f} nonzero iff r({e}) = s({f})")
            expect((not nf(S[e] * Ss[f]).is_zero()) == (g.r(e) == g.r(f)),
                   f"S_{e} S_{f}* nonzero iff r({e}) = r({f})")
    return CKReport(not failures, failures, checked)
