"""Finite directed multigraphs and the (R) property.

A graph is a list of vertex tokens plus a list of labelled edges
``(edge_id, source, range)``.  All matrix operations take an explicit vertex
ordering; nothing here canonicalises behind the caller's back.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GraphError(ValueError):
    """Invalid graph construction or argument."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionError(GraphError):
    """Raised when an operation is called on a graph it is not defined for."""


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    range: str

    @property
    def is_loop(self) -> bool:
        return self.source == self.range


@dataclass(frozen=True)
class DirectedMultigraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    _by_id: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not self.vertices:
            raise GraphError("a graph needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        vset = set(self.vertices)
        by_id = {}
        for e in self.edges:
            if e.id in by_id:
                raise GraphError(f"duplicate edge id {e.id!r}")
            if e.source not in vset or e.range not in vset:
                raise GraphError(f"edge {e.id!r} has an endpoint outside the vertex list")
            by_id[e.id] = e
        object.__setattr__(self, "_by_id", by_id)

    @classmethod
    def build(cls, vertices: Iterable, edges: Iterable[tuple]) -> DirectedMultigraph:
        """Convenience constructor; vertex tokens are coerced to ``str``."""
        return cls(
            tuple(str(v) for v in vertices),
            tuple(Edge(str(i), str(s), str(r)) for i, s, r in edges),
        )

    # lookups
    def edge(self, eid: str) -> Edge:
        try:
            return self._by_id[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    def has_edge(self, eid: str) -> bool:
        return eid in self._by_id

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    def s(self, eid: str) -> str:
        return self._by_id[eid].source

    def r(self, eid: str) -> str:
        return self._by_id[eid].range

    def out_edges(self, v: str) -> list[str]:
        """Edge ids with source ``v`` (the set s^-1(v)), in file order."""
        return [e.id for e in self.edges if e.source == v]

    def in_edges(self, v: str) -> list[str]:
        """Edge ids with range ``v`` (the set r^-1(v)), in file order."""
        return [e.id for e in self.edges if e.range == v]

    def sinks(self) -> list[str]:
        return [v for v in self.vertices if not self.out_edges(v)]

    def sources(self) -> list[str]:
        """Vertices receiving no edge."""
        return [v for v in self.vertices if not self.in_edges(v)]

    def multiplicity(self, u: str, v: str) -> int:
        return sum(1 for e in self.edges if e.source == u and e.range == v)

    def has_loops(self) -> bool:
        return any(e.is_loop for e in self.edges)

    def is_acyclic(self) -> bool:
        """No loops and no cycles of any length."""
        return not self.has_loops() and not cycles_geq2(self)

    def __str__(self) -> str:
        return format_graph(self)


@dataclass(frozen=True)
class AdjacencyMatrix:
    order: tuple[str, ...]
    entries: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.order)

    def as_lists(self) -> list[list[int]]:
        return [list(row) for row in self.entries]


@dataclass(frozen=True)
class Path:
    """Edge sequence; ``anchor`` is the source vertex (needed for empty paths)."""

    anchor: str
    edges: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class PropertyRReport:
    holds: bool
    violated: frozenset[str]
    r1_witness: tuple[str, ...] | None = None
    r2_witness: str | None = None
    r3_witness: tuple[str, str] | None = None
    ordering: tuple[str, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "violated": sorted(self.violated),
            "witnesses": {
                "R1": list(self.r1_witness) if self.r1_witness else None,
                "R2": self.r2_witness,
                "R3": list(self.r3_witness) if self.r3_witness else None,
            },
            "ordering": list(self.ordering) if self.ordering else None,
        }


# ---------------------------------------------------------------------------
# text format

_VERTICES_RE = re.compile(r"^vertices\s*:\s*(.*)$")
_EDGE_RE = re.compile(r"^(?:([^\s:]+)\s*:\s*)?(\S+)\s*->\s*(\S+)$")


def parse_graph(text: str) -> DirectedMultigraph:
    """Parse the edge-list format.

    ``vertices: 3`` declares vertices ``1..3``; ``vertices: a,b,c`` declares
    named vertices.  Each further non-comment line is ``[id:] src -> rng``.
    Unlabelled edges get ids ``e1..em`` by position.
    """
    vertices: list[str] | None = None
    raw_edges: list[tuple[str | None, str, str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _VERTICES_RE.match(line)
        if m:
            if vertices is not None:
                raise ParseError("vertices declared twice", lineno)
            spec = m.group(1).strip()
            if not spec:
                raise ParseError("empty vertex declaration", lineno)
            if spec.isdigit():
                count = int(spec)
                if count < 1:
                    raise ParseError("need at least one vertex", lineno)
                vertices = [str(i) for i in range(1, count + 1)]
            else:
                vertices = [tok.strip() for tok in spec.split(",")]
                if any(not tok or re.search(r"\s", tok) for tok in vertices):
                    raise ParseError("malformed vertex list", lineno)
                if len(set(vertices)) != len(vertices):
                    raise ParseError("duplicate vertex id", lineno)
            continue
        m = _EDGE_RE.match(line)
        if not m:
            raise ParseError(f"malformed line {raw!r}", lineno)
        if vertices is None:
            raise ParseError("edge before vertex declaration", lineno)
        raw_edges.append((m.group(1), m.group(2), m.group(3), lineno))
    if vertices is None:
        raise ParseError("missing 'vertices:' line")

    vset = set(vertices)
    seen: set[str] = set()
    edges = []
    for pos, (eid, src, rng, lineno) in enumerate(raw_edges, start=1):
        eid = eid if eid is not None else f"e{pos}"
        if eid in seen:
            raise ParseError(f"duplicate edge id {eid!r}", lineno)
        for v in (src, rng):
            if v not in vset:
                raise ParseError(f"undeclared vertex {v!r}", lineno)
        seen.add(eid)
        edges.append(Edge(eid, src, rng))
    return DirectedMultigraph(tuple(vertices), tuple(edges))


def format_graph(g: DirectedMultigraph) -> str:
    if all(v == str(i) for i, v in enumerate(g.vertices, start=1)):
        head = f"vertices: {len(g.vertices)}"
    else:
        head = "vertices: " + ",".join(g.vertices)
    lines = [head] + [f"{e.id}: {e.source} -> {e.range}" for e in g.edges]
    return "\n".join(lines) + "\n"


def emit_dot(g: DirectedMultigraph, name: str = "G") -> str:
    lines = [f'digraph "{name}" {{']
    for v in g.vertices:
        lines.append(f'  "{v}";')
    for e in g.edges:
        lines.append(f'  "{e.source}" -> "{e.range}" [label="{e.id}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# structure

def is_connected(g: DirectedMultigraph) -> bool:
    """Every vertex is the source or range of some edge.

    This is deliberately weaker than weak connectivity: a disjoint union of
    two paths counts as connected.
    """
    touched = {e.source for e in g.edges} | {e.range for e in g.edges}
    return all(v in touched for v in g.vertices)


def is_weakly_connected(g: DirectedMultigraph) -> bool:
    """Ordinary (undirected) connectivity, reported for information only."""
    adj = {v: set() for v in g.vertices}
    for e in g.edges:
        adj[e.source].add(e.range)
        adj[e.range].add(e.source)
    start = g.vertices[0]
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(g.vertices)


def _check_order(g: DirectedMultigraph, order: Sequence[str]) -> tuple[str, ...]:
    order = tuple(str(v) for v in order)
    if sorted(order) != sorted(g.vertices):
        raise GraphError("ordering is not a permutation of the vertices")
    return order


def adjacency_matrix(g: DirectedMultigraph, order: Sequence[str] | None = None) -> AdjacencyMatrix:
    order = g.vertices if order is None else _check_order(g, order)
    idx = {v: i for i, v in enumerate(order)}
    n = len(order)
    m = [[0] * n for _ in range(n)]
    for e in g.edges:
        m[idx[e.source]][idx[e.range]] += 1
    return AdjacencyMatrix(order, tuple(tuple(row) for row in m))


def matrix_is_canonical(m: AdjacencyMatrix | Sequence[Sequence[int]]) -> bool:
    """Upper triangular 0/1 matrix whose superdiagonal is all ones."""
    rows = m.entries if isinstance(m, AdjacencyMatrix) else m
    n = len(rows)
    if any(len(row) != n for row in rows):
        raise GraphError("matrix is not square")
    for i, row in enumerate(rows):
        for j, a in enumerate(row):
            if a not in (0, 1):
                return False
            if i > j and a != 0:
                return False
            if j == i + 1 and a != 1:
                return False
    return True


def graph_from_matrix(m: AdjacencyMatrix | Sequence[Sequence[int]]) -> DirectedMultigraph:
    """Vertices ``1..n``; ``m[i][j]`` parallel edges from i+1 to j+1.

    Edge ids follow the convention ``e{i}{j}``; parallel copies get
    ``_1``, ``_2``, ... suffixes.  With ten or more vertices the indices are
    separated by an underscore to stay unambiguous.
    """
    rows = m.entries if isinstance(m, AdjacencyMatrix) else m
    n = len(rows)
    sep = "" if n < 10 else "_"
    edges = []
    for i, row in enumerate(rows, start=1):
        for j, a in enumerate(row, start=1):
            if a < 0:
                raise GraphError("negative adjacency entry")
            base = f"e{i}{sep}{j}"
            if a == 1:
                edges.append((base, i, j))
            else:
                edges.extend((f"{base}_{k}", i, j) for k in range(1, a + 1))
    return DirectedMultigraph.build(range(1, n + 1), edges)


def cycles_geq2(g: DirectedMultigraph) -> list[tuple[str, ...]]:
    """All simple cycles of length >= 2, each once, as edge-id tuples.

    Each cycle starts at its earliest vertex (in ``g.vertices`` order).
    Parallel edges give distinct cycles.  Loops are never reported.
    """
    pos = {v: i for i, v in enumerate(g.vertices)}
    out_edges = {v: [e for e in g.edges if e.source == v and not e.is_loop] for v in g.vertices}
    cycles = []

    def extend(start: str, v: str, path: list[str], visited: set[str]):
        for e in out_edges[v]:
            w = e.range
            if w == start:
                if path:
                    cycles.append(tuple(path + [e.id]))
            elif pos[w] > pos[start] and w not in visited:
                visited.add(w)
                path.append(e.id)
                extend(start, w, path, visited)
                path.pop()
                visited.discard(w)

    for start in g.vertices:
        extend(start, start, [], {start})
    return cycles


def spanning_path(g: DirectedMultigraph) -> Path | None:
    """A path with |V|-1 edges through every vertex, or ``None``.

    Exhaustive backtracking over vertex orders; starting vertices and
    successors are tried in declaration order, first matching edge wins.
    """
    n = len(g.vertices)
    succ = {v: [] for v in g.vertices}
    for e in g.edges:
        if not e.is_loop and e.range not in [w for w, _ in succ[e.source]]:
            succ[e.source].append((e.range, e.id))

    def walk(v: str, visited: set[str], edges: list[str]) -> list[str] | None:
        if len(visited) == n:
            return list(edges)
        for w, eid in succ[v]:
            if w not in visited:
                visited.add(w)
                edges.append(eid)
                found = walk(w, visited, edges)
                if found is not None:
                    return found
                edges.pop()
                visited.discard(w)
        return None

    for start in g.vertices:
        found = walk(start, {start}, [])
        if found is not None:
            return Path(start, tuple(found))
    return None


def _parallel_witness(g: DirectedMultigraph) -> tuple[str, str] | None:
    first: dict[tuple[str, str], str] = {}
    for e in g.edges:
        key = (e.source, e.range)
        if key in first:
            return (first[key], e.id)
        first[key] = e.id
    return None


def path_vertices(g: DirectedMultigraph, path: Path) -> tuple[str, ...]:
    return (path.anchor,) + tuple(g.r(e) for e in path.edges)


def check_property_R(g: DirectedMultigraph) -> PropertyRReport:
    if not is_connected(g):
        raise PreconditionError("graph is not connected (some vertex touches no edge)")
    violated = set()
    cycles = cycles_geq2(g)
    r1 = cycles[0] if cycles else None
    if r1:
        violated.add("R1")
    path = spanning_path(g)
    r2 = None
    if path is None:
        violated.add("R2")
        r2 = "no path of length |V|-1 visits every vertex"
    r3 = _parallel_witness(g)
    if r3:
        violated.add("R3")
    ordering = path_vertices(g, path) if not violated else None
    return PropertyRReport(not violated, frozenset(violated), r1, r2, r3, ordering)


def canonical_ordering(g: DirectedMultigraph) -> tuple[str, ...] | None:
    """Vertex order along the spanning path when (R) holds, else ``None``."""
    if not is_connected(g):
        return None
    return check_property_R(g).ordering


def exists_canonical_permutation(g: DirectedMultigraph) -> tuple[str, ...] | None:
    """Brute force over all vertex orders; used as an independent check."""
    for order in itertools.permutations(g.vertices):
        if matrix_is_canonical(adjacency_matrix(g, order)):
            return order
    return None


def is_isomorphic(g: DirectedMultigraph, h: DirectedMultigraph) -> bool:
    """Brute-force isomorphism test preserving edge multiplicities."""
    if len(g.vertices) != len(h.vertices) or len(g.edges) != len(h.edges):
        return False
    target = adjacency_matrix(h).entries
    return any(adjacency_matrix(g, order).entries == target for order in itertools.permutations(g.vertices))
