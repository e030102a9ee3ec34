"""Named graph families with their expected classification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .graph_core import DirectedMultigraph, GraphError, graph_from_matrix

RIGID = "RIGID"
KNOWN_LARGER = "KNOWN_LARGER"
NOT_RIGID_PARALLEL_EDGES = "NOT_RIGID_PARALLEL_EDGES"


@dataclass(frozen=True)
class FamilySpec:
    name: str
    parameters: tuple[int, ...]
    graph: DirectedMultigraph
    expected_verdict: str
    algebra_label: str
    citation: str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": list(self.parameters),
            "expected_verdict": self.expected_verdict,
            "algebra_label": self.algebra_label,
            "citation": self.citation,
        }


def _path(n: int) -> DirectedMultigraph:
    return graph_from_matrix([[1 if j == i + 1 else 0 for j in range(n)] for i in range(n)])


def _odd_sphere(n: int) -> DirectedMultigraph:
    return graph_from_matrix([[1 if i <= j else 0 for j in range(n)] for i in range(n)])


def _jordan(n: int) -> DirectedMultigraph:
    return graph_from_matrix([[1 if j in (i, i + 1) else 0 for j in range(n)] for i in range(n)])


def _ball(n: int) -> DirectedMultigraph:
    size = n + 1
    return graph_from_matrix(
        [[1 if i <= j and not (i == j == size - 1) else 0 for j in range(size)] for i in range(size)]
    )


def _k2() -> DirectedMultigraph:
    return graph_from_matrix([[0, 1], [1, 0]])


def _l11() -> DirectedMultigraph:
    return graph_from_matrix([[1, 0], [0, 1]])


def _gamma0() -> DirectedMultigraph:
    return graph_from_matrix([[0, 1, 0], [0, 0, 1], [0, 1, 0]])


def _p23() -> DirectedMultigraph:
    m = [[0] * 5 for _ in range(5)]
    m[0][1] = m[2][3] = m[3][4] = 1
    return graph_from_matrix(m)


def _l2prime() -> DirectedMultigraph:
    return DirectedMultigraph.build([1, 2], [("e11", 1, 1), ("e1", 1, 2), ("e2", 1, 2)])


def _l3sup2() -> DirectedMultigraph:
    return DirectedMultigraph.build(
        [1, 2], [("e11", 1, 1), ("e1", 1, 2), ("e2", 1, 2), ("e22", 2, 2)]
    )


@dataclass(frozen=True)
class _Entry:
    arity: int
    min_param: int
    build: Callable[..., DirectedMultigraph]
    verdict: str
    label: Callable[..., str]
    citation: str


_REGISTRY: dict[str, _Entry] = {
    "P": _Entry(1, 2, _path, RIGID, lambda n: f"M_{n}(C)",
                "simple directed path P_n; C*(P_n) is the full matrix algebra"),
    "T": _Entry(0, 0, lambda: graph_from_matrix([[1, 1], [0, 0]]),
                RIGID, lambda: "Toeplitz algebra",
                "Toeplitz graph: loop at v1 and edge v1 -> v2"),
    "L_odd": _Entry(1, 1, _odd_sphere, RIGID,
                    lambda n: f"odd quantum sphere C(S_q^{2 * n - 1})",
                    "L_{2n-1}: full upper triangular 0/1 adjacency matrix"),
    "L_bar": _Entry(1, 1, _jordan, RIGID,
                    lambda n: "C(SU_q(2))" if n == 2 else f"odd quantum sphere C(S_q^{2 * n - 1})",
                    "Lbar_{2n-1}: Jordan block adjacency matrix on n vertices"),
    "M": _Entry(1, 1, _ball, RIGID,
                lambda n: f"even dimensional quantum ball C(B_q^{2 * n})",
                "M_n: upper triangular ones on n+1 vertices without a loop at the last vertex"),
    "K2": _Entry(0, 0, _k2, KNOWN_LARGER, lambda: "M_2(C(S^1))",
                 "two-vertex cycle K2: quantum symmetry is the doubling D_phi(C(S^1)*C(S^1))"),
    "L11": _Entry(0, 0, _l11, KNOWN_LARGER, lambda: "C(S^1) + C(S^1)",
                  "two disjoint loops L_{1,1}: quantum symmetry is H_2^{infinity+}"),
    "Gamma0": _Entry(0, 0, _gamma0, RIGID, lambda: "C*(Gamma_0)",
                     "Gamma_0: rigid although it contains a 2-cycle, so no-cycle condition is not necessary"),
    "P23": _Entry(0, 0, _p23, RIGID, lambda: "M_2(C) + M_3(C)",
                  "P_{2,3} = P_2 disjoint union P_3: rigid without a spanning path"),
    "L2prime": _Entry(0, 0, _l2prime, NOT_RIGID_PARALLEL_EDGES, lambda: "C(RP_q^2)",
                      "L_2': loop at v1 and a double edge v1 => v2; doubling acts"),
    "L3sup2": _Entry(0, 0, _l3sup2, NOT_RIGID_PARALLEL_EDGES, lambda: "C(SO_q(3))",
                     "L_3^(2): loops at both vertices and a double edge v1 => v2; doubling acts"),
}


def list_families() -> list[tuple[str, int, str]]:
    return [(name, entry.arity, entry.citation) for name, entry in _REGISTRY.items()]


def make_family(name: str, params=()) -> FamilySpec:
    try:
        entry = _REGISTRY[name]
    except KeyError:
        raise GraphError(f"unknown family {name!r}; known: {', '.join(_REGISTRY)}") from None
    params = tuple(int(p) for p in params)
    if len(params) != entry.arity:
        raise GraphError(f"family {name} takes {entry.arity} parameter(s), got {len(params)}")
    if params and params[0] < entry.min_param:
        raise GraphError(f"family {name} needs parameter >= {entry.min_param}")
    return FamilySpec(
        name=name,
        parameters=params,
        graph=entry.build(*params),
        expected_verdict=entry.verdict,
        algebra_label=entry.label(*params),
        citation=entry.citation,
    )


def fixture_specs() -> list[FamilySpec]:
    """One representative of every family, at the sizes used in fixtures."""
    return [
        make_family("P", [4]),
        make_family("T"),
        make_family("L_odd", [5]),
        make_family("L_bar", [3]),
        make_family("M", [4]),
        make_family("K2"),
        make_family("L11"),
        make_family("Gamma0"),
        make_family("P23"),
        make_family("L2prime"),
        make_family("L3sup2"),
    ]
