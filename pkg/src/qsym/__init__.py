"""Quantum symmetry certification for graph C*-algebras."""

from .graph_core import DirectedMultigraph, GraphError, ParseError, PreconditionError, parse_graph

__all__ = ["DirectedMultigraph", "GraphError", "ParseError", "PreconditionError", "parse_graph"]
__version__ = "0.1.0"
