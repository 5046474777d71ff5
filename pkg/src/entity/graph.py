from dataclasses import dataclass
from typing import Dict, FrozenSet, Tuple

import networkx as nx

# (source vertex id, target vertex id, original edge index e_j, 1-based)
DirectedEdge = Tuple[int, int, int]
VertexPair = Tuple[int, int]


@dataclass(frozen=True)
class QuotientGraph:
    """
    The multigraph obtained from the directed 2*ell-cycle by overlaying the two
    edges of every block head-to-tail.

    Vertex ids are the minimal original index of the absorbed set, which is a
    cycle of gamma o pi.
    """
    ell: int
    vertices: Tuple[int, ...]
    absorbed: Dict[int, FrozenSet[int]]
    edges: Tuple[DirectedEdge, ...]

    @property
    def loops(self) -> Tuple[DirectedEdge, ...]:
        return tuple(e for e in self.edges if e[0] == e[1])

    def edge(self, index: int) -> DirectedEdge:
        return self.edges[index - 1]


@dataclass(frozen=True)
class SimpleGraph:
    """Underlying simple graph: loops dropped, parallel edges merged with multiplicity."""
    vertices: Tuple[int, ...]
    simple_edges: Dict[VertexPair, int]
    loop_count: int

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        for (u, v), mult in self.simple_edges.items():
            graph.add_edge(u, v, multiplicity=mult)
        return graph
