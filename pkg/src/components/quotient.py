"""
Quotients of the directed 2*ell-cycle by a pair partition.

The cycle graph has vertices v_1..v_{2l} and edges e_j: v_j -> v_{j+1}. For a
block (j < k) the edges e_j and e_k are overlaid head-to-tail, which identifies
v_j with v_{k+1} and v_k with v_{j+1}. The resulting vertex classes are the
cycles of gamma o pi.
"""
import sys
from typing import Dict, List, Tuple

import networkx as nx

from src.components.combinat import cycles_gamma_pi
from src.entity.graph import QuotientGraph, SimpleGraph, VertexPair
from src.entity.partition import PairPartition
from src.exception import DomainError
from src.logger import logging


def build_quotient(pp: PairPartition) -> QuotientGraph:
    n = 2 * pp.ell
    cycles = cycles_gamma_pi(pp)

    class_of: Dict[int, int] = {}
    absorbed = {}
    for cycle in cycles:
        vid = min(cycle)
        absorbed[vid] = frozenset(cycle)
        for i in cycle:
            class_of[i] = vid

    edges = tuple(
        (class_of[j], class_of[j % n + 1], j) for j in range(1, n + 1)
    )
    return QuotientGraph(
        ell=pp.ell,
        vertices=tuple(sorted(absorbed)),
        absorbed=absorbed,
        edges=edges,
    )


def underlying_simple(qg: QuotientGraph) -> SimpleGraph:
    multiplicity: Dict[VertexPair, int] = {}
    loop_count = 0
    for src, dst, _ in qg.edges:
        if src == dst:
            loop_count += 1
            continue
        key = (min(src, dst), max(src, dst))
        multiplicity[key] = multiplicity.get(key, 0) + 1
    return SimpleGraph(
        vertices=qg.vertices,
        simple_edges=dict(sorted(multiplicity.items())),
        loop_count=loop_count,
    )


def is_double_tree(qg: QuotientGraph) -> bool:
    if qg.loops:
        return False
    sg = underlying_simple(qg)
    if not nx.is_tree(sg.to_networkx()):
        return False
    return all(mult == 2 for mult in sg.simple_edges.values())


def spanning_tree(sg: SimpleGraph) -> Tuple[VertexPair, ...]:
    """
    Kruskal over the lexicographic edge order, so the tree always takes the
    smallest edge that does not close a cycle.
    """
    graph = sg.to_networkx()
    if not nx.is_connected(graph):
        raise DomainError(f"spanning tree requested for a disconnected graph on {sg.vertices}", sys)
    for rank, (u, v) in enumerate(sorted(sg.simple_edges)):
        graph[u][v]["rank"] = rank
    tree = nx.minimum_spanning_tree(graph, weight="rank", algorithm="kruskal")
    return tuple(sorted((min(u, v), max(u, v)) for u, v in tree.edges()))


def twin_edges_opposite(qg: QuotientGraph, pp: PairPartition) -> bool:
    """True iff e_j and e_k join the same vertex pair in opposite directions for every block."""
    for j, k in pp.blocks:
        src_j, dst_j, _ = qg.edge(j)
        src_k, dst_k, _ = qg.edge(k)
        if (src_j, dst_j) != (dst_k, src_k):
            return False
    return True


def to_adjacency_text(qg: QuotientGraph) -> str:
    """One line per simple edge or looped vertex: ``src dst mult loopflag``."""
    sg = underlying_simple(qg)
    lines: List[str] = [f"{u} {v} {mult} 0" for (u, v), mult in sg.simple_edges.items()]

    loops: Dict[int, int] = {}
    for src, _, _ in qg.loops:
        loops[src] = loops.get(src, 0) + 1
    lines.extend(f"{v} {v} {count} 1" for v, count in sorted(loops.items()))

    logging.debug(f"Quotient graph for ell={qg.ell}: {len(qg.vertices)} vertices, {len(lines)} lines")
    return "\n".join(lines) + "\n"
