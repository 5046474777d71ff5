"""
Exact admissible-label counts Q(l, N, b, pi) and the genus-one limit integrals I_l^pi.
"""
import sys
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from src.components.combinat import genus
from src.components.quotient import build_quotient, underlying_simple
from src.constants import (COUNTING_NODE_BUDGET, INTEGRAL_CHUNK_SIZE,
                           INTEGRAL_DEFAULT_SEED)
from src.entity.artifact_entity import IntegralEstimate, LabelCount
from src.entity.config_entity import BandGeometry
from src.entity.graph import VertexPair
from src.entity.partition import PairPartition
from src.exception import DomainError, ResourceBudgetError
from src.logger import logging


def _edge_bands(pp: PairPartition, geom: BandGeometry,
                edge_bands: Optional[Mapping[int, int]]) -> Dict[VertexPair, int]:
    """Band width of every simple edge: the tightest band over its parallel edges."""
    qg = build_quotient(pp)
    bands: Dict[VertexPair, int] = {}
    for src, dst, index in qg.edges:
        if src == dst:
            continue
        b = geom.b if edge_bands is None else edge_bands.get(index, geom.b)
        if b < 0:
            raise DomainError(f"edge e_{index} has negative band width {b}", sys)
        key = (min(src, dst), max(src, dst))
        bands[key] = min(b, bands.get(key, b))
    return bands


def _window_sum(weights: np.ndarray, b: int, geom: BandGeometry) -> np.ndarray:
    """S[x] = sum of weights[y] over labels y with dist(x, y) <= b."""
    N = geom.N
    if geom.periodic:
        if 2 * b + 1 >= N:
            return np.full(N, weights.sum(), dtype=object)
        if b == 0:
            return weights.copy()
        extended = np.concatenate([weights[-b:], weights, weights[:b]])
        cumulative = np.concatenate([np.array([0], dtype=object), np.cumsum(extended)])
        idx = np.arange(N)
        return cumulative[idx + 2 * b + 1] - cumulative[idx]

    cumulative = np.concatenate([np.array([0], dtype=object), np.cumsum(weights)])
    idx = np.arange(N)
    hi = np.minimum(N, idx + b + 1)
    lo = np.maximum(0, idx - b)
    return cumulative[hi] - cumulative[lo]


class _CoreCounter:
    """Depth-first labelling of the 2-core; the last vertex is counted by a masked sum."""

    def __init__(self, order: List[int], neighbours: Dict[int, Dict[int, int]],
                 weights: Dict[int, np.ndarray], geom: BandGeometry, node_budget: int):
        self.order = order
        self.neighbours = neighbours
        self.weights = weights
        self.geom = geom
        self.node_budget = node_budget
        self.nodes_visited = 0
        self._labels = np.arange(geom.N)

    def _candidates(self, depth: int, assigned: Dict[int, int]) -> np.ndarray:
        vertex = self.order[depth]
        mask = np.ones(self.geom.N, dtype=bool)
        for other, b in self.neighbours[vertex].items():
            if other in assigned:
                mask &= self.geom.distance(self._labels, assigned[other]) <= b
        return mask

    def count_from(self, depth: int, assigned: Dict[int, int]) -> int:
        vertex = self.order[depth]
        mask = self._candidates(depth, assigned)
        if depth == len(self.order) - 1:
            self.nodes_visited += 1
            return int(self.weights[vertex][mask].sum())

        total = 0
        for label in np.flatnonzero(mask):
            weight = self.weights[vertex][label]
            if weight == 0:
                continue
            self.nodes_visited += 1
            if self.nodes_visited > self.node_budget:
                raise ResourceBudgetError(
                    f"label counting exceeded the node budget of {self.node_budget}", sys)
            assigned[vertex] = int(label)
            total += weight * self.count_from(depth + 1, assigned)
            del assigned[vertex]
        return total


def _traversal_order(root: int, neighbours: Dict[int, Dict[int, int]]) -> List[int]:
    # each vertex after the root has an already-placed neighbour
    order, seen = [root], {root}
    i = 0
    while i < len(order):
        for other in sorted(neighbours[order[i]]):
            if other not in seen:
                seen.add(other)
                order.append(other)
        i += 1
    return order


def _count(pp: PairPartition, geom: BandGeometry, edge_bands: Optional[Mapping[int, int]],
           node_budget: int, pinned: Optional[Tuple[int, int]]) -> LabelCount:
    qg = build_quotient(pp)
    bands = _edge_bands(pp, geom, edge_bands)
    N = geom.N

    neighbours: Dict[int, Dict[int, int]] = {v: {} for v in qg.vertices}
    for (u, v), b in bands.items():
        neighbours[u][v] = b
        neighbours[v][u] = b
    weights = {v: np.ones(N, dtype=object) for v in qg.vertices}
    if pinned is not None:
        vertex, label = pinned
        weights[vertex] = np.zeros(N, dtype=object)
        weights[vertex][label] = 1

    alive = set(qg.vertices)
    leaves = [v for v in sorted(alive) if len(neighbours[v]) == 1]
    while leaves and len(alive) > 1:
        leaf = leaves.pop()
        if leaf not in alive or len(neighbours[leaf]) != 1:
            continue
        (parent, b), = neighbours[leaf].items()
        weights[parent] = weights[parent] * _window_sum(weights[leaf], b, geom)
        del neighbours[parent][leaf]
        neighbours[leaf].clear()
        alive.discard(leaf)
        if len(neighbours[parent]) == 1:
            leaves.append(parent)

    core = sorted(alive)
    if len(core) == 1:
        value = int(weights[core[0]].sum())
        nodes = 1
    else:
        order = _traversal_order(core[0], neighbours)
        counter = _CoreCounter(order, neighbours, weights, geom, node_budget)
        root_weights = weights[order[0]]
        if geom.periodic and pinned is None:
            # rotation invariance: every root label sees the same restricted count
            value = N * int(root_weights[0]) * counter.count_from(1, {order[0]: 0})
        else:
            value = 0
            for root_label in range(N):
                if root_weights[root_label] == 0:
                    continue
                value += int(root_weights[root_label]) * counter.count_from(1, {order[0]: root_label})
        nodes = counter.nodes_visited

    logging.debug(f"Q({pp}, N={N}, b={geom.b}, {geom.mode}) = {value} "
                  f"[core {len(core)} of {len(qg.vertices)} vertices, {nodes} nodes]")
    return LabelCount(value=value, vertex_count=len(qg.vertices), nodes_visited=nodes)


def count_admissible(pp: PairPartition, geom: BandGeometry,
                     edge_bands: Optional[Mapping[int, int]] = None,
                     node_budget: int = COUNTING_NODE_BUDGET) -> LabelCount:
    """
    Number of labellings eta: V(quotient) -> [N] with dist(eta(u), eta(v)) <= b_e
    on every non-loop edge.

    ``edge_bands`` optionally maps an original edge index e_j (1-based) to its
    own band width; parallel edges use the tightest one. Leaves are folded into
    their neighbour's weight vector before the remaining core is labelled
    depth-first. In periodic mode the root label is fixed and the restricted
    count multiplied by N.
    """
    return _count(pp, geom, edge_bands, node_budget, pinned=None)


def count_rooted(pp: PairPartition, geom: BandGeometry, root_label: int,
                 node_budget: int = COUNTING_NODE_BUDGET) -> LabelCount:
    """Admissible labellings with the smallest quotient vertex pinned to ``root_label`` (1-based)."""
    if not 1 <= root_label <= geom.N:
        raise DomainError(f"root label {root_label} outside [1, {geom.N}]", sys)
    root = build_quotient(pp).vertices[0]
    return _count(pp, geom, None, node_budget, pinned=(root, root_label - 1))


def label_bounds(pp: PairPartition, geom: BandGeometry) -> Tuple[int, int]:
    """
    (N * floor(xi/(k-1))^(k-1), N * xi^(k-1)) for a quotient on k vertices.

    The floored step only weakens the lower bound.
    """
    if not geom.periodic:
        raise DomainError("the label sandwich holds in periodic mode only", sys)
    k = len(build_quotient(pp).vertices)
    if k == 1:
        return geom.N, geom.N
    step = geom.xi // (k - 1)
    return geom.N * step ** (k - 1), geom.N * geom.xi ** (k - 1)


def check_bounds(pp: PairPartition, geom: BandGeometry) -> bool:
    lower, upper = label_bounds(pp, geom)
    value = count_admissible(pp, geom).value
    return lower <= value <= upper


def _merge(n_a: int, mean_a: float, m2_a: float,
           n_b: int, mean_b: float, m2_b: float) -> Tuple[int, float, float]:
    # pairwise update of (count, mean, sum of squared deviations)
    n = n_a + n_b
    if n == 0:
        return 0, 0.0, 0.0
    delta = mean_b - mean_a
    mean = mean_a + delta * n_b / n
    m2 = m2_a + m2_b + delta * delta * n_a * n_b / n
    return n, mean, m2


def integral_I(pp: PairPartition, samples: int, seed: int = INTEGRAL_DEFAULT_SEED, stream: int = 0,
               root: Optional[int] = None, chunk_size: int = INTEGRAL_CHUNK_SIZE) -> IntegralEstimate:
    """
    Monte Carlo estimate of the genus-one limit integral

        I = int_{[0, L]^(l-2)} prod_{edges} 1{|t_v - t_w|_L <= 1},   L = 2(l-2),

    with the root vertex pinned at t = 0. Chunk c draws from
    Philox(SeedSequence(seed, spawn_key=(stream, c))) and chunks are merged in order.
    """
    profile = genus(pp)
    if profile.genus != 1:
        raise DomainError(f"integral_I needs a genus-one partition, {pp} has genus {profile.genus}", sys)
    ell = pp.ell
    if ell == 2:
        return IntegralEstimate(mean=1.0, stderr=0.0, samples=samples)
    if samples <= 0:
        raise DomainError(f"samples must be positive, got {samples}", sys)

    sg = underlying_simple(build_quotient(pp))
    root = sg.vertices[0] if root is None else root
    if root not in sg.vertices:
        raise DomainError(f"root {root} is not a vertex of the quotient ({sg.vertices})", sys)

    free = [v for v in sg.vertices if v != root]
    column = {v: i for i, v in enumerate(free)}
    side = 2.0 * (ell - 2)
    volume = side ** len(free)

    n, mean, m2 = 0, 0.0, 0.0
    for chunk, start in enumerate(range(0, samples, chunk_size)):
        size = min(chunk_size, samples - start)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream, chunk))))
        t = rng.uniform(0.0, side, size=(size, len(free)))

        inside = np.ones(size, dtype=bool)
        for u, v in sg.simple_edges:
            a = np.zeros(size) if u == root else t[:, column[u]]
            b = np.zeros(size) if v == root else t[:, column[v]]
            d = np.abs(a - b)
            inside &= np.minimum(d, side - d) <= 1.0

        values = volume * inside.astype(float)
        chunk_mean = float(values.mean())
        chunk_m2 = float(((values - chunk_mean) ** 2).sum())
        n, mean, m2 = _merge(n, mean, m2, size, chunk_mean, chunk_m2)

    stderr = float(np.sqrt(m2 / (n - 1) / n)) if n > 1 else 0.0
    logging.debug(f"I[{pp}] ~ {mean:.6f} +/- {stderr:.6f} from {n} samples (root {root})")
    return IntegralEstimate(mean=mean, stderr=stderr, samples=n)
