# services/graph_inspector.py
"""
Distances, geodesics, thin-triangle estimates and quasi-geodesic predicates
"""
import itertools
import logging
from typing import Callable, Dict, Iterable, List, Tuple, Union

import networkx as nx

from models.errors import DisconnectedError
from models.space import QGParams, Space, Walk

logger = logging.getLogger(__name__)

Triple = Tuple[int, int, int]


class GraphInspector:
    """
    Metric queries on a Space. BFS results are cached per source; for
    free-tree truncations (which are subtrees, hence convex) distances are
    word-metric distances and need no search.
    """

    def __init__(self, space: Space):
        self.space = space
        self._bfs_cache: Dict[int, Dict[int, int]] = {}

    # ------------------------------------------------------------------
    # distances
    # ------------------------------------------------------------------
    def distances_from(self, source: int) -> Dict[int, int]:
        """Single-source BFS distances inside the space"""
        cached = self._bfs_cache.get(source)
        if cached is None:
            cached = nx.single_source_shortest_path_length(self.space.graph, source)
            self._bfs_cache[source] = cached
        return cached

    def bfs_distance(self, u: int, v: int) -> int:
        if u == v:
            return 0
        if self.space.is_free_tree:
            labels = self.space.labels
            return len(labels[u].inverse() * labels[v])
        distance = self.distances_from(u).get(v)
        if distance is None:
            raise DisconnectedError(f"no walk joins {self.space.label(u)} and {self.space.label(v)}",
                                    u=u, v=v)
        return distance

    def distance_to_set(self, vertex: int, targets: Iterable[int]) -> int:
        return min(self.bfs_distance(vertex, target) for target in targets)

    # ------------------------------------------------------------------
    # geodesics
    # ------------------------------------------------------------------
    def geodesic(self, u: int, v: int) -> Walk:
        """
        Geodesic from u to v; at every layer the least neighbor id that
        stays on a shortest walk is taken.
        """
        remaining = self.bfs_distance(u, v)
        if self.space.is_free_tree:
            to_target: Callable[[int], int] = lambda x: self.bfs_distance(x, v)
        else:
            from_target = self.distances_from(v)
            to_target = lambda x: from_target.get(x, -1)
        vertices = [u]
        current = u
        while remaining > 0:
            current = next(n for n in self.space.neighbors(current) if to_target(n) == remaining - 1)
            vertices.append(current)
            remaining -= 1
        return Walk(tuple(vertices))

    # ------------------------------------------------------------------
    # hyperbolicity
    # ------------------------------------------------------------------
    def triangle_delta(self, x: int, y: int, z: int) -> int:
        """Least delta for which each geodesic side is in the delta-neighborhood of the other two"""
        sides = [self.geodesic(x, y).vertices, self.geodesic(y, z).vertices, self.geodesic(z, x).vertices]
        worst = 0
        for i, side in enumerate(sides):
            others = set(sides[(i + 1) % 3]) | set(sides[(i + 2) % 3])
            for point in side:
                if point in others:
                    continue
                worst = max(worst, self.distance_to_set(point, others))
        return worst

    def delta_estimate(self, triple_sample: Union[str, Iterable[Triple]] = "all") -> int:
        """
        Thin-triangle constant over sampled triangles. With "all", every
        sorted triple (repetitions allowed) is examined, which is exact
        for the finite space.
        """
        if triple_sample == "all":
            triples = itertools.combinations_with_replacement(range(self.space.num_vertices), 3)
        else:
            triples = triple_sample
        delta = 0
        examined = 0
        for x, y, z in triples:
            delta = max(delta, self.triangle_delta(x, y, z))
            examined += 1
        logger.info(f"delta estimate {delta} over {examined} triangles of {self.space.metadata}")
        return delta

    # ------------------------------------------------------------------
    # predicates
    # ------------------------------------------------------------------
    def is_quasigeodesic(self, walk: Walk, params: QGParams) -> bool:
        """Lower bound (j - i)/K - L <= d(w_i, w_j) on every pair of indices"""
        vertices = walk.vertices
        for i in range(len(vertices)):
            for j in range(i + 1, len(vertices)):
                if self.bfs_distance(vertices[i], vertices[j]) < (j - i) / params.K - params.L:
                    return False
        return True

    def in_neighborhood(self, walk: Walk, other: Walk, C: float) -> bool:
        """True when every vertex of walk is within C of some vertex of other"""
        targets = set(other.vertices)
        for vertex in set(walk.vertices):
            if vertex in targets:
                continue
            if self.distance_to_set(vertex, targets) > C:
                return False
        return True

    def oriented_close(self, J1: Walk, J2: Walk, C: float) -> bool:
        return (self.bfs_distance(J1.start, J2.start) <= C
                and self.bfs_distance(J1.end, J2.end) <= C
                and self.in_neighborhood(J1, J2, C)
                and self.in_neighborhood(J2, J1, C))


def sample_triples(num_vertices: int, size: int, rng) -> List[Triple]:
    """Random vertex triples drawn with a numpy Generator"""
    draws = rng.integers(0, num_vertices, size=(size, 3))
    return [tuple(int(value) for value in row) for row in draws]
