# services/space_builder.py
"""
Builders for the concrete instance spaces: free-group Cayley trees and the
Farey graph, both as finite truncations
"""
import logging
from math import gcd
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from config import Config
from models.errors import TooLargeError
from models.group_element import Slope
from models.space import Space
from models.word import Letter, Word
from services.graph_inspector import GraphInspector

logger = logging.getLogger(__name__)


def free_tree_ball_size(rank: int, radius: int) -> int:
    """1 + 2r((2r-1)^radius - 1)/(2r-2)"""
    return 1 + 2 * rank * ((2 * rank - 1) ** radius - 1) // (2 * rank - 2)


def alphabet(rank: int) -> List[Letter]:
    """All generators and inverses in the order a, A, b, B, ..."""
    return [Letter(gen, sign) for gen in range(1, rank + 1) for sign in (1, -1)]


class SpaceBuilder:
    """Constructs immutable Space instances within a vertex budget"""

    def __init__(self, max_vertices: Optional[int] = None):
        self.max_vertices = max_vertices or Config.MAX_VERTICES

    # ------------------------------------------------------------------
    # free-group Cayley trees
    # ------------------------------------------------------------------
    def build_free_tree_ball(self, rank: int, radius: int) -> Space:
        if rank < 2 or radius < 0:
            raise ValueError(f"free tree ball needs rank >= 2 and radius >= 0, got rank={rank}, radius={radius}")
        size = free_tree_ball_size(rank, radius)
        if size > self.max_vertices:
            raise TooLargeError(f"ball of radius {radius} in F{rank} has {size} vertices "
                                f"(budget {self.max_vertices})", size=size, budget=self.max_vertices)
        letters = alphabet(rank)
        words: List[Word] = [Word.identity()]
        layer = [Word.identity()]
        for _ in range(radius):
            next_layer = []
            for word in layer:
                for letter in letters:
                    if word.letters and word.letters[-1] == letter.inverse():
                        continue
                    next_layer.append(Word(word.letters + (letter,)))
            words.extend(next_layer)
            layer = next_layer
        truncation = {'kind': 'free_tree_ball', 'rank': rank, 'radius': radius}
        space = self._tree_space(words, truncation, f"F{rank} Cayley tree ball of radius {radius}")
        logger.info(f"Built {space.metadata}: {space.num_vertices} vertices, {space.num_edges} edges")
        return space

    def build_free_tree_neighbourhood(self, rank: int, words: Sequence[Word], radius: int) -> Space:
        """
        The radius-neighbourhood of the union of geodesics [1, w]. It is a
        subtree containing the identity, so inside it distances are word
        lengths.
        """
        letters = alphabet(rank)
        for word in words:
            if word.max_generator > rank:
                raise ValueError(f"word {word} uses generators beyond rank {rank}")
        vertices: Set[Word] = {Word.identity()}
        for word in words:
            for i in range(1, len(word) + 1):
                vertices.add(Word(word.letters[:i]))
        frontier = set(vertices)
        for _ in range(radius):
            next_frontier = set()
            for vertex in frontier:
                for letter in letters:
                    neighbor = vertex * Word((letter,))
                    if neighbor not in vertices:
                        next_frontier.add(neighbor)
            vertices |= next_frontier
            frontier = next_frontier
            if len(vertices) > self.max_vertices:
                raise TooLargeError(f"neighbourhood exceeds {self.max_vertices} vertices",
                                    budget=self.max_vertices)
        ordered = sorted(vertices, key=lambda w: w.sort_key)
        truncation = {
            'kind': 'free_tree_neighbourhood',
            'rank': rank,
            'radius': radius,
            'words': sorted(str(word) for word in set(words)),
        }
        space = self._tree_space(ordered, truncation,
                                 f"F{rank} Cayley tree, {radius}-neighbourhood of {len(set(words))} geodesic(s)")
        logger.info(f"Built {space.metadata}: {space.num_vertices} vertices")
        return space

    @staticmethod
    def _tree_space(words: Sequence[Word], truncation: Dict[str, Any], metadata: str) -> Space:
        index = {word: i for i, word in enumerate(words)}
        edges = []
        for word, vertex in index.items():
            if word.letters:
                edges.append((index[Word(word.letters[:-1])], vertex))
        return Space.from_edges(list(words), edges, truncation, metadata)

    # ------------------------------------------------------------------
    # Farey graph
    # ------------------------------------------------------------------
    def build_farey_ball(self, denominator_bound: int, center: Optional[Slope] = None) -> Space:
        """
        Slopes p/q with |p| <= Q and q <= Q, joined when |ps - qr| = 1.
        Distances measured here are upper bounds for distances in the full
        Farey graph.
        """
        bound = denominator_bound
        if bound < 1:
            raise ValueError(f"denominator bound must be >= 1, got {bound}")
        center = center or Slope(0, 1)
        slopes = [Slope(1, 0)]
        for q in range(1, bound + 1):
            for p in range(-bound, bound + 1):
                if gcd(abs(p), q) == 1:
                    slopes.append(Slope(p, q))
        if len(slopes) > self.max_vertices:
            raise TooLargeError(f"Farey truncation Q={bound} has {len(slopes)} vertices",
                                size=len(slopes), budget=self.max_vertices)
        index = {slope: i for i, slope in enumerate(slopes)}
        if center not in index:
            raise ValueError(f"center {center} lies outside the truncation Q={bound}")

        edges: Set[Tuple[int, int]] = set()
        for slope, vertex in index.items():
            for neighbor in _farey_neighbors(slope, bound):
                other = index.get(neighbor)
                if other is not None and other != vertex:
                    edges.add((min(vertex, other), max(vertex, other)))
        truncation = {'kind': 'farey', 'Q': bound, 'center': str(center)}
        space = Space.from_edges(slopes, sorted(edges), truncation, f"Farey graph truncated at Q={bound}")
        logger.info(f"Built {space.metadata}: {space.num_vertices} vertices, {space.num_edges} edges")
        return space

    def farey_distance_convergence(self, denominator_bound: int,
                                   pairs: Iterable[Tuple[Slope, Slope]]) -> List[Dict[str, Any]]:
        """Distances at Q and at 2Q; the first must dominate the second"""
        coarse = GraphInspector(self.build_farey_ball(denominator_bound))
        fine = GraphInspector(self.build_farey_ball(2 * denominator_bound))
        rows = []
        for a, b in pairs:
            d_coarse = coarse.bfs_distance(coarse.space.vertex(a), coarse.space.vertex(b))
            d_fine = fine.bfs_distance(fine.space.vertex(a), fine.space.vertex(b))
            rows.append({'pair': [str(a), str(b)], 'Q': denominator_bound, 'd_Q': d_coarse,
                         'd_2Q': d_fine, 'monotone': d_fine <= d_coarse})
        return rows

    # ------------------------------------------------------------------
    # generic graphs
    # ------------------------------------------------------------------
    @staticmethod
    def build_cycle(length: int) -> Space:
        if length < 3:
            raise ValueError("a cycle needs at least 3 vertices")
        edges = [(i, (i + 1) % length) for i in range(length)]
        return Space.from_edges(list(range(length)), edges, None, f"cycle graph C{length}")


def _farey_neighbors(slope: Slope, bound: int) -> Iterable[Slope]:
    """All r/s with |r| <= Q, s <= Q and |ps - qr| = 1"""
    p, q = slope.p, slope.q
    if q == 0:
        for r in range(-bound, bound + 1):
            yield Slope(r, 1)
        return
    for s in range(0, bound + 1):
        for sign in (1, -1):
            numerator = p * s - sign
            if numerator % q:
                continue
            r = numerator // q
            if abs(r) <= bound:
                yield Slope.of(r, s)
