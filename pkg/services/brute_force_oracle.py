# services/brute_force_oracle.py
"""
Independent evaluator for c_{w,W}: enumerates every walk of length <= rho(d)
and maximizes the non-overlapping copy selection exhaustively. Exponential;
meant for small instances that validate the product-graph solver.
"""
import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from config import Config
from models.errors import BudgetExceededError
from models.space import Space
from services.counting_service import CountingFunctional, LabelPattern
from services.graph_inspector import GraphInspector

logger = logging.getLogger(__name__)


def max_disjoint(starts: Sequence[int], size: int) -> int:
    """Largest set of occurrences [s, s + size) that pairwise do not overlap"""

    @lru_cache(maxsize=None)
    def best(index: int, free_from: int) -> int:
        if index == len(starts):
            return 0
        skip = best(index + 1, free_from)
        if starts[index] < free_from:
            return skip
        return max(skip, 1 + best(index + 1, starts[index] + size))

    return best(0, 0)


class BruteForceOracle:
    def __init__(self, space: Space, inspector: Optional[GraphInspector] = None,
                 max_walks: Optional[int] = None):
        self.space = space
        self.inspector = inspector or GraphInspector(space)
        self.max_walks = max_walks or Config.ORACLE_MAX_WALKS

    def value(self, f: CountingFunctional, x: int, y: int) -> int:
        d = self.inspector.bfs_distance(x, y)
        size = f.pattern.length
        limit = (d * size + (size - f.W) - 1) // (size - f.W)
        occurrences = self._occurrence_finder(f)

        best = d
        walks = 0
        stack: List[Tuple[int, ...]] = [(x,)]
        while stack:
            walk = stack.pop()
            walks += 1
            if walks > self.max_walks:
                raise BudgetExceededError(f"oracle enumerated more than {self.max_walks} walks",
                                          cap=self.max_walks, limit=limit)
            steps = len(walk) - 1
            if walk[-1] == y:
                best = min(best, steps - f.W * max_disjoint(occurrences(walk), size))
            if steps == limit:
                continue
            for u in self.space.neighbors(walk[-1]):
                if steps + 1 + self.inspector.bfs_distance(u, y) <= limit:
                    stack.append(walk + (u,))
        logger.debug(f"oracle: {walks} walks up to length {limit}, optimum {best}")
        return d - best

    def _occurrence_finder(self, f: CountingFunctional):
        pattern = f.pattern
        size = pattern.length
        if isinstance(pattern, LabelPattern):
            target = pattern.word.letters

            def occurrences(walk: Tuple[int, ...]) -> Tuple[int, ...]:
                labels = [self.space.edge_letter(u, v) for u, v in zip(walk, walk[1:])]
                return tuple(i for i in range(len(labels) - size + 1)
                             if tuple(labels[i:i + size]) == target)
        else:
            copies = set(pattern.walks)

            def occurrences(walk: Tuple[int, ...]) -> Tuple[int, ...]:
                return tuple(i for i in range(len(walk) - size) if walk[i:i + size + 1] in copies)
        return occurrences
