# services/counting_service.py
"""
Counting functionals c_{w,W}, the quasi-homomorphisms h_w, defect estimates
and growth along cyclic subgroups.

c_{w,W}(x, y) = d(x, y) - inf over walks a from x to y of (|a| - W |a|_w),
where |a|_w is the maximal number of non-overlapping copies of w in a.

The infimum is a shortest-path problem on the product of the space with a
copy automaton: a state is either "outside a copy" or a position inside a
copy being traversed. Every step costs 1 and completing a copy credits -W.
A cycle completing k copies has length at least k|w|, so its cost is at
least k(|w| - W) > 0 and Bellman-Ford relaxation finds the exact optimum.

Walks longer than rho(d) = ceil(d |w| / (|w| - W)) are never needed: for any
walk, |a| - W|a|_w >= |a| (1 - W/|w|), which exceeds d (the value of the
geodesic) as soon as |a| > rho(d). A walk through v has length at least
d(x, v) + d(v, y), so only vertices with d(x, v) + d(v, y) <= rho(d) enter
the product graph.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from config import Config
from models.errors import BudgetExceededError, LeftTruncationError, QuasimorphismError
from models.group_element import GroupElement
from models.space import QGParams, Space, Walk
from models.word import Word, count_copies
from services.graph_inspector import GraphInspector
from services.group_action import GroupActionService, TranslateSet

logger = logging.getLogger(__name__)

OUTSIDE = 0


class OracleMismatchError(QuasimorphismError):
    kind = "oracle mismatch"


# ----------------------------------------------------------------------
# copy patterns
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class LabelPattern:
    """Copies of w detected by edge labels (Cayley graphs with free action)"""
    word: Word

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def exact(self) -> bool:
        """Label copies are complete; each evaluation still checks the tree margin"""
        return True

    def inverse(self) -> 'LabelPattern':
        return LabelPattern(self.word.inverse())

    def advance(self, space: Space, v: int, u: int, state: int) -> List[Tuple[Any, bool]]:
        k = state
        if space.edge_letter(v, u) != self.word.letters[k]:
            return []
        if k + 1 == self.length:
            return [(OUTSIDE, True)]
        return [(k + 1, False)]

    def count_on(self, space: Space, walk: Walk) -> int:
        return count_copies(space.walk_letters(walk), self.word)

    def describe(self) -> Dict[str, Any]:
        return {'type': 'word', 'w': str(self.word), 'length': self.length}


@dataclass(frozen=True)
class TranslatePattern:
    """Copies of a walk given by explicitly enumerated translates"""
    walks: Tuple[Tuple[int, ...], ...]
    bound: int
    dropped: int = 0
    by_first_step: Dict[Tuple[int, int], Tuple[int, ...]] = field(
        default=None, init=False, compare=False, hash=False, repr=False)

    def __post_init__(self):
        lengths = {len(walk) for walk in self.walks}
        if len(lengths) != 1:
            raise ValueError("translates must all have the same length")
        index: Dict[Tuple[int, int], List[int]] = {}
        for t, walk in enumerate(self.walks):
            index.setdefault((walk[0], walk[1]), []).append(t)
        object.__setattr__(self, 'by_first_step', {step: tuple(ts) for step, ts in index.items()})

    @classmethod
    def from_translates(cls, translates: TranslateSet) -> 'TranslatePattern':
        return cls(tuple(walk.vertices for walk in translates.walks), translates.bound, translates.dropped)

    @property
    def length(self) -> int:
        return len(self.walks[0]) - 1

    @property
    def exact(self) -> bool:
        return False

    def inverse(self) -> 'TranslatePattern':
        return TranslatePattern(tuple(tuple(reversed(walk)) for walk in self.walks), self.bound, self.dropped)

    def advance(self, space: Space, v: int, u: int, state: Any) -> List[Tuple[Any, bool]]:
        if state == OUTSIDE:
            starts = self.by_first_step.get((v, u), ())
            if self.length == 1:
                return [(OUTSIDE, True)] if starts else []
            return [((t, 1), False) for t in starts]
        t, k = state
        if self.walks[t][k + 1] != u:
            return []
        if k + 1 == self.length:
            return [(OUTSIDE, True)]
        return [((t, k + 1), False)]

    def count_on(self, space: Space, walk: Walk) -> int:
        copies = set(self.walks)
        size = self.length
        count, i = 0, 0
        while i + size < len(walk.vertices):
            if walk.vertices[i:i + size + 1] in copies:
                count += 1
                i += size
            else:
                i += 1
        return count

    def describe(self) -> Dict[str, Any]:
        return {'type': 'translates', 'length': self.length, 'translates': len(self.walks),
                'enum_bound': self.bound, 'dropped_outside_truncation': self.dropped}


Pattern = Union[LabelPattern, TranslatePattern]


# ----------------------------------------------------------------------
# functionals and results
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CountingFunctional:
    """
    The pair (w, W) with 0 < W < |w|. W defaults to 1, which is admissible
    for every w of length at least 2.
    """
    pattern: Pattern
    W: int = 1

    def __post_init__(self):
        if not 0 < self.W < self.pattern.length:
            raise ValueError(f"need 0 < W < |w|, got W={self.W}, |w|={self.pattern.length}")

    @classmethod
    def for_word(cls, word: Word, W: Optional[int] = None) -> 'CountingFunctional':
        return cls(LabelPattern(word), Config.DEFAULT_W if W is None else W)

    @classmethod
    def for_translates(cls, translates: TranslateSet, W: Optional[int] = None) -> 'CountingFunctional':
        return cls(TranslatePattern.from_translates(translates), Config.DEFAULT_W if W is None else W)

    @property
    def length(self) -> int:
        return self.pattern.length

    @property
    def K_star(self) -> float:
        return self.length / (self.length - self.W)

    @property
    def L_star(self) -> float:
        return 2 * self.W * self.length / (self.length - self.W)

    def qg_params(self) -> QGParams:
        return QGParams(self.K_star, self.L_star)

    def budget(self, d: int) -> int:
        """rho(d) = ceil(d |w| / (|w| - W))"""
        return -(-d * self.length // (self.length - self.W))

    @property
    def tree_margin(self) -> int:
        """
        ceil(W K*): an optimal walk in a tree never leaves this neighbourhood
        of the geodesic, since an excursion of depth r returns to its base
        point after 2r steps and an optimal walk spends at most 2W K* steps on such a loop.
        """
        return -(-self.W * self.length // (self.length - self.W))

    def inverse(self) -> 'CountingFunctional':
        return CountingFunctional(self.pattern.inverse(), self.W)

    def describe(self) -> Dict[str, Any]:
        document = self.pattern.describe()
        document.update({'W': self.W, 'K_star': round(self.K_star, 6), 'L_star': round(self.L_star, 6),
                         'exact_pattern': self.pattern.exact})
        return document


@dataclass(frozen=True)
class QMDescriptor:
    """h_w based at x0"""
    functional: CountingFunctional
    basepoint: int
    space: Space = field(compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.basepoint not in self.space:
            raise ValueError(f"basepoint {self.basepoint} is not a vertex")


@dataclass
class CountResult:
    value: int
    distance: int
    walk: Walk
    copies: Tuple[int, ...]
    budget: int
    exact: bool

    @property
    def discounted_length(self) -> int:
        return self.distance - self.value


@dataclass
class DefectReport:
    defect: int
    argmax: Optional[Tuple[str, str]]
    evaluated: int
    skipped: int
    sample: str
    exact: bool = True

    def to_dict(self):
        return {'defect': self.defect, 'argmax': list(self.argmax) if self.argmax else None,
                'pairs_evaluated': self.evaluated, 'pairs_skipped': self.skipped, 'sample': self.sample,
                'exact': self.exact}


@dataclass
class GrowthReport:
    element: str
    values: List[int]
    slope: float
    competitor_checks: List[Dict[str, Any]] = field(default_factory=list)
    oracle_checked: List[bool] = field(default_factory=list)
    exact: List[bool] = field(default_factory=list)

    @property
    def rows(self) -> List[Tuple[int, int]]:
        return [(n, value) for n, value in enumerate(self.values, start=1)]

    @property
    def competitor_ok(self) -> bool:
        return all(check['ok'] for check in self.competitor_checks)

    def to_dict(self):
        return {
            'element': self.element,
            'rows': [{'n': n, 'h_value': value} for n, value in self.rows],
            'slope': round(self.slope, 6),
            'competitor_checks': self.competitor_checks,
            'oracle_checked': self.oracle_checked,
            'exact': self.exact,
        }


def fit_slope(values: Sequence[int]) -> float:
    """Least-squares slope of values against n = 1, 2, ..."""
    if not values:
        return 0.0
    if len(values) == 1:
        return float(values[0])
    return float(np.polyfit(np.arange(1, len(values) + 1), np.asarray(values, dtype=float), 1)[0])


# ----------------------------------------------------------------------
# service
# ----------------------------------------------------------------------
class CountingService:
    """Evaluates counting functionals and quasi-homomorphisms on one space"""

    def __init__(self, space: Space, inspector: Optional[GraphInspector] = None,
                 action: Optional[GroupActionService] = None, budget_cap: Optional[int] = None,
                 max_product_nodes: Optional[int] = None):
        self.space = space
        self.inspector = inspector or GraphInspector(space)
        self.action = action or GroupActionService(space)
        self.budget_cap = budget_cap or Config.WALK_BUDGET_CAP
        self.max_product_nodes = max_product_nodes or Config.MAX_PRODUCT_NODES
        self._results: Dict[Tuple[CountingFunctional, int, int], CountResult] = {}
        self._h_values: Dict[Tuple[CountingFunctional, int, GroupElement], int] = {}

    # ------------------------------------------------------------------
    # c_{w,W}
    # ------------------------------------------------------------------
    def cw_value(self, f: CountingFunctional, x: int, y: int) -> CountResult:
        key = (f, x, y)
        cached = self._results.get(key)
        if cached is None:
            cached = self._solve(f, x, y)
            self._results[key] = cached
        return cached

    def optimal_walk(self, f: CountingFunctional, x: int, y: int) -> Tuple[Walk, Tuple[int, ...]]:
        """A walk realizing the infimum and its selected copies (start indices)"""
        result = self.cw_value(f, x, y)
        return result.walk, result.copies

    def geodesic_lower_bound(self, f: CountingFunctional, x: int, y: int) -> int:
        """W times the copies along the BFS geodesic; only ever a lower bound"""
        return f.W * f.pattern.count_on(self.space, self.inspector.geodesic(x, y))

    def _solve(self, f: CountingFunctional, x: int, y: int) -> CountResult:
        if isinstance(f.pattern, LabelPattern) and not self.space.is_free_tree:
            raise ValueError("label-matched copies need a free-tree space; use translates elsewhere")
        d = self.inspector.bfs_distance(x, y)
        budget = f.budget(d)
        if budget > self.budget_cap:
            raise BudgetExceededError(f"walk budget {budget} exceeds cap {self.budget_cap}",
                                      budget=budget, cap=self.budget_cap)
        if x == y:
            return CountResult(0, 0, Walk.trivial(x), (), 0, f.pattern.exact)

        product = self._product_graph(f, x, y, budget)
        source, target = (x, OUTSIDE), (y, OUTSIDE)
        best, path = nx.single_source_bellman_ford(product, source, target=target, weight='weight')
        best = int(round(best))
        vertices = tuple(node[0] for node in path)
        copies = tuple(i + 1 - f.length for i in range(len(path) - 1)
                       if product.edges[path[i], path[i + 1]]['completes'])
        walk = Walk(vertices, copies)
        if walk.length - f.W * len(copies) != best:
            raise QuasimorphismError(f"witness walk does not realize the optimum {best}")
        value = d - best
        exact = f.pattern.exact and self._margin_complete(x, y, f.tree_margin)
        if not exact and f.pattern.exact:
            logger.debug(f"c({self.space.label(x)}, {self.space.label(y)}) is a lower bound: "
                         f"the {f.tree_margin}-neighbourhood of the geodesic leaves the ball")
        logger.debug(f"c({self.space.label(x)}, {self.space.label(y)}) = {value} "
                     f"for {f.describe()} with {product.number_of_nodes()} product nodes")
        return CountResult(value, d, walk, copies, budget, exact)

    def _margin_complete(self, x: int, y: int, margin: int) -> bool:
        """
        True when every vertex within `margin` of the geodesic [x, y] is
        present. Optimal walks in the full tree never leave that
        neighbourhood, so the truncated value is then the untruncated one;
        otherwise it is only a lower bound.
        """
        if not self.space.is_truncated:
            return True
        full_degree = 2 * self.space.rank
        frontier = list(self.inspector.geodesic(x, y).vertices)
        seen = set(frontier)
        for _ in range(margin):
            next_frontier = []
            for v in frontier:
                neighbours = self.space.neighbors(v)
                if len(neighbours) < full_degree:
                    return False
                for u in neighbours:
                    if u not in seen:
                        seen.add(u)
                        next_frontier.append(u)
            frontier = next_frontier
        return True

    def _product_graph(self, f: CountingFunctional, x: int, y: int, budget: int) -> nx.DiGraph:
        distance = self.inspector.bfs_distance
        allowed: Dict[int, bool] = {}

        def within_budget(v: int) -> bool:
            flag = allowed.get(v)
            if flag is None:
                flag = distance(x, v) + distance(v, y) <= budget
                allowed[v] = flag
            return flag

        product = nx.DiGraph()
        source = (x, OUTSIDE)
        product.add_node(source)
        frontier = [source]
        while frontier:
            next_frontier = []
            for node in frontier:
                v, state = node
                for u in self.space.neighbors(v):
                    if not within_budget(u):
                        continue
                    moves = [((u, OUTSIDE), 1, False)] if state == OUTSIDE else []
                    for next_state, completes in f.pattern.advance(self.space, v, u, state):
                        moves.append(((u, next_state), 1 - f.W if completes else 1, completes))
                    for target, weight, completes in moves:
                        if target not in product:
                            product.add_node(target)
                            next_frontier.append(target)
                        if product.has_edge(node, target):
                            if weight >= product.edges[node, target]['weight']:
                                continue
                        product.add_edge(node, target, weight=weight, completes=completes)
            frontier = next_frontier
            if product.number_of_nodes() > self.max_product_nodes:
                raise BudgetExceededError(f"product graph exceeds {self.max_product_nodes} nodes",
                                          cap=self.max_product_nodes)
        return product

    # ------------------------------------------------------------------
    # h_w
    # ------------------------------------------------------------------
    def hw_value(self, desc: QMDescriptor, g: GroupElement) -> int:
        """h_w(g) = c_w(x0, g x0) - c_{w^-1}(x0, g x0)"""
        key = (desc.functional, desc.basepoint, g)
        cached = self._h_values.get(key)
        if cached is None:
            y = self.action.apply_action(g, desc.basepoint)
            forward = self.cw_value(desc.functional, desc.basepoint, y).value
            backward = self.cw_value(desc.functional.inverse(), desc.basepoint, y).value
            cached = int(forward - backward)
            self._h_values[key] = cached
        return cached

    def hw_is_exact(self, desc: QMDescriptor, g: GroupElement) -> bool:
        """Whether both c-terms of h_w(g) equal their untruncated values"""
        y = self.action.apply_action(g, desc.basepoint)
        return all(self.cw_value(f, desc.basepoint, y).exact
                   for f in (desc.functional, desc.functional.inverse()))

    def defect_estimate(self, desc: QMDescriptor, pair_sample: Sequence[Tuple[GroupElement, GroupElement]],
                        sample_spec: str = "explicit pairs", skip_outside: bool = False) -> DefectReport:
        """
        max |h(g1 g2) - h(g1) - h(g2)| over the sample: a lower bound for
        the defect. With skip_outside, pairs whose products leave the
        truncation are counted instead of raising.
        """
        best, argmax, evaluated, skipped = 0, None, 0, 0
        exact = True
        for g1, g2 in pair_sample:
            try:
                value = abs(self.hw_value(desc, g1 * g2) - self.hw_value(desc, g1) - self.hw_value(desc, g2))
            except LeftTruncationError:
                if not skip_outside:
                    raise
                skipped += 1
                continue
            evaluated += 1
            exact = exact and all(self.hw_is_exact(desc, g) for g in (g1 * g2, g1, g2))
            if argmax is None or value > best:
                best, argmax = value, (str(g1), str(g2))
        logger.info(f"defect estimate {best} over {evaluated} pairs ({skipped} skipped)")
        if not exact:
            logger.warning("some defect terms are lower bounds on this truncation")
        return DefectReport(best, argmax, evaluated, skipped, sample_spec, exact)

    def growth_on_cyclic(self, desc: QMDescriptor, fgen: GroupElement, n_max: int,
                         oracle=None) -> GrowthReport:
        """h_w(fgen^n) for n = 1..n_max with a least-squares slope"""
        values = [self.hw_value(desc, fgen.power(n)) for n in range(1, n_max + 1)]
        report = GrowthReport(str(fgen), values, fit_slope(values))
        report.exact = [self.hw_is_exact(desc, fgen.power(n)) for n in range(1, n_max + 1)]

        pattern = desc.functional.pattern
        if isinstance(pattern, LabelPattern) and isinstance(fgen, Word) and fgen.letters \
                and fgen.is_cyclically_reduced and len(pattern.word) % len(fgen) == 0:
            a = len(pattern.word) // len(fgen)
            if fgen.power(a) == pattern.word:
                for n in range(a, n_max + 1, a):
                    y = self.action.apply_action(fgen.power(n), desc.basepoint)
                    value = self.cw_value(desc.functional, desc.basepoint, y).value
                    bound = desc.functional.W * (n // a)
                    report.competitor_checks.append({'n': n, 'c_value': value, 'lower_bound': bound,
                                                     'ok': value >= bound})

        if oracle is not None:
            report.oracle_checked = [self.cross_check(oracle, desc, fgen.power(n)) for n in range(1, n_max + 1)]
        return report

    def cross_check(self, oracle, desc: QMDescriptor, g: GroupElement) -> bool:
        """Compare both c-terms of h(g) with the oracle; False when beyond the oracle's budget"""
        y = self.action.apply_action(g, desc.basepoint)
        for f in (desc.functional, desc.functional.inverse()):
            try:
                expected = oracle.value(f, desc.basepoint, y)
            except BudgetExceededError:
                return False
            actual = self.cw_value(f, desc.basepoint, y).value
            if expected != actual:
                logger.error(f"oracle mismatch at {g}: solver {actual}, oracle {expected}")
                raise OracleMismatchError(f"solver gives {actual}, oracle gives {expected} at {g}",
                                          element=str(g), solver=actual, oracle=expected)
        return True
