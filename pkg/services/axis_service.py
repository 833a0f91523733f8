# services/axis_service.py
"""
Orbit-based quasi-axes, the ~ relation, WPD coarse stabilizers and
stabilizer intersections. Every answer is evidence at a stated bound.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config import Config
from models.group_element import GroupElement, Slope, element_length
from models.space import Space, Walk
from services.graph_inspector import GraphInspector
from services.group_action import GroupActionService

logger = logging.getLogger(__name__)


@dataclass
class AxisSegment:
    element: GroupElement
    base: int
    n: int
    orbit: Tuple[int, ...]
    walk: Walk

    @property
    def orientation(self) -> Tuple[int, int]:
        """The g-orientation: from x0 towards g^n(x0)"""
        return (self.orbit[0], self.orbit[-1])


@dataclass
class AxisStats:
    displacements: List[int]
    translation_estimate: float
    linearity_residual: float
    subadditive: bool

    def to_dict(self):
        return {
            'displacements': self.displacements,
            'translation_estimate': round(self.translation_estimate, 6),
            'linearity_residual': round(self.linearity_residual, 6),
            'subadditive': self.subadditive,
        }


@dataclass
class HyperbolicityVerdict:
    hyperbolic: bool
    slope: float
    threshold: float
    displacements: List[int]

    def to_dict(self):
        return {
            'hyperbolic': self.hyperbolic,
            'slope': round(self.slope, 6),
            'threshold': self.threshold,
            'displacements': self.displacements,
        }


@dataclass
class SimVerdict:
    kind: str
    witness: Optional[GroupElement]
    params: Dict[str, Any]
    skipped: int = 0

    @property
    def found(self) -> bool:
        return self.kind == "witness"

    def to_dict(self):
        document = {'kind': self.kind, 'params': self.params, 'skipped_outside_truncation': self.skipped}
        if self.witness is not None:
            document['witness'] = str(self.witness)
        return document


@dataclass
class StabilizerReport:
    elements: List[GroupElement]
    enum_bound: int
    half_cardinality: int
    skipped: int = 0
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def cardinality(self) -> int:
        return len(self.elements)

    @property
    def stable(self) -> bool:
        return self.cardinality == self.half_cardinality

    def to_dict(self):
        return {
            'cardinality': self.cardinality,
            'enum_bound': self.enum_bound,
            'cardinality_at_half_bound': self.half_cardinality,
            'half_bound': self.enum_bound // 2,
            'stable': self.stable,
            'skipped_outside_truncation': self.skipped,
            'elements': [str(g) for g in self.elements],
            'params': self.params,
        }


class AxisService:
    """Quasi-axis constructions over a space with a group action"""

    def __init__(self, space: Space, inspector: Optional[GraphInspector] = None,
                 action: Optional[GroupActionService] = None):
        self.space = space
        self.inspector = inspector or GraphInspector(space)
        self.action = action or GroupActionService(space)

    # ------------------------------------------------------------------
    # axes
    # ------------------------------------------------------------------
    def orbit(self, g: GroupElement, x0: int, n: int) -> List[int]:
        points = [x0]
        for _ in range(n):
            points.append(self.action.apply_action(g, points[-1]))
        return points

    def axis_segment(self, g: GroupElement, x0: int, n: int) -> AxisSegment:
        """Geodesics joining x0, g(x0), ..., g^n(x0) in order"""
        if n < 0:
            raise ValueError(f"axis range must be >= 0, got {n}")
        points = self.orbit(g, x0, n)
        walk = Walk.trivial(x0)
        for start, end in zip(points, points[1:]):
            walk = walk.concat(self.inspector.geodesic(start, end))
        return AxisSegment(g, x0, n, tuple(points), walk)

    def axis_stats(self, g: GroupElement, x0: int, n: int) -> AxisStats:
        points = self.orbit(g, x0, n)
        displacements = [self.inspector.bfs_distance(x0, p) for p in points]
        subadditive = all(displacements[k + m] <= displacements[k] + displacements[m]
                          for k in range(n + 1) for m in range(n + 1 - k))
        if n >= 2:
            ks = np.arange(1, n + 1)
            coefficients = np.polyfit(ks, displacements[1:], 1)
            residual = float(np.max(np.abs(np.polyval(coefficients, ks) - displacements[1:])))
        else:
            residual = 0.0
        translation = displacements[-1] / n if n else 0.0
        return AxisStats(displacements, translation, residual, subadditive)

    def is_hyperbolic_element(self, g: GroupElement, x0: int, n: int,
                              threshold: Optional[float] = None) -> HyperbolicityVerdict:
        """
        Least-squares slope of k -> d(x0, g^k x0) over 1 <= k <= n; a
        finite-scale stand-in for positive translation length.
        """
        if n < 2:
            raise ValueError("the hyperbolicity proxy needs n >= 2")
        threshold = Config.HYPERBOLICITY_THRESHOLD if threshold is None else threshold
        points = self.orbit(g, x0, n)
        displacements = [self.inspector.bfs_distance(x0, p) for p in points]
        slope = float(np.polyfit(np.arange(1, n + 1), displacements[1:], 1)[0])
        return HyperbolicityVerdict(slope > threshold, slope, threshold, displacements)

    # ------------------------------------------------------------------
    # the ~ relation
    # ------------------------------------------------------------------
    def quasi_axis(self, g: GroupElement, x0: int, m: int) -> Walk:
        """The geodesic from g^-m(x0) to g^m(x0), oriented along g"""
        start = self.action.apply_action(g.power(-m), x0)
        end = self.action.apply_action(g.power(m), x0)
        return self.inspector.geodesic(start, end)

    def sim_test(self, g1: GroupElement, g2: GroupElement, x0: int, segment_n: int,
                 C: float, search_bound: int) -> SimVerdict:
        """
        Search h with h(J1) oriented C-close to a forward subwalk of the g2
        quasi-axis, where J1 is the g1 axis segment of range segment_n. The
        quasi-axis is the geodesic between g2^-m(x0) and g2^m(x0) with
        m = segment_n + search_bound, built once from x0, which covers every
        candidate image. A negative answer only covers the enumerated elements.
        """
        J1 = self.axis_segment(g1, x0, segment_n).walk
        J2 = self.quasi_axis(g2, x0, segment_n + search_bound)
        params = {
            'C': C,
            'segment_n': segment_n,
            'search_bound': search_bound,
            'truncation': self.space.truncation,
        }
        skipped = 0
        for h in self.action.enumerate_group_elements(search_bound):
            image = self.action.apply_to_walk(h, J1)
            if image is None:
                skipped += 1
                continue
            if self._close_to_subwalk(image, J2, C):
                logger.info(f"sim_test {g1} ~ {g2}: witness {h}")
                return SimVerdict("witness", h, params, skipped)
        if skipped:
            logger.warning(f"sim_test skipped {skipped} candidates leaving {self.space.metadata}")
        return SimVerdict("no_witness_at_bound", None, params, skipped)

    def _close_to_subwalk(self, walk: Walk, axis: Walk, C: float) -> bool:
        distance = self.inspector.bfs_distance
        starts = [i for i, v in enumerate(axis.vertices) if distance(walk.start, v) <= C]
        ends = [j for j, v in enumerate(axis.vertices) if distance(walk.end, v) <= C]
        for i in starts:
            for j in ends:
                if j >= i and self.inspector.oriented_close(walk, axis.sub(i, j), C):
                    return True
        return False

    # ------------------------------------------------------------------
    # WPD
    # ------------------------------------------------------------------
    def wpd_coarse_stabilizer(self, g: GroupElement, x0: int, C: float, N: int,
                              enum_bound: int) -> StabilizerReport:
        """Elements moving both x0 and g^N(x0) by at most C"""
        y = self.action.apply_action(g.power(N), x0)
        half = enum_bound // 2
        members: List[GroupElement] = []
        skipped = 0
        for gamma in self.action.enumerate_group_elements(enum_bound):
            gx = self.action.try_apply(gamma, x0)
            gy = self.action.try_apply(gamma, y)
            if gx is None or gy is None:
                skipped += 1
                continue
            if self.inspector.bfs_distance(x0, gx) <= C and self.inspector.bfs_distance(y, gy) <= C:
                members.append(gamma)
        half_cardinality = sum(1 for gamma in members if gamma.is_identity or element_length(gamma) <= half)
        params = {'element': str(g), 'x0': str(self.space.label(x0)), 'C': C, 'N': N,
                  'truncation': self.space.truncation}
        report = StabilizerReport(members, enum_bound, half_cardinality, skipped, params)
        logger.info(f"WPD coarse stabilizer of {g}: {report.cardinality} elements at bound {enum_bound}, "
                    f"{half_cardinality} at bound {half}")
        return report

    def stabilizer_intersection(self, a: Slope, b: Slope, enum_bound: int) -> StabilizerReport:
        """Elements fixing both slopes, with their Farey distance for context"""
        if not self.space.is_farey:
            raise ValueError("stabilizer intersections are computed on Farey spaces")
        if a == b:
            raise ValueError("stabilizer intersection needs two distinct slopes")
        half = enum_bound // 2
        members = [gamma for gamma in self.action.enumerate_group_elements(enum_bound)
                   if gamma.act(a) == a and gamma.act(b) == b]
        half_cardinality = sum(1 for gamma in members if gamma.is_identity or gamma.max_entry <= half)
        va, vb = self.space.find(a), self.space.find(b)
        distance = self.inspector.bfs_distance(va, vb) if va is not None and vb is not None else None
        params = {
            'a': str(a),
            'b': str(b),
            'farey_distance': distance,
            'fills': distance is not None and distance >= 3,
            'truncation': self.space.truncation,
        }
        return StabilizerReport(members, enum_bound, half_cardinality, 0, params)
