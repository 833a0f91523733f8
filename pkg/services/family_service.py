# services/family_service.py
"""
Families f_i = g1^n g2^m g1^k g2^-l built from a strictly increasing
exponent schedule, and the finite-scale independence certificate for the
quasi-homomorphisms h_{f_i^a_i}: h_i grows on <f_i> and vanishes on <f_j>
for j < i.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from config import Config
from models.errors import DegeneratePairError, QuasimorphismError, ScheduleError
from models.group_element import GroupElement, Mobius
from models.space import QGParams, Space
from models.word import Word
from services.brute_force_oracle import BruteForceOracle
from services.counting_service import CountingFunctional, CountingService, QMDescriptor
from services.graph_inspector import GraphInspector
from services.group_action import GroupActionService, reduced_words
from services.space_builder import SpaceBuilder

logger = logging.getLogger(__name__)

Quadruple = Tuple[int, int, int, int]


@dataclass(frozen=True)
class ExponentSchedule:
    """
    Quadruples (n_i, m_i, k_i, l_i), strictly increasing when flattened.
    Optional prefix pairs (s_i, t_i) select the variant
    x^-s y^-t x^n y^m x^k y^-l.
    """
    quadruples: Tuple[Quadruple, ...]
    prefixes: Optional[Tuple[Tuple[int, int], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, 'quadruples', tuple(tuple(q) for q in self.quadruples))
        if not self.quadruples:
            raise ScheduleError("a schedule needs at least one quadruple")
        flat = [e for quadruple in self.quadruples for e in quadruple]
        if any(len(quadruple) != 4 for quadruple in self.quadruples):
            raise ScheduleError("schedule entries are quadruples (n, m, k, l)")
        if flat[0] <= 0 or any(b <= a for a, b in zip(flat, flat[1:])):
            raise ScheduleError(f"exponents must be positive and strictly increasing, got {flat}",
                                exponents=flat)
        if self.prefixes is not None:
            object.__setattr__(self, 'prefixes', tuple(tuple(p) for p in self.prefixes))
            if len(self.prefixes) != len(self.quadruples):
                raise ScheduleError("one prefix pair (s, t) is needed per quadruple")
            if any(len(p) != 2 or min(p) <= 0 for p in self.prefixes):
                raise ScheduleError(f"prefix exponents must be positive pairs, got {self.prefixes}")

    @classmethod
    def default(cls, count: int, ratio: Optional[int] = None) -> 'ExponentSchedule':
        """(s, s+1, s+2, s+3) with s_1 = 1 and s_{i+1} = max(ratio * s_i, l_i + 1)"""
        if count < 1:
            raise ScheduleError(f"schedule count must be >= 1, got {count}")
        ratio = ratio or Config.SCHEDULE_RATIO
        quadruples = []
        start = 1
        for _ in range(count):
            quadruples.append((start, start + 1, start + 2, start + 3))
            start = max(ratio * start, start + 4)
        return cls(tuple(quadruples))

    @classmethod
    def parse(cls, text: str, count: int = 2) -> 'ExponentSchedule':
        """'default' or quadruples separated by ';', e.g. '1,2,3,4;5,6,7,8'"""
        if text.strip() == "default":
            return cls.default(count)
        try:
            quadruples = tuple(tuple(int(e) for e in part.split(",")) for part in text.split(";") if part.strip())
        except ValueError:
            raise ScheduleError(f"cannot parse schedule {text!r}")
        return cls(quadruples)

    def __len__(self) -> int:
        return len(self.quadruples)

    def to_dict(self):
        return {'quadruples': [list(q) for q in self.quadruples],
                'prefixes': [list(p) for p in self.prefixes] if self.prefixes else None}


@dataclass
class CertificateReport:
    members: List[Word]
    powers: List[int]
    W: int
    n_max: int
    growth: List[Dict[str, Any]] = field(default_factory=list)
    off_diagonal: List[Dict[str, Any]] = field(default_factory=list)
    defects: List[Dict[str, Any]] = field(default_factory=list)
    abelianization: List[Dict[str, int]] = field(default_factory=list)
    cyclically_reduced: List[bool] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)
    truncation: Dict[str, Any] = field(default_factory=dict)
    oracle_checked: bool = False

    @property
    def accepted(self) -> bool:
        return not self.failures

    @property
    def slopes(self) -> List[float]:
        return [row['slope'] for row in self.growth]

    @property
    def abelianization_trivial(self) -> bool:
        return all(not sums for sums in self.abelianization)

    def to_dict(self):
        return {
            'schema_version': 1,
            'accepted': self.accepted,
            'members': [str(f) for f in self.members],
            'member_lengths': [len(f) for f in self.members],
            'powers': self.powers,
            'W': self.W,
            'n_max': self.n_max,
            'growth': self.growth,
            'off_diagonal': self.off_diagonal,
            'defects': self.defects,
            'abelianization': [{str(gen): total for gen, total in sums.items()} for sums in self.abelianization],
            'abelianization_trivial': self.abelianization_trivial,
            'cyclically_reduced': self.cyclically_reduced,
            'failures': self.failures,
            'truncation': self.truncation,
            'oracle_checked': self.oracle_checked,
        }


@dataclass
class Ell1Result:
    value: Fraction
    contributions: List[Tuple[int, Fraction, int]]
    nonzero: int
    cutoff: int
    violations: List[int]

    @property
    def criterion_holds(self) -> bool:
        return not self.violations


@dataclass
class SchottkyReport:
    params: QGParams
    checked: int
    skipped: int
    violations: List[str]

    @property
    def embedded(self) -> bool:
        return not self.violations

    def to_dict(self):
        return {'K': self.params.K, 'L': self.params.L, 'checked': self.checked,
                'skipped_outside_truncation': self.skipped, 'violations': self.violations,
                'embedded': self.embedded}


class FamilyService:
    """Builds families and certifies the independence of their quasi-homomorphisms"""

    def __init__(self, builder: Optional[SpaceBuilder] = None, budget_cap: Optional[int] = None,
                 oracle_max_walks: Optional[int] = None):
        self.builder = builder or SpaceBuilder()
        self.budget_cap = budget_cap
        self.oracle_max_walks = oracle_max_walks
        self._counters: Dict[int, CountingService] = {}

    def counter_for(self, space: Space) -> CountingService:
        counter = self._counters.get(id(space))
        if counter is None or counter.space is not space:
            counter = CountingService(space, budget_cap=self.budget_cap)
            self._counters[id(space)] = counter
        return counter

    # ------------------------------------------------------------------
    # families
    # ------------------------------------------------------------------
    def make_family(self, g1: Word, g2: Word, schedule: ExponentSchedule) -> List[Word]:
        if g1.is_identity or g2.is_identity:
            raise DegeneratePairError("family generators must be nontrivial", g1=str(g1), g2=str(g2))
        if g1.commutes_with(g2):
            raise DegeneratePairError(f"{g1} and {g2} commute", g1=str(g1), g2=str(g2))
        family = []
        for i, (n, m, k, l) in enumerate(schedule.quadruples):
            member = g1.power(n) * g2.power(m) * g1.power(k) * g2.power(-l)
            if schedule.prefixes:
                s, t = schedule.prefixes[i]
                member = g1.power(-s) * g2.power(-t) * member
            family.append(member)
        flags = [member.is_cyclically_reduced for member in family]
        if not all(flags):
            logger.warning(f"family members not cyclically reduced: "
                           f"{[str(f) for f, ok in zip(family, flags) if not ok]}")
        return family

    def commutator_variant(self, g1: Word, g2: Word, N: int, M: int, K: int, L: int,
                           balanced: bool = False) -> Tuple[Word, Word]:
        """
        g1' = g1^N g2^M g1^-M g2^-N and g2' = g1^K g2^L g1^-K g2^-L. The
        literal g1' has nonzero exponent sums whenever N != M; balanced=True
        returns the commutators [g1^N, g2^M] and [g1^K, g2^L] instead.
        """
        if not 0 < N < M < K < L:
            raise ScheduleError(f"need 0 < N < M < K < L, got {(N, M, K, L)}")
        if balanced:
            first = g1.power(N) * g2.power(M) * g1.power(-N) * g2.power(-M)
        else:
            first = g1.power(N) * g2.power(M) * g1.power(-M) * g2.power(-N)
        second = g1.power(K) * g2.power(L) * g1.power(-K) * g2.power(-L)
        for word in (first, second):
            if word.exponent_sums():
                logger.warning(f"{word} has exponent sums {word.exponent_sums()}, "
                               f"outside the commutator subgroup")
        return first, second

    # ------------------------------------------------------------------
    # certificate
    # ------------------------------------------------------------------
    def certificate_space(self, family: Sequence[Word], powers: Sequence[int], n_max: int,
                          W: int, pair_sample: Sequence[Tuple[Word, Word]]) -> Space:
        """A tree neighbourhood holding every evaluated element with the exactness margin"""
        words = [f.power(n) for f in family for n in range(1, n_max + 1)]
        for g1, g2 in pair_sample:
            words.extend([g1, g2, g1 * g2])
        margin = max(CountingFunctional.for_word(f.power(a), W).tree_margin for f, a in zip(family, powers))
        rank = max([2] + [f.max_generator for f in family])
        return self.builder.build_free_tree_neighbourhood(rank, words, margin)

    @staticmethod
    def default_pairs(rank: int, radius: int = 1) -> List[Tuple[Word, Word]]:
        """All ordered pairs of reduced words of length <= radius"""
        elements = reduced_words(rank, radius)
        return [(g1, g2) for g1 in elements for g2 in elements]

    def independence_certificate(self, family: Sequence[Word], powers: Optional[Sequence[int]] = None,
                                 n_max: int = 5, pair_sample: Optional[Sequence[Tuple[Word, Word]]] = None,
                                 W: Optional[int] = None, space: Optional[Space] = None,
                                 oracle_check: bool = False) -> CertificateReport:
        if not family:
            raise ValueError("a certificate needs at least one family member")
        if any(f.is_identity for f in family):
            raise DegeneratePairError("family contains the identity")
        powers = list(powers) if powers is not None else [1] * len(family)
        if len(powers) != len(family) or min(powers) < 1:
            raise ScheduleError(f"need one positive power per member, got {powers}")
        if n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {n_max}")
        W = Config.DEFAULT_W if W is None else W
        rank = max([2] + [f.max_generator for f in family])
        pair_sample = list(pair_sample) if pair_sample is not None else self.default_pairs(rank)
        if space is None:
            space = self.certificate_space(family, powers, n_max, W, pair_sample)
        elif not space.is_free_tree:
            raise ValueError("certificates are computed on free-group trees")

        counter = self.counter_for(space)
        oracle = BruteForceOracle(space, counter.inspector, self.oracle_max_walks) if oracle_check else None
        identity = space.vertex(Word.identity())
        report = CertificateReport(list(family), powers, W, n_max, truncation=space.truncation or {},
                                   oracle_checked=oracle_check)
        logger.info(f"Certificate for {len(family)} members on {space.metadata} ({space.num_vertices} vertices)")

        for i, (f, a) in enumerate(zip(family, powers), start=1):
            desc = QMDescriptor(CountingFunctional.for_word(f.power(a), W), identity, space)
            growth = counter.growth_on_cyclic(desc, f, n_max, oracle=oracle)
            row = growth.to_dict()
            row.update({'i': i, 'w_length': len(f) * a})
            report.growth.append(row)
            if growth.slope <= 0:
                report.failures.append(f"h_{i} does not grow on <f_{i}> (slope {growth.slope:.4f})")
            if not growth.competitor_ok:
                report.failures.append(f"h_{i} violates the competitor lower bound on <f_{i}>")
            if not all(growth.exact):
                report.failures.append(f"h_{i} on <f_{i}> is only bounded on {space.metadata}; enlarge the tree")

            for j in range(1, i):
                values = [counter.hw_value(desc, family[j - 1].power(n)) for n in range(1, n_max + 1)]
                report.off_diagonal.append({'i': i, 'j': j, 'values': values,
                                            'max_abs': max(abs(v) for v in values)})
                if any(values):
                    report.failures.append(f"h_{i} is nonzero on <f_{j}>: {values}")

            defect = counter.defect_estimate(desc, pair_sample, sample_spec=f"{len(pair_sample)} pairs")
            entry = defect.to_dict()
            entry['i'] = i
            report.defects.append(entry)

            report.abelianization.append(f.exponent_sums())
            report.cyclically_reduced.append(f.is_cyclically_reduced)

        if not report.abelianization_trivial:
            logger.warning("family has nonzero exponent sums; homomorphisms to R need not vanish on it")
        if report.accepted:
            logger.info(f"Certificate accepted: slopes {[round(s, 4) for s in report.slopes]}")
        else:
            logger.error(f"Certificate rejected: {report.failures}")
        return report

    # ------------------------------------------------------------------
    # combinations
    # ------------------------------------------------------------------
    def ell1_combination(self, coeffs: Sequence[Any], descs: Sequence[QMDescriptor],
                         g: GroupElement) -> Ell1Result:
        """
        sum t_i h_i(g) over the support of coeffs. Only finitely many h_i(g)
        are nonzero: c_w(x, y) = 0 whenever |w| > d(x, y) + W.
        """
        if len(coeffs) > len(descs):
            raise ValueError("more coefficients than quasi-homomorphisms")
        total = Fraction(0)
        contributions = []
        nonzero = 0
        cutoff = 0
        violations = []
        for i, desc in enumerate(descs, start=1):
            counter = self.counter_for(desc.space)
            y = counter.action.apply_action(g, desc.basepoint)
            d = counter.inspector.bfs_distance(desc.basepoint, y)
            value = counter.hw_value(desc, g)
            within = desc.functional.length <= d + desc.functional.W
            cutoff += within
            nonzero += value != 0
            if value and not within:
                violations.append(i)
            t = Fraction(coeffs[i - 1]) if i <= len(coeffs) else Fraction(0)
            if t:
                total += t * value
                contributions.append((i, t, value))
        if violations:
            logger.error(f"vanishing criterion violated at {g} for members {violations}")
        return Ell1Result(total, contributions, nonzero, cutoff, violations)

    def product_qm(self, desc: QMDescriptor, p: int, perm: Sequence[int],
                   coordinates: Sequence[GroupElement]) -> int:
        """sum_r h_w(g_r), which must not change when the coordinates are permuted"""
        if len(coordinates) != p:
            raise ValueError(f"need {p} coordinates, got {len(coordinates)}")
        if sorted(perm) != list(range(p)):
            raise ValueError(f"{list(perm)} is not a permutation of 0..{p - 1}")
        counter = self.counter_for(desc.space)
        value = sum(counter.hw_value(desc, g) for g in coordinates)
        permuted = sum(counter.hw_value(desc, coordinates[perm[r]]) for r in range(p))
        if value != permuted:
            raise QuasimorphismError(f"product quasi-homomorphism changed under {list(perm)}",
                                     value=value, permuted=permuted)
        return value

    # ------------------------------------------------------------------
    # Schottky embedding
    # ------------------------------------------------------------------
    @staticmethod
    def orbit_map(g1: GroupElement, g2: GroupElement, word: Word) -> GroupElement:
        """The homomorphism F2 -> G sending a to g1 and b to g2"""
        images = {1: g1, 2: g2}
        result = Mobius.identity() if isinstance(g1, Mobius) else Word.identity()
        for letter in word:
            if letter.gen not in images:
                raise ValueError(f"orbit map is defined on two generators, got {word}")
            image = images[letter.gen]
            result = result * (image if letter.sign > 0 else image.inverse())
        return result

    def schottky_embedding_check(self, space: Space, g1: GroupElement, g2: GroupElement, x0: int,
                                 radius: int, params: QGParams) -> SchottkyReport:
        """
        For every reduced word u of length radius, the orbit points
        Phi(u_1..u_k)(x0) must form a (K, L)-quasi-geodesic sequence.
        """
        action = GroupActionService(space)
        inspector = GraphInspector(space)
        leaves = [u for u in reduced_words(2, radius) if len(u) == radius]
        checked, skipped, violations = 0, 0, []
        for u in leaves:
            points = []
            for k in range(radius + 1):
                image = action.try_apply(self.orbit_map(g1, g2, Word(u.letters[:k])), x0)
                if image is None:
                    break
                points.append(image)
            if len(points) != radius + 1:
                skipped += 1
                continue
            checked += 1
            for i in range(len(points)):
                for j in range(i + 1, len(points)):
                    if inspector.bfs_distance(points[i], points[j]) < (j - i) / params.K - params.L:
                        violations.append(f"{u}: d(x_{i}, x_{j}) too small")
                        break
                else:
                    continue
                break
        return SchottkyReport(params, checked, skipped, violations)
