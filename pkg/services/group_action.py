# services/group_action.py
"""
Group actions on spaces: free words on Cayley trees by left multiplication,
PSL(2,Z) on the Farey graph by Mobius transformations
"""
import logging
from dataclasses import dataclass
from typing import Any, List, Optional, Set, Tuple

from config import Config
from models.errors import LeftTruncationError, TooLargeError
from models.group_element import GroupElement, Mobius
from models.space import Space, Walk
from models.word import Word
from services.space_builder import alphabet, free_tree_ball_size

logger = logging.getLogger(__name__)


@dataclass
class TranslateSet:
    """Images of a walk under an enumerated set of group elements"""
    walks: List[Walk]
    bound: int
    elements_tried: int
    dropped: int = 0
    duplicates: int = 0

    def to_dict(self):
        return {
            'translates': len(self.walks),
            'bound': self.bound,
            'elements_tried': self.elements_tried,
            'dropped_outside_truncation': self.dropped,
            'duplicates': self.duplicates,
        }


class GroupActionService:
    """Applies and enumerates group elements compatible with a space"""

    def __init__(self, space: Space, max_elements: Optional[int] = None):
        self.space = space
        self.max_elements = max_elements or Config.MAX_GROUP_ELEMENTS
        self._enumeration_cache = {}

    # ------------------------------------------------------------------
    # action
    # ------------------------------------------------------------------
    def identity(self) -> GroupElement:
        return Mobius.identity() if self.space.is_farey else Word.identity()

    def act_on_label(self, g: GroupElement, label: Any) -> Any:
        """Image of a vertex label, with no truncation check"""
        if self.space.is_free_tree:
            if not isinstance(g, Word):
                raise ValueError(f"tree spaces are acted on by free words, got {g}")
            if g.max_generator > self.space.rank:
                raise ValueError(f"word {g} uses generators beyond rank {self.space.rank}")
            return g * label
        if self.space.is_farey:
            if not isinstance(g, Mobius):
                raise ValueError(f"Farey spaces are acted on by matrices, got {g}")
            return g.act(label)
        raise ValueError(f"space {self.space.metadata!r} carries no group action")

    def apply_action(self, g: GroupElement, v: int) -> int:
        image = self.act_on_label(g, self.space.label(v))
        vertex = self.space.find(image)
        if vertex is None:
            raise LeftTruncationError(f"{g} maps {self.space.label(v)} to {image}, outside {self.space.metadata}",
                                      element=str(g), vertex=str(self.space.label(v)), image=str(image))
        return vertex

    def try_apply(self, g: GroupElement, v: int) -> Optional[int]:
        return self.space.find(self.act_on_label(g, self.space.label(v)))

    def apply_to_walk(self, g: GroupElement, walk: Walk) -> Optional[Walk]:
        """Image walk, or None when some vertex leaves the truncation"""
        images = []
        for vertex in walk.vertices:
            image = self.try_apply(g, vertex)
            if image is None:
                return None
            images.append(image)
        return Walk(tuple(images))

    # ------------------------------------------------------------------
    # enumeration
    # ------------------------------------------------------------------
    def enumerate_group_elements(self, bound: int) -> List[GroupElement]:
        """
        Trees: reduced words of length <= bound in shortlex order.
        Farey: sign-normalized determinant-1 matrices with entries bounded
        by bound, identity first, then by (max entry, entries).
        """
        if bound < 0:
            raise ValueError(f"enumeration bound must be >= 0, got {bound}")
        cached = self._enumeration_cache.get(bound)
        if cached is not None:
            return cached
        if self.space.is_free_tree:
            elements = self._enumerate_words(bound)
        elif self.space.is_farey:
            elements = self._enumerate_matrices(bound)
        else:
            raise ValueError(f"space {self.space.metadata!r} carries no group action")
        self._enumeration_cache[bound] = elements
        return elements

    def _enumerate_words(self, bound: int) -> List[GroupElement]:
        rank = self.space.rank
        size = free_tree_ball_size(rank, bound)
        if size > self.max_elements:
            raise TooLargeError(f"{size} words of length <= {bound} exceed budget {self.max_elements}",
                                size=size, budget=self.max_elements)
        return list(reduced_words(rank, bound))

    def _enumerate_matrices(self, bound: int) -> List[GroupElement]:
        if (2 * bound + 1) ** 3 > 50 * self.max_elements:
            raise TooLargeError(f"matrix enumeration with entries <= {bound} is beyond budget",
                                bound=bound, budget=self.max_elements)
        found: Set[Mobius] = set()
        span = range(-bound, bound + 1)
        for a in span:
            for b in span:
                for c in span:
                    if a == 0:
                        if b * c != -1:
                            continue
                        for d in span:
                            found.add(Mobius.of(a, b, c, d))
                    elif (1 + b * c) % a == 0 and abs((1 + b * c) // a) <= bound:
                        found.add(Mobius.of(a, b, c, (1 + b * c) // a))
        if len(found) > self.max_elements:
            raise TooLargeError(f"{len(found)} matrices exceed budget {self.max_elements}",
                                size=len(found), budget=self.max_elements)
        identity = Mobius.identity()
        found.discard(identity)
        return [identity] + sorted(found, key=lambda m: m.sort_key)

    def enumerate_translates(self, w_path: Walk, bound: int) -> TranslateSet:
        """Images of w_path under enumerated elements that stay inside the space"""
        if not self.space.is_valid_walk(w_path):
            raise ValueError("translates need a valid walk of the space")
        elements = self.enumerate_group_elements(bound)
        seen: Set[Tuple[int, ...]] = set()
        walks: List[Walk] = []
        dropped = 0
        duplicates = 0
        for g in elements:
            image = self.apply_to_walk(g, w_path)
            if image is None:
                dropped += 1
            elif image.vertices in seen:
                duplicates += 1
            else:
                seen.add(image.vertices)
                walks.append(image)
        if dropped:
            logger.warning(f"{dropped} of {len(elements)} translates left {self.space.metadata}")
        return TranslateSet(walks, bound, len(elements), dropped, duplicates)


def reduced_words(rank: int, bound: int) -> List[Word]:
    """Reduced words of length <= bound over rank generators, in shortlex order"""
    letters = alphabet(rank)
    words = [Word.identity()]
    layer = [Word.identity()]
    for _ in range(bound):
        layer = [Word(word.letters + (letter,)) for word in layer for letter in letters
                 if not (word.letters and word.letters[-1] == letter.inverse())]
        words.extend(layer)
    return words
