# models/word.py
"""
Free-group words: letters, free reduction, products and the copy counter
"""
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

from .errors import WordParseError

MAX_RANK = 26
IDENTITY_TEXT = "1"


@dataclass(frozen=True)
class Letter:
    """A generator g_i (sign +1) or its inverse (sign -1)"""
    gen: int
    sign: int = 1

    def __post_init__(self):
        if not 1 <= self.gen <= MAX_RANK:
            raise WordParseError(f"generator index {self.gen} outside 1..{MAX_RANK}", gen=self.gen)
        if self.sign not in (1, -1):
            raise WordParseError(f"letter sign must be +1 or -1, got {self.sign}", sign=self.sign)

    def inverse(self) -> 'Letter':
        return Letter(self.gen, -self.sign)

    @property
    def sort_key(self) -> Tuple[int, int]:
        # a < A < b < B < ...
        return (self.gen, -self.sign)

    @classmethod
    def parse(cls, char: str) -> 'Letter':
        if len(char) != 1 or not char.isascii() or not char.isalpha():
            raise WordParseError(f"invalid letter {char!r}: expected a..z or A..Z", text=char)
        if char.islower():
            return cls(ord(char) - ord('a') + 1, 1)
        return cls(ord(char) - ord('A') + 1, -1)

    def __str__(self) -> str:
        char = chr(ord('a') + self.gen - 1)
        return char if self.sign > 0 else char.upper()


@dataclass(frozen=True)
class Word:
    """A word in the free group; doubles as a group element and as an edge-label path"""
    letters: Tuple[Letter, ...] = ()
    reduced: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'letters', tuple(self.letters))
        if self.reduced:
            for left, right in zip(self.letters, self.letters[1:]):
                if left == right.inverse():
                    raise WordParseError(f"word {self._text()} is flagged reduced but cancels", word=self._text())

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------
    @classmethod
    def identity(cls) -> 'Word':
        return cls(())

    @classmethod
    def generator(cls, gen: int, sign: int = 1) -> 'Word':
        return cls((Letter(gen, sign),))

    @classmethod
    def reduce(cls, raw: Iterable[Letter]) -> 'Word':
        """Freely reduce a letter sequence"""
        stack: List[Letter] = []
        for letter in raw:
            if stack and stack[-1] == letter.inverse():
                stack.pop()
            else:
                stack.append(letter)
        return cls(tuple(stack))

    @classmethod
    def parse(cls, text: str) -> 'Word':
        """Parse `abAB` style text; `1` or the empty string is the identity"""
        text = text.strip()
        if text in ("", IDENTITY_TEXT):
            return cls.identity()
        return cls.reduce(Letter.parse(char) for char in text)

    # ------------------------------------------------------------------
    # group operations
    # ------------------------------------------------------------------
    def inverse(self) -> 'Word':
        return Word(tuple(letter.inverse() for letter in reversed(self.letters)), self.reduced)

    def concat_reduce(self, other: 'Word') -> 'Word':
        return Word.reduce(self.letters + other.letters)

    def __mul__(self, other: 'Word') -> 'Word':
        return self.concat_reduce(other)

    def power(self, exponent: int) -> 'Word':
        base = self if exponent >= 0 else self.inverse()
        return Word.reduce(base.letters * abs(exponent))

    def cyclic_reduce(self) -> Tuple['Word', 'Word']:
        """Return (conjugator, core) with self = conjugator * core * conjugator^-1"""
        word = self if self.reduced else Word.reduce(self.letters)
        letters = word.letters
        i = 0
        while i < len(letters) - 1 - i and letters[i] == letters[len(letters) - 1 - i].inverse():
            i += 1
        return Word(letters[:i]), Word(letters[i:len(letters) - i])

    def commutes_with(self, other: 'Word') -> bool:
        return self * other == other * self

    # ------------------------------------------------------------------
    # inspection
    # ------------------------------------------------------------------
    @property
    def is_identity(self) -> bool:
        return not self.letters

    @property
    def is_cyclically_reduced(self) -> bool:
        if len(self.letters) < 2:
            return True
        return self.letters[0] != self.letters[-1].inverse()

    @property
    def max_generator(self) -> int:
        return max((letter.gen for letter in self.letters), default=0)

    def exponent_sums(self) -> Dict[int, int]:
        """Image in the abelianization, keyed by generator index"""
        sums: Dict[int, int] = {}
        for letter in self.letters:
            sums[letter.gen] = sums.get(letter.gen, 0) + letter.sign
        return {gen: total for gen, total in sorted(sums.items()) if total}

    @property
    def sort_key(self) -> Tuple:
        return (len(self.letters), tuple(letter.sort_key for letter in self.letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def _text(self) -> str:
        return "".join(str(letter) for letter in self.letters)

    def __str__(self) -> str:
        return self._text() or IDENTITY_TEXT


def count_copies(labels: Sequence[Letter], w: Word) -> int:
    """
    Maximal number of non-overlapping contiguous occurrences of w in labels.

    Left-to-right greedy: taking the leftmost-ending occurrence never
    lowers the number of occurrences that fit afterwards.
    """
    size = len(w)
    if size == 0:
        raise ValueError("count_copies needs a nonempty word")
    pattern = w.letters
    labels = tuple(labels)
    count = 0
    i = 0
    while i + size <= len(labels):
        if labels[i:i + size] == pattern:
            count += 1
            i += size
        else:
            i += 1
    return count
