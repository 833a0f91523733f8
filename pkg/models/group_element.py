# models/group_element.py
"""
Slopes (vertices of the Farey graph) and PSL(2,Z) elements acting on them
"""
import re
from dataclasses import dataclass
from math import gcd
from typing import Tuple, Union

from .errors import WordParseError
from .word import Word

_MATRIX_PATTERN = re.compile(
    r'^\[\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*,\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\]$'
)


@dataclass(frozen=True)
class Slope:
    """p/q in lowest terms with q >= 0; infinity is 1/0"""
    p: int
    q: int

    def __post_init__(self):
        if (self.p, self.q) == (0, 0):
            raise WordParseError("0/0 is not a slope")
        if self.q < 0 or gcd(abs(self.p), self.q) != 1 or (self.q == 0 and self.p != 1):
            raise WordParseError(f"{self.p}/{self.q} is not a normalized slope", p=self.p, q=self.q)

    @classmethod
    def of(cls, p: int, q: int) -> 'Slope':
        """Normalize an arbitrary nonzero integer pair"""
        if (p, q) == (0, 0):
            raise WordParseError("0/0 is not a slope")
        if q == 0:
            return cls(1, 0)
        if q < 0:
            p, q = -p, -q
        divisor = gcd(abs(p), q)
        return cls(p // divisor, q // divisor)

    @classmethod
    def parse(cls, text: str) -> 'Slope':
        parts = text.strip().split('/')
        try:
            if len(parts) == 1:
                return cls.of(int(parts[0]), 1)
            if len(parts) == 2:
                return cls.of(int(parts[0]), int(parts[1]))
        except ValueError as e:
            raise WordParseError(f"invalid slope {text!r}: {e}", text=text) from e
        raise WordParseError(f"invalid slope {text!r}: expected p/q", text=text)

    def intersection(self, other: 'Slope') -> int:
        """Geometric intersection number |ps - qr| of the torus curves"""
        return abs(self.p * other.q - self.q * other.p)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class Mobius:
    """
    An element of PSL(2,Z), stored as [[a,b],[c,d]] with ad - bc = 1 and
    its first nonzero entry positive, so that M and -M coincide.
    """
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise WordParseError(f"matrix {self.entries} does not have determinant 1", entries=self.entries)
        if self.entries != _normalized(self.entries):
            raise WordParseError(f"matrix {self.entries} is not sign-normalized", entries=self.entries)

    @classmethod
    def of(cls, a: int, b: int, c: int, d: int) -> 'Mobius':
        return cls(*_normalized((a, b, c, d)))

    @classmethod
    def identity(cls) -> 'Mobius':
        return cls(1, 0, 0, 1)

    @classmethod
    def parse(cls, text: str) -> 'Mobius':
        match = _MATRIX_PATTERN.match(text.strip())
        if not match:
            raise WordParseError(f"invalid matrix {text!r}: expected [[a,b],[c,d]]", text=text)
        return cls.of(*(int(value) for value in match.groups()))

    @property
    def entries(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def max_entry(self) -> int:
        return max(abs(value) for value in self.entries)

    @property
    def is_identity(self) -> bool:
        return self.entries == (1, 0, 0, 1)

    @property
    def sort_key(self) -> Tuple:
        return (self.max_entry, self.entries)

    def __mul__(self, other: 'Mobius') -> 'Mobius':
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return Mobius.of(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self) -> 'Mobius':
        return Mobius.of(self.d, -self.b, -self.c, self.a)

    def power(self, exponent: int) -> 'Mobius':
        base = self if exponent >= 0 else self.inverse()
        result = Mobius.identity()
        for _ in range(abs(exponent)):
            result = result * base
        return result

    def act(self, slope: Slope) -> Slope:
        """p/q -> (ap + bq)/(cp + dq)"""
        return Slope.of(self.a * slope.p + self.b * slope.q, self.c * slope.p + self.d * slope.q)

    def __str__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


def _normalized(entries: Tuple[int, int, int, int]) -> Tuple[int, int, int, int]:
    for value in entries:
        if value:
            return entries if value > 0 else tuple(-x for x in entries)
    return entries


GroupElement = Union[Word, Mobius]


def element_length(g: GroupElement) -> int:
    """Word length for free words, max |entry| for matrices"""
    return len(g) if isinstance(g, Word) else g.max_entry


def parse_group_element(text: str) -> GroupElement:
    text = text.strip()
    if text.startswith('['):
        return Mobius.parse(text)
    return Word.parse(text)
