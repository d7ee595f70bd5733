"""Finite continued fractions with a relaxed last entry, and convergents.

A word is an entry list ``(c_{-1}, c_0, c_1, ..., c_k)`` with ``c_{-1} = c_0 = 0``,
interior entries ``>= 1`` and a last entry ``>= -1``.  Its value is a reduced
fraction, the formal value ``-1`` or infinity (encoded ``1/0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import count
from typing import Callable, Iterable, Sequence, Union

from .errors import InvalidExtension, MalformedWord, NotInUnitInterval

FLOAT_CUTOFF = 1e-12


@dataclass(frozen=True, order=True)
class Rational:
    """Reduced ``p/q`` with ``q >= 0``; ``(1, 0)`` is infinity."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("denominator must be non-negative")
        if self.q == 0 and self.p != 1:
            raise ValueError("infinity is encoded as (1, 0)")
        if self.q > 0 and math.gcd(self.p, self.q) != 1:
            raise ValueError(f"{self.p}/{self.q} is not reduced")

    @classmethod
    def of(cls, x: Union[Fraction, int]) -> "Rational":
        x = Fraction(x)
        return cls(x.numerator, x.denominator)

    @property
    def is_infinite(self) -> bool:
        return self.q == 0

    def as_fraction(self) -> Fraction:
        if self.is_infinite:
            raise ValueError("infinity has no fraction form")
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        return math.inf if self.is_infinite else self.p / self.q

    def __str__(self) -> str:
        return "inf" if self.is_infinite else f"{self.p}/{self.q}"


INFINITY = Rational(1, 0)
MINUS_ONE = Rational(-1, 1)


@dataclass(frozen=True)
class CFWord:
    """A validated member of the extended continued-fraction space."""

    entries: tuple[int, ...]

    @property
    def depth(self) -> int:
        """The index ``k`` of the last entry (``-1`` for ``[0]``)."""
        return len(self.entries) - 2

    @property
    def tail(self) -> tuple[int, ...]:
        """Entries ``c_1 .. c_k``."""
        return self.entries[2:]

    @property
    def last(self) -> int:
        return self.entries[-1]

    def prefix(self, j: int) -> "CFWord":
        """The word ``[0, 0, c_1, ..., c_j]`` (``j = -1`` gives ``[0]``)."""
        if not -1 <= j <= self.depth:
            raise IndexError(j)
        return CFWord(self.entries[: j + 2])

    def to_json(self) -> list[int]:
        return list(self.entries)

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.entries)) + "]"


def _check(entries: Sequence[int]) -> str | None:
    if not entries:
        return "empty entry list"
    if any(isinstance(e, bool) or not isinstance(e, int) for e in entries):
        return "entries must be integers"
    if entries[0] != 0:
        return "c_{-1} must be 0"
    if len(entries) >= 2 and entries[1] != 0:
        return "c_0 must be 0"
    if len(entries) >= 3:
        if any(e < 1 for e in entries[2:-1]):
            return "interior entries must be >= 1"
        if entries[-1] < -1:
            return "last entry must be >= -1"
    return None


def validate(entries: Iterable[int]) -> CFWord:
    """Return a ``CFWord`` or raise ``MalformedWord``."""
    entries = tuple(entries)
    problem = _check(entries)
    if problem:
        raise MalformedWord(problem, entries=list(entries))
    return CFWord(entries)


def word(*tail: int) -> CFWord:
    """Shorthand: ``word(2, 1)`` is ``[0, 0, 2, 1]``."""
    return validate((0, 0) + tail)


def parse_word(text: str) -> CFWord:
    """Parse ``"0,0,2,1"`` or ``"[0,0,2,1]"``."""
    body = text.strip().strip("[]")
    try:
        entries = [int(t) for t in body.split(",") if t.strip()]
    except ValueError as exc:
        raise MalformedWord(f"cannot parse {text!r}") from exc
    return validate(entries)


def extend(c: CFWord, m: int) -> CFWord:
    """The word ``[c, m]``."""
    entries = c.entries + (m,)
    problem = _check(entries)
    if problem:
        raise InvalidExtension(problem, word=c.to_json(), m=m)
    return CFWord(entries)


def _proper_value(tail: Sequence[int]) -> Rational:
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for c in tail:
        p_prev, q_prev, p, q = p, q, c * p + p_prev, c * q + q_prev
    return Rational(p, q)


@lru_cache(maxsize=4096)
def _evaluate(entries: tuple[int, ...]) -> Rational:
    if len(entries) == 1:
        return INFINITY
    if len(entries) == 2:
        return Rational(0, 1)
    last = entries[-1]
    if last == -1:
        if len(entries) == 3:
            return MINUS_ONE
        return _evaluate(entries[:-2] + (entries[-2] - 1,))
    if last == 0:
        return _evaluate(entries[:-2])
    return _proper_value(entries[2:])


def evaluate(c: CFWord) -> Rational:
    """The value of a word, following the trailing ``-1`` and ``0`` reductions."""
    return _evaluate(c.entries)


def reduce_word(c: CFWord) -> CFWord:
    """Strip trailing ``-1``/``0`` entries; the result has the same value."""
    e = c.entries
    while len(e) >= 3 and e[-1] in (-1, 0) and e != (0, 0, -1):
        e = e[:-2] if e[-1] == 0 else e[:-2] + (e[-2] - 1,)
    return CFWord(e)


class CFStream:
    """Infinite entry sequence ``c_1, c_2, ...`` of an irrational slope."""

    def __init__(self, entry: Callable[[int], int], name: str = "stream"):
        self._entry = entry
        self._cache: list[int] = []
        self.name = name

    @classmethod
    def periodic(cls, pattern: Sequence[int], name: str | None = None) -> "CFStream":
        pattern = tuple(pattern)
        if not pattern or any(c < 1 for c in pattern):
            raise MalformedWord("periodic pattern needs entries >= 1", pattern=list(pattern))
        label = name or "periodic(" + ",".join(map(str, pattern)) + ")"
        return cls(lambda k: pattern[(k - 1) % len(pattern)], label)

    @classmethod
    def fibonacci(cls) -> "CFStream":
        return cls.periodic((1,), "fibonacci")

    @classmethod
    def from_iterable(cls, entries: Iterable[int], name: str = "stream") -> "CFStream":
        it = iter(entries)
        buf: list[int] = []

        def entry(k: int) -> int:
            while len(buf) < k:
                buf.append(next(it))
            return buf[k - 1]

        return cls(entry, name)

    def entry(self, k: int) -> int:
        if k < 1:
            return 0
        while len(self._cache) < k:
            c = self._entry(len(self._cache) + 1)
            if c < 1:
                raise MalformedWord("stream entries must be >= 1", index=len(self._cache) + 1)
            self._cache.append(c)
        return self._cache[k - 1]

    def prefix(self, k: int) -> tuple[int, ...]:
        """``(c_1, ..., c_k)``."""
        if k >= 1:
            self.entry(k)
        return tuple(self._cache[: max(k, 0)])

    def word(self, k: int) -> CFWord:
        """The ``k``-th approximant ``[0, 0, c_1, ..., c_k]``."""
        return CFWord((0, 0) + self.prefix(k))

    def __iter__(self):
        return (self.entry(k) for k in count(1))

    def __repr__(self) -> str:
        return f"CFStream({self.name})"


def _tail_of(s: Union[CFStream, CFWord, Sequence[int]], k_max: int) -> tuple[int, ...]:
    if isinstance(s, CFStream):
        return s.prefix(k_max)
    if isinstance(s, CFWord):
        if k_max > s.depth:
            raise IndexError(f"word has depth {s.depth} < {k_max}")
        return s.tail[: max(k_max, 0)]
    tail = tuple(s)
    if k_max > len(tail):
        raise IndexError(f"only {len(tail)} entries < {k_max}")
    return tail[: max(k_max, 0)]


def convergents(s: Union[CFStream, CFWord, Sequence[int]], k_max: int) -> list[tuple[int, int]]:
    """``[(p_{-1}, q_{-1}), (p_0, q_0), ..., (p_{k_max}, q_{k_max})]``."""
    if k_max < -1:
        raise ValueError("k_max must be >= -1")
    out = [(1, 0)]
    if k_max >= 0:
        out.append((0, 1))
    for c in _tail_of(s, k_max):
        (p1, q1), (p0, q0) = out[-2], out[-1]
        out.append((c * p0 + p1, c * q0 + q1))
    return out


class Convergents:
    """Indexable convergent table with ``pq[k] == (p_k, q_k)`` for ``k >= -1``."""

    def __init__(self, s: Union[CFStream, CFWord, Sequence[int]], k_max: int):
        self.entries = (0,) + _tail_of(s, k_max)
        self._pq = convergents(s, k_max)
        self.k_max = k_max

    def __getitem__(self, k: int) -> tuple[int, int]:
        if not -1 <= k <= self.k_max:
            raise IndexError(k)
        return self._pq[k + 1]

    def p(self, k: int) -> int:
        return self[k][0]

    def q(self, k: int) -> int:
        return self[k][1]

    def c(self, k: int) -> int:
        """Entry ``c_k`` for ``1 <= k <= k_max``."""
        if not 1 <= k <= self.k_max:
            raise IndexError(k)
        return self.entries[k]


def cf_of_real(x: Union[float, Fraction, Rational, str], depth: int) -> tuple[int, ...]:
    """Continued-fraction entries ``(c_1, ...)`` of ``x`` in ``(0, 1)``, at most ``depth``.

    Exact input (``Fraction``, ``Rational``, ``"p/q"``) runs the Euclidean
    algorithm; floats stop once the fractional remainder drops below 1e-12.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(x, Rational):
        x = x.as_fraction()
    elif isinstance(x, str):
        x = Fraction(x)
    if not 0 < x < 1:
        raise NotInUnitInterval(f"{x} is not in (0, 1)", x=str(x))
    out: list[int] = []
    if isinstance(x, (Fraction, int)):
        r = Fraction(x)
        while len(out) < depth and r:
            a, rem = divmod(1 / r, 1)
            out.append(int(a))
            r = rem
        return tuple(out)
    r = float(x)
    while len(out) < depth:
        y = 1.0 / r
        a = math.floor(y)
        rem = y - a
        if 1.0 - rem < FLOAT_CUTOFF:
            out.append(a + 1)
            break
        out.append(a)
        if rem < FLOAT_CUTOFF:
            break
        r = rem
    return tuple(out)
