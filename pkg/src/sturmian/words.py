"""Mechanical words and the recursive structure of their periods."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .cf import CFStream, CFWord, Rational, evaluate
from .errors import InfiniteSlope, UnsupportedValue


class BitWord:
    """Finite 0/1 word packed into a Python int (bit ``i`` is letter ``i``)."""

    __slots__ = ("bits", "length")

    def __init__(self, bits: int, length: int):
        if length < 0 or bits >> length:
            raise ValueError("bits do not fit the length")
        self.bits = bits
        self.length = length

    @classmethod
    def from_str(cls, text: str) -> "BitWord":
        if set(text) - {"0", "1"}:
            raise ValueError(f"not a binary word: {text!r}")
        return cls(int(text[::-1], 2) if text else 0, len(text))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitWord":
        return cls.from_str("".join("1" if b else "0" for b in bits))

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self.length
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __iter__(self):
        b = self.bits
        for _ in range(self.length):
            yield b & 1
            b >>= 1

    def __add__(self, other: "BitWord") -> "BitWord":
        return BitWord(self.bits | (other.bits << self.length), self.length + other.length)

    def __mul__(self, n: int) -> "BitWord":
        out = BitWord(0, 0)
        piece = self
        while n > 0:
            if n & 1:
                out = out + piece
            piece = piece + piece
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, BitWord) and (self.bits, self.length) == (other.bits, other.length)

    def __hash__(self) -> int:
        return hash((self.bits, self.length))

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "BitWord":
        arr = np.asarray(arr, dtype=np.uint8)
        packed = np.packbits(arr, bitorder="little").tobytes()
        return cls(int.from_bytes(packed, "little"), len(arr))

    def to_array(self) -> np.ndarray:
        """Letters as a ``uint8`` array."""
        nbytes = (self.length + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.length]

    def ones(self) -> int:
        return bin(self.bits).count("1")

    def rotate(self, s: int) -> "BitWord":
        """Cyclic shift so that letter ``s`` comes first."""
        n = self.length
        if n == 0:
            return self
        s %= n
        mask = (1 << n) - 1
        return BitWord(((self.bits >> s) | (self.bits << (n - s))) & mask, n)

    def __str__(self) -> str:
        return format(self.bits, f"0{self.length}b")[::-1] if self.length else ""

    def __repr__(self) -> str:
        return f"BitWord('{self}')"


def _as_slope(alpha) -> Union[Fraction, float]:
    if isinstance(alpha, CFWord):
        alpha = evaluate(alpha)
    if isinstance(alpha, Rational):
        if alpha.is_infinite:
            raise InfiniteSlope("slope is infinite")
        return alpha.as_fraction()
    if isinstance(alpha, (int, Fraction)):
        return Fraction(alpha)
    alpha = float(alpha)
    if math.isinf(alpha):
        raise InfiniteSlope("slope is infinite")
    return alpha


def mechanical_bit(alpha, n: int, extended: bool = False) -> int:
    """``floor((n+1) alpha) - floor(n alpha)``.

    With ``extended=True`` the slope ``-1`` yields ``-1`` at every site, the
    convention used for transfer matrices of ``[0, 0, -1]``.
    """
    a = _as_slope(alpha)
    if a == -1:
        if not extended:
            raise UnsupportedValue("slope -1 needs extended=True")
        return -1
    if isinstance(a, Fraction):
        p, q = a.numerator, a.denominator
        return ((n + 1) * p) // q - (n * p) // q
    return math.floor((n + 1) * a) - math.floor(n * a)


def _period_of(p: int, q: int) -> BitWord:
    if q * max(abs(p), 1) < 2**62:
        n = np.arange(q + 1, dtype=np.int64)
        return BitWord.from_array(np.diff((n * p) // q))
    bits = 0
    prev = 0
    for i in range(q):
        cur = ((i + 1) * p) // q
        if cur - prev:
            bits |= 1 << i
        prev = cur
    return BitWord(bits, q)


def period_direct(c: Union[CFWord, Rational]) -> BitWord:
    """One period of the mechanical word of slope ``evaluate(c)``."""
    value = evaluate(c) if isinstance(c, CFWord) else c
    if value.is_infinite:
        raise InfiniteSlope("no period word for an infinite slope", word=str(c))
    if value.q == 1 and value.p == -1:
        raise UnsupportedValue("no period word for slope -1")
    return _period_of(value.p, value.q)


def _entries(s: Union[CFStream, CFWord, Sequence[int]], k: int) -> tuple[int, ...]:
    if isinstance(s, CFStream):
        return s.prefix(k)
    if isinstance(s, CFWord):
        return s.tail[:k]
    return tuple(s)[:k]


def period_table(s: Union[CFStream, CFWord, Sequence[int]], k: int) -> list[BitWord]:
    """``[W_0, ..., W_k]`` built by concatenation.

    Even ``j`` appends copies of ``W_{j-1}`` after ``W_{j-2}``; odd ``j``
    puts them before.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    entries = _entries(s, k)
    if len(entries) < k:
        raise IndexError(f"only {len(entries)} entries available")
    table = [BitWord.from_str("0")]
    if k >= 1:
        table.append(BitWord.from_str("0" * (entries[0] - 1) + "1"))
    for j in range(2, k + 1):
        block = table[j - 1] * entries[j - 1]
        table.append(table[j - 2] + block if j % 2 == 0 else block + table[j - 2])
    return table


def period_recursive(s: Union[CFStream, CFWord, Sequence[int]], k: int) -> BitWord:
    """``W_k`` from the concatenation recursion."""
    return period_table(s, k)[k]


def cyclic_equal(a: BitWord, b: BitWord) -> bool:
    """True when ``b`` is a rotation of ``a``."""
    return len(a) == len(b) and str(b) in str(a) * 2


# Each check returns the indices where the property fails; empty means it holds.

def _bad(mask: np.ndarray, idx: np.ndarray) -> list[int]:
    return idx[~mask].tolist()


def prefix_violations(table: list[BitWord], k: int) -> list[int]:
    """Agreement of ``W_k`` with repeated copies of ``W_{k-1}`` and ``W_{k-2}`` at the start."""
    if k < 2:
        return []
    w, w1, w2 = (table[j].to_array() for j in (k, k - 1, k - 2))
    q, q1, q2 = len(w), len(w1), len(w2)
    if k % 2 == 0:
        i = np.arange(q1 - 1)
        return _bad((w[i] == w1[i]) & (w[i] == w2[i % q2]), i)
    i = np.arange(q - 1)
    j = np.arange(q2 - 1)
    return _bad(w[i] == w1[i % q1], i) + _bad(w[j] == w2[j], j)


def suffix_violations(table: list[BitWord], k: int) -> list[int]:
    """Agreement of the tail of ``W_k`` with the tail of ``W_{k-1}`` (even) or ``W_{k-2}`` (odd)."""
    if k < 2:
        return []
    w = table[k].to_array()
    ref = (table[k - 1] if k % 2 == 0 else table[k - 2]).to_array()
    q, r = len(w), len(ref)
    i = np.arange(1, r + 1)
    return _bad(w[q - i] == ref[r - i], i)


def palindrome_violations(word: BitWord) -> list[int]:
    """Indices ``1 <= i <= q-2`` where ``W(i) != W(q-1-i)``."""
    w = word.to_array()
    q = len(w)
    i = np.arange(1, max(q - 1, 1))
    return _bad(w[i] == w[q - 1 - i], i)


def shift_violations(table: list[BitWord], k: int) -> list[int]:
    """Invariance of ``W_k`` under a shift by ``q_{k-1}`` on the admissible index range."""
    if k < 1:
        return []
    w = table[k].to_array()
    q, q1 = len(w), len(table[k - 1])
    i = np.arange(1, q - 1) if k % 2 == 0 else np.arange(-q1 + 1, q - q1 - 1)
    return _bad(w[i % q] == w[(i + q1) % q], i)


def last_bit_violation(word: BitWord) -> bool:
    """True when the final letter is not 1."""
    return word[len(word) - 1] != 1
