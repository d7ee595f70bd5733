"""Spectral codes, level covers, and the exact counting combinatorics.

A code is a word over the letters ``A<i>``, ``G<i>`` and ``B`` measured
against continued-fraction entries ``(c_1, c_2, ...)``.  Letter ``j`` of a
code branches according to ``c_j``.  Counting vectors use the basis
``(G, B, A)``.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Optional, Sequence

from .cf import CFWord, Convergents, extend
from .errors import (ConsistencyError, InvalidCode, InvalidMu, StructureViolation,
                     TooManyCodes)
from .spectra import Band, eps, inside_margin, strictly_inside, typed_bands

MAX_CODES = 100_000

BASIS = ("G", "B", "A")


class Letter(NamedTuple):
    kind: str
    index: int = 0

    @property
    def key(self) -> int:
        """Position in the sibling order ``G1 < A1 < G2 < A2 < ...``."""
        if self.kind == "G":
            return 2 * self.index - 2
        if self.kind == "A":
            return 2 * self.index - 1
        return 0

    def __str__(self) -> str:
        return "B" if self.kind == "B" else f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "Letter":
        text = text.strip()
        if text == "B":
            return cls("B", 0)
        if len(text) >= 2 and text[0] in "AG" and text[1:].isdigit() and int(text[1:]) >= 1:
            return cls(text[0], int(text[1:]))
        raise InvalidCode(f"bad letter {text!r}")


A1 = Letter("A", 1)
G1 = Letter("G", 1)
G2 = Letter("G", 2)
B = Letter("B", 0)


def children(prev: Optional[Letter], c_next: int) -> list[Letter]:
    """Letters allowed after ``prev`` at a position whose entry is ``c_next``, in order."""
    if prev is None:
        return [A1, G2]
    if prev.kind == "G":
        return [B]
    n_a = c_next - 1 if prev.kind == "A" else c_next
    out = []
    for i in range(1, n_a + 2):
        out.append(Letter("G", i))
        if i <= n_a:
            out.append(Letter("A", i))
    return out


def _violation(letters: Sequence[Letter], context: Sequence[int]) -> Optional[str]:
    if not letters:
        return "empty code"
    if len(context) < len(letters) - 1:
        return f"context has {len(context)} entries, code needs {len(letters) - 1}"
    prev = None
    for j, letter in enumerate(letters):
        allowed = children(prev, context[j - 1] if j else 0)
        if letter not in allowed:
            return f"letter {letter} not allowed at position {j}"
        prev = letter
    return None


@dataclass(frozen=True)
class Code:
    """A code prefix ``gamma(0) .. gamma(depth)`` with its entry context."""

    letters: tuple[Letter, ...]
    context: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.letters) - 1

    @property
    def spectral(self) -> bool:
        return self.letters[-1].kind in "AB"

    @property
    def sort_key(self) -> tuple[int, ...]:
        return tuple(l.key for l in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __getitem__(self, j: int) -> Letter:
        return self.letters[j]

    def __lt__(self, other: "Code") -> bool:
        return self.sort_key < other.sort_key

    def prefix(self, k: int) -> "Code":
        """``gamma|[0, k]``."""
        if not 0 <= k <= self.depth:
            raise IndexError(k)
        return Code(self.letters[: k + 1], self.context)

    def word(self, k: Optional[int] = None) -> CFWord:
        """The approximant ``[0, 0, c_1, ..., c_k]`` the level-``k`` letter lives on."""
        k = self.depth if k is None else k
        return CFWord((0, 0) + tuple(self.context[:k]))

    def __str__(self) -> str:
        return ".".join(map(str, self.letters))

    def to_json(self) -> str:
        return str(self)


def make_code(letters: Sequence[Letter], context: Sequence[int]) -> Code:
    """Validated ``Code``; raises ``InvalidCode``."""
    letters, context = tuple(letters), tuple(context)
    problem = _violation(letters, context)
    if problem:
        raise InvalidCode(problem, code=".".join(map(str, letters)), context=list(context))
    return Code(letters, context)


def parse_code(text: str, context: Sequence[int]) -> Code:
    """Parse the dotted form ``"A1.G2.B"``."""
    return make_code([Letter.parse(t) for t in text.split(".")], context)


def iter_codes(entries: Sequence[int], k: int, spectral_only: bool = False) -> Iterator[Code]:
    """All codes of depth ``k`` in increasing order."""
    entries = tuple(entries)
    if k < 0 or len(entries) < k or any(c < 1 for c in entries[:k]):
        raise InvalidCode("need k >= 0 and k entries >= 1", k=k, entries=list(entries))
    context = entries[:k]

    def walk(prefix: tuple[Letter, ...]):
        j = len(prefix)
        if j == k + 1:
            if not spectral_only or prefix[-1].kind != "G":
                yield Code(prefix, context)
            return
        for letter in children(prefix[-1] if prefix else None, context[j - 1] if j else 0):
            yield from walk(prefix + (letter,))

    return walk(())


def code_count(entries: Sequence[int], k: int, spectral_only: bool = False) -> int:
    """Number of codes of depth ``k`` from the counting matrices."""
    s, _ = cumulative_S(tuple(entries)[:k])
    rho = _mat_vec(s, (1, 0, 1))
    return rho[1] + rho[2] + (0 if spectral_only else rho[0])


def enumerate_codes(entries: Sequence[int], k: int, spectral_only: bool = False,
                    cap: int = MAX_CODES) -> list[Code]:
    """List form of ``iter_codes``; refuses to produce more than ``cap`` codes."""
    n = code_count(entries, k, spectral_only)
    if n > cap:
        raise TooManyCodes(f"{n} codes exceed the cap {cap}", count=n, cap=cap)
    return list(iter_codes(entries, k, spectral_only))


def random_code(entries: Sequence[int], k: int, rng: random.Random) -> Code:
    """A code of depth ``k`` with each letter drawn uniformly among its siblings."""
    context = tuple(entries[:k])
    letters: list[Letter] = []
    for j in range(k + 1):
        letters.append(rng.choice(children(letters[-1] if letters else None,
                                           context[j - 1] if j else 0)))
    return Code(tuple(letters), context)


# Exact 3x3 integer matrices as tuples of rows.

def _mat_mul(x, y):
    return tuple(tuple(sum(x[i][t] * y[t][j] for t in range(3)) for j in range(3))
                 for i in range(3))


def _mat_vec(x, v):
    return tuple(sum(x[i][t] * v[t] for t in range(3)) for i in range(3))


def _vec_mat(v, x):
    return tuple(sum(v[t] * x[t][j] for t in range(3)) for j in range(3))


IDENTITY = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def det3(x) -> int:
    return (x[0][0] * (x[1][1] * x[2][2] - x[1][2] * x[2][1])
            - x[0][1] * (x[1][0] * x[2][2] - x[1][2] * x[2][0])
            + x[0][2] * (x[1][0] * x[2][1] - x[1][1] * x[2][0]))


def counting_matrix_T(c_next: int):
    """Children counts by parent kind: column ``X`` holds the ``(G, B, A)`` children of an ``X`` node."""
    if c_next < 1:
        raise ValueError("entry must be >= 1")
    c = c_next
    return ((0, c + 1, c), (1, 0, 0), (0, c, c - 1))


def _s_closed(pq: Convergents, k: int):
    p, q = pq.p(k), pq.q(k)
    p1, q1 = pq.p(k - 1), pq.q(k - 1)
    s = (-1) ** k
    return ((p + s, q - s, q - p - s),
            (p1 - s, q1 + s, q1 - p1 + s),
            (p - p1 + s, q - q1 - s, q - q1 - p + p1 - s))


def _s_inv_closed(pq: Convergents, k: int):
    p, q = pq.p(k), pq.q(k)
    p1, q1 = pq.p(k - 1), pq.q(k - 1)
    s = (-1) ** k
    rows = ((1 - p, p1 - 1, p1 + p - 1),
            (q - 1, 1 - q1, 1 - q - q1),
            (1 - p - q, q1 + p1 - 1, p + p1 + q + q1 - 1))
    return tuple(tuple(s * v for v in row) for row in rows)


@lru_cache(maxsize=4096)
def _cumulative(entries: tuple[int, ...]):
    k = len(entries)
    s = IDENTITY
    for c in entries:
        s = _mat_mul(counting_matrix_T(c), s)
    pq = Convergents(entries, k)
    closed, inv = _s_closed(pq, k), _s_inv_closed(pq, k)
    if closed != s:
        raise ConsistencyError("counting product and closed form differ",
                               entries=list(entries), product=s, closed=closed)
    if _mat_mul(s, inv) != IDENTITY:
        raise ConsistencyError("closed-form inverse is wrong", entries=list(entries))
    return s, inv


def cumulative_S(entries: Sequence[int]):
    """``(S_k, S_k^{-1})`` for ``S_k = T_k ... T_1``, cross-checked against the closed forms."""
    entries = tuple(entries)
    if any(c < 1 for c in entries):
        raise ValueError("entries must be >= 1")
    return _cumulative(entries)


def _unit(label: str):
    return tuple(int(b == label) for b in BASIS)


def extension_counts(entries: Sequence[int], j: int, k: int, label: str) -> int:
    """Spectral depth-``k`` extensions of a depth-``j`` code ending in a letter of kind ``label``."""
    if not 0 <= j <= k <= len(entries):
        raise ValueError(f"need 0 <= j <= k <= {len(entries)}")
    s_k, _ = cumulative_S(tuple(entries[:k]))
    _, inv_j = cumulative_S(tuple(entries[:j]))
    row = _vec_mat((0, 1, 1), s_k)
    return sum(a * b for a, b in zip(_vec_mat(row, inv_j), _unit(label)))


def p_coeff(j: int, k: int, pq: Convergents) -> int:
    """``(-1)^j (q_j p_k - p_j q_k)``."""
    if not -1 <= j <= k:
        raise ValueError("need -1 <= j <= k")
    return (-1) ** (j % 2) * (pq.q(j) * pq.p(k) - pq.p(j) * pq.q(k))


def gamma_counts(code: Code, j: int) -> tuple[int, int]:
    """``(#A, #G)`` among the siblings allowed at position ``j`` that precede ``code[j]``."""
    prev = code[j - 1] if j else None
    sibs = children(prev, code.context[j - 1] if j else 0)
    before = [s for s in sibs if s.key < code[j].key]
    return (sum(s.kind == "A" for s in before), sum(s.kind == "G" for s in before))


def left_count(code: Code, k: int, detail: bool = False):
    """Spectral depth-``k`` codes strictly below ``code|[0, k]``.

    With ``detail`` also returns the per-level contributions.
    """
    if not 0 <= k <= code.depth:
        raise InvalidCode("code is shorter than the requested depth", depth=code.depth, k=k)
    entries = code.context[:k]
    s_k, _ = cumulative_S(entries)
    row = _vec_mat((0, 1, 1), s_k)
    parts = []
    for j in range(k + 1):
        _, inv_j = cumulative_S(entries[:j])
        d = _vec_mat(row, inv_j)
        n_a, n_g = gamma_counts(code, j)
        parts.append(d[2] * n_a + d[0] * n_g)
    total = sum(parts)
    return (total, parts) if detail else total


@dataclass(frozen=True)
class MuSeq:
    """Coefficients ``mu_{-1}, mu_0, ..., mu_K``; ``get(j)`` is zero past the end."""

    values: tuple[int, ...]

    def get(self, j: int) -> int:
        if j < -1:
            raise IndexError(j)
        return self.values[j + 1] if j + 1 < len(self.values) else 0

    @property
    def last_index(self) -> int:
        return len(self.values) - 2

    def to_json(self) -> list[int]:
        return list(self.values)

    def validate(self, context: Sequence[int]) -> "MuSeq":
        """Raise ``InvalidMu`` unless the admissibility rules hold against ``context``."""
        problem = _mu_violation(self, context)
        if problem:
            raise InvalidMu(problem, mu=list(self.values), context=list(context))
        return self


def _mu_violation(mu: MuSeq, context: Sequence[int]) -> Optional[str]:
    # Range rules for mu_j need c_{j+1}; they are skipped where the context ends.
    if len(mu.values) < 2:
        return "need at least mu_{-1} and mu_0"
    if mu.get(-1) not in (0, 1):
        return "mu_{-1} must be 0 or 1"
    if (mu.get(-1) == 1) != (mu.get(0) == -1):
        return "mu_{-1} = 1 exactly when mu_0 = -1"
    for j in range(0, mu.last_index + 1):
        low = -1 if j == 0 else 0
        if mu.get(j) < low:
            return f"mu_{j} out of range"
        if j >= len(context):
            continue
        top = context[j] - 1 if j == 0 else context[j]
        if mu.get(j) > top:
            return f"mu_{j} out of range"
        if mu.get(j) == top and mu.get(j + 1) != 0:
            return f"mu_{j} at its maximum forces mu_{j + 1} = 0"
    return None


def mu_of_code(code: Code, K: int) -> MuSeq:
    """``mu_{-1} .. mu_K`` of a code of depth at least ``K + 1``."""
    if K < 0 or code.depth < K + 1:
        raise InvalidCode("code must reach depth K + 1", depth=code.depth, K=K)
    counts = [gamma_counts(code, j) for j in range(K + 2)]
    values = [counts[0][0]]
    for k in range(K + 1):
        values.append(counts[k][1] - counts[k][0] + counts[k + 1][0])
    # Same values from the letter itself: +1 on A, -1 at position 0.
    for k in range(K + 1):
        table = int(code[k].kind == "A") + counts[k + 1][0] - int(k == 0)
        if table != values[k + 1]:
            raise ConsistencyError("coefficient table disagrees with sibling counts",
                                   code=str(code), k=k)
    return MuSeq(tuple(values))


def code_of_mu(mu: MuSeq, context: Sequence[int], depth: Optional[int] = None) -> Code:
    """Inverse of ``mu_of_code``: the code ``gamma(0) .. gamma(depth)``.

    ``depth`` defaults to ``mu.last_index``; coefficients past the end count as 0.
    """
    depth = mu.last_index if depth is None else depth
    context = tuple(context)
    if len(context) < depth:
        raise InvalidMu("context too short", depth=depth, context=list(context))
    MuSeq(tuple(mu.get(j) for j in range(-1, depth + 1))).validate(context)
    letters = [G2 if mu.get(-1) == 1 else A1]
    for k in range(depth):
        prev = letters[k]
        if prev.kind == "G":
            letters.append(B)
            continue
        n_a = mu.get(k) - int(prev.kind == "A") + int(k == 0)
        letters.append(Letter("G" if mu.get(k + 1) == 0 else "A", n_a + 1))
    try:
        return make_code(letters, context[:depth])
    except InvalidCode as exc:
        raise InvalidMu(str(exc), mu=list(mu.values)) from exc


# Level covers and the band assigned to each code.

@lru_cache(maxsize=512)
def _level(entries: tuple[int, ...], V: float) -> tuple[Band, ...]:
    c = CFWord(entries)
    own = list(typed_bands(c, V))
    gaps = [b for b in typed_bands(extend(c, 1), V) if b.btype == "B"]
    level = sorted(own + gaps, key=lambda b: b.lo)
    for a, b in zip(level, level[1:]):
        if b.lo - a.hi <= eps(max(abs(a.hi), abs(b.lo))):
            raise StructureViolation("level bands overlap", word=list(entries),
                                     left=[a.lo, a.hi], right=[b.lo, b.hi])
    return tuple(level)


def level_bands(c: CFWord, V: float) -> list[Band]:
    """Typed bands of ``sigma_c`` and type-B bands of ``sigma_[c,1]``, left to right."""
    return list(_level(c.entries, float(V)))


def is_gap_band(band: Band, c: CFWord) -> bool:
    """True for level bands contributed by ``sigma_[c,1]``."""
    return band.owner != c


def _inside(level: Sequence[Band], parent: Band, strict: bool) -> list[Band]:
    lows = [b.lo for b in level]
    tol = eps(max(abs(parent.lo), abs(parent.hi)))
    lo = bisect.bisect_left(lows, parent.lo - tol)
    hi = bisect.bisect_right(lows, parent.hi + tol)
    if strict:
        return [b for b in level[lo:hi] if strictly_inside(b, parent)]
    return [b for b in level[lo:hi] if inside_margin((b.lo, b.hi), (parent.lo, parent.hi)) >= -tol]


def _root(letter: Letter, V: float) -> Band:
    level = _level((0, 0), float(V))
    return level[0] if letter == A1 else level[1]


def _check_letter(letter: Letter, band: Band, c: CFWord, code: Code, j: int) -> None:
    gap = is_gap_band(band, c)
    ok = (gap and band.btype == "B") if letter.kind == "G" else (
        not gap and band.btype == letter.kind)
    if not ok:
        raise StructureViolation("letter does not match the band kind", code=str(code),
                                 position=j, band=[band.lo, band.hi], btype=band.btype)


def code_path(code: Code, V: float) -> list[Band]:
    """Bands assigned to ``code|[0, j]`` for ``j = 0 .. depth``."""
    V = float(V)
    band = _root(code[0], V)
    path = [band]
    for j in range(1, len(code)):
        c = code.word(j)
        level = _level(c.entries, V)
        prev = code[j - 1]
        if prev.kind == "G":
            kids = _inside(level, band, strict=False)
            if len(kids) != 1:
                raise StructureViolation("gap band must hold exactly one child",
                                         code=str(code), position=j, found=len(kids))
            band = kids[0]
        else:
            kids = _inside(level, band, strict=True)
            expected = len(children(prev, code.context[j - 1]))
            if len(kids) != expected:
                raise StructureViolation("child count differs from the code rules",
                                         code=str(code), position=j, found=len(kids),
                                         expected=expected)
            letter = code[j]
            band = kids[2 * letter.index - 2 if letter.kind == "G" else 2 * letter.index - 1]
        _check_letter(code[j], band, c, code, j)
        path.append(band)
    return path


def code_to_band(code: Code, V: float) -> Band:
    """The level band of ``code`` at its own depth."""
    return code_path(code, V)[-1]


def level_table(entries: Sequence[int], k: int, V: float) -> dict:
    """Codes of depth ``k`` paired with their bands, in increasing order."""
    codes = enumerate_codes(entries, k)
    bands = [code_to_band(g, V) for g in codes]
    if len(bands) != len(level_bands(CFWord((0, 0) + tuple(entries[:k])), V)):
        raise StructureViolation("codes and level bands differ in number", k=k)
    if any(nxt.lo <= prev.lo for prev, nxt in zip(bands, bands[1:])):
        raise StructureViolation("band order does not follow code order", k=k)
    return {"depth": k, "codes": [str(g) for g in codes], "bands": [b.to_json() for b in bands]}
