"""Transfer matrices over polynomials in the energy, discriminants and trace identities.

Coefficients are exact (``int``/``Fraction``) or ``float`` according to an
explicit ``Context``.  Numeric evaluation at a given energy for large periods
skips polynomials and multiplies 2x2 matrices along the period word.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import _dd
from .cf import CFWord, evaluate, extend, reduce_word
from .errors import ConsistencyError, UnsupportedValue
from .words import period_direct

POLY_Q_CAP = 512
FLOAT_RTOL = 1e-9


def _norm(x):
    """Exact scalars as ``int`` when integral, else ``Fraction``."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x.numerator)
    return x


@dataclass(frozen=True)
class Context:
    """Arithmetic mode: ``exact`` uses rationals, otherwise float64."""

    exact: bool = True

    def scalar(self, x):
        if self.exact:
            if isinstance(x, str):
                x = Fraction(x)
            return _norm(Fraction(x))
        return float(x)

    def __str__(self) -> str:
        return "exact" if self.exact else "float"


EXACT = Context(True)
FLOAT = Context(False)


def _conv(a: tuple, b: tuple) -> tuple:
    if isinstance(a[0], float) or isinstance(b[0], float):
        return tuple(np.convolve(np.asarray(a, float), np.asarray(b, float)).tolist())
    # Rationals are scaled to integers first; Fraction arithmetic in the inner loop is slow.
    da, db = _common_denominator(a), _common_denominator(b)
    ia = [int(x * da) for x in a]
    ib = [int(y * db) for y in b]
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(ia):
        if x:
            for j, y in enumerate(ib):
                out[i + j] += x * y
    scale = da * db
    if scale == 1:
        return tuple(out)
    return tuple(Fraction(x, scale) for x in out)


def _common_denominator(xs: tuple) -> int:
    d = 1
    for x in xs:
        if isinstance(x, Fraction):
            d = math.lcm(d, x.denominator)
    return d


class TracePoly:
    """Dense polynomial in ``E`` with ascending coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence):
        c = list(coeffs) or [0]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(_norm(x) for x in c)

    @classmethod
    def const(cls, a) -> "TracePoly":
        return cls([a])

    @classmethod
    def energy(cls, ctx: Context = EXACT) -> "TracePoly":
        return cls([ctx.scalar(0), ctx.scalar(1)])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs != (0,) else -1

    @property
    def leading(self):
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.coeffs)

    def _lift(self, other) -> "TracePoly":
        return other if isinstance(other, TracePoly) else TracePoly([other])

    def __add__(self, other):
        o = self._lift(other).coeffs
        a = self.coeffs
        n = max(len(a), len(o))
        return TracePoly([(a[i] if i < len(a) else 0) + (o[i] if i < len(o) else 0) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return TracePoly([-x for x in self.coeffs])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, TracePoly):
            return TracePoly([x * other for x in self.coeffs])
        return TracePoly(_conv(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __call__(self, E):
        acc = 0
        for x in reversed(self.coeffs):
            acc = acc * E + x
        return acc

    def __eq__(self, other) -> bool:
        if not isinstance(other, TracePoly):
            other = TracePoly([other])
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def allclose(self, other: "TracePoly", rtol: float = FLOAT_RTOL) -> bool:
        a = np.asarray(self.coeffs, float)
        b = np.asarray(other.coeffs, float)
        n = max(len(a), len(b))
        a, b = np.pad(a, (0, n - len(a))), np.pad(b, (0, n - len(b)))
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1.0)
        return bool(np.all(np.abs(a - b) <= rtol * scale))

    def to_json(self, word: Optional[CFWord] = None, V=None) -> dict:
        def enc(x):
            return f"{x.numerator}/{x.denominator}" if isinstance(x, Fraction) else x

        out = {"coeffs": [enc(x) for x in self.coeffs]}
        if word is not None:
            out["word"] = word.to_json()
        if V is not None:
            out["V"] = enc(V)
        return out

    def __repr__(self) -> str:
        return f"TracePoly({list(self.coeffs)})"


# 2x2 matrices as (a, b, c, d) tuples over any ring.

def mat_mul(x, y):
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mat_adj(x):
    a, b, c, d = x
    return (d, -b, -c, a)


def mat_pow(x, n: int):
    """``x**n`` for ``n >= 1``; ``n = -1`` gives the adjugate (the inverse when det = 1)."""
    if n == -1:
        return mat_adj(x)
    if n < 1:
        raise ValueError("exponent must be >= 1 or -1")
    out = None
    while n:
        if n & 1:
            out = x if out is None else mat_mul(out, x)
        n >>= 1
        if n:
            x = mat_mul(x, x)
    return out


def mat_trace(x):
    return x[0] + x[3]


def mat_det(x):
    return x[0] * x[3] - x[1] * x[2]


@dataclass(frozen=True)
class Mat2Poly:
    """2x2 matrix with ``TracePoly`` entries."""

    a: TracePoly
    b: TracePoly
    c: TracePoly
    d: TracePoly

    @classmethod
    def of(cls, t) -> "Mat2Poly":
        return cls(*(x if isinstance(x, TracePoly) else TracePoly.const(x) for x in t))

    def tup(self):
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "Mat2Poly") -> "Mat2Poly":
        return Mat2Poly.of(mat_mul(self.tup(), other.tup()))

    def __pow__(self, n: int) -> "Mat2Poly":
        return Mat2Poly.of(mat_pow(self.tup(), n))

    def adj(self) -> "Mat2Poly":
        return Mat2Poly.of(mat_adj(self.tup()))

    def det(self) -> TracePoly:
        return mat_det(self.tup())

    def trace(self) -> TracePoly:
        return mat_trace(self.tup())

    def __call__(self, E):
        return tuple(p(E) for p in self.tup())

    def allclose(self, other: "Mat2Poly", rtol: float = FLOAT_RTOL) -> bool:
        return all(x.allclose(y, rtol) for x, y in zip(self.tup(), other.tup()))


def one_step(bit: int, V, ctx: Context = EXACT) -> Mat2Poly:
    """The matrix ``((E - V*bit, -1), (1, 0))``."""
    if bit not in (0, 1, -1):
        raise ValueError("bit must be 0, 1 or -1")
    V = ctx.scalar(V)
    return Mat2Poly.of((TracePoly([-V * bit, ctx.scalar(1)]), ctx.scalar(-1), ctx.scalar(1), ctx.scalar(0)))


def _m_empty(V, ctx: Context) -> Mat2Poly:
    """Matrix of ``[0]``."""
    V = ctx.scalar(V)
    return Mat2Poly.of((ctx.scalar(1), -V, ctx.scalar(0), ctx.scalar(1)))


def _prefix_matrices(tail: Sequence[int], m_minus, m_zero, mul):
    """``[M_{-1}, M_0, M_1, ..., M_k]`` along the parity-split recursion."""
    out = [m_minus, m_zero]
    for k, c in enumerate(tail, start=1):
        prev2, prev1 = out[-2], out[-1]
        if c == 0:
            out.append(prev2)
            continue
        power = prev1
        for _ in range(c - 1):
            power = mul(power, prev1)
        out.append(mul(power, prev2) if k % 2 == 0 else mul(prev2, power))
    return out


def _poly_prefix(tail: Sequence[int], V, ctx: Context) -> list[Mat2Poly]:
    return _prefix_matrices(tail, _m_empty(V, ctx), one_step(0, V, ctx), lambda x, y: x @ y)


def _check_supported(c: CFWord) -> CFWord:
    r = reduce_word(c)
    if evaluate(r).is_infinite and r.entries != (0,):
        raise UnsupportedValue("infinite value outside the three known words", word=c.to_json())
    return r


@lru_cache(maxsize=1024)
def _transfer_matrix(entries: tuple, V, ctx: Context, check: bool) -> Mat2Poly:
    r = _check_supported(CFWord(entries))
    if r.entries == (0,):
        return _m_empty(V, ctx)
    if r.entries == (0, 0, -1):
        return one_step(-1, V, ctx)
    value = evaluate(r)
    if value.q > POLY_Q_CAP:
        raise ValueError(f"polynomial path is capped at q <= {POLY_Q_CAP}; use trace_value")
    rec = _poly_prefix(r.tail, V, ctx)[-1]
    if check:
        direct = None
        for bit in period_direct(value):
            step = one_step(bit, V, ctx)
            direct = step if direct is None else step @ direct
        same = direct == rec if ctx.exact else direct.allclose(rec)
        if not same:
            raise ConsistencyError("period product and recursion disagree", word=list(entries))
    return rec


def transfer_matrix(c: CFWord, V, ctx: Context = EXACT, check: bool = True) -> Mat2Poly:
    """Monodromy over one period, from the recursion on prefixes.

    With ``check`` the ordered product over the period word is formed as well
    and must agree.  Trailing ``-1``/``0`` entries are reduced first; the
    matrix of a reduced word shares its trace with the unreduced one.
    """
    return _transfer_matrix(c.entries, ctx.scalar(V), ctx, check)


@lru_cache(maxsize=4096)
def _discriminant(entries: tuple, V, ctx: Context) -> TracePoly:
    c = CFWord(entries)
    t = _transfer_matrix(entries, V, ctx, True).trace()
    if c.last == -1 and c.depth >= 2:
        # adj(M) shares the trace of M^-1 for unimodular M
        mats = _poly_prefix(c.tail[:-1], V, ctx)
        t_adj = (mats[-2] @ mats[-1].adj()).trace()
        if not (t_adj == t if ctx.exact else t_adj.allclose(t)):
            raise ConsistencyError("adjugate route disagrees with reduced word", word=list(entries))
    return t


def discriminant(c: CFWord, V, ctx: Context = EXACT) -> TracePoly:
    """``t_c(E) = tr M_c(E)``; depends only on the value of ``c``."""
    return _discriminant(c.entries, ctx.scalar(V), ctx)


# Numeric evaluation along the period word.

def _reduced_kind(c: CFWord):
    r = _check_supported(c)
    if r.entries == (0,):
        return "inf", None
    if r.entries == (0, 0, -1):
        return "minus", None
    return "word", period_direct(evaluate(r)).to_array()


def matrix_value(c: CFWord, V: float, E: float) -> np.ndarray:
    """Float 2x2 monodromy at one energy."""
    kind, bits = _reduced_kind(c)
    if kind == "inf":
        return np.array([[1.0, -V], [0.0, 1.0]])
    if kind == "minus":
        return np.array([[E + V, -1.0], [1.0, 0.0]])
    r0, r1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    for b in bits:
        r0, r1 = (E - V * b) * r0 - r1, r0
    return np.array([r0, r1])


def trace_of_bits(bits, V: float, E, derivative: bool = False):
    """Float trace of the product of one-step matrices over ``bits``, vectorized over ``E``."""
    E = np.asarray(E, dtype=float)
    one, zero = np.ones_like(E), np.zeros_like(E)
    a, b, cc, d = one, zero, zero, one
    da, db, dc, dd = zero, zero, zero, zero
    for bit in bits:
        x = E - V * bit
        if derivative:
            da, db, dc, dd = a + x * da - dc, b + x * db - dd, da, db
        a, b, cc, d = x * a - cc, x * b - d, a, b
    return (a + d, da + dd) if derivative else a + d


def trace_of_bits_dd(bits, V: float, E_hi, E_lo):
    """Double-double trace over ``bits`` at ``E = E_hi + E_lo``; returns ``(hi, lo)``."""
    E = (np.asarray(E_hi, float), np.asarray(E_lo, float))
    zero = _dd.from_float(np.zeros_like(E[0]))
    one = _dd.from_float(np.ones_like(E[0]))
    shifted = {0: E, 1: _dd.sub(E, _dd.from_float(np.full_like(E[0], V)))}
    a, b, cc, d = one, zero, zero, one
    for bit in bits:
        x = shifted[int(bit)]
        a, b, cc, d = _dd.sub(_dd.mul(x, a), cc), _dd.sub(_dd.mul(x, b), d), a, b
    return _dd.add(a, d)


def trace_value(c: CFWord, V: float, E, derivative: bool = False):
    """Float ``t_c(E)`` (and optionally ``t_c'(E)``), vectorized over ``E``."""
    E = np.asarray(E, dtype=float)
    kind, bits = _reduced_kind(c)
    if kind == "inf":
        t, dt = np.full_like(E, 2.0), np.zeros_like(E)
    elif kind == "minus":
        t, dt = E + V, np.ones_like(E)
    else:
        return trace_of_bits(bits, V, E, derivative)
    return (t, dt) if derivative else t


def trace_value_dd(c: CFWord, V: float, E_hi, E_lo):
    """``t_c(E)`` in double-double, ``E = E_hi + E_lo``; returns ``(hi, lo)``."""
    E = (np.asarray(E_hi, float), np.asarray(E_lo, float))
    kind, bits = _reduced_kind(c)
    if kind == "inf":
        return _dd.from_float(np.full_like(E[0], 2.0))
    if kind == "minus":
        return _dd.add(E, _dd.from_float(np.full_like(E[0], V)))
    return trace_of_bits_dd(bits, V, *E)


def _value(c: CFWord, V, ctx: Context, E):
    """Trace of ``c`` as a polynomial (``E is None``) or at ``E``."""
    if E is None:
        return discriminant(c, V, ctx)
    if ctx.exact:
        return discriminant(c, V, ctx)(ctx.scalar(E))
    return float(trace_value(c, float(V), float(E)))


def trace_step(t_c, t_cm, t_cm_minus):
    """``t_[c,m+1] = t_c t_[c,m] - t_[c,m-1]``."""
    return t_c * t_cm - t_cm_minus


def dilated_cheb(n: int, x):
    """``S_n(x)`` from ``S_{-1} = 0``, ``S_0 = 1``, ``S_n = x S_{n-1} - S_{n-2}``.

    ``x`` may be a number or a ``TracePoly``.
    """
    if n < -1:
        raise ValueError("n must be >= -1")
    prev, cur = 0, 1
    if n == -1:
        return prev
    for _ in range(n):
        prev, cur = cur, x * cur - prev
    return cur


def cheb_poly(n: int) -> TracePoly:
    """``S_n`` as an integer polynomial in its argument."""
    return TracePoly.const(0) + dilated_cheb(n, TracePoly([0, 1]))


def trace_cheb_combine(c: CFWord, m: int, l: int, V, ctx: Context = EXACT, E=None):
    """``S_{l+1}(t_c) t_[c,m-l] - S_l(t_c) t_[c,m-l-1]``; equals ``t_[c,m+1]``."""
    if not m >= l >= -1:
        raise ValueError("need m >= l >= -1")
    t_c = _value(c, V, ctx, E)
    return (dilated_cheb(l + 1, t_c) * _value(extend(c, m - l), V, ctx, E)
            - dilated_cheb(l, t_c) * _value(extend(c, m - l - 1), V, ctx, E))


def first_trace_ids(c: CFWord, V, ctx: Context = EXACT) -> dict:
    """Residuals of the three trace identities for trailing ``0``, ``-1`` and ``1``.

    ``t_[c,0] = t_{c minus last}``, ``t_[c,-1] = t_{c with last-1}`` and
    ``t_[c,1] = t_{c with last+1}``; ``c`` needs ``depth >= 1``.
    """
    e = c.entries
    cut = CFWord(e[:-1])
    dec = CFWord(e[:-1] + (e[-1] - 1,))
    inc = CFWord(e[:-1] + (e[-1] + 1,))
    return {
        "zero": discriminant(extend(c, 0), V, ctx) - discriminant(cut, V, ctx),
        "minus_one": discriminant(extend(c, -1), V, ctx) - discriminant(dec, V, ctx),
        "one": discriminant(extend(c, 1), V, ctx) - discriminant(inc, V, ctx),
    }


def fricke_vogt_residual(c: CFWord, m: int, E, V, ctx: Context = FLOAT):
    """``t_c^2 + t_[c,m]^2 + t_[c,m-1]^2 - t_c t_[c,m] t_[c,m-1] - (4 + V^2)``."""
    x = _value(c, V, ctx, E)
    y = _value(extend(c, m), V, ctx, E)
    z = _value(extend(c, m - 1), V, ctx, E)
    Vs = ctx.scalar(V)
    return x * x + y * y + z * z - x * y * z - (4 + Vs * Vs)


def ext_cheby_form2_residual(c: CFWord, m: int, xi: int, ell: int, E, V, ctx: Context = FLOAT):
    """Left minus right side of the second extended Chebyshev form.

    ``S_{m-1-l}(t_c) [t_[c,m-1] + s t_[c,1+l]]`` against
    ``[S_{m-2-l}(t_c) + s] [t_[c,m] + s t_[c,l]]`` with ``s = (-1)^xi``.
    """
    if xi not in (0, 1) or ell not in (-1, 0) or m < 1:
        raise ValueError("need xi in {0,1}, ell in {-1,0}, m >= 1")
    s = 1 if xi == 0 else -1
    t_c = _value(c, V, ctx, E)
    lhs = dilated_cheb(m - 1 - ell, t_c) * (_value(extend(c, m - 1), V, ctx, E)
                                            + s * _value(extend(c, 1 + ell), V, ctx, E))
    rhs = (dilated_cheb(m - 2 - ell, t_c) + s) * (_value(extend(c, m), V, ctx, E)
                                                 + s * _value(extend(c, ell), V, ctx, E))
    return lhs - rhs


def commutator_check(c: CFWord, m: int, n: int, E, V, ctx: Context = FLOAT):
    """``K^2 - V^2 I`` with ``K = [M_[c,m], M_c M_[c,m]^n]`` (additive commutator).

    Returns a 4-tuple ``(a, b, c, d)``; polynomials when ``E is None``.
    """
    if n < -1:
        raise ValueError("n must be >= -1")
    cm = extend(c, m)
    if E is None or ctx.exact:
        m1 = transfer_matrix(cm, V, ctx).tup()
        mc = transfer_matrix(c, V, ctx).tup()
        if E is not None:
            m1 = tuple(p(ctx.scalar(E)) for p in m1)
            mc = tuple(p(ctx.scalar(E)) for p in mc)
    else:
        m1 = tuple(matrix_value(cm, float(V), float(E)).ravel().tolist())
        mc = tuple(matrix_value(c, float(V), float(E)).ravel().tolist())
    if n == 0:
        m2 = mc
    else:
        m2 = mat_mul(mc, mat_pow(m1, n))
    ab, ba = mat_mul(m1, m2), mat_mul(m2, m1)
    k = tuple(x - y for x, y in zip(ab, ba))
    k2 = mat_mul(k, k)
    v2 = ctx.scalar(V) ** 2
    return (k2[0] - v2, k2[1], k2[2], k2[3] - v2)
