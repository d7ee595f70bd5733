"""Spectral bands of periodic approximants and their A/B hierarchy.

Bands come from eigenvalues of the Bloch matrix at theta = 0 and theta = pi.
Edges can be polished by Newton steps on ``t_c(E) = +-2`` with the trace
evaluated in double-double, which pins them well below float64 resolution
of the trace at large periods.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _dd
from .cf import CFStream, CFWord, Rational, evaluate, extend
from .errors import (CoverViolation, DegenerateSpectrum, InfiniteSlope, NoSignChange,
                     StructureViolation, TypeAmbiguous, UnsupportedValue)
from .traces import trace_of_bits, trace_of_bits_dd, trace_value, trace_value_dd
from .words import _period_of

EDGE_ABS_TOL = 1e-12
EDGE_REL_TOL = 1e-10
NEWTON_STEPS = 6
EPS_REL = 1e-11


def eps(E: float) -> float:
    """Strictness tolerance at energy ``E``."""
    return EPS_REL * max(1.0, abs(E))


@dataclass(frozen=True)
class Band:
    """Closed band ``[lo, hi]`` of the approximant ``owner``.

    ``slope`` is the sign of ``t_c'`` inside the band.  ``lo_tail`` and
    ``hi_tail`` carry the double-double correction of polished edges.
    """

    lo: float
    hi: float
    owner: CFWord
    index: int
    slope: int
    btype: str = "U"
    lo_tail: float = field(default=0.0, compare=False)
    hi_tail: float = field(default=0.0, compare=False)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def with_type(self, btype: str) -> "Band":
        return replace(self, btype=btype)

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "type": self.btype}


def _finite_value(c: CFWord) -> Rational:
    value = evaluate(c)
    if value.is_infinite:
        raise InfiniteSlope("band operations need a finite slope", word=c.to_json())
    if value.p == -1:
        raise UnsupportedValue("band operations need a slope in [0, 1]", word=c.to_json())
    return value


def bloch_matrix(c: CFWord, V: float, theta: float) -> np.ndarray:
    """Hermitian ``q x q`` Floquet-Bloch matrix ``H_c(theta)``."""
    value = _finite_value(c)
    w = _period_of(value.p, value.q).to_array().astype(float)
    q = value.q
    if q == 1:
        return np.array([[2 * math.cos(theta) + V * w[0]]], dtype=complex)
    if q == 2:
        off = 1 + np.exp(-1j * theta)
        return np.array([[V * w[0], off], [np.conj(off), V * w[1]]], dtype=complex)
    H = np.diag(V * w).astype(complex)
    i = np.arange(q - 1)
    H[i, i + 1] = 1
    H[i + 1, i] = 1
    H[0, q - 1] = np.exp(-1j * theta)
    H[q - 1, 0] = np.exp(1j * theta)
    return H


def _real_bloch(w: np.ndarray, V: float, sign: float) -> np.ndarray:
    """``H(0)`` (``sign=1``) or ``H(pi)`` (``sign=-1``) as a real symmetric matrix."""
    q = len(w)
    if q == 1:
        return np.array([[2 * sign + V * w[0]]])
    if q == 2:
        return np.array([[V * w[0], 1 + sign], [1 + sign, V * w[1]]])
    H = np.diag(V * w)
    i = np.arange(q - 1)
    H[i, i + 1] = 1.0
    H[i + 1, i] = 1.0
    H[0, q - 1] = H[q - 1, 0] = sign
    return H


def _polish(w: np.ndarray, V: float, E: np.ndarray, target: np.ndarray):
    """Newton on ``t(E) = target`` with ``t`` in double-double; returns ``(hi, lo)``."""
    x = (E.copy(), np.zeros_like(E))
    tgt = _dd.from_float(target)
    for _ in range(NEWTON_STEPS):
        f = _dd.to_float(_dd.sub(trace_of_bits_dd(w, V, *x), tgt))
        _, dt = trace_of_bits(w, V, x[0], derivative=True)
        step = np.where(dt != 0, f / np.where(dt != 0, dt, 1.0), 0.0)
        x = _dd.sub(x, _dd.from_float(step))
        if np.all(np.abs(step) <= 1e-30 * np.maximum(1.0, np.abs(x[0]))):
            break
    return x


@lru_cache(maxsize=2048)
def _edges(p: int, q: int, V: float, polish: bool):
    w = _period_of(p, q).to_array().astype(float)
    lam0 = np.linalg.eigvalsh(_real_bloch(w, V, 1.0))
    lampi = np.linalg.eigvalsh(_real_bloch(w, V, -1.0))
    i = np.arange(q)
    top_at_zero = (q - 1 - i) % 2 == 0
    hi = np.where(top_at_zero, lam0, lampi)
    lo = np.where(top_at_zero, lampi, lam0)
    tol = 1e-9 * np.maximum(1.0, np.abs(hi))
    if np.any(lo > hi + tol):
        raise DegenerateSpectrum("eigenvalues at 0 and pi do not alternate", p=p, q=q, V=V)
    if q > 1 and np.any(hi[:-1] >= lo[1:]):
        raise DegenerateSpectrum("bands overlap or touch", p=p, q=q, V=V)
    hi_target = np.where(top_at_zero, 2.0, -2.0)
    slope = np.where(top_at_zero, 1, -1)
    lo_tail = np.zeros(q)
    hi_tail = np.zeros(q)
    if polish:
        E = np.concatenate([lo, hi])
        target = np.concatenate([-hi_target, hi_target])
        h, t = _polish(w, V, E, target)
        lo, hi = h[:q], h[q:]
        lo_tail, hi_tail = t[:q], t[q:]
    return lo, hi, lo_tail, hi_tail, slope


def band_edges(c: CFWord, V: float, polish: bool = True) -> list[Band]:
    """The ``q`` bands of ``sigma_c(V)`` in ascending order."""
    return list(_band_tuple(c.entries, float(V), polish))


@lru_cache(maxsize=2048)
def _band_tuple(entries: tuple, V: float, polish: bool) -> tuple:
    c = CFWord(entries)
    value = _finite_value(c)
    if V == 0 and value.q > 1:
        raise DegenerateSpectrum("bands touch at V = 0")
    lo, hi, lo_tail, hi_tail, slope = _edges(value.p, value.q, V, polish)
    return tuple(Band(float(lo[i]), float(hi[i]), c, i, int(slope[i]), "U",
                      float(lo_tail[i]), float(hi_tail[i])) for i in range(value.q))


def spectrum(c: CFWord, V: float) -> list[tuple[float, float]]:
    """``sigma_c(V)`` as sorted intervals, including the two formal slopes.

    Infinite slope gives the whole line; slope ``-1`` gives ``[-2-V, 2-V]``.
    """
    value = evaluate(c)
    if value.is_infinite:
        return [(-math.inf, math.inf)]
    if value.p == -1:
        return [(-2.0 - V, 2.0 - V)]
    return list(_spectrum_pairs(value.p, value.q, float(V)))


@lru_cache(maxsize=2048)
def _spectrum_pairs(p: int, q: int, V: float) -> tuple:
    lo, hi, *_ = _edges(p, q, V, False)
    return tuple(zip(lo.tolist(), hi.tolist()))


def bands_inside(c: CFWord, V: float, outer, typed: bool = False) -> list[Band]:
    """Bands of ``sigma_c(V)`` strictly inside the interval ``outer``."""
    lo, hi = _pair(outer)
    bands = typed_bands(c, V) if typed else band_edges(c, V, polish=False)
    los = _lows(evaluate(c), float(V))
    i = int(np.searchsorted(los, lo, side="left"))
    j = int(np.searchsorted(los, hi, side="right"))
    return [b for b in bands[i:j] if strictly_inside(b, (lo, hi))]


def _lows(value: Rational, V: float) -> np.ndarray:
    return _edges(value.p, value.q, V, False)[0]


def refine_edge(c: CFWord, V: float, bracket: Sequence[float]) -> float:
    """Bisection for ``t_c(E) = +-2`` inside ``bracket``."""
    a, b = float(bracket[0]), float(bracket[1])
    ta, tb = float(trace_value(c, V, a)), float(trace_value(c, V, b))
    straddles = [s for s in (2.0, -2.0) if (ta - s) * (tb - s) <= 0]
    if len(straddles) != 1:
        raise NoSignChange("bracket must contain exactly one kind of edge", bracket=[a, b])
    s = straddles[0]
    fa = ta - s
    while b - a > EDGE_ABS_TOL and b - a > EDGE_REL_TOL * abs(0.5 * (a + b)):
        mid = 0.5 * (a + b)
        fm = float(trace_value(c, V, mid)) - s
        if fm == 0:
            return mid
        if (fa < 0) == (fm < 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def edge_residual(band: Band, V: float) -> tuple[float, float]:
    """``| |t(edge)| - 2 |`` at both edges, evaluated in double-double."""
    E_hi = np.array([band.lo, band.hi])
    E_lo = np.array([band.lo_tail, band.hi_tail])
    t = trace_value_dd(band.owner, V, E_hi, E_lo)
    r = np.abs(_dd.to_float(_dd.sub(t, _dd.from_float(2.0 * np.sign(t[0])))))
    return float(r[0]), float(r[1])


def charpoly_residual(c: CFWord, V: float, theta: float, E: float) -> float:
    """``det(E - H_c(theta)) - (t_c(E) - 2 cos theta)``."""
    H = bloch_matrix(c, V, theta)
    det = np.linalg.det(E * np.eye(len(H)) - H).real
    # The float trace loses ~1e-8 at q ~ 100; double-double keeps it below the det error.
    t = _dd.to_float(trace_value_dd(c, V, np.array([float(E)]), np.array([0.0])))[0]
    return float(det - (t - 2 * math.cos(theta)))


# Strict inclusion and order, witnessed with the tolerance eps.

def inside_margin(inner: tuple[float, float], outer: tuple[float, float]) -> float:
    """Distance by which ``inner`` sits inside ``outer`` (negative if it pokes out)."""
    return min(inner[0] - outer[0], outer[1] - inner[1])


def strictly_inside(inner, outer) -> bool:
    lo, hi = (inner.lo, inner.hi) if isinstance(inner, Band) else inner
    return inside_margin((lo, hi), _pair(outer)) > eps(max(abs(lo), abs(hi)))


def _pair(x) -> tuple[float, float]:
    return (x.lo, x.hi) if isinstance(x, Band) else (x[0], x[1])


def _best_container(iv: tuple[float, float], spec: list[tuple[float, float]]) -> float:
    """Largest inside-margin of ``iv`` over the intervals of ``spec``."""
    los = [s[0] for s in spec]
    j = bisect.bisect_right(los, iv[0])
    cands = [spec[k] for k in (j - 1, j) if 0 <= k < len(spec)]
    return max((inside_margin(iv, s) for s in cands), default=-math.inf)


def backward_margins(band: Band, V: float) -> tuple[float, float]:
    """Inside-margins of ``band`` in ``sigma_[c,0]`` and ``sigma_[c,-1]``."""
    c = band.owner
    iv = (band.lo, band.hi)
    return (_best_container(iv, spectrum(extend(c, 0), V)),
            _best_container(iv, spectrum(extend(c, -1), V)))


def classify_backward(band: Band, V: float) -> str:
    """``"A"`` if strictly inside ``sigma_[c,0]``, ``"B"`` if strictly inside ``sigma_[c,-1]``."""
    m_a, m_b = backward_margins(band, V)
    tol = eps(max(abs(band.lo), abs(band.hi)))
    is_a, is_b = m_a > tol, m_b > tol
    if is_a == is_b:
        raise TypeAmbiguous("band is inside both or neither parent spectrum",
                            band=[band.lo, band.hi], word=band.owner.to_json(),
                            margin_A=m_a, margin_B=m_b)
    return "A" if is_a else "B"


@lru_cache(maxsize=2048)
def _typed(entries: tuple, V: float, polish: bool) -> tuple:
    c = CFWord(entries)
    return tuple(b.with_type(classify_backward(b, V)) for b in band_edges(c, V, polish))


def typed_bands(c: CFWord, V: float, polish: bool = False) -> list[Band]:
    """``band_edges`` with every band's backward type filled in."""
    return list(_typed(c.entries, float(V), polish))


def _intersect(xs: list, ys: list) -> list[tuple[float, float]]:
    out = []
    i = j = 0
    while i < len(xs) and j < len(ys):
        lo, hi = max(xs[i][0], ys[j][0]), min(xs[i][1], ys[j][1])
        if lo <= hi:
            out.append((lo, hi))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return out


def _distance(xs: list, ys: list) -> float:
    """Distance between two sorted interval unions; ``inf`` if either is empty."""
    if not xs or not ys:
        return math.inf
    if _intersect(xs, ys):
        return 0.0
    los = [y[0] for y in ys]
    best = math.inf
    for lo, hi in xs:
        j = bisect.bisect_left(los, lo)
        if j < len(ys):
            best = min(best, ys[j][0] - hi)
        if j > 0:
            best = min(best, lo - ys[j - 1][1])
    return best


def three_intersection_margin(c: CFWord, m: int, V: float) -> float:
    """Separation witnessing ``sigma_c ∩ sigma_[c,m] ∩ sigma_[c,m-1] = ∅``.

    The largest distance from a pairwise intersection to the third set;
    positive exactly when the triple intersection is empty.
    """
    s = [spectrum(c, V), spectrum(extend(c, m), V), spectrum(extend(c, m - 1), V)]
    return max(_distance(_intersect(s[i], s[j]), s[k]) for i, j, k in ((0, 1, 2), (0, 2, 1), (1, 2, 0)))


def three_intersection_check(c: CFWord, m: int, V: float) -> bool:
    """True iff the three spectra have empty common intersection beyond tolerance."""
    scale = max(abs(x) for iv in spectrum(c, V) for x in iv)
    return three_intersection_margin(c, m, V) > eps(scale)


def _ordered_margin(bands: list) -> float:
    """Smallest gap between consecutive intervals; must be positive for strict order."""
    return min((b[0] - a[1] for a, b in zip(map(_pair, bands), map(_pair, bands[1:]))), default=math.inf)


def _inner_b(band: Band, m: int, n: int, V: float, inner_a: list[Band]) -> list[Band]:
    """The B-children ``I^j_[c,m,n]`` of ``band``, nested along ``n``."""
    c = band.owner
    cmn = extend(extend(c, m), n)
    kids = bands_inside(cmn, V, band)
    if n == 1:
        outer = [band]
        kids = [b for b in kids if not any(strictly_inside(b, a) for a in inner_a)]
    else:
        outer = _inner_b(band, m, n - 1, V, inner_a)
        kids = [b for b in kids if any(strictly_inside(b, o) for o in outer)]
        for j, o in enumerate(outer):
            inside = [b for b in kids if strictly_inside(b, o)]
            if len(inside) != 1:
                raise StructureViolation("B-child is not nested uniquely", n=n, j=j + 1, found=len(inside))
    return kids


def forward_structure(band: Band, m: int, n: int, V: float) -> dict:
    """Children of ``band`` in ``sigma_[c,m]`` and ``sigma_[c,m,n]`` with strict interlacing.

    Returns ``inner_A`` (``M`` bands), ``inner_B`` (``M + 1`` bands) and the
    smallest separation ``margin`` in the alternating chain.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    btype = band.btype if band.btype in ("A", "B") else classify_backward(band, V)
    M = m - 1 if btype == "A" else m
    c = band.owner
    inner_a = bands_inside(extend(c, m), V, band, typed=True)
    if len(inner_a) != M:
        raise StructureViolation("wrong number of A-children", expected=M, found=len(inner_a),
                                 band=[band.lo, band.hi], m=m)
    inner_b = _inner_b(band, m, n, V, inner_a)
    if len(inner_b) != M + 1:
        raise StructureViolation("wrong number of B-children", expected=M + 1, found=len(inner_b),
                                 band=[band.lo, band.hi], m=m, n=n)
    for b in inner_a:
        if b.btype != "A":
            raise StructureViolation("A-child has type B", band=[b.lo, b.hi])
    typed_b = []
    for b in inner_b:
        t = classify_backward(b, V)
        if t != "B":
            raise StructureViolation("B-child has type A", band=[b.lo, b.hi])
        typed_b.append(b.with_type(t))
    chain = [x for pair in zip(typed_b, inner_a) for x in pair] + [typed_b[-1]]
    margin = _ordered_margin(chain)
    scale = max(abs(band.lo), abs(band.hi))
    if not margin > eps(scale):
        raise StructureViolation("interlacing is not strict", margin=margin)
    return {"type": btype, "M": M, "inner_A": inner_a, "inner_B": typed_b, "margin": margin}


def tower_chain(band: Band, steps: int, V: float) -> list[Band]:
    """Follow the unique band of ``sigma_[c',j+1]`` strictly inside a type-B band of ``sigma_[c',j]``."""
    chain = [band]
    for _ in range(steps):
        cur = chain[-1]
        e = cur.owner.entries
        nxt = CFWord(e[:-1] + (e[-1] + 1,))
        inside = bands_inside(nxt, V, cur)
        if len(inside) != 1:
            raise StructureViolation("tower step is not unique", found=len(inside), word=list(e))
        chain.append(inside[0].with_type(classify_backward(inside[0], V)))
    return chain


def _union(intervals: list) -> list[tuple[float, float]]:
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [tuple(x) for x in out]


def cover(c: CFWord, V: float) -> list[tuple[float, float]]:
    """``Lambda = sigma_c ∪ sigma_[c,1]`` as a merged interval union."""
    return _union(spectrum(c, V) + spectrum(extend(c, 1), V))


def measure(intervals: list) -> float:
    return float(sum(hi - lo for lo, hi in intervals))


def spectrum_cover_check(stream: CFStream, k: int, V: float) -> dict:
    """Check ``Lambda_{k+1} ⊆ Lambda_k`` and report both measures."""
    outer = cover(stream.word(k), V)
    inner = cover(stream.word(k + 1), V)
    los = [o[0] for o in outer]
    margin = math.inf
    for lo, hi in inner:
        j = bisect.bisect_right(los, lo + eps(lo)) - 1
        m = inside_margin((lo, hi), outer[j]) if j >= 0 else -math.inf
        if m < -eps(max(abs(lo), abs(hi))):
            raise CoverViolation("deeper cover pokes out", k=k, interval=[lo, hi], margin=m)
        margin = min(margin, m)
    return {"k": k, "contained": True, "margin": margin,
            "measure_k": measure(outer), "measure_k1": measure(inner)}
