"""Integrated density of states: band counting, the coefficient series, and gap labels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .cf import CFStream, Convergents
from .coding import Code, MuSeq, code_of_mu, code_path, level_bands, mu_of_code
from .errors import (CertificateFailure, EdgeCollision, InsufficientDepth, StructureViolation)
from .spectra import band_edges, eps

ALPHA_DENOMINATOR = 10**20
TAIL_DENOMINATOR = 10**16
SERIES_CUTOFF = 1e-10
SERIES_MAX_K = 40
IDS_TOL = 1e-8


def _convergents_until(stream: CFStream, q_min: int) -> Convergents:
    k = 1
    while True:
        pq = Convergents(stream, k)
        if pq.q(k) > q_min:
            return pq
        k *= 2


def stream_alpha(stream: CFStream) -> tuple[Fraction, Convergents]:
    """A convergent of the slope with denominator above 1e20, and the table it came from."""
    pq = _convergents_until(stream, ALPHA_DENOMINATOR)
    return Fraction(pq.p(pq.k_max), pq.q(pq.k_max)), pq


def ids_by_band_counting(stream: CFStream, V: float, E: float, k: int) -> Fraction:
    """Fraction of the ``q_k`` bands of the level-``k`` approximant lying strictly left of ``E``."""
    if V == 0 or k < 1:
        raise ValueError("need V != 0 and k >= 1")
    bands = band_edges(stream.word(k), V)
    tol = eps(E)
    for b in bands:
        if abs(E - b.lo) <= tol or abs(E - b.hi) <= tol:
            raise EdgeCollision("energy sits on a band edge", E=E, edge=[b.lo, b.hi], k=k)
    return Fraction(sum(b.hi < E for b in bands), len(bands))


@dataclass(frozen=True)
class IDSValue:
    value: float
    k_used: int
    residual_bound: float
    exact: Fraction = field(compare=False, repr=False, default=Fraction(0))

    def to_json(self) -> dict:
        return {"value": self.value, "k_used": self.k_used, "residual_bound": self.residual_bound}


def series_depth(pq: Convergents) -> int:
    """Truncation index: first ``K`` with ``c_{K+2}/q_{K+1} < 1e-10``, capped at 40."""
    K = 0
    while K < SERIES_MAX_K and pq.c(K + 2) / pq.q(K + 1) >= SERIES_CUTOFF:
        K += 1
    return K


def series_residual(pq: Convergents, K: int) -> float:
    """Bound on the terms past ``K``: ``sum_{j>K} c_{j+1}/q_{j+1}``, closed by ``4/q_J``."""
    total = 0.0
    j = K + 1
    while pq.q(j) <= TAIL_DENOMINATOR:
        total += pq.c(j + 1) / pq.q(j + 1)
        j += 1
    return total + 4.0 / pq.q(j)


def ids_of_mu(mu: MuSeq, stream: CFStream, K: Optional[int] = None) -> IDSValue:
    """Partial sum of ``(-1)^k mu_k (q_k alpha - p_k)`` through ``K``."""
    alpha, pq = stream_alpha(stream)
    K = mu.last_index if K is None else K
    total = Fraction(0)
    weight = 0
    for k in range(-1, K + 1):
        m = mu.get(k)
        total += (-1) ** (k % 2) * m * (pq.q(k) * alpha - pq.p(k))
        weight += abs(m) * pq.q(k)
    # alpha is a convergent, off by less than 1/q^2.
    alpha_err = weight / float(pq.q(pq.k_max)) ** 2
    residual = series_residual(pq, K) + alpha_err
    return IDSValue(float(total), K, residual, total)


def ids_by_code(code: Code, stream: CFStream, K: Optional[int] = None) -> IDSValue:
    """IDS at the energy of ``code`` from its coefficient series.

    ``K`` defaults to the series truncation rule, limited by the code's depth.
    """
    _, pq = stream_alpha(stream)
    if tuple(stream.prefix(len(code.context))) != code.context:
        raise ValueError("code context does not match the stream")
    limit = code.depth - 1
    if limit < 0:
        raise InsufficientDepth("code needs depth >= 1", depth=code.depth)
    K = min(series_depth(pq), limit) if K is None else K
    if K > limit:
        raise InsufficientDepth("code too short for the requested K", depth=code.depth, K=K)
    return ids_of_mu(mu_of_code(code, K), stream, K)


def _source_convergents(source: Union[Convergents, CFStream], ell: int) -> Convergents:
    if isinstance(source, Convergents):
        return source
    k = 2
    while Convergents(source, k).q(k - 2) <= abs(ell):
        k += 2
    return Convergents(source, k)


def decompose_label(ell: int, source: Union[Convergents, CFStream]) -> MuSeq:
    """Admissible coefficients with ``sum (-1)^j mu_j q_j = ell``.

    Positive remainders take the largest even index ``i`` with ``q_{i-1} <= ell``,
    negative ones the largest odd index with ``-q_{i+1} <= ell``.
    """
    pq = _source_convergents(source, ell)
    mu: dict[int, int] = {}
    rem = ell
    while rem != 0:
        if rem == -1:
            mu[-1], mu[0] = 1, -1
            break
        if 0 <= rem < pq.c(1):
            mu[0] = rem
            break
        i = 2 if rem > 0 else 1
        while True:
            if i + 1 > pq.k_max:
                raise InsufficientDepth("not enough convergents", ell=ell, k_max=pq.k_max)
            if (rem > 0 and rem < pq.q(i + 1)) or (rem < 0 and rem >= -pq.q(i + 1)):
                break
            i += 2
        if rem > 0:
            mu[i] = (rem - pq.q(i - 1)) // pq.q(i) + 1
            rem -= mu[i] * pq.q(i)
        else:
            mu[i] = -((rem + pq.q(i - 1)) // pq.q(i))
            rem += mu[i] * pq.q(i)
    top = max(mu, default=0)
    seq = MuSeq(tuple(mu.get(j, 0) for j in range(-1, max(top, 0) + 1)))
    if sum((-1) ** (j % 2) * seq.get(j) * pq.q(j) for j in range(-1, seq.last_index + 1)) != ell:
        raise StructureViolation("decomposition does not re-sum", ell=ell, mu=seq.to_json())
    return seq.validate(pq.entries[1:])


def partner_mu(mu: MuSeq, stream: CFStream, depth: int) -> MuSeq:
    """Coefficients of the other gap edge, written out through ``depth``.

    The last nonzero coefficient drops by one and the tail alternates
    ``c_{k0+2}, 0, c_{k0+4}, 0, ...``; the label ``-1`` starts from ``(0, c_1 - 1)``.
    """
    if mu.get(-1) == 1 and mu.last_index == 0:
        head, pivot = [0, stream.entry(1) - 1], -1
    else:
        pivot = max(j for j in range(-1, mu.last_index + 1) if mu.get(j))
        head = [mu.get(j) for j in range(-1, pivot + 1)]
        head[-1] -= 1
    start = len(head) - 1
    tail = [stream.entry(j + 1) if (j - pivot) % 2 else 0 for j in range(start, depth + 1)]
    return MuSeq(tuple(head + tail))


@dataclass
class GapCertificate:
    ell: int
    label: float
    mu: MuSeq
    mu_prime: MuSeq
    E_lo: float
    E_hi: float
    ids: tuple[float, float]
    k: int
    margins: dict
    codes: tuple[str, str] = ("", "")

    def to_json(self) -> dict:
        return {"ell": self.ell, "label": self.label,
                "E_lo": None if math.isinf(self.E_lo) else self.E_lo,
                "E_hi": self.E_hi, "ids": list(self.ids), "k": self.k,
                "mu": self.mu.to_json(), "mu_prime": self.mu_prime.to_json(),
                "codes": list(self.codes), "margins": self.margins}


def _label(ell: int, alpha: Fraction) -> Fraction:
    return (ell * alpha) % 1


def _trivial_certificate(stream: CFStream, V: float, k: int) -> GapCertificate:
    mu = MuSeq((0, 0))
    code = code_of_mu(mu, stream.prefix(k), k)
    band = code_path(code, V)[-1]
    if band.lo != min(b.lo for b in level_bands(code.word(), V)):
        raise CertificateFailure("leftmost code is not the leftmost band", ell=0)
    return GapCertificate(0, 0.0, mu, mu, -math.inf, band.lo, (0.0, 0.0), k,
                          {"gap_width": math.inf}, (str(code), str(code)))


def gap_certificate(ell: int, stream: CFStream, V: float,
                    k_max: Optional[int] = None) -> GapCertificate:
    """Certify an open spectral gap whose IDS equals ``ell * alpha mod 1``.

    Both edge codes are followed down the level covers until their bands are
    neighbours; the open interval between those bands holds no spectrum.
    """
    V = float(V)
    if V <= 4:
        raise ValueError("certificates need V > 4")
    alpha, pq_alpha = stream_alpha(stream)
    if ell == 0:
        return _trivial_certificate(stream, V, 2 if k_max is None else k_max)
    mu = decompose_label(ell, stream)
    k0 = mu.last_index
    k_max = k0 + 8 if k_max is None else k_max
    K_series = series_depth(pq_alpha)
    mu_p = partner_mu(mu, stream, K_series + 2)
    context = stream.prefix(K_series + 2)
    codes = (code_of_mu(mu, context, K_series + 1), code_of_mu(mu_p, context, K_series + 1))

    target = _label(ell, alpha)
    values = [ids_by_code(g, stream, K_series) for g in codes]
    errors = [abs(float(v.exact - target)) for v in values]
    for v, err in zip(values, errors):
        if err > v.residual_bound + IDS_TOL:
            raise CertificateFailure("series value differs from the label", ell=ell,
                                     value=v.value, label=float(target), error=err)

    for k in range(max(k0 + 1, 1), k_max + 1):
        paths = [code_path(g.prefix(k), V)[-1] for g in codes]
        if paths[0].lo == paths[1].lo:
            continue
        left, right = sorted(paths, key=lambda b: b.lo)
        level = level_bands(codes[0].word(k), V)
        pos = [i for i, b in enumerate(level) if b.lo in (left.lo, right.lo)]
        if len(pos) == 2 and pos[1] - pos[0] == 1 and right.lo - left.hi > eps(right.lo):
            break
    else:
        raise CertificateFailure("edge codes never became neighbouring bands", ell=ell,
                                 k_max=k_max)
    gap = (left.hi, right.lo)
    count = ids_by_band_counting(stream, V, 0.5 * (gap[0] + gap[1]), k)
    count_err = abs(float(count - target))
    if count_err > 2.0 / pq_alpha.q(k) + IDS_TOL:
        raise CertificateFailure("band count inside the gap disagrees with the label",
                                 ell=ell, count=str(count), label=float(target), k=k)
    margins = {"gap_width": gap[1] - gap[0],
               "ids_error": max(errors),
               "residual_bound": max(v.residual_bound for v in values),
               "count_error": count_err}
    return GapCertificate(ell, float(target), mu, mu_p, gap[0], gap[1],
                          (values[0].value, values[1].value), k, margins,
                          (str(codes[0].prefix(k)), str(codes[1].prefix(k))))


@dataclass(frozen=True)
class EnergyInterval:
    lo: float
    hi: float
    depth: int
    widths: tuple[float, ...]

    @property
    def width(self) -> float:
        return self.hi - self.lo


def energy_of_code(code: Code, V: float, depth: Optional[int] = None) -> EnergyInterval:
    """The nested band of ``code|[0, depth]``; the widths of all levels are kept."""
    depth = code.depth if depth is None else depth
    path = code_path(code.prefix(depth), V)
    widths = tuple(b.width for b in path)
    for outer, inner in zip(path, path[1:]):
        tol = eps(max(abs(outer.lo), abs(outer.hi)))
        if inner.lo < outer.lo - tol or inner.hi > outer.hi + tol:
            raise StructureViolation("bands of consecutive prefixes are not nested",
                                     code=str(code))
    return EnergyInterval(path[-1].lo, path[-1].hi, depth, widths)
