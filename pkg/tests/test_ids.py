from fractions import Fraction
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from sturmian.cf import CFStream, Convergents
from sturmian.coding import MuSeq, code_to_band, enumerate_codes, parse_code, random_code
from sturmian.errors import CertificateFailure, EdgeCollision
from sturmian.ids import (decompose_label, energy_of_code, gap_certificate, ids_by_band_counting,
                          ids_by_code, ids_of_mu, partner_mu, series_depth, series_residual,
                          stream_alpha)
from sturmian.spectra import band_edges

FIB = CFStream.fibonacci()
S2112 = CFStream.periodic((2, 1, 1, 2))
GOLDEN = (math.sqrt(5) - 1) / 2


def resum(mu, pq):
    return sum((-1) ** (j % 2) * mu.get(j) * pq.q(j) for j in range(-1, mu.last_index + 1))


def test_band_counting_extremes():
    bands = band_edges(FIB.word(6), 5.0)
    assert ids_by_band_counting(FIB, 5.0, bands[0].lo - 1, 6) == 0
    assert ids_by_band_counting(FIB, 5.0, bands[-1].hi + 1, 6) == 1
    with pytest.raises(EdgeCollision):
        ids_by_band_counting(FIB, 5.0, bands[2].hi, 6)


def test_band_counting_example():
    g = parse_code("G2.B.G2.B.G2", (2, 1, 1, 2))
    gap = code_to_band(g, 5.0)
    assert ids_by_band_counting(S2112, 5.0, gap.mid, 4) == Fraction(12, 13)


@pytest.mark.parametrize("stream", [FIB, S2112])
def test_band_counting_monotone(stream):
    bands = band_edges(stream.word(7), 5.0)
    grid = sorted({b.mid for b in bands} | {0.5 * (a.hi + b.lo) for a, b in zip(bands, bands[1:])})
    values = [ids_by_band_counting(stream, 5.0, E, 7) for E in grid]
    assert values == sorted(values)


def test_stream_alpha():
    alpha, pq = stream_alpha(FIB)
    assert pq.q(pq.k_max) > 10**20
    assert abs(float(alpha) - GOLDEN) < 1e-16


def test_series_depth_and_residual():
    _, pq = stream_alpha(FIB)
    K = series_depth(pq)
    assert K == 40 or pq.c(K + 2) / pq.q(K + 1) < 1e-10
    assert all(pq.c(j + 2) / pq.q(j + 1) >= 1e-10 for j in range(K))
    assert 0 < series_residual(pq, K) < 1e-8
    assert series_residual(pq, 3) > series_residual(pq, 10)


def test_ids_of_mu_examples():
    assert ids_of_mu(MuSeq((0, 0)), FIB).value == 0
    v = ids_of_mu(MuSeq((1, -1)), FIB)
    assert abs(v.value - (1 - GOLDEN)) < 1e-12


def test_ids_by_code_example():
    g = parse_code("G2.B.G2.B.G2.B.G2.B.G2.B", S2112.prefix(9))
    v = ids_by_code(g, S2112, 8)
    assert v.k_used == 8 and v.residual_bound > 0
    # 12/13 is the depth-4 count, so it only pins the value to 2/q_4.
    assert abs(v.value - 12 / 13) <= 2 / 13 + v.residual_bound
    n = ids_by_band_counting(S2112, 5.0, code_to_band(g.prefix(8), 5.0).mid, 8)
    assert n == Fraction(180, 194)
    assert abs(v.value - float(n)) <= 2 / 194 + v.residual_bound


@pytest.mark.parametrize("stream", [FIB, S2112])
def test_decompose_label_examples(stream):
    assert decompose_label(-1, stream).values == (1, -1)
    c1 = stream.entry(1)
    for ell in range(0, c1):
        assert decompose_label(ell, stream).values == (0, ell)


def test_decompose_label_seven():
    mu = decompose_label(7, FIB)
    assert resum(mu, Convergents(FIB, 20)) == 7


@pytest.mark.parametrize("stream", [FIB, S2112])
def test_decompose_label_resums(stream):
    pq = Convergents(stream, 40)
    for ell in range(-500, 501):
        mu = decompose_label(ell, stream)
        assert resum(mu, pq) == ell
        mu.validate(stream.prefix(mu.last_index + 2))
        if ell not in (-1, 0, 1):
            assert mu.get(mu.last_index) >= 1


def test_partner_mu_special_label():
    mu_p = partner_mu(MuSeq((1, -1)), S2112, 4)
    assert mu_p.values[:2] == (0, S2112.entry(1) - 1)
    assert mu_p.get(0) == S2112.entry(1) - 1 and mu_p.get(1) == 0 and mu_p.get(2) == S2112.entry(3)


def test_partner_mu_general():
    mu = decompose_label(7, FIB)
    k0 = mu.last_index
    mu_p = partner_mu(mu, FIB, k0 + 6)
    assert mu_p.get(k0) == mu.get(k0) - 1
    assert [mu_p.get(k0 + i) for i in range(1, 5)] == [FIB.entry(k0 + 2), 0, FIB.entry(k0 + 4), 0]


@pytest.mark.parametrize("ell", [1, -1, 2, 7])
def test_gap_certificate_fibonacci(ell):
    alpha, _ = stream_alpha(FIB)
    cert = gap_certificate(ell, FIB, 5.0)
    assert cert.E_lo < cert.E_hi
    assert abs(cert.label - float((ell * alpha) % 1)) < 1e-15
    assert cert.margins["ids_error"] <= cert.margins["residual_bound"] + 1e-8


def test_gap_certificate_labels():
    assert abs(gap_certificate(1, FIB, 5.0).label - GOLDEN) < 1e-12
    assert abs(gap_certificate(-1, FIB, 5.0).label - (1 - GOLDEN)) < 1e-12


def test_gap_certificate_zero():
    cert = gap_certificate(0, FIB, 5.0)
    assert cert.E_lo == -math.inf and cert.label == 0
    assert cert.to_json()["E_lo"] is None


def test_gap_certificate_rejects_small_V():
    with pytest.raises(ValueError):
        gap_certificate(1, FIB, 3.0)


def test_gap_certificate_fails_when_too_shallow():
    with pytest.raises(CertificateFailure):
        gap_certificate(7, FIB, 5.0, k_max=1)


def test_certificate_json_fields():
    doc = gap_certificate(3, FIB, 5.0).to_json()
    assert {"ell", "label", "E_lo", "E_hi", "ids", "k", "margins"} <= set(doc)


def test_energy_of_code_examples():
    g = parse_code(".".join(["A1", "G1", "B", "A1", "G1", "B", "A1", "G1"]), FIB.prefix(7))
    iv = energy_of_code(g, 5.0)
    assert -2 <= iv.lo < iv.hi <= 2
    assert all(b <= a for a, b in zip(iv.widths, iv.widths[1:]))
    root = energy_of_code(parse_code("G2", ()), 5.0)
    assert (root.lo, root.hi) == (3.0, 7.0) and root.width == 4.0


@given(st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_energy_widths_non_increasing(seed):
    g = random_code(FIB.prefix(12), 12, random.Random(seed))
    w = energy_of_code(g, 5.0).widths
    assert all(b <= a for a, b in zip(w, w[1:]))


def test_energy_order_isomorphism():
    codes = enumerate_codes(S2112.prefix(6), 6)
    ivs = [energy_of_code(g, 5.0) for g in codes]
    assert all(a.hi < b.lo for a, b in zip(ivs, ivs[1:]))


@pytest.mark.parametrize("stream", [FIB, S2112])
def test_two_path_agreement(stream):
    rng = random.Random(7)
    _, pq = stream_alpha(stream)
    for _ in range(20):
        g = random_code(stream.prefix(45), 44, rng)
        v = ids_by_code(g, stream)
        for k in (3, 6, 9):
            n = ids_by_band_counting(stream, 5.0, code_to_band(g.prefix(k), 5.0).mid, k)
            assert abs(v.value - float(n)) <= 2 / pq.q(k) + v.residual_bound
