"""Quick invariant suites behind ``sturmian verify``; each check reports a margin."""

from __future__ import annotations

import math
import random
from typing import Callable

from .cf import CFStream, Convergents, evaluate, word
from .coding import (code_count, code_to_band, cumulative_S, enumerate_codes, extension_counts,
                     left_count, mu_of_code, code_of_mu, random_code)
from .errors import SturmianError
from .ids import decompose_label, gap_certificate, ids_by_band_counting, ids_by_code
from .spectra import (band_edges, charpoly_residual, classify_backward, edge_residual,
                      spectrum_cover_check, three_intersection_margin)
from .traces import EXACT, dilated_cheb, discriminant, first_trace_ids, fricke_vogt_residual
from .words import period_direct, period_recursive

STREAMS = {
    "fibonacci": CFStream.fibonacci(),
    "2112": CFStream.periodic((2, 1, 1, 2)),
    "12": CFStream.periodic((1, 2)),
}


def _record(name: str, passed: bool, margin: float) -> dict:
    return {"check": name, "passed": bool(passed), "margin": margin}


def suite_cf() -> list[dict]:
    out = []
    for name, s in STREAMS.items():
        pq = Convergents(s, 12)
        bad = sum(pq.p(k) * pq.q(k - 1) - pq.p(k - 1) * pq.q(k) != (-1) ** (k + 1)
                  for k in range(0, 13))
        out.append(_record(f"convergent determinant {name}", bad == 0, 0.0))
        v = evaluate(s.word(12))
        out.append(_record(f"evaluate matches convergent {name}", (v.p, v.q) == pq[12], 0.0))
    return out


def suite_words() -> list[dict]:
    out = []
    for name, s in STREAMS.items():
        ok = all(period_recursive(s, k) == period_direct(s.word(k)) for k in range(1, 11))
        out.append(_record(f"period recursion {name}", ok, 0.0))
    return out


def suite_traces() -> list[dict]:
    out = []
    c = word(2, 1, 1)
    ids = first_trace_ids(c, 3)
    out.append(_record("first trace identities", all(p.is_zero for p in ids.values()), 0.0))
    worst = max(abs(fricke_vogt_residual(c, m, E, 5.0)) for m in (1, 2, 3)
                for E in (-1.3, 0.4, 2.7))
    out.append(_record("Fricke-Vogt invariant", worst < 1e-8, worst))
    cheb = all(dilated_cheb(n + 1, 2) * dilated_cheb(n - 1, 2) - dilated_cheb(n, 2) ** 2 == -1
               for n in range(0, 60))
    out.append(_record("Chebyshev determinant", cheb, 0.0))
    t = discriminant(word(2, 1), 5, EXACT)
    out.append(_record("discriminant degree", t.degree == 3, 0.0))
    return out


def suite_spectra() -> list[dict]:
    out = []
    V = 5.0
    for name, s in STREAMS.items():
        c = s.word(6)
        bands = band_edges(c, V)
        res = max(edge_residual(b, V)[1] for b in bands)
        res = max(res, max(edge_residual(b, V)[0] for b in bands))
        out.append(_record(f"edge residual {name}", res < 1e-9, res))
        try:
            for b in bands:
                classify_backward(b, V)
            out.append(_record(f"backward classification {name}", True, 0.0))
        except SturmianError:
            out.append(_record(f"backward classification {name}", False, 0.0))
        m = three_intersection_margin(c, 2, V)
        out.append(_record(f"three intersection {name}", m > 0, m))
        cov = spectrum_cover_check(s, 5, V)
        out.append(_record(f"cover shrinks {name}",
                           cov["measure_k1"] < cov["measure_k"], cov["measure_k"] - cov["measure_k1"]))
    r = abs(charpoly_residual(word(2, 1, 1, 2), 5.0, 0.7, 1.3))
    out.append(_record("characteristic polynomial", r < 1e-8, r))
    return out


def suite_coding() -> list[dict]:
    out = []
    ctx = (2, 1, 1, 2, 1, 1)
    pq = Convergents(ctx, 6)
    for k in range(0, 7):
        out.append(_record(f"spectral codes count k={k}",
                           code_count(ctx, k, True) == pq.q(k), 0.0))
    cumulative_S(ctx)
    out.append(_record("counting closed form", True, 0.0))
    codes = enumerate_codes(ctx, 4, True)
    ok = all(left_count(g, 4) == i for i, g in enumerate(codes))
    out.append(_record("left_count ranks codes", ok, 0.0))
    out.append(_record("extension count", extension_counts(ctx, 0, 4, "A") == 8, 0.0))
    rt = all(code_of_mu(mu_of_code(g, 4), ctx).letters == g.letters[:5]
             for g in enumerate_codes(ctx, 5))
    out.append(_record("coefficient round trip", rt, 0.0))
    bands = [code_to_band(g, 5.0) for g in enumerate_codes(ctx, 4)]
    ordered = all(a.hi < b.lo for a, b in zip(bands, bands[1:]))
    out.append(_record("code order matches band order", ordered, 0.0))
    return out


def suite_ids() -> list[dict]:
    out = []
    s = STREAMS["fibonacci"]
    for ell in (-3, -1, 0, 1, 2, 7):
        try:
            cert = gap_certificate(ell, s, 5.0)
            out.append(_record(f"gap certificate ell={ell}", True,
                               cert.margins.get("gap_width", math.inf)))
        except SturmianError:
            out.append(_record(f"gap certificate ell={ell}", False, 0.0))
    resum = all(sum((-1) ** (j % 2) * m.get(j) * Convergents(s, 30).q(j)
                    for j in range(-1, m.last_index + 1)) == ell
                for ell in range(-100, 101) for m in [decompose_label(ell, s)])
    out.append(_record("label decomposition re-sums", resum, 0.0))
    rng = random.Random(0)
    pq = Convergents(s, 50)
    worst = 0.0
    for _ in range(20):
        g = random_code(s.prefix(45), 44, rng)
        v = ids_by_code(g, s)
        k = 8
        n = ids_by_band_counting(s, 5.0, code_to_band(g.prefix(k), 5.0).mid, k)
        worst = max(worst, abs(v.value - float(n)) / (2 / pq.q(k) + v.residual_bound))
    out.append(_record("IDS two-path agreement", worst <= 1, 1 - worst))
    return out


SUITES: dict[str, Callable[[], list[dict]]] = {
    "cf": suite_cf,
    "words": suite_words,
    "traces": suite_traces,
    "spectra": suite_spectra,
    "coding": suite_coding,
    "ids": suite_ids,
}


def run(name: str) -> dict:
    """Run one suite or ``"all"``; failures inside a check count as failed checks."""
    names = list(SUITES) if name == "all" else [name]
    results = []
    for n in names:
        try:
            checks = SUITES[n]()
        except SturmianError as exc:
            checks = [{"check": f"{n} suite", "passed": False, "margin": 0.0,
                       "error": exc.to_dict()}]
        results.extend(dict(r, suite=n) for r in checks)
    return {"suite": name, "passed": all(r["passed"] for r in results), "checks": results}
