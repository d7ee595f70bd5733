"""Command-line entry point ``sturmian``.

Every command prints (or writes with ``--out``) a document carrying
``"schema": 1``.  Failures print an error document to stderr and exit 2.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Optional

import click

from .cf import CFStream, cf_of_real, evaluate, parse_word, word
from .coding import parse_code
from .errors import SturmianError
from .ids import energy_of_code, gap_certificate, ids_by_band_counting, ids_by_code
from .spectra import band_edges, classify_backward, spectrum

SCHEMA = 1
MAX_QMAX = 512


class UsageProblem(SturmianError):
    code = "UsageError"


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def _emit(doc: dict, rows: Optional[list[dict]], fmt: str, out: Optional[str]) -> None:
    if fmt == "csv":
        if rows is None:
            raise UsageProblem("this command has no CSV form")
        buf = io.StringIO()
        fields = list(dict.fromkeys(k for r in rows for k in r))
        writer = csv.DictWriter(buf, fieldnames=fields, restval="", lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in _clean(r).items()})
        text = buf.getvalue()
    else:
        text = json.dumps(_clean(dict(doc, schema=SCHEMA)), indent=2, sort_keys=True,
                          allow_nan=False) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _word_from(cf: Optional[str], alpha: Optional[str], k: Optional[int]):
    if (cf is None) == (alpha is None):
        raise UsageProblem("give exactly one of --cf and --alpha")
    if cf is not None:
        return parse_word(cf)
    if "/" in alpha:
        x = Fraction(alpha)
        if x == 0:
            return word()
        if x == 1:
            return word(1)
        return word(*cf_of_real(x, 10**6))
    if k is None:
        raise UsageProblem("a decimal --alpha needs --k")
    return word(*cf_of_real(float(alpha), k))


def _stream_from(cf: Optional[str]) -> CFStream:
    if not cf:
        raise UsageProblem("give the periodic entry pattern with --cf, e.g. --cf 1 or --cf 2,1,1,2")
    try:
        pattern = tuple(int(t) for t in cf.strip("[]").split(",") if t.strip())
    except ValueError as exc:
        raise UsageProblem(f"cannot parse --cf {cf!r}") from exc
    return CFStream.periodic(pattern)


def _ell_range(ell: str) -> list[int]:
    try:
        if ":" in ell:
            a, b = ell.split(":")
            return list(range(int(a), int(b) + 1))
        return [int(t) for t in ell.split(",")]
    except ValueError as exc:
        raise UsageProblem(f"cannot parse --ell {ell!r}") from exc


fmt_option = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
                          show_default=True)
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None,
                          help="Write to this file instead of stdout.")


@click.group()
def cli():
    """Spectra, codes and gap labels of Sturmian Hamiltonians."""


@cli.command("spectrum")
@click.option("--cf", default=None, help="Word entries, e.g. 0,0,2,1.")
@click.option("--alpha", default=None, help="Slope as p/q, or a decimal together with --k.")
@click.option("--k", type=int, default=None, help="Expansion depth for a decimal --alpha.")
@click.option("--V", "V", type=float, required=True)
@fmt_option
@out_option
def cmd_spectrum(cf, alpha, k, V, fmt, out):
    """Bands of a periodic approximant with their backward types."""
    c = _word_from(cf, alpha, k)
    value = evaluate(c)
    if value.is_infinite or value.p == -1:
        rows = [{"index": 0, "lo": lo, "hi": hi, "type": None} for lo, hi in spectrum(c, V)]
    else:
        rows = []
        for b in band_edges(c, V):
            btype = classify_backward(b, V) if V > 4 else None
            rows.append({"index": b.index, "lo": b.lo, "hi": b.hi, "type": btype})
    doc = {"command": "spectrum", "word": c.to_json(), "value": str(value), "V": V,
           "bands": rows}
    _emit(doc, rows, fmt, out)


def farey(q_max: int) -> list[Fraction]:
    """Reduced fractions in ``[0, 1]`` with denominator at most ``q_max``, increasing."""
    a, b, c, d = 0, 1, 1, q_max
    out = [Fraction(0)]
    while c <= q_max:
        k = (q_max + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
        out.append(Fraction(a, b))
    return out


def _butterfly_rows(x: Fraction, V: float) -> list[dict]:
    c = word() if x == 0 else word(1) if x == 1 else word(*cf_of_real(x, 10**6))
    return [{"alpha": str(x), "V": V, "lo": b.lo, "hi": b.hi}
            for b in band_edges(c, V)]


@cli.command("butterfly")
@click.option("--V", "V", type=float, required=True)
@click.option("--qmax", type=int, required=True)
@click.option("--threads", type=int, default=1, show_default=True)
@fmt_option
@out_option
def cmd_butterfly(V, qmax, threads, fmt, out):
    """Bands for every reduced p/q with q <= qmax, in Farey order."""
    if V == 0:
        raise UsageProblem("V = 0 gives touching bands; choose V != 0")
    if not 1 <= qmax <= MAX_QMAX:
        raise UsageProblem(f"--qmax must lie in 1..{MAX_QMAX}")
    fractions = farey(qmax)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        chunks = list(pool.map(lambda x: _butterfly_rows(x, V), fractions))
    rows = [r for chunk in chunks for r in chunk]
    _emit({"command": "butterfly", "V": V, "qmax": qmax, "rows": rows}, rows, fmt, out)


@cli.command("ids")
@click.option("--cf", default=None, help="Periodic entry pattern of the slope, e.g. 1 or 2,1,1,2.")
@click.option("--V", "V", type=float, required=True)
@click.option("--k", type=int, required=True, help="Approximant depth for band counting.")
@click.option("--E", "energies", type=float, multiple=True, help="Energy; repeatable.")
@click.option("--grid", type=int, default=0, help="Evenly spaced energies over the spectrum.")
@click.option("--code", default=None, help="Code such as A1.G1.B; reports its IDS and energy.")
@fmt_option
@out_option
def cmd_ids(cf, V, k, energies, grid, code, fmt, out):
    """Integrated density of states by band counting, or from a code (``--k`` is then unused)."""
    stream = _stream_from(cf)
    if code:
        g = parse_code(code, stream.prefix(len(code.split(".")) - 1))
        value = ids_by_code(g, stream, g.depth - 1) if g.depth >= 1 else None
        interval = energy_of_code(g, V)
        row = {"code": str(g), "ids": None if value is None else value.value,
               "residual_bound": None if value is None else value.residual_bound,
               "E_lo": interval.lo, "E_hi": interval.hi, "width": interval.width}
        _emit({"command": "ids", "V": V, "k": k, "rows": [row]}, [row], fmt, out)
        return
    points = list(energies)
    if grid:
        bands = band_edges(stream.word(k), V)
        lo, hi = bands[0].lo - 1.0, bands[-1].hi + 1.0
        points += [lo + (hi - lo) * i / (grid - 1) for i in range(grid)] if grid > 1 else [lo]
    if not points:
        raise UsageProblem("give --E, --grid or --code")
    rows = []
    for E in points:
        try:
            n = ids_by_band_counting(stream, V, E, k)
            rows.append({"E": E, "ids": float(n), "exact": str(n), "error": None})
        except SturmianError as exc:
            rows.append({"E": E, "ids": None, "exact": None, "error": exc.code})
    _emit({"command": "ids", "V": V, "k": k, "rows": rows}, rows, fmt, out)


@cli.command("gaplabels")
@click.option("--cf", default=None, help="Periodic entry pattern of the slope.")
@click.option("--V", "V", type=float, required=True)
@click.option("--ell", default="-5:5", show_default=True, help="Range a:b or list a,b,c.")
@click.option("--k", "k_max", type=int, default=None, help="Deepest level to search.")
@click.option("--threads", type=int, default=1, show_default=True)
@fmt_option
@out_option
def cmd_gaplabels(cf, V, ell, k_max, threads, fmt, out):
    """Gap certificates for a range of labels; exits 1 if any fails."""
    stream = _stream_from(cf)
    labels = _ell_range(ell)
    stream.prefix(64)

    def one(l):
        try:
            return gap_certificate(l, stream, V, k_max).to_json()
        except SturmianError as exc:
            return {"ell": l, "error": exc.to_dict()}

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        certs = list(pool.map(one, labels))
    rows = [{"ell": c["ell"], "label": c.get("label"), "E_lo": c.get("E_lo"),
             "E_hi": c.get("E_hi"), "k": c.get("k"), "ok": "error" not in c} for c in certs]
    passed = all(r["ok"] for r in rows)
    _emit({"command": "gaplabels", "V": V, "passed": passed, "certificates": certs},
          rows, fmt, out)
    if not passed:
        sys.exit(1)


@cli.command("verify")
@click.argument("suite", default="all",
                type=click.Choice(["all", "cf", "words", "traces", "spectra", "coding", "ids"]))
@fmt_option
@out_option
def cmd_verify(suite, fmt, out):
    """Run invariant suites and report pass/fail with margins; exits 1 on failure."""
    from .verify import run

    report = run(suite)
    _emit(dict(report, command="verify"), report["checks"], fmt, out)
    if not report["passed"]:
        sys.exit(1)


def main(argv=None) -> None:
    try:
        cli.main(args=argv, standalone_mode=False)
    except SturmianError as exc:
        click.echo(json.dumps(_clean(dict(exc.to_dict(), schema=SCHEMA)), sort_keys=True,
                              default=str), err=True)
        sys.exit(2)
    except click.ClickException as exc:
        click.echo(json.dumps({"schema": SCHEMA, "error": "UsageError",
                               "message": exc.format_message(), "details": {}},
                              sort_keys=True), err=True)
        sys.exit(2)
    except (ValueError, ZeroDivisionError) as exc:
        click.echo(json.dumps({"schema": SCHEMA, "error": "InvalidInput",
                               "message": str(exc), "details": {}}, sort_keys=True), err=True)
        sys.exit(2)
