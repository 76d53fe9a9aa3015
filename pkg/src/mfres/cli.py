"""Command-line surface: coefficient caches, reports, verification suites.

Caches live under a root directory (--cache flag, then MFRES_CACHE, then
./cache) with a manifest recording kind, size, and content hash per file.
A cache entry is reused only when its precision covers the request and its
hash still matches; otherwise it is rebuilt under a per-file lock.  All
reports are JSON (CSV where noted) with fixed key order and explicit
precision metadata, so identical flags against an identical cache give
byte-identical output.
"""

import hashlib
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np
from filelock import FileLock
from mpmath import mp
from mpmath.libmp import prec_to_dps

from . import arith, dseries, halfint, lfun, modforms, resonance
from .errors import CacheError, DomainError, TableExhaustedError
from .halfint import PlusEigenbasis, PlusForm
from .modforms import Eigenform

_MANIFEST = "manifest.json"


class EnvFailure(click.ClickException):
    """Filesystem or environment problem; exits with status 3."""

    exit_code = 3


def _root(cache_opt) -> Path:
    return Path(cache_opt or os.environ.get("MFRES_CACHE") or "cache")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_manifest(root: Path) -> list:
    path = root / _MANIFEST
    if not path.exists():
        return []
    try:
        return json.loads(path.read_text())["entries"]
    except (OSError, ValueError, KeyError) as exc:
        raise CacheError(f"unreadable manifest {path}: {exc}")


def _store_manifest(root: Path, entries: list):
    entries = sorted(entries, key=lambda e: (e["kind"], e.get("weight", 0),
                                             e.get("k", 0), e["index"]))
    path = root / _MANIFEST
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps({"entries": entries}, indent=2) + "\n")
    tmp.replace(path)


def _write_entry(root: Path, name: str, text: str) -> str:
    path = root / name
    with FileLock(str(path) + ".lock"):
        tmp = path.with_suffix(".tmp")
        tmp.write_text(text)
        tmp.replace(path)
    return _sha256(path)


def _entry_fresh(root: Path, entry: dict, prec: int) -> bool:
    if entry["precision"] < prec:
        return False
    path = root / entry["file"]
    if not path.exists():
        return False
    if _sha256(path) != entry["sha256"]:
        click.echo(f"cache file {path} failed its hash check; rebuilding",
                   err=True)
        return False
    return True


def _real_str(x, bits: int) -> str:
    with mp.workprec(bits + 16):
        return mp.nstr(mp.mpf(x), prec_to_dps(bits) + 5)


def ensure_forms(root: Path, weight: int, prec: int, bits: int = 128):
    """Load the eigenform caches for one weight, rebuilding when stale.

    Returns (forms, built, files).
    """
    try:
        root.mkdir(parents=True, exist_ok=True)
        with FileLock(str(root / "manifest.lock")):
            manifest = _load_manifest(root)
            mine = sorted((e for e in manifest
                           if e["kind"] == "eigenform" and e["weight"] == weight),
                          key=lambda e: e["index"])
            expected = modforms.cusp_dim(weight)
            if mine and len(mine) == expected \
                    and all(_entry_fresh(root, e, prec) for e in mine):
                return [_read_form(root, e) for e in mine], False, \
                    [e["file"] for e in mine]

            forms = modforms.hecke_eigenforms(weight, prec, bits)
            fresh = []
            for f in forms:
                name = f"eigenform_w{weight}_{f.index}.txt"
                lines = [f"# weight={weight} prec_primes={f.prec_primes}"]
                for p in arith.primes_up_to(f.prec_primes).tolist():
                    a = f.prime_coeffs[p]
                    lines.append(f"{p},{a if f.exact else _real_str(a, f.bits)}")
                sha = _write_entry(root, name, "\n".join(lines) + "\n")
                fresh.append({"kind": "eigenform", "weight": weight,
                              "index": f.index, "precision": f.prec_primes,
                              "bits": f.bits, "exact": f.exact,
                              "file": name, "sha256": sha})
            others = [e for e in manifest
                      if not (e["kind"] == "eigenform" and e["weight"] == weight)]
            _store_manifest(root, others + fresh)
            return forms, True, [e["file"] for e in fresh]
    except OSError as exc:
        raise EnvFailure(f"cache build failed at {exc.filename or root}: "
                         f"{exc.strerror or exc}")


def _read_form(root: Path, entry: dict) -> Eigenform:
    coeffs = {}
    with open(root / entry["file"]) as fh:
        header = fh.readline()
        if not header.startswith("# weight="):
            raise CacheError(f"malformed header in {entry['file']}")
        for line in fh:
            p_str, a_str = line.rstrip("\n").split(",")
            if entry["exact"]:
                coeffs[int(p_str)] = int(a_str)
            else:
                with mp.workprec(entry["bits"] + 16):
                    coeffs[int(p_str)] = mp.mpf(a_str)
    return Eigenform(weight=entry["weight"], index=entry["index"],
                     prec_primes=entry["precision"], bits=entry["bits"],
                     exact=entry["exact"], prime_coeffs=coeffs)


def ensure_plus(root: Path, k: int, prec: int, bits: int = 128,
                lift_primes: int | None = None):
    """Load or build the plus-space eigenbasis cache for one k.

    Returns (basis, built, files).  Lifts always come from the eigenform
    cache so both artifacts stay consistent.
    """
    if lift_primes is None:
        lift_primes = max(100, math.isqrt(prec) + 1)
    try:
        root.mkdir(parents=True, exist_ok=True)
        with FileLock(str(root / "manifest.lock")):
            manifest = _load_manifest(root)
            mine = sorted((e for e in manifest
                           if e["kind"] == "plusform" and e["k"] == k),
                          key=lambda e: e["index"])
            expected = modforms.cusp_dim(2 * k)
            if mine and len(mine) == expected \
                    and all(_entry_fresh(root, e, prec) for e in mine):
                forms = [_read_plus(root, e, k) for e in mine]
                built = False
                files = [e["file"] for e in mine]
            else:
                basis = halfint.plus_space_basis(k, prec, bits=bits,
                                                 lift_primes=lift_primes)
                forms = basis.forms
                fresh = []
                for i, g in enumerate(forms):
                    name = f"plusform_k{k}_{i}.txt"
                    lines = [f"# k={k} prec={g.prec}"]
                    for n, c in g.items():
                        lines.append(f"{n},{c if g.exact else _real_str(c, bits)}")
                    sha = _write_entry(root, name, "\n".join(lines) + "\n")
                    fresh.append({"kind": "plusform", "k": k, "index": i,
                                  "precision": g.prec, "bits": bits,
                                  "exact": g.exact, "file": name, "sha256": sha})
                others = [e for e in manifest
                          if not (e["kind"] == "plusform" and e["k"] == k)]
                _store_manifest(root, others + fresh)
                built = True
                files = [e["file"] for e in fresh]
    except OSError as exc:
        raise EnvFailure(f"cache build failed at {exc.filename or root}: "
                         f"{exc.strerror or exc}")
    lifts, _, _ = ensure_forms(root, 2 * k, lift_primes, bits)
    return PlusEigenbasis(k=k, forms=forms, lifts=lifts), built, files


def _read_plus(root: Path, entry: dict, k: int) -> PlusForm:
    coeffs = [Fraction(0) if entry["exact"] else mp.mpf(0)] * entry["precision"]
    with open(root / entry["file"]) as fh:
        header = fh.readline()
        if not header.startswith("# k="):
            raise CacheError(f"malformed header in {entry['file']}")
        for line in fh:
            n_str, c_str = line.rstrip("\n").split(",")
            if entry["exact"]:
                coeffs[int(n_str)] = Fraction(c_str)
            else:
                with mp.workprec(entry["bits"] + 16):
                    coeffs[int(n_str)] = mp.mpf(c_str)
    return PlusForm(k, entry["precision"], coeffs, exact=entry["exact"])


def _forms_for_sweep(root: Path, k: int, max_abs_d: int, bits: int,
                     floor_prec: int = 64):
    """Eigenforms with prime tables sized for central sweeps up to |D|."""
    prec = max(floor_prec,
               int(max_abs_d * (k + 0.7 * bits) / (2 * math.pi) * 1.3) + 32)
    table_bits = max(128, bits + 32)
    sign = 1 if k % 2 == 0 else -1
    probe = None
    for a in range(max_abs_d, max(0, max_abs_d - 60), -1):
        if arith.is_fundamental_discriminant(sign * a):
            probe = np.array([sign * a], dtype=np.int64)
            break
    for _ in range(6):
        forms, _, _ = ensure_forms(root, 2 * k, prec, table_bits)
        try:
            if probe is not None:
                lfun.central_sweep(forms, probe, bits=min(bits, 50))
            return forms
        except TableExhaustedError as exc:
            prec = int(exc.needed * 1.15) + 16
    raise EnvFailure("could not size the coefficient table for the sweep")


def _emit(obj, out, csv_text=None):
    text = csv_text if csv_text is not None \
        else json.dumps(obj, indent=2, default=str)
    if out:
        try:
            Path(out).write_text(text + "\n")
        except OSError as exc:
            raise EnvFailure(f"cannot write {out}: {exc.strerror or exc}")
    else:
        click.echo(text)


def _parse_pair(text, name):
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise click.BadParameter(f"expected LO:HI, got {text!r}",
                                 param_hint=name)


_cache_opt = click.option("--cache", default=None,
                          help="cache root (default $MFRES_CACHE or ./cache)")
_out_opt = click.option("--out", default=None, help="write the report here")
_threads_opt = click.option("--threads", default=0, show_default=True,
                            help="worker hint; sweeps are single-process, "
                                 "so this is informational")


@click.group()
def main():
    """Coefficient tables, twisted central L-values, and resonator reports."""


@main.group()
def forms():
    """Integer-weight eigenform caches."""


@forms.command("build")
@click.option("--weight", type=int, required=True)
@click.option("--prec", type=int, required=True, help="prime table bound")
@click.option("--bits", type=int, default=128, show_default=True)
@_cache_opt
@_out_opt
@_threads_opt
def forms_build(weight, prec, bits, cache, out, threads):
    """Build (or reuse) the eigenform coefficient cache for one weight."""
    if weight % 2 or weight < 12:
        raise click.BadParameter("weight must be even and at least 12",
                                 param_hint="--weight")
    if prec < 2:
        raise click.BadParameter("prec must cover at least the prime 2",
                                 param_hint="--prec")
    built_forms, built, files = ensure_forms(_root(cache), weight, prec, bits)
    _emit({
        "kind": "eigenform", "weight": weight, "prec_primes": prec,
        "bits": bits, "built": built, "files": files,
        "a2": [str(f.a2) if f.exact else _real_str(f.a2, f.bits)
               for f in built_forms],
    }, out)


@main.group()
def plus():
    """Half-integral-weight plus-space caches."""


@plus.command("build")
@click.option("--k", type=int, required=True)
@click.option("--prec", type=int, required=True, help="coefficient table size")
@click.option("--bits", type=int, default=128, show_default=True)
@_cache_opt
@_out_opt
@_threads_opt
def plus_build(k, prec, bits, cache, out, threads):
    """Build (or reuse) the plus-space eigenbasis cache for one k."""
    if k < 2:
        raise click.BadParameter("k must be at least 2", param_hint="--k")
    if prec < 5:
        raise click.BadParameter("prec must be at least 5", param_hint="--prec")
    basis, built, files = ensure_plus(_root(cache), k, prec, bits)
    _emit({
        "kind": "plusform", "k": k, "prec": prec, "bits": bits,
        "dim": basis.dim, "built": built, "files": files,
    }, out)


@main.command()
@click.option("--k", type=int, required=True)
@click.option("--d", "disc", type=int, default=None,
              help="single discriminant (signed)")
@click.option("--range", "span", default=None,
              help="batch over fundamental |D| in LO:HI, CSV output")
@click.option("--form", "form_idx", type=int, default=0, show_default=True)
@click.option("--bits", type=int, default=128, show_default=True)
@_cache_opt
@_out_opt
@_threads_opt
def lvalue(k, disc, span, form_idx, bits, cache, out, threads):
    """Central twisted L-value, single (JSON) or batch (CSV)."""
    if (disc is None) == (span is None):
        raise click.BadParameter("give exactly one of --d or --range")
    root = _root(cache)
    if disc is not None:
        if not arith.is_fundamental_discriminant(disc):
            raise click.BadParameter(f"{disc} is not a fundamental discriminant",
                                     param_hint="--d")
        prec = max(64, int(abs(disc) * (k + 0.7 * bits) / (2 * math.pi) * 1.3) + 32)
        lv = None
        for _ in range(6):
            fs, _, _ = ensure_forms(root, 2 * k, prec, max(128, bits + 32))
            try:
                lv = lfun.central_lvalue(fs[form_idx], disc, bits=bits)
                break
            except TableExhaustedError as exc:
                prec = int(exc.needed * 1.15) + 16
        if lv is None:
            raise EnvFailure("could not size the coefficient table")
        parity = 1 if (disc > 0) == (k % 2 == 0) else -1
        _emit({
            "D": disc, "parity": parity, "L": _real_str(lv.value, bits),
            "tail_bound": float(lv.tail_bound), "T": lv.truncation,
            "bits": bits,
        }, out)
        return

    lo, hi = _parse_pair(span, "--range")
    lo, hi = int(lo), int(hi)
    if not 1 <= lo <= hi:
        raise click.BadParameter("need 1 <= LO <= HI", param_hint="--range")
    sweep_bits = bits if bits <= 50 else 46
    if sweep_bits != bits:
        click.echo(f"batch sweep runs in float64; using {sweep_bits} bits",
                   err=True)
    forms_b = _forms_for_sweep(root, k, hi, sweep_bits)
    sign = 1 if k % 2 == 0 else -1
    good = arith.enumerate_discriminants(lo - 1, hi, sign=sign)
    bad = arith.enumerate_discriminants(lo - 1, hi, sign=-sign)
    sweep = lfun.central_sweep([forms_b[form_idx]], good, bits=sweep_bits)
    rows = {}
    for d, val, tail, t in zip(good.tolist(), sweep.values[0],
                               sweep.tails, sweep.truncations):
        rows[d] = f"{d},1,{float(val)!r},{float(tail)!r},{int(t)}"
    for d in bad.tolist():
        rows[d] = f"{d},-1,0.0,0.0,0"
    lines = ["D,parity,L,tail_bound,T"]
    lines += [rows[d] for d in sorted(rows, key=lambda v: (abs(v), v))]
    _emit(None, out, csv_text="\n".join(lines))


@main.command()
@click.option("--u", type=int, required=True)
@click.option("--x", type=int, required=True)
@click.option("--parity", type=click.Choice(["0", "1"]), default="0",
              show_default=True, help="0: positive family, 1: negative")
@_out_opt
@_threads_opt
def charsum(u, x, parity, out, threads):
    """Character sum over the discriminant family, with its main term."""
    try:
        brute, main_term = resonance.family_charsum(u, x, int(parity))
    except DomainError as exc:
        raise click.BadParameter(str(exc))
    _emit({
        "u": u, "x": x, "parity": int(parity),
        "brute": brute, "main": main_term,
        "rel_gap": abs(brute - main_term) / main_term if main_term else None,
    }, out)


@main.command("dseries")
@click.option("--k", type=int, default=6, show_default=True)
@click.option("--s", type=float, required=True)
@click.option("--prec", type=int, default=2000, show_default=True)
@click.option("--nterms", type=int, default=None,
              help="direct-sum length (default prec-1)")
@click.option("--dmax", type=int, default=None,
              help="twist-sum discriminant bound (default prec-1)")
@click.option("--form", "form_idx", type=int, default=0, show_default=True)
@click.option("--bits", type=int, default=48, show_default=True)
@_cache_opt
@_out_opt
@_threads_opt
def dseries_cmd(k, s, prec, nterms, dmax, form_idx, bits, cache, out, threads):
    """Triple-evaluation agreement report for the coefficient twist series."""
    basis, _, _ = ensure_plus(_root(cache), k, prec, lift_primes=256)
    if not 0 <= form_idx < basis.dim:
        raise click.BadParameter(f"form index outside 0..{basis.dim - 1}",
                                 param_hint="--form")
    weights = [1 if i == form_idx else 0 for i in range(basis.dim)]
    try:
        triple = dseries.evaluate_triple(
            basis, weights, s, nterms or prec - 1, dmax or prec - 1, bits=bits)
    except DomainError as exc:
        raise click.BadParameter(str(exc))
    report = triple.report()
    report["k"] = k
    report["bits"] = bits
    _emit(report, out)


@main.command()
@click.option("--k", type=int, default=6, show_default=True)
@click.option("--x", type=int, required=True)
@click.option("--window", default=None, help="prime window LO:HI")
@click.option("--nmax", type=int, default=None, help="support cap override")
@click.option("--lscale", type=float, default=None, help="scale override")
@click.option("--strength", type=float, default=1.0, show_default=True)
@click.option("--top", type=int, default=20, show_default=True,
              help="how many leading discriminants to report")
@click.option("--lemma1", default="1,9", show_default=True,
              help="comma-separated u values for the character-sum section")
@click.option("--bits", type=int, default=46, show_default=True)
@click.option("--csv", "as_csv", is_flag=True, help="emit the top table as CSV")
@_cache_opt
@_out_opt
@_threads_opt
def resonate(k, x, window, nmax, lscale, strength, top, lemma1, bits, as_csv,
             cache, out, threads):
    """Full resonator experiment report over the family (X, 2X]."""
    if x < 4:
        raise click.BadParameter("x too small", param_hint="--x")
    if bits > 50:
        raise click.BadParameter("sweeps run in float64; bits must be <= 50",
                                 param_hint="--bits")
    root = _root(cache)
    overrides = {"strength": strength}
    if window is not None:
        overrides["window"] = _parse_pair(window, "--window")
    if nmax is not None:
        overrides["N"] = nmax
    if lscale is not None:
        overrides["L"] = lscale
    forms_b = _forms_for_sweep(
        root, k, 2 * x, bits,
        floor_prec=int(overrides.get("window", (0, 0))[1]) + 16)
    f1 = forms_b[0]
    res = resonance.build_resonator(x, k, f1, overrides)
    stats = resonance.moments(res, x, k)

    ds = resonance.family_discriminants(x, k)
    lead = lfun.central_sweep([f1], ds, bits=bits).values[0]
    observed = resonance.observed_shift(res, x, k, f1,
                                        precomputed=(ds, lead))["ratio"]
    r2 = resonance.resonator_values(res, ds) ** 2
    order = np.argsort(-r2, kind="stable")[:max(1, min(top, ds.size))]
    top_ds = ds[order]
    rest = lfun.central_sweep(forms_b[1:], top_ds, bits=bits).values \
        if len(forms_b) > 1 else []

    basis, _, _ = ensure_plus(root, k, 400, lift_primes=256)
    consts = resonance.waldspurger_constants(basis, lifts=forms_b)
    top_rows = []
    for j, d in enumerate(top_ds.tolist()):
        lvals = [float(lead[order[j]])] + [float(v[j]) for v in rest]
        c_low = math.sqrt(max(consts[0] * abs(d) ** (k - 0.5) * lvals[0], 0.0))
        top_rows.append({"D": int(d), "R2": float(r2[order[j]]),
                         "L": lvals, "waldspurger_c_lower": c_low})

    lemma_rows = []
    for u_str in lemma1.split(","):
        try:
            u = int(u_str)
            brute, main_term = resonance.family_charsum(u, x, k)
        except (ValueError, DomainError) as exc:
            raise click.BadParameter(f"bad u {u_str!r}: {exc}",
                                     param_hint="--lemma1")
        lemma_rows.append({"u": u, "brute": brute, "main": main_term})

    report = {
        "params": {"X": x, "k": k, "N": res.cap, "L": res.scale,
                   "window": [res.window[0], res.window[1]],
                   "strength": res.strength},
        "calR": stats.calR,
        "moment2": stats.moment2,
        "moment6": stats.moment6,
        "diagonal_main": stats.diagonal_main,
        "shift": {"predicted": resonance.predicted_shift(res, f1),
                  "observed": observed},
        "top": top_rows,
        "lemma1": lemma_rows,
        "bits": bits,
        "threshold": resonance.extreme_threshold(x),
        "degenerate": res.degenerate,
    }
    if as_csv:
        lines = ["D,R2,L,waldspurger_c_lower"]
        for row in top_rows:
            lvals = ";".join(repr(v) for v in row["L"])
            lines.append(f"{row['D']},{row['R2']!r},{lvals},"
                         f"{row['waldspurger_c_lower']!r}")
        _emit(None, out, csv_text="\n".join(lines))
    else:
        _emit(report, out)


# ---------------------------------------------------------------------------
# verification suites


def _check(name, fn):
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashed check is a failed check
        passed, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    return {"name": name, "passed": bool(passed), "detail": detail}


def _suite_plus(root, k):
    basis, _, _ = ensure_plus(root, k, 2000, lift_primes=256)

    def dim():
        want = modforms.cusp_dim(2 * k)
        return basis.dim == want, {"dim": basis.dim, "expected": want}

    def vanishing():
        bad = sum(1 for g in basis.forms for n, c in g.items()
                  if (n if k % 2 == 0 else -n) % 4 in (2, 3))
        return bad == 0, {"violations": bad}

    def shimura():
        worst = 0.0
        all_exact = True
        for g, f in zip(basis.forms, basis.lifts):
            d = g.first_admissible()
            n_max = min(4, math.isqrt((g.prec - 1) // abs(d)))
            rep = halfint.shimura_check(g, f, d, n_max)
            all_exact = all_exact and rep["exact"]
            worst = max(worst, float(rep["rel_deviation"]))
        limit = 0.0 if all_exact else 2.0 ** (-40)
        return worst <= limit, {"max_rel_deviation": worst, "exact": all_exact}

    return [_check("plus-dimension", dim),
            _check("plus-vanishing", vanishing),
            _check("shimura-relation", shimura)]


def _suite_waldspurger(root, k):
    basis, _, _ = ensure_plus(root, k, 400, lift_primes=256)
    fs, _, _ = ensure_forms(root, 2 * k, 700)

    def spread():
        g, f = basis.forms[0], fs[0]
        sign = 1 if k % 2 == 0 else -1
        ratios = []
        for n in range(1, g.prec):
            if len(ratios) >= 8:
                break
            d = sign * n
            if not arith.is_fundamental_discriminant(d) or not g.coeff(n):
                continue
            lv = lfun.central_lvalue(f, d, bits=96)
            ratios.append(float(g.coeff(n)) ** 2
                          / (n ** (k - 0.5) * float(lv.value)))
        rel = (max(ratios) - min(ratios)) / (sum(ratios) / len(ratios))
        return rel < 1e-6, {"count": len(ratios), "rel_spread": rel}

    return [_check("waldspurger-ratio", spread)]


def _suite_dseries(root, k):
    basis, _, _ = ensure_plus(root, k, 2000, lift_primes=256)

    def triple():
        weights = [1] + [0] * (basis.dim - 1)
        rep = dseries.evaluate_triple(basis, weights, float(k),
                                      1999, 1999, bits=48).report()
        return rep["passed"], rep

    return [_check("dseries-triple", triple)]


def _suite_resonance(root, k, x):
    x = x or 10**5
    fs, _, _ = ensure_forms(root, 2 * k, 1024)

    def degenerate():
        res = resonance.build_resonator(x, k, fs[0])
        st = resonance.moments(res, x, k)
        return st.moment2 == st.count and st.holder_consistent(), \
            {"count": st.count, "moment2": st.moment2}

    def diagonal():
        res = resonance.build_resonator(
            x, k, fs[0], overrides={"N": 1000, "window": (11, 53)})
        st = resonance.moments(res, x, k)
        ratio = st.moment2 / st.diagonal_main
        return 0.85 < ratio < 1.15 and st.holder_consistent(), \
            {"moment2_over_diagonal": ratio}

    return [_check("resonator-degenerate", degenerate),
            _check("resonator-diagonal", diagonal)]


def _suite_charsum(u, x, parity):
    x = x or 10**6

    def gap():
        brute, main_term = resonance.family_charsum(u, x, parity)
        if main_term:
            rel = abs(brute - main_term) / main_term
            return rel < 0.02, {"u": u, "brute": brute, "main": main_term,
                                "rel_gap": rel}
        return abs(brute) < x**0.7, {"u": u, "brute": brute,
                                     "bound": x**0.7}

    return [_check("charsum-main-term", gap)]


@main.command()
@click.option("--suite", type=click.Choice(
    ["all", "plus", "waldspurger", "dseries", "resonance", "charsum"]),
    default="all", show_default=True)
@click.option("--k", type=int, default=6, show_default=True)
@click.option("--x", type=int, default=0, help="family size (0: suite default)")
@click.option("--u", type=int, default=9, show_default=True)
@_cache_opt
@_out_opt
@_threads_opt
def verify(suite, k, x, u, cache, out, threads):
    """Run the named invariant suites; exit 0 only if every check passes."""
    root = _root(cache)
    checks = []
    if suite in ("all", "plus"):
        checks += _suite_plus(root, k)
    if suite in ("all", "waldspurger"):
        checks += _suite_waldspurger(root, k)
    if suite in ("all", "dseries"):
        checks += _suite_dseries(root, k)
    if suite in ("all", "resonance"):
        checks += _suite_resonance(root, k, x)
    if suite in ("all", "charsum"):
        checks += _suite_charsum(u, x, k % 2)
    failed = [c["name"] for c in checks if not c["passed"]]
    _emit({
        "suite": suite, "k": k,
        "checks": checks,
        "passed": not failed,
        "first_failure": failed[0] if failed else None,
    }, out)
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
