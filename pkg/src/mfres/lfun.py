"""Analytic values attached to the coefficient tables.

Twisted central L-values go through an exact incomplete-gamma smoothing of
the Dirichlet series: for even functional-equation sign the central value
is literally 2 sum a(n) chi_D(n) n^(-k) Q(k, 2 pi n / |D|) with
Q(k, y) = e^(-y) sum_{j<k} y^j / j!, so the only error is the certified
truncation tail.  Odd sign forces the value to vanish and 0 is returned
exactly.  A float64 batch sweep covers statistical experiments over many
discriminants; the scalar path carries an arbitrary mantissa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
import numpy as np

from . import arith, modforms
from .errors import DomainError, PrecisionError, TableExhaustedError
from .halfint import PlusForm
from .modforms import Eigenform


@dataclass
class LValue:
    """A computed L-value with its certified truncation error."""

    value: object
    tail_bound: float
    truncation: int
    bits: int
    degraded: bool = False
    flags: tuple = ()


def regularized_upper_gamma(k: int, y):
    """Q(k, y) = e^(-y) sum_{j=0}^{k-1} y^j / j!  (scalar, type-preserving)."""
    if k < 1:
        raise DomainError("k must be a positive integer")
    if isinstance(y, (int, float)):
        if y < 0:
            raise DomainError("y must be >= 0")
        term, acc = 1.0, 1.0
        for j in range(1, k):
            term *= y / j
            acc += term
        # rounding can overshoot 1 by an ulp near y = 0
        return min(1.0, math.exp(-y) * acc)
    term, acc = mp.mpf(1), mp.mpf(1)
    for j in range(1, k):
        term *= y / j
        acc += term
    return min(mp.mpf(1), mp.exp(-y) * acc)


def afe_window_np(k: int, y: np.ndarray) -> np.ndarray:
    """Vectorized Q(k, y) for float64 arrays."""
    acc = np.ones_like(y)
    term = np.ones_like(y)
    for j in range(1, k):
        term *= y / j
        acc += term
    return np.minimum(np.exp(-y) * acc, 1.0)


def _afe_tail(k: int, abs_d: int, t: int):
    """Rigorous bound on 2 sum_{n>t} |a(n) chi(n)| n^(-k) Q(k, 2 pi n/|D|).

    Uses d(n) <= 2 sqrt(n), so each term is at most 4 Q(k, 2 pi n / |D|),
    and sum_{n>t} Q(k, c n) <= (1/c) sum_{j<k} Q(j+1, c t) <= (k/c) Q(k, c t).
    """
    y = 2 * mp.pi * t / abs_d
    return 4 * (abs_d / (2 * mp.pi)) * k * regularized_upper_gamma(k, y)


_COEFF_CACHE: dict[tuple, list] = {}


def _coeff_table(f: Eigenform, limit: int, bits: int) -> list:
    """a(n) for n <= limit by multiplicative sieve (exact ints or mpf).

    The numeric path computes at bits + 32 regardless of ambient context,
    and the cache key carries that, so tables never silently downgrade.
    """
    key = (f.weight, f.index, f.prec_primes, f.exact,
           0 if f.exact else bits, limit)
    hit = _COEFF_CACHE.get(key)
    if hit is not None:
        return hit
    if limit > f.prec_primes:
        raise TableExhaustedError(
            f"eigenform table stops at {f.prec_primes}, truncation needs {limit}",
            needed=limit,
        )

    def build():
        one = 1 if f.exact else mp.mpf(1)
        a = [None] * (limit + 1)
        a[1] = one
        spf = arith.smallest_prime_factors(limit)
        for p in arith.primes_up_to(limit).tolist():
            ap = f.prime_coeffs[p]
            a[p] = ap
            pw = p ** (f.weight - 1)
            prev, cur, pe = one, ap, p
            while pe * p <= limit:
                pe *= p
                prev, cur = cur, ap * cur - pw * prev
                a[pe] = cur
        for n in range(2, limit + 1):
            if a[n] is not None:
                continue
            p = int(spf[n])
            m, pe = n, 1
            while m % p == 0:
                m //= p
                pe *= p
            a[n] = a[pe] * a[m]
        return a

    if f.exact:
        a = build()
    else:
        with mp.workprec(bits + 32):
            a = build()
    if len(_COEFF_CACHE) > 16:
        _COEFF_CACHE.clear()
    _COEFF_CACHE[key] = a
    return a


def functional_sign(f: Eigenform, d: int) -> int:
    """(-1)^k chi_D(-1): the sign of the twisted functional equation."""
    k = f.weight // 2
    return (1 if k % 2 == 0 else -1) * (1 if d > 0 else -1)


def central_lvalue(f: Eigenform, d: int, bits: int = 128,
                   t_override: int | None = None) -> LValue:
    """L(f, chi_D, k) at the central point, exact-tail AFE.

    Odd functional-equation sign returns exactly 0.  Otherwise the
    truncation grows from a heuristic start until the certified tail drops
    below 2^(-bits/2).
    """
    if not arith.is_fundamental_discriminant(d):
        raise DomainError(f"{d} is not a fundamental discriminant")
    k = f.weight // 2
    if functional_sign(f, d) == -1:
        return LValue(mp.mpf(0), 0.0, 0, bits)
    abs_d = abs(d)
    target = mp.mpf(2) ** (-bits // 2)
    with mp.workprec(bits + 32):
        if t_override is not None:
            t = t_override
        else:
            t = max(8, math.ceil(abs_d * (k + 0.7 * bits) / (2 * math.pi)))
            while _afe_tail(k, abs_d, t) >= target:
                t = t + 8 + t // 8
        tail = _afe_tail(k, abs_d, t)
        if t_override is None and tail >= target:
            raise PrecisionError("could not certify the requested tail bound")
        a = _coeff_table(f, t, bits)
        total = mp.mpf(0)
        for n in range(1, t + 1):
            ch = arith.kronecker(d, n)
            if ch == 0:
                continue
            an = a[n]
            if f.exact:
                an = mp.mpf(an)
            y = 2 * mp.pi * n / abs_d
            total += ch * an * regularized_upper_gamma(k, y) / mp.mpf(n) ** k
        total *= 2
        flags = ()
        if total < -tail:
            flags = ("negative-beyond-tail",)
        return LValue(total, float(tail), t, bits, flags=flags)


@dataclass
class SweepResult:
    """Batch central values over one parity-admissible discriminant family."""

    ds: np.ndarray
    truncations: np.ndarray
    tails: np.ndarray
    values: list[np.ndarray]  # one float64 array per eigenform


def central_sweep(forms: list[Eigenform], ds: np.ndarray, bits: int = 46,
                  block: int = 256) -> SweepResult:
    """Vectorized L(f_nu, chi_D, k) over many discriminants, float64.

    All forms must share one weight; every D must have even functional sign
    (the sweep is meant for the (-1)^k D > 0 family where the AFE has sign
    +1).  Character tables per block are filled multiplicatively from
    vectorized prime values, and the AFE window is shared by all forms.
    """
    if not forms:
        raise DomainError("need at least one eigenform")
    weight = forms[0].weight
    if any(f.weight != weight for f in forms):
        raise DomainError("sweep requires a single weight")
    if bits > 50:
        raise DomainError("float64 sweep supports at most 50 bits")
    k = weight // 2
    ds = np.asarray(ds, dtype=np.int64)
    if len(ds) == 0:
        return SweepResult(ds, np.zeros(0, np.int64), np.zeros(0),
                           [np.zeros(0) for _ in forms])
    sign = 1 if k % 2 == 0 else -1
    if np.any(sign * ds <= 0):
        raise DomainError("sweep discriminants must satisfy (-1)^k D > 0")

    abs_d = np.abs(ds)
    # certified truncation per discriminant
    ts = np.empty(len(ds), dtype=np.int64)
    for i, ad in enumerate(abs_d.tolist()):
        t = max(8, math.ceil(ad * (k + 0.7 * bits) / (2 * math.pi)))
        while float(_afe_tail(k, ad, t)) >= 2.0 ** (-bits / 2):
            t = t + 8 + t // 8
        ts[i] = t
    t_max = int(ts.max())
    lam = [modforms.normalized_table(f, t_max).values for f in forms]
    n_arr = np.arange(t_max + 1, dtype=np.float64)
    n_arr[0] = 1.0
    inv_sqrt = 1.0 / np.sqrt(n_arr)
    form_vec = [lv * inv_sqrt for lv in lam]
    spf = arith.smallest_prime_factors(t_max)
    primes = arith.primes_up_to(t_max).tolist()

    tails = np.array([float(_afe_tail(k, int(ad), int(t)))
                      for ad, t in zip(abs_d, ts)])
    values = [np.zeros(len(ds)) for _ in forms]
    for lo in range(0, len(ds), block):
        hi = min(lo + block, len(ds))
        dblk = ds[lo:hi]
        tblk = int(ts[lo:hi].max())
        chi = np.zeros((tblk + 1, hi - lo), dtype=np.int8)
        chi[1] = 1
        for p in primes:
            if p > tblk:
                break
            chi[p] = arith.chi_vec(dblk, p)
        for n in range(4, tblk + 1):
            p = int(spf[n])
            if n > p:
                np.multiply(chi[p], chi[n // p], out=chi[n])
        for j in range(hi - lo):
            t = int(ts[lo + j])
            ad = float(abs_d[lo + j])
            y = n_arr[1:t + 1] * (2 * math.pi / ad)
            w = afe_window_np(k, y) * chi[1:t + 1, j]
            for fi in range(len(forms)):
                values[fi][lo + j] = 2.0 * float(np.dot(w, form_vec[fi][1:t + 1]))
    return SweepResult(ds.copy(), ts, tails, values)


# ---------------------------------------------------------------------------
# Dirichlet L-functions in the region of absolute convergence


def _zeta_em(s: float, bits: int):
    """zeta(s) by Euler-Maclaurin with a certified remainder, s > 1."""
    target = mp.mpf(2) ** (-bits // 2 - 4)
    t = max(64, bits, math.ceil(4 * (s + 20)))
    ss = mp.mpf(s)
    total = sum(mp.mpf(n) ** (-ss) for n in range(1, t + 1))
    total += mp.mpf(t) ** (1 - ss) / (ss - 1) - mp.mpf(t) ** (-ss) / 2
    # correction terms B_2j/(2j)! * (s)_(2j-1) * t^(-s-2j+1)
    poch = ss
    err = None
    for j in range(1, 24):
        term = mp.bernoulli(2 * j) / mp.factorial(2 * j) * poch \
            * mp.mpf(t) ** (-ss - 2 * j + 1)
        if abs(term) < target:
            err = 2 * abs(term)
            total += term
            break
        total += term
        poch *= (ss + 2 * j - 1) * (ss + 2 * j)
    if err is None:
        raise PrecisionError("Euler-Maclaurin failed to converge")
    return total, err, t


def dirichlet_lvalue(d: int, s: float, bits: int = 64) -> LValue:
    """L(chi_D, s) for real s > 1 by direct summation.

    D = 1 is the zeta function, handled by Euler-Maclaurin.  Otherwise the
    tail after T terms is bounded by 2 sqrt(|D|) log(4|D|) T^(-s) through
    partial summation against the Polya-Vinogradov character-sum bound; T
    beyond 4e6 flags the value degraded instead of looping further.
    """
    if s <= 1:
        raise DomainError("need s > 1 for absolute convergence")
    if not arith.is_fundamental_discriminant(d):
        raise DomainError(f"{d} is not a fundamental discriminant")
    with mp.workprec(bits + 32):
        if d == 1:
            total, err, t = _zeta_em(s, bits)
            return LValue(total, float(err), t, bits)
        abs_d = abs(d)
        pv = 2 * math.sqrt(abs_d) * math.log(4 * abs_d)
        target = 2.0 ** (-bits / 2)
        t = math.ceil((pv / target) ** (1.0 / s))
        degraded = False
        if t > 4 * 10 ** 6:
            t = 4 * 10 ** 6
            degraded = True
        if t < abs_d:
            chars = (arith.kronecker(d, n) for n in range(1, t + 1))
        else:
            tbl = arith.character_table(d)
            chars = (int(tbl[n % abs_d]) for n in range(1, t + 1))
        ss = mp.mpf(s)
        total = mp.mpf(0)
        for n, ch in enumerate(chars, start=1):
            if ch:
                total += ch * mp.mpf(n) ** (-ss)
        tail = pv * float(t) ** (-s)
        return LValue(total, tail, t, bits, degraded=degraded)


def hecke_lvalue_halfint(g: PlusForm, s: float, bits: int = 128) -> LValue:
    """sum c(n) n^(-s) over the stored table, for s past the abscissa.

    Requires s > k/2 + 5/4 + 1/4; the tail uses twice the growth witness.
    A float64 dot product serves requests of 53 bits or fewer (large
    tables), the mpf loop anything above.
    """
    edge = g.k / 2 + 1.25
    if s <= edge + 0.25:
        raise DomainError(f"need s > {edge + 0.25} (abscissa {edge} plus margin)")
    beta = s - (g.k / 2 + 0.25)
    c2 = 2.0 * g.witness
    tail = c2 * float(g.prec) ** (1 - beta) / (beta - 1)
    if bits <= 53:
        arr = g.float_table()
        n = np.arange(g.prec, dtype=np.float64)
        n[0] = 1.0
        total = float(np.dot(arr, n ** (-float(s))))
        return LValue(total, tail, g.prec, bits)
    with mp.workprec(bits + 32):
        ss = mp.mpf(s)
        total = mp.mpf(0)
        for n, c in g.items():
            if isinstance(c, Fraction):
                cc = mp.mpf(c.numerator) / mp.mpf(c.denominator)
            else:
                cc = mp.mpf(c) if isinstance(c, int) else c
            total += cc * mp.mpf(n) ** (-ss)
        return LValue(total, tail, g.prec, bits)


def hecke_lvalue_int(f: Eigenform, s: float, bits: int = 128) -> LValue:
    """sum a(n) n^(-s) for an integer-weight eigenform, s past (w+1)/2.

    Tail via |a(n)| <= d(n) n^((w-1)/2) <= 2 n^(w/2).
    """
    edge = (f.weight + 1) / 2
    if s <= edge + 0.25:
        raise DomainError(f"need s > {edge + 0.25} (abscissa {edge} plus margin)")
    beta = s - f.weight / 2
    target = mp.mpf(2) ** (-bits // 2)
    with mp.workprec(bits + 32):
        t = 16
        while 2 * mp.mpf(t) ** (1 - beta) / (beta - 1) >= target:
            t = t + 8 + t // 4
        tail = 2 * mp.mpf(t) ** (1 - beta) / (beta - 1)
        a = _coeff_table(f, t, bits)
        ss = mp.mpf(s)
        total = mp.mpf(0)
        for n in range(1, t + 1):
            an = mp.mpf(a[n]) if f.exact else a[n]
            total += an * mp.mpf(n) ** (-ss)
        return LValue(total, float(tail), t, bits)


def rankin_sum(f: Eigenform, f2: Eigenform, x: int) -> float:
    """S(x) = sum_{p <= x} lam(p) lam2(p) log(p)  (normalized coefficients).

    Equals sum a(p) a2(p) log(p) / p^(w-1); tends to x on the diagonal and
    stays o(x) for distinct eigenforms.
    """
    if f.weight != f2.weight:
        raise DomainError("Rankin sums need a single weight")
    if x < 2:
        return 0.0
    if x > f.prec_primes or x > f2.prec_primes:
        raise TableExhaustedError(
            f"prime tables stop before {x}", needed=x)
    total = 0.0
    for p in arith.primes_up_to(x).tolist():
        total += f.lam(p) * f2.lam(p) * math.log(p)
    return total


# ---------------------------------------------------------------------------
# real Gamma function (Stirling with argument shift and reflection)


def real_gamma(s, bits: int = 128):
    """Gamma(s) for real s, poles excluded, to the requested mantissa."""
    with mp.workprec(bits + 24):
        ss = mp.mpf(s)
        if ss <= 0 and ss == mp.floor(ss):
            raise DomainError(f"gamma pole at {s}")
        if ss < mp.mpf("0.5"):
            # reflection: Gamma(s) Gamma(1-s) = pi / sin(pi s)
            return mp.pi / (mp.sin(mp.pi * ss) * real_gamma(1 - ss, bits))
        shift_to = max(12, (bits + 24) // 4)
        acc = mp.mpf(1)
        z = ss
        while z < shift_to:
            acc *= z
            z += 1
        # Stirling on z >= shift_to
        lg = (z - mp.mpf("0.5")) * mp.log(z) - z + mp.log(2 * mp.pi) / 2
        zpow = z
        prev = mp.inf
        for j in range(1, 64):
            term = mp.bernoulli(2 * j) / ((2 * j) * (2 * j - 1) * zpow)
            if abs(term) >= prev:
                raise PrecisionError("Stirling series diverged before target")
            lg += term
            prev = abs(term)
            if prev < mp.mpf(2) ** (-bits - 16):
                break
            zpow *= z * z
        else:
            raise PrecisionError("Stirling series did not reach target")
        return mp.exp(lg) / acc
