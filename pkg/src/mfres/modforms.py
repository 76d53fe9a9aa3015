"""Level-one integer-weight forms: Eisenstein generators, the echelonized
cusp basis, Hecke eigenforms, and normalized coefficient tables.

Weights are the full integer weight (12, 16, 24, ...).  Eigenforms of a
one-dimensional cusp space carry exact integer coefficients; for higher
dimension the eigen-decomposition of T(2) is numeric at a requested mantissa
size and coefficients are extended-precision reals.  Eigenforms are ordered
by the T(2) eigenvalue, ascending, and the q-coefficient is normalized to 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np

from . import arith
from .errors import (
    ConstructionError,
    DomainError,
    PrecisionError,
    TableExhaustedError,
)
from .qseries import ExactSeries, echelonize_series


def modular_dim(weight: int) -> int:
    """dim M_weight(SL2(Z))."""
    if weight < 0 or weight % 2:
        return 0
    if weight % 12 == 2:
        return weight // 12
    return weight // 12 + 1


def cusp_dim(weight: int) -> int:
    """dim S_weight(SL2(Z))."""
    return max(modular_dim(weight) - 1, 0)


def eisenstein_series(weight: int, prec: int) -> ExactSeries:
    """Normalized Eisenstein generator: weight 4 or 6, constant term 1."""
    if weight == 4:
        mult, power = 240, 3
    elif weight == 6:
        mult, power = -504, 5
    else:
        raise DomainError("only the weight 4 and 6 generators are defined")
    sig = arith.sigma_up_to(prec - 1, power)
    vals = [mult * s for s in sig]
    vals[0] = 1
    return ExactSeries.from_dense(prec, vals)


def _powers(base: ExactSeries, exps: set[int]) -> dict[int, ExactSeries]:
    """base**e for each requested e, sharing the repeated-squaring chain."""
    out = {0: ExactSeries.one(base.prec), 1: base}
    if not exps:
        return out
    chain = [base]
    top = max(exps)
    while (1 << len(chain)) <= top:
        chain.append(chain[-1] * chain[-1])
    for e in sorted(exps):
        if e in out:
            continue
        acc = None
        for bit in range(e.bit_length()):
            if (e >> bit) & 1:
                acc = chain[bit] if acc is None else acc * chain[bit]
        out[e] = acc
    return out


_VM_CACHE: dict[tuple[int, int], list[ExactSeries]] = {}


def victor_miller_basis(weight: int, prec: int) -> list[ExactSeries]:
    """Echelonized basis of S_weight: row i starts q^(i+1) + O(q^(r+1)).

    Built from the monomials E4^a E6^b with 4a + 6b = weight, reduced to
    echelon form over the rationals.
    """
    if weight % 2 or weight < 4:
        raise DomainError("weight must be even and at least 4")
    key = (weight, prec)
    if key in _VM_CACHE:
        return _VM_CACHE[key]
    mons = [(a, b) for b in range(weight // 6 + 1)
            for a in [(weight - 6 * b) // 4]
            if 4 * a + 6 * b == weight and a >= 0]
    d = modular_dim(weight)
    if len(mons) != d:
        raise ConstructionError(f"monomial count {len(mons)} != dim {d}")
    e4 = eisenstein_series(4, prec)
    e6 = eisenstein_series(6, prec)
    p4 = _powers(e4, {a for a, _ in mons})
    p6 = _powers(e6, {b for _, b in mons})
    rows = [p4[a] * p6[b] for a, b in mons]
    ech = echelonize_series(rows)
    pivots = [s.leading()[0] for s in ech]
    if pivots != list(range(d)):
        raise ConstructionError(f"unexpected echelon pivots {pivots}")
    cusp = ech[1:]
    _VM_CACHE[key] = cusp
    return cusp


def delta_series(prec: int) -> ExactSeries:
    """The discriminant cusp form, q - 24 q^2 + 252 q^3 - ..."""
    return victor_miller_basis(12, prec)[0]


# ---------------------------------------------------------------------------
# Hecke eigenforms


@dataclass
class Eigenform:
    """A normalized Hecke eigenform of level one.

    ``prime_coeffs`` covers primes p <= prec_primes; values are Python ints
    when the cusp space is one-dimensional, else mpf reals carrying ``bits``
    of working precision.  Coefficients at composite n come from the Hecke
    recursion and complete multiplicativity across prime powers.
    """

    weight: int
    index: int
    prec_primes: int
    bits: int
    exact: bool
    prime_coeffs: dict[int, object]
    _pp_memo: dict[tuple[int, int], object] = field(default_factory=dict, repr=False)

    @property
    def a2(self):
        return self.prime_coeffs[2]

    def coeff(self, n: int):
        """a(n) via the recursion a(p^(j+1)) = a(p) a(p^j) - p^(w-1) a(p^(j-1))."""
        if n < 1:
            raise DomainError("coefficient index must be >= 1")
        if self.exact:
            out = 1
            for p, e in arith.factorize(n):
                out *= self._prime_power(p, e)
            return out
        with mp.workprec(self.bits + 16):
            out = mp.mpf(1)
            for p, e in arith.factorize(n):
                out *= self._prime_power(p, e)
            return out

    def _prime_power(self, p: int, e: int):
        if p > self.prec_primes:
            raise TableExhaustedError(
                f"eigenform table stops at {self.prec_primes}, needs prime {p}",
                needed=p,
            )
        if e == 1:
            return self.prime_coeffs[p]
        key = (p, e)
        hit = self._pp_memo.get(key)
        if hit is not None:
            return hit
        ap = self.prime_coeffs[p]
        pw = p ** (self.weight - 1)
        prev, cur = 1, ap
        for _ in range(e - 1):
            prev, cur = cur, ap * cur - pw * prev
        self._pp_memo[key] = cur
        return cur

    def lam(self, n: int) -> float:
        """Normalized a(n) / n^((w-1)/2) as a double."""
        c = self.coeff(n)
        if self.exact:
            return float(c) / float(n) ** ((self.weight - 1) / 2)
        with mp.workprec(self.bits + 16):
            return float(c / mp.mpf(n) ** (mp.mpf(self.weight - 1) / 2))


def _char_poly(mat: list[list[Fraction]]) -> list[Fraction]:
    """Characteristic polynomial coefficients [1, c1, ..., cr] (Faddeev)."""
    r = len(mat)
    coeffs = [Fraction(1)]
    m = [[Fraction(x) for x in row] for row in mat]
    work = [row[:] for row in m]
    for k in range(1, r + 1):
        ck = -sum(work[i][i] for i in range(r)) / k
        coeffs.append(ck)
        if k == r:
            break
        for i in range(r):
            work[i][i] += ck
        work = [
            [sum(m[i][t] * work[t][j] for t in range(r)) for j in range(r)]
            for i in range(r)
        ]
    return coeffs


_EIGEN_CACHE: dict[tuple[int, int, int], list[Eigenform]] = {}


def hecke_eigenforms(weight: int, prec_primes: int, bits: int = 128) -> list[Eigenform]:
    """All normalized eigenforms of S_weight with prime tables to prec_primes.

    Ordering is by a(2) ascending.  One-dimensional spaces give exact integer
    tables; otherwise T(2) is decomposed numerically at ``bits`` precision and
    a PrecisionError is raised if the eigenvalues are not cleanly separated.
    """
    if weight % 2 or weight < 12:
        raise DomainError("weight must be even and at least 12")
    key = (weight, prec_primes, bits)
    if key in _EIGEN_CACHE:
        return _EIGEN_CACHE[key]
    r = cusp_dim(weight)
    if r == 0:
        return []
    # need coefficients at primes up to prec_primes and at 2j for the T(2) matrix
    basis = victor_miller_basis(weight, max(prec_primes, 2 * r) + 1)
    primes = [int(p) for p in arith.primes_up_to(prec_primes)]
    if r == 1:
        b = basis[0]
        forms = [
            Eigenform(
                weight, 1, prec_primes, bits, True,
                {p: int(b.coeff(p)) for p in primes},
            )
        ]
        _EIGEN_CACHE[key] = forms
        return forms

    # T(2) on the echelon basis: (T2 b_i)(n) = b_i(2n) + 2^(w-1) b_i(n/2)
    tw = 2 ** (weight - 1)
    tmat = []
    for j in range(1, r + 1):
        row = []
        for i in range(r):
            v = Fraction(basis[i].coeff(2 * j))
            if j % 2 == 0:
                v += tw * Fraction(basis[i].coeff(j // 2))
            row.append(v)
        tmat.append(row)
    cp = _char_poly(tmat)

    with mp.workprec(bits + 48):
        poly = [mp.mpf(c.numerator) / mp.mpf(c.denominator) for c in cp]
        roots = mp.polyroots(poly, maxsteps=200, extraprec=64)
        evs = []
        for rt in roots:
            if abs(mp.im(rt)) > mp.mpf(2) ** (-bits // 2):
                raise PrecisionError("T(2) eigenvalue looks complex")
            evs.append(mp.re(rt))
        evs.sort()
        scale = max(abs(e) for e in evs) + 1
        for x, y in zip(evs, evs[1:]):
            if abs(x - y) < scale * mp.mpf(2) ** (-bits // 2):
                raise PrecisionError("T(2) eigenvalues too close to separate")
        forms = []
        for idx, ev in enumerate(evs, start=1):
            bmat = mp.matrix(r, r)
            for i in range(r):
                for j in range(r):
                    v = tmat[i][j]
                    bmat[i, j] = mp.mpf(v.numerator) / mp.mpf(v.denominator)
                bmat[i, i] -= ev
            _, _, vt = mp.svd(bmat)
            vec = [vt[r - 1, j] for j in range(r)]
            resid = max(
                abs(sum(bmat[i, j] * vec[j] for j in range(r))) for i in range(r)
            )
            if resid > scale * mp.mpf(2) ** (-bits // 2):
                raise PrecisionError("eigenvector residual too large")
            if abs(vec[0]) < mp.mpf(2) ** (-bits // 2):
                raise ConstructionError("eigenform has vanishing q-coefficient")
            vec = [v / vec[0] for v in vec]
            table = {}
            for p in primes:
                acc = mp.mpf(0)
                for j in range(r):
                    bij = Fraction(basis[j].coeff(p))
                    acc += vec[j] * mp.mpf(bij.numerator) / mp.mpf(bij.denominator)
                table[p] = acc
            forms.append(Eigenform(weight, idx, prec_primes, bits, False, table))
    _EIGEN_CACHE[key] = forms
    return forms


# ---------------------------------------------------------------------------
# normalized tables for vectorized sweeps


@dataclass
class NormalizedTable:
    """lam[n] = a(n) / n^((w-1)/2) as float64 for 0 <= n <= limit."""

    weight: int
    index: int
    limit: int
    values: np.ndarray


def normalized_table(f: Eigenform, limit: int) -> NormalizedTable:
    """Multiplicative sieve filling lam(n) for all n <= limit."""
    if limit > f.prec_primes:
        raise TableExhaustedError(
            f"eigenform table stops at {f.prec_primes}, sweep needs {limit}",
            needed=limit,
        )
    lam = np.zeros(limit + 1, dtype=np.float64)
    lam[1] = 1.0
    spf = arith.smallest_prime_factors(limit)
    half = (f.weight - 1) / 2
    for p in arith.primes_up_to(limit).tolist():
        if f.exact:
            lp = float(f.prime_coeffs[p]) / float(p) ** half
        else:
            lp = float(f.prime_coeffs[p] / mp.mpf(p) ** mp.mpf(half))
        lam[p] = lp
        prev, cur, pe = 1.0, lp, p
        while pe * p <= limit:
            pe *= p
            prev, cur = cur, lp * cur - prev
            lam[pe] = cur
    for n in range(2, limit + 1):
        p = int(spf[n])
        m = n
        pe = 1
        while m % p == 0:
            m //= p
            pe *= p
        if m == 1:
            continue  # prime power, set above
        lam[n] = lam[pe] * lam[m]
    return NormalizedTable(f.weight, f.index, limit, lam)
