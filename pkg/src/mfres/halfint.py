"""Half-integral weight plus space on Gamma_0(4).

Forms of weight k + 1/2 whose coefficients c(n) vanish unless
(-1)^k n = 0 or 1 mod 4.  The space is cut out of the span of
theta^(2k+1-4j) F^j by those vanishing conditions plus cuspidality, and the
resulting dimension is checked against dim S_2k; each basis eigenform is
paired with its integer-weight lift and the pairing is validated through
the coefficient relation tying c(n^2 |D|) to the Hecke eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np

from . import arith, modforms
from .errors import ConstructionError, DomainError, PrecisionError
from .modforms import Eigenform
from .qseries import ExactSeries, combine, linear_solve


def theta(prec: int) -> ExactSeries:
    """1 + 2 q + 2 q^4 + 2 q^9 + ..., the weight-1/2 generator."""
    if prec < 1:
        raise DomainError("prec must be >= 1")
    coeffs = {0: 1}
    m = 1
    while m * m < prec:
        coeffs[m * m] = 2
        m += 1
    return ExactSeries(prec, coeffs)


def weight_two_F(prec: int) -> ExactSeries:
    """sum over odd n of sigma_1(n) q^n, the weight-2 generator."""
    if prec < 1:
        raise DomainError("prec must be >= 1")
    sig = arith.sigma_up_to(prec - 1, 1)
    return ExactSeries(prec, {n: sig[n] for n in range(1, prec, 2)})


def _forbidden(k: int, n: int) -> bool:
    return (n if k % 2 == 0 else -n) % 4 in (2, 3)


class PlusForm:
    """A coefficient table of a weight k + 1/2 form.

    ``coeffs[n]`` is c(n) for 0 <= n < prec; exact rationals for forms cut
    out over Q, extended-precision reals for eigen combinations.  ``plus``
    records whether the plus-space vanishing pattern was verified; the U_4
    image of a plus form is generally not a plus form, so it carries
    plus=False.
    """

    __slots__ = ("k", "prec", "coeffs", "exact", "plus", "_witness", "_floats")

    def __init__(self, k, prec, coeffs, exact=True, validate=True):
        if len(coeffs) != prec:
            raise DomainError("coefficient table length must equal prec")
        self.k = k
        self.prec = prec
        self.coeffs = coeffs
        self.exact = exact
        self._witness = None
        self._floats = None
        if validate:
            if coeffs[0] != 0:
                raise DomainError("constant term must vanish")
            for n in range(1, prec):
                if _forbidden(k, n) and coeffs[n] != 0:
                    raise DomainError(f"coefficient at {n} violates the plus condition")
            self.plus = True
        else:
            self.plus = False

    def coeff(self, n: int):
        if not 0 <= n < self.prec:
            raise DomainError(f"coefficient {n} outside table of size {self.prec}")
        return self.coeffs[n]

    def items(self):
        for n, c in enumerate(self.coeffs):
            if c:
                yield n, c

    def float_table(self):
        """The coefficients as a float64 numpy array (cached)."""
        if self._floats is None:
            self._floats = np.array([float(c) for c in self.coeffs])
        return self._floats

    @property
    def witness(self) -> float:
        """max |c(n)| / n^(k/2 + 1/4) over stored n, the growth constant."""
        if self._witness is None:
            arr = self.float_table()
            n = np.arange(self.prec, dtype=np.float64)
            n[0] = 1.0
            self._witness = float(
                np.max(np.abs(arr) / n ** (self.k / 2 + 0.25))
            )
        return self._witness

    def first_admissible(self) -> int | None:
        """Smallest fundamental D with (-1)^k D > 0 and c(|D|) != 0."""
        sign = 1 if self.k % 2 == 0 else -1
        for n in range(1, self.prec):
            if self.coeffs[n] and arith.is_fundamental_discriminant(sign * n):
                return sign * n
        return None

    def first_nonzero_fourdiv(self) -> int | None:
        """Smallest fundamental D, 4 | D, (-1)^k D > 0, with c(|D|) != 0."""
        sign = 1 if self.k % 2 == 0 else -1
        for n in range(4, self.prec, 4):
            if self.coeffs[n] and arith.is_fundamental_discriminant(sign * n):
                return sign * n
        return None


@dataclass
class PlusEigenbasis:
    """Eigenbasis of the plus space with paired integer-weight lifts."""

    k: int
    forms: list[PlusForm]
    lifts: list[Eigenform]
    echelon: list[PlusForm] = field(repr=False, default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.forms)


def _solve_vectors(k: int, cutoff: int) -> list[tuple[Fraction, ...]] | None:
    """Echelonized combination vectors over the monomial span, or None
    when the solution dimension disagrees with dim S_2k."""
    prec = cutoff + 1
    th = theta(prec)
    f2 = weight_two_F(prec)
    jmax = (2 * k + 1) // 4
    rows = []
    fj = ExactSeries.one(prec)
    for j in range(jmax + 1):
        rows.append((th ** (2 * k + 1 - 4 * j)) * fj)
        if j < jmax:
            fj = fj * f2
    constraints = [(0, 0)] + [(n, 0) for n in range(1, prec) if _forbidden(k, n)]
    sol = linear_solve(rows, constraints)
    if len(sol.vectors) != modforms.cusp_dim(2 * k):
        return None
    # echelonize the solution vectors alongside their series images
    pairs = [[combine(rows, v), list(v)] for v in sol.vectors]
    done = []
    while pairs:
        pairs.sort(key=lambda pv: pv[0].leading()[0])
        s, v = pairs.pop(0)
        e0, c0 = s.leading()
        inv = Fraction(1) / Fraction(c0)
        s = s.scale(inv)
        v = [x * inv for x in v]
        for other in done + pairs:
            f = other[0].coeff(e0)
            if f:
                other[0] = other[0] - s.scale(f)
                other[1] = [x - f * y for x, y in zip(other[1], v)]
        done.append([s, v])
    done.sort(key=lambda pv: pv[0].leading()[0])
    return [tuple(v) for _, v in done]


def _simplify(x: Fraction):
    return x.numerator if x.denominator == 1 else x


def _combine_full(k: int, prec: int, vectors) -> list[list]:
    """Evaluate monomial combinations at full precision, Horner in F.

    With m = floor((2k+1)/4) the target is
    theta^(2k+1-4m) * sum_j v_j theta^(4(m-j)) F^j, so the even theta
    powers are shared across vectors and the multiply count stays linear
    in m instead of quadratic.
    """
    jmax = (2 * k + 1) // 4
    th = theta(prec)
    f2 = weight_two_F(prec)
    t2 = th * th
    t4 = {0: ExactSeries.one(prec)}
    if jmax >= 1:
        t4[1] = t2 * t2
    for j in range(2, jmax + 1):
        t4[j] = t4[j - 1] * t4[1]
    out = []
    for vec in vectors:
        acc = t4[0].scale(vec[jmax]) if vec[jmax] else ExactSeries.zero(prec)
        for j in range(jmax - 1, -1, -1):
            acc = acc * f2
            if vec[j]:
                acc = acc + t4[jmax - j].scale(vec[j])
        if (2 * k + 1 - 4 * jmax) == 3:
            acc = acc * t2
        g = th * acc
        out.append([_simplify(Fraction(g.coeff(n))) for n in range(prec)])
    return out


_BASIS_CACHE: dict[tuple, PlusEigenbasis] = {}


def plus_space_basis(k: int, prec: int, bits: int = 128,
                     lift_primes: int | None = None) -> PlusEigenbasis:
    """Construct the plus-space eigenbasis at the given table size.

    The linear solve runs at a fixed small cutoff (20(k+2), doubled once on
    a dimension mismatch); the resulting rational combinations are then
    expanded to ``prec``.  Lifts carry prime tables to ``lift_primes``
    (default: enough for coefficient checks up to sqrt(prec)).
    """
    if k < 1:
        raise DomainError("k must be positive")
    if prec < 20 * (k + 2):
        raise DomainError(f"prec must be at least {20 * (k + 2)}")
    if lift_primes is None:
        lift_primes = max(100, int(math.isqrt(prec)) + 1)
    key = (k, prec, bits, lift_primes)
    if key in _BASIS_CACHE:
        return _BASIS_CACHE[key]

    cutoff = 20 * (k + 2)
    vectors = _solve_vectors(k, cutoff)
    if vectors is None:
        vectors = _solve_vectors(k, 2 * cutoff)
    if vectors is None:
        raise ConstructionError(
            f"plus-space dimension != dim S_{2 * k} at doubled cutoff"
        )
    tables = _combine_full(k, prec, vectors)
    echelon = [PlusForm(k, prec, t) for t in tables]
    lifts = modforms.hecke_eigenforms(2 * k, lift_primes, bits=bits)
    forms = echelon if len(echelon) == 1 else _eigen_split(k, echelon, lifts, bits)

    basis = PlusEigenbasis(k, forms, lifts, echelon)
    for g, f in zip(basis.forms, basis.lifts):
        _validate_pairing(g, f, bits)
    _BASIS_CACHE[key] = basis
    return basis


def _eigen_split(k, echelon, lifts, bits) -> list[PlusForm]:
    """Split the echelon basis into eigenvectors of the 4th Hecke operator.

    On the plus space the operator sends c(n) to
    c(4n) + ((-1)^k n | 2) 2^(k-1) c(n) + 2^(2k-1) c(n/4), with eigenvalue
    a(2) of the paired lift; the pairing is re-validated afterwards, so a
    wrong convention here cannot slip through.
    """
    r = len(echelon)
    prec = echelon[0].prec
    pivots = [next(n for n, _ in g.items()) for g in echelon]
    if 4 * max(pivots) >= prec:
        raise ConstructionError("table too small to pair eigenforms")
    sign = 1 if k % 2 == 0 else -1

    def t4_coeff(g, n):
        v = Fraction(g.coeff(4 * n))
        v += arith.kronecker(sign * n, 2) * 2 ** (k - 1) * Fraction(g.coeff(n))
        if n % 4 == 0:
            v += 2 ** (2 * k - 1) * Fraction(g.coeff(n // 4))
        return v

    # matrix columns: coordinates of the operator image of each basis form,
    # read off at the pivot exponents (identity leading block)
    tmat = [[t4_coeff(echelon[i], e) for i in range(r)] for e in pivots]
    out = []
    with mp.workprec(bits + 48):
        for f in lifts:
            ev = f.a2
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
            if resid > mp.mpf(2) ** (-bits // 2) * (1 + abs(ev)):
                raise PrecisionError("plus-space eigenvector residual too large")
            coeffs = [mp.mpf(0)] * prec
            for j, g in enumerate(echelon):
                w = vec[j]
                if w:
                    for n, c in g.items():
                        fr = Fraction(c)
                        coeffs[n] += w * mp.mpf(fr.numerator) / mp.mpf(fr.denominator)
            lead = next(c for c in coeffs if c)
            coeffs = [c / lead for c in coeffs]
            out.append(PlusForm(k, prec, coeffs, exact=False))
    return out


def _validate_pairing(g: PlusForm, f: Eigenform, bits: int) -> None:
    d = g.first_admissible()
    if d is None:
        raise ConstructionError("no admissible discriminant with c(|D|) != 0")
    n_max = min(4, math.isqrt((g.prec - 1) // abs(d)))
    if n_max < 2:
        raise ConstructionError("table too small to validate the lift pairing")
    rep = shimura_check(g, f, d, n_max)
    tol = 0 if rep["exact"] else mp.mpf(2) ** (-bits // 4)
    if rep["rel_deviation"] > tol:
        raise ConstructionError(
            f"lift pairing failed at D={d}: deviation {rep['rel_deviation']}"
        )


def _divisors(n: int) -> list[int]:
    out = [1]
    for p, e in arith.factorize(n):
        out = [d * p ** i for d in out for i in range(e + 1)]
    return sorted(out)


def _mobius(n: int) -> int:
    mu = 1
    for _, e in arith.factorize(n):
        if e > 1:
            return 0
        mu = -mu
    return mu


def shimura_check(g: PlusForm, f: Eigenform, d: int, n_max: int) -> dict:
    """Verify c(n^2 |D|) = c(|D|) sum_{e|n} mu(e) chi_D(e) e^(k-1) a(n/e).

    Exact comparison when both tables are exact; otherwise deviations are
    measured at the lift's working precision.  The report carries the
    largest absolute and relative deviation over 1 <= n <= n_max.
    """
    sign = 1 if g.k % 2 == 0 else -1
    if sign * d <= 0 or not arith.is_fundamental_discriminant(d):
        raise DomainError(f"discriminant {d} not admissible for k={g.k}")
    if n_max * n_max * abs(d) >= g.prec:
        raise DomainError("n_max^2 |D| must stay inside the coefficient table")
    exact = g.exact and f.exact

    def run():
        base = g.coeff(abs(d))
        max_dev = 0
        max_rel = 0
        for n in range(1, n_max + 1):
            lhs = g.coeff(n * n * abs(d))
            acc = 0
            for e in _divisors(n):
                mu = _mobius(e)
                if mu == 0:
                    continue
                acc += mu * arith.kronecker(d, e) * e ** (g.k - 1) * f.coeff(n // e)
            dev = abs(lhs - base * acc)
            rel = dev / max(1, abs(lhs))
            if dev > max_dev:
                max_dev = dev
            if rel > max_rel:
                max_rel = rel
        return max_dev, max_rel

    if exact:
        max_dev, max_rel = run()
    else:
        with mp.workprec(f.bits + 16):
            max_dev, max_rel = run()
    return {
        "D": d,
        "n_max": n_max,
        "exact": exact,
        "max_deviation": max_dev,
        "rel_deviation": max_rel,
    }


def u4(g: PlusForm) -> PlusForm:
    """Coefficient picker c'(n) = c(4n); not itself a plus form."""
    prec = g.prec // 4
    coeffs = [g.coeffs[4 * n] for n in range(prec)]
    return PlusForm(g.k, prec, coeffs, exact=g.exact, validate=False)


def _log_tail(c: float, alpha: float, x: float, m: int) -> float:
    """log of the geometric-majorant bound for sum_{n>=m} c n^alpha x^n."""
    if c == 0.0:
        return -math.inf
    grow = x * math.exp(alpha / m)
    if grow >= 1.0:
        return math.inf
    return math.log(c) + m * math.log(x) + alpha * math.log(m) - math.log(1.0 - grow)


def evaluate(g: PlusForm, z: complex, bits: int = 128, tol: float | None = None):
    """Value of the q-series at z (upper half-plane) with a rigorous tail.

    Returns (value, tail_bound).  The tail uses twice the stored growth
    witness, |c(n)| <= 2 C n^(k/2+1/4) beyond the table, summed through a
    geometric majorant.  With ``tol`` given, summation stops at the first
    length whose tail bound already sits below it.
    """
    zz = mp.mpc(z)
    if mp.im(zz) <= 0:
        raise DomainError("evaluation point must have positive imaginary part")
    x = float(mp.exp(-2 * mp.pi * mp.im(zz)))
    alpha = g.k / 2 + 0.25
    c2 = 2.0 * g.witness
    m_eff = g.prec
    if tol is not None:
        m = 32
        while m < g.prec and _log_tail(c2, alpha, x, m) >= math.log(tol):
            m *= 2
        m_eff = min(m, g.prec)
        if _log_tail(c2, alpha, x, m_eff) >= math.log(tol):
            raise PrecisionError("tail bound exceeds tolerance at full table size")
    log_tail = _log_tail(c2, alpha, x, m_eff)
    tail = math.exp(log_tail) if log_tail < 700 else math.inf
    with mp.workprec(bits + 32):
        q = mp.exp(2j * mp.pi * zz)
        total = mp.mpc(0)
        last_n, q_pow = 0, mp.mpc(1)
        for n, c in g.items():
            if n >= m_eff:
                break
            q_pow *= q ** (n - last_n)
            last_n = n
            if isinstance(c, Fraction):
                cc = mp.mpf(c.numerator) / mp.mpf(c.denominator)
            else:
                cc = c
            total += cc * q_pow
        return total, tail
