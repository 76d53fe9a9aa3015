"""Truncated power series with exact rational coefficients.

An ``ExactSeries`` knows its own precision M and the coefficients of
q^0 .. q^(M-1); everything past the cutoff is unknown, not zero, and the
precision of any arithmetic result is the minimum of the operands.
Coefficients live in a sparse map or a dense list depending on how the
series was produced; sparse inputs such as theta stay sparse until a
dense product forces the change.

Small products go through sparse schoolbook convolution.  Large ones are
routed to the exact multi-prime NTT in ``_ntt`` with a rigorous bound on
the output coefficients choosing the modulus count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import _ntt
from .errors import DomainError

_SCHOOLBOOK_LIMIT = 1_500_000


def _norm(c):
    """Canonical coefficient: int when integral, Fraction otherwise."""
    if isinstance(c, Fraction):
        return int(c) if c.denominator == 1 else c
    if isinstance(c, int):
        return c
    raise DomainError(f"coefficients must be exact rationals, got {type(c).__name__}")


class ExactSeries:
    """Power series in q modulo q^prec over the rationals, exact."""

    __slots__ = ("prec", "_map", "_vec")

    def __init__(self, prec: int, coeffs: dict | None = None):
        if prec < 1:
            raise DomainError("prec must be >= 1")
        self.prec = int(prec)
        self._vec = None
        m = {}
        if coeffs:
            for e, c in coeffs.items():
                e = int(e)
                if not 0 <= e < self.prec:
                    raise DomainError(f"exponent {e} outside [0, {self.prec})")
                c = _norm(c)
                if c:
                    m[e] = c
        self._map = m

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_dense(cls, prec: int, values: list) -> "ExactSeries":
        if len(values) > prec:
            raise DomainError("more coefficients than prec")
        s = cls(prec)
        s._map = None
        s._vec = [_norm(v) for v in values]
        return s

    @classmethod
    def zero(cls, prec: int) -> "ExactSeries":
        return cls(prec)

    @classmethod
    def one(cls, prec: int) -> "ExactSeries":
        return cls(prec, {0: 1})

    @classmethod
    def q_power(cls, e: int, prec: int) -> "ExactSeries":
        return cls(prec, {e: 1})

    # -- access -------------------------------------------------------------

    def coeff(self, e: int):
        if not 0 <= e < self.prec:
            raise DomainError(f"coefficient {e} is beyond precision {self.prec}")
        if self._vec is not None:
            return self._vec[e] if e < len(self._vec) else 0
        return self._map.get(e, 0)

    def items(self) -> list[tuple[int, object]]:
        """Nonzero (exponent, coefficient) pairs, ascending exponent."""
        if self._vec is not None:
            return [(e, c) for e, c in enumerate(self._vec) if c]
        return sorted(self._map.items())

    def dense_list(self) -> list:
        """All prec coefficients as a fresh list (zeros included)."""
        out = [0] * self.prec
        if self._vec is not None:
            out[: len(self._vec)] = self._vec
        else:
            for e, c in self._map.items():
                out[e] = c
        return out

    @property
    def nnz(self) -> int:
        if self._vec is not None:
            return sum(1 for c in self._vec if c)
        return len(self._map)

    def leading(self) -> tuple[int, object] | None:
        """(exponent, coefficient) of the lowest-order nonzero term, or None."""
        it = self.items()
        return it[0] if it else None

    def is_zero(self) -> bool:
        return self.nnz == 0

    # -- ring operations ----------------------------------------------------

    def _binop(self, other: "ExactSeries", sign: int) -> "ExactSeries":
        prec = min(self.prec, other.prec)
        out = {}
        for e, c in self.items():
            if e < prec:
                out[e] = c
        for e, c in other.items():
            if e >= prec:
                continue
            v = out.get(e, 0) + sign * c
            if v:
                out[e] = _norm(v)
            else:
                out.pop(e, None)
        s = ExactSeries(prec)
        s._map = out
        return s

    def __add__(self, other):
        if not isinstance(other, ExactSeries):
            return NotImplemented
        return self._binop(other, 1)

    def __sub__(self, other):
        if not isinstance(other, ExactSeries):
            return NotImplemented
        return self._binop(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "ExactSeries":
        c = _norm(c) if not isinstance(c, (int, Fraction)) else c
        if c == 0:
            return ExactSeries.zero(self.prec)
        out = ExactSeries(self.prec)
        out._map = {e: _norm(v * c) for e, v in self.items()}
        return out

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, ExactSeries):
            return NotImplemented
        return _mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ExactSeries":
        if n < 0:
            raise DomainError("negative powers are not defined here")
        result = ExactSeries.one(self.prec)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def truncate(self, prec: int) -> "ExactSeries":
        if prec > self.prec:
            raise DomainError("cannot extend precision by truncation")
        if prec == self.prec:
            return self
        out = ExactSeries(prec)
        if self._vec is not None:
            out._map = None
            out._vec = self._vec[:prec]
        else:
            out._map = {e: c for e, c in self._map.items() if e < prec}
        return out

    def __eq__(self, other):
        if not isinstance(other, ExactSeries):
            return NotImplemented
        return self.prec == other.prec and self.items() == other.items()

    def __repr__(self):
        head = ", ".join(f"{c}*q^{e}" for e, c in self.items()[:4])
        more = "..." if self.nnz > 4 else ""
        return f"ExactSeries(prec={self.prec}, {head}{more})"


# ---------------------------------------------------------------------------
# multiplication


def _mul(a: ExactSeries, b: ExactSeries) -> ExactSeries:
    prec = min(a.prec, b.prec)
    ia = [(e, c) for e, c in a.items() if e < prec]
    ib = [(e, c) for e, c in b.items() if e < prec]
    if not ia or not ib:
        return ExactSeries.zero(prec)
    if len(ia) > len(ib):
        ia, ib = ib, ia
    if len(ia) * len(ib) <= _SCHOOLBOOK_LIMIT:
        return _mul_schoolbook(ia, ib, prec)
    return _mul_ntt(ia, ib, prec)


def _mul_schoolbook(ia, ib, prec: int) -> ExactSeries:
    acc: dict[int, object] = {}
    for ea, ca in ia:
        for eb, cb in ib:
            e = ea + eb
            if e >= prec:
                break
            acc[e] = acc.get(e, 0) + ca * cb
    out = ExactSeries(prec)
    out._map = {e: _norm(c) for e, c in acc.items() if c}
    return out


def _scaled_ints(items):
    den = 1
    for _, c in items:
        if isinstance(c, Fraction):
            den = math.lcm(den, c.denominator)
    if den == 1:
        return items, 1
    return [(e, int(c * den)) for e, c in items], den


def _mul_ntt(ia, ib, prec: int) -> ExactSeries:
    ia, da = _scaled_ints(ia)
    ib, db = _scaled_ints(ib)
    la = ia[-1][0] + 1
    lb = ib[-1][0] + 1
    av = [0] * la
    for e, c in ia:
        av[e] = c
    bv = [0] * lb
    for e, c in ib:
        bv[e] = c
    bound = (
        min(len(ia), len(ib))
        * max(abs(c) for _, c in ia)
        * max(abs(c) for _, c in ib)
    )
    out_len = min(prec, la + lb - 1)
    vals = _ntt.convolve_exact(av, bv, out_len, bound)
    den = da * db
    if den != 1:
        vals = [Fraction(v, den) for v in vals]
    return ExactSeries.from_dense(prec, vals)


# ---------------------------------------------------------------------------
# linear algebra over the span of series


@dataclass
class SolveResult:
    """Outcome of ``linear_solve``.

    ``vectors`` spans the homogeneous solutions as coordinate tuples over the
    input rows; ``basis`` holds the same combinations as series, in reduced
    echelon form by leading exponent with leading coefficient 1.  For
    inhomogeneous constraints ``particular`` is one solution (None when the
    system is inconsistent, in which case ``consistent`` is False).
    """

    consistent: bool
    vectors: list[tuple[Fraction, ...]]
    basis: list[ExactSeries]
    particular_vector: tuple[Fraction, ...] | None = None
    particular: ExactSeries | None = None


def combine(rows: list[ExactSeries], vector) -> ExactSeries:
    """Linear combination sum(vector[j] * rows[j])."""
    prec = min(r.prec for r in rows)
    out = ExactSeries.zero(prec)
    for x, row in zip(vector, rows):
        if x:
            out = out + row.truncate(prec).scale(x)
    return out


def echelonize_series(series: list[ExactSeries]) -> list[ExactSeries]:
    """Reduced echelon form of a list of series by leading exponent.

    Zero series are dropped; pivots are normalized to 1 and cleared from all
    other rows.  Returned in ascending pivot order.
    """
    work = [s for s in series if not s.is_zero()]
    done: list[ExactSeries] = []
    while work:
        work.sort(key=lambda s: s.leading()[0])
        head = work.pop(0)
        e0, c0 = head.leading()
        head = head.scale(Fraction(1, 1) / Fraction(c0))
        done = [d - head.scale(d.coeff(e0)) for d in done]
        work = [w - head.scale(w.coeff(e0)) for w in work]
        work = [w for w in work if not w.is_zero()]
        done.append(head)
    return sorted(done, key=lambda s: s.leading()[0])


def linear_solve(
    rows: list[ExactSeries], constraints: list[tuple[int, object]]
) -> SolveResult:
    """Solve for combinations of ``rows`` meeting coefficient constraints.

    Each constraint (e, v) requires the combination to have coefficient v at
    exponent e.  Exact rational elimination; inconsistent systems come back
    flagged rather than raising.
    """
    n = len(rows)
    aug = [
        [Fraction(r.coeff(e)) for r in rows] + [Fraction(v)]
        for e, v in constraints
    ]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(aug)) if aug[i][col]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    consistent = all(not row[n] for row in aug[r:])
    free = [c for c in range(n) if c not in pivots]
    vectors = []
    for fc in free:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -aug[i][fc]
        vectors.append(tuple(vec))
    particular_vector = None
    particular = None
    if consistent:
        pv = [Fraction(0)] * n
        for i, pc in enumerate(pivots):
            pv[pc] = aug[i][n]
        particular_vector = tuple(pv)
        particular = combine(rows, pv) if rows else None
    basis = echelonize_series([combine(rows, v) for v in vectors]) if vectors else []
    return SolveResult(consistent, vectors, basis, particular_vector, particular)


# ---------------------------------------------------------------------------
# serialization: "# prec=M" header then "exponent,numerator/denominator" lines


def dump_series(s: ExactSeries, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# prec={s.prec}\n")
        for e, c in s.items():
            f = Fraction(c)
            fh.write(f"{e},{f.numerator}/{f.denominator}\n")


def load_series(path) -> ExactSeries:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# prec="):
            raise DomainError(f"bad series header {header!r}")
        prec = int(header.split("=", 1)[1])
        coeffs = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            epart, cpart = line.split(",", 1)
            num, den = cpart.split("/", 1)
            coeffs[int(epart)] = Fraction(int(num), int(den))
    return ExactSeries(prec, coeffs)
