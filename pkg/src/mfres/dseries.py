"""Dirichlet series of squarefree-twist coefficients, evaluated three
independent ways, together with the gamma-factor identities and a numerical
check of the level-4 Fricke relation.

Every positive integer n in a plus-space support class factors uniquely as
n = |D| m^2 with D a fundamental discriminant of the parity-matching sign.
The series studied here attaches to such n the exact coefficient
c(|D|) mu(m) chi_D(m) m^(k-1) and to all other n the coefficient 0.  Summing
n^(-s) against these admits a twist-by-twist regrouping and, for eigenforms,
a quotient of two L-functions; agreement of the three evaluations within
their tail bounds is the module's main consistency statement.
"""

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from . import arith, halfint, lfun
from .errors import DomainError, PrecisionError, TableExhaustedError
from .halfint import PlusEigenbasis, PlusForm
from .lfun import LValue


def _mobius(n: int) -> int:
    m = 1
    for _, e in arith.factorize(n):
        if e > 1:
            return 0
        m = -m
    return m


def twist_coefficient(n: int, g: PlusForm):
    """Exact series coefficient at n; 0 when n has no valid decomposition.

    For n = |D| m^2 the value is c(|D|) mu(m) chi_D(m) m^(k-1), which stays
    an integer (or Fraction) for exact forms.  |D| must sit inside g's table.
    """
    if n < 1:
        raise DomainError("coefficient index must be positive")
    try:
        d, m = arith.squarefree_decompose(n, g.k)
    except DomainError:
        return 0
    mu = _mobius(m)
    if mu == 0:
        return 0
    c = g.coeff(abs(d))
    return c * mu * arith.kronecker(d, m) * m ** (g.k - 1)


def twist_coefficient_table(g: PlusForm, n_max: int) -> np.ndarray:
    """float64 array of series coefficients for 0 <= n <= n_max.

    Built discriminant-major: for each fundamental D of the right sign and
    each squarefree m with |D| m^2 <= n_max, one scatter write.  Distinct
    (D, m) pairs land on distinct n, so no accumulation is needed.
    """
    if n_max < 1:
        raise DomainError("n_max must be positive")
    sign = 1 if g.k % 2 == 0 else -1
    ds = arith.enumerate_discriminants(0, n_max, sign=sign)
    absd = np.abs(ds)
    if absd.size and int(absd[-1]) >= g.prec:
        raise TableExhaustedError(
            f"series to {n_max} needs c({int(absd[-1])}) beyond table of length {g.prec}",
            needed=int(absd[-1]) + 1,
        )
    cvals = g.float_table()[absd]
    root = math.isqrt(n_max)
    mu = arith.mobius_up_to(root)
    out = np.zeros(n_max + 1)
    for m in range(1, root + 1):
        if mu[m] == 0:
            continue
        hi = np.searchsorted(absd, n_max // (m * m), side="right")
        if hi == 0:
            continue
        chi = arith.chi_vec(ds[:hi], m).astype(np.float64)
        scale = float(mu[m]) * float(m) ** (g.k - 1)
        out[absd[:hi] * (m * m)] = scale * chi * cvals[:hi]
    return out


def series_via_coefficients(g: PlusForm, s: float, n_terms: int) -> LValue:
    """Direct partial sum of the twist series at s, float64 throughout.

    Needs s > k/2 + 3/2 so the witness-based coefficient bound gives a
    finite tail; the tail constant doubles the observed table witness, so
    it is heuristic in the same sense as the evaluation bound.
    """
    if s <= g.k / 2 + 1.5:
        raise DomainError(f"series needs s > {g.k / 2 + 1.5}")
    coeffs = twist_coefficient_table(g, n_terms)
    n = np.arange(n_terms + 1, dtype=np.float64)
    n[0] = 1.0
    value = float(np.dot(coeffs, n ** (-float(s))))
    beta = s - g.k / 2 - 1.25
    tail = 2.0 * g.witness * float(n_terms) ** (-beta) / beta
    return LValue(mp.mpf(value), tail, n_terms, 53)


def _inverse_dirichlet_mobius(d: int, s: float, bits: int):
    """1/L(chi_D, s) summed as a Mobius series, with its tail; needs s > 2."""
    t = max(16, math.ceil((2.0 ** (bits / 2) / (s - 1)) ** (1.0 / (s - 1))))
    mu = arith.mobius_up_to(t)
    total = mp.mpf(0)
    for n in range(1, t + 1):
        m = int(mu[n])
        if m:
            ch = arith.kronecker(d, n)
            if ch:
                total += m * ch * mp.mpf(n) ** mp.mpf(-s)
    return total, float(t) ** (1.0 - s) / (s - 1.0)


def series_via_twists(g: PlusForm, s: float, d_max: int, bits: int = 48) -> LValue:
    """Regrouped evaluation: sum over fundamental D of c(|D|) |D|^(-s) / L(chi_D, 2s-k+1).

    Each Dirichlet L-value comes from lfun with its own certificate, and for
    2s-k+1 > 2 the reciprocal is re-derived from the Mobius series as a
    cross-check on a sample of discriminants.  The discriminant tail uses
    the witness bound together with 1/|L| <= zeta(sigma)/zeta(2 sigma),
    which relies on extrapolating the coefficient bound past the table, so
    the result is flagged heuristic.
    """
    sigma = 2 * s - g.k + 1
    if sigma <= 1.25:
        raise DomainError("twist sum needs 2s - k + 1 > 1.25")
    sign = 1 if g.k % 2 == 0 else -1
    ds = arith.enumerate_discriminants(0, d_max, sign=sign)
    if ds.size and int(abs(ds[-1])) >= g.prec:
        raise TableExhaustedError(
            f"twist sum to {d_max} outruns table of length {g.prec}",
            needed=int(abs(ds[-1])) + 1,
        )
    check_every = max(1, ds.size // 8)
    with mp.workprec(bits + 32):
        total = mp.mpf(0)
        lerr = 0.0
        for i, dd in enumerate(ds.tolist()):
            c = g.coeff(abs(dd))
            if not c:
                continue
            lv = lfun.dirichlet_lvalue(dd, sigma, bits=bits)
            inv = 1 / lv.value
            if sigma > 2 and i % check_every == 0:
                ref, rtail = _inverse_dirichlet_mobius(dd, sigma, bits)
                slack = rtail + 2 * lv.tail_bound + 2.0 ** (-bits + 4)
                if abs(ref - inv) > slack:
                    raise PrecisionError(
                        f"reciprocal L cross-check failed at D={dd}")
            term = c * mp.mpf(abs(dd)) ** mp.mpf(-s) * inv
            total += term
            # first-order effect of the L tail on 1/L
            lerr += float(abs(term)) * lv.tail_bound / float(abs(lv.value))
        beta = s - g.k / 2 - 1.25
        if beta > 0:
            zs = lfun._zeta_em(sigma, 40)[0]
            z2s = lfun._zeta_em(2 * sigma, 40)[0]
            dtail = float(zs / z2s) * 2.0 * g.witness \
                * float(max(d_max, 1)) ** (-beta) / beta
        else:
            dtail = math.inf
        return LValue(total, float(dtail) + lerr, ds.size, bits,
                      flags=("heuristic-tail",))


def lift_lvalue_euler(f, u: float, bits: int = 64) -> LValue:
    """L-value of an integer-weight eigenform by truncated Euler product.

    Valid for u - (w-1)/2 > 1; the prime tail is bounded through the
    coefficient bound 2 p^((w-1)/2) per prime, giving a multiplicative error
    e^(tail) - 1 on the product.
    """
    beta = u - (f.weight - 1) / 2
    if beta <= 1:
        raise DomainError("Euler product needs u > (w+1)/2")
    gap = 1.0 - 2.0 ** (-beta)
    target = 2.0 ** (-bits / 2)
    log_need = math.log(2.0 / (gap * (beta - 1) * target)) / (beta - 1)
    p_need = max(16, math.ceil(math.exp(min(log_need, 48.0))))
    if p_need > f.prec_primes:
        raise TableExhaustedError(
            f"Euler product to {p_need} exceeds prime table {f.prec_primes}",
            needed=p_need,
        )
    tail_log = 2.0 * float(p_need) ** (1.0 - beta) / ((beta - 1) * gap)
    with mp.workprec(bits + 24):
        uu = mp.mpf(u)
        prod = mp.mpf(1)
        for p in arith.primes_up_to(p_need).tolist():
            pp = mp.mpf(p)
            local = 1 - f.coeff(p) * pp ** -uu + pp ** (f.weight - 1 - 2 * uu)
            prod /= local
        return LValue(prod, abs(prod) * float(mp.expm1(tail_log)), p_need, bits)


def series_via_quotients(basis: PlusEigenbasis, weights, s: float,
                         bits: int = 64) -> LValue:
    """Eigen-route evaluation: sum of weight_v * L(g_v, s) / L(f_v, 2s).

    Numerators use the stored half-integral tables, denominators the Euler
    product of the lifts.  In-region the denominator cannot vanish; a
    certificate smaller than the value enforces that numerically.
    """
    if len(weights) != basis.dim:
        raise DomainError(f"expected {basis.dim} weights, got {len(weights)}")
    if s <= basis.k / 2 + 1.5:
        raise DomainError(f"quotient route needs s > {basis.k / 2 + 1.5}")
    total = mp.mpf(0)
    tail = 0.0
    trunc = 0
    for wgt, gnu, fnu in zip(weights, basis.forms, basis.lifts):
        if not wgt:
            continue
        num = lfun.hecke_lvalue_halfint(gnu, s, bits=bits)
        den = lift_lvalue_euler(fnu, 2 * s, bits=bits)
        margin = abs(den.value) - den.tail_bound
        assert margin > 0
        q = num.value / den.value
        total += wgt * q
        tail += abs(wgt) * (num.tail_bound + abs(q) * den.tail_bound) / margin
        trunc = max(trunc, num.truncation)
    return LValue(total, tail, trunc, bits)


def weighted_plus_form(basis: PlusEigenbasis, weights) -> PlusForm:
    """Linear combination of the eigenbasis as a PlusForm.

    Integer or Fraction weights on exact forms stay exact; anything else
    drops to mpf coefficients.
    """
    if len(weights) != basis.dim:
        raise DomainError(f"expected {basis.dim} weights, got {len(weights)}")
    live = [(w, f) for w, f in zip(weights, basis.forms) if w]
    if not live:
        z = basis.forms[0]
        return PlusForm(basis.k, z.prec, [0] * z.prec, validate=False)
    if len(live) == 1 and live[0][0] == 1:
        return live[0][1]
    prec = min(f.prec for _, f in live)
    exact = all(f.exact for _, f in live) and \
        all(isinstance(w, int) or getattr(w, "denominator", None) is not None
            for w, _ in live)
    with mp.workprec(192):
        coeffs = [sum(w * f.coeff(n) for w, f in live) for n in range(prec)]
    return PlusForm(basis.k, prec, coeffs, exact=exact, validate=False)


@dataclass
class TripleEvaluation:
    """The three independent values of the twist series at one point s."""

    s: float
    via_coeffs: LValue
    via_twists: LValue
    via_quotients: LValue

    def pairs(self):
        named = [("coeffs", self.via_coeffs), ("twists", self.via_twists),
                 ("quotients", self.via_quotients)]
        out = []
        for i in range(3):
            for j in range(i + 1, 3):
                (na, a), (nb, b) = named[i], named[j]
                out.append((f"{na}/{nb}", float(abs(a.value - b.value)),
                            float(a.tail_bound) + float(b.tail_bound)))
        return out

    def consistent(self, rel_slack: float = 0.0) -> bool:
        scale = max(float(abs(v.value)) for v in
                    (self.via_coeffs, self.via_twists, self.via_quotients))
        return all(diff <= bound + rel_slack * scale
                   for _, diff, bound in self.pairs())

    def report(self, rel_slack: float = 0.0) -> dict:
        return {
            "s": self.s,
            "values": {
                "coeffs": float(self.via_coeffs.value),
                "twists": float(self.via_twists.value),
                "quotients": float(self.via_quotients.value),
            },
            "tails": {
                "coeffs": float(self.via_coeffs.tail_bound),
                "twists": float(self.via_twists.tail_bound),
                "quotients": float(self.via_quotients.tail_bound),
            },
            "pairwise": [
                {"pair": name, "diff": diff, "bound": bound}
                for name, diff, bound in self.pairs()
            ],
            "passed": self.consistent(rel_slack),
        }


def evaluate_triple(basis: PlusEigenbasis, weights, s: float, n_terms: int,
                    d_max: int, bits: int = 48) -> TripleEvaluation:
    g = weighted_plus_form(basis, weights)
    return TripleEvaluation(
        s,
        series_via_coefficients(g, s, n_terms),
        series_via_twists(g, s, d_max, bits=bits),
        series_via_quotients(basis, weights, s, bits=max(bits, 53)),
    )


# ---------------------------------------------------------------------------
# gamma-factor identities


def _guard_gamma_args(args, tol=1e-6):
    for a in args:
        a = float(a)
        if a < 0.5 and abs(a - round(a)) < tol and round(a) <= 0:
            raise DomainError(f"gamma argument {a} within {tol} of a pole")


def gamma_factor(s, k: int, bits: int = 128):
    """The archimedean factor of the twist series, in both closed forms.

    Returns the duplication-expanded form and the compact form as a pair;
    they agree identically, so the pair serves as a self-test.  Both are
    computed factor by factor, so every gamma argument (not only actual
    poles of the composite) must stay 1e-6 away from the nonpositive
    integers.
    """
    ss = mp.mpf(s)
    _guard_gamma_args([2 * ss, k + mp.mpf("0.5") - ss, ss, 2 * k - 2 * ss,
                       ss + mp.mpf("0.5"), k - ss])
    sign = -1 if k % 2 else 1
    with mp.workprec(bits + 24):
        gb = bits + 16
        pi_pow = mp.pi ** (k - mp.mpf("0.5") - 2 * ss)
        form_a = sign * mp.mpf(2) ** (2 * k - 4 * ss) * pi_pow \
            * lfun.real_gamma(2 * ss, gb) * lfun.real_gamma(k + mp.mpf("0.5") - ss, gb) \
            / (lfun.real_gamma(ss, gb) * lfun.real_gamma(2 * k - 2 * ss, gb))
        form_b = sign * pi_pow * lfun.real_gamma(ss + mp.mpf("0.5"), gb) \
            / lfun.real_gamma(k - ss, gb)
        return form_a, form_b


def rational_gamma_ratio(s, k: int, bits: int = 128):
    """Ratio of shifted gamma factors, reduced to its rational closed form.

    With d = k mod 2 and r = (k-d)/2 the value is
    (-1)^k * prod_{j<r} ((k+d)/2 - s + j) / prod_{j<r} (s + (1+d-k)/2 + j),
    a rational function of degree (r, r) tending to (-1)^(k+r) at infinity.
    """
    delta = k & 1
    r = (k - delta) // 2
    with mp.workprec(bits + 16):
        ss = mp.mpf(s)
        num = mp.mpf(1)
        den = mp.mpf(1)
        for j in range(r):
            den_factor = ss + mp.mpf(1 + delta - k) / 2 + j
            if abs(den_factor) < 1e-6:
                raise DomainError(f"pole of the rational ratio near s={s}")
            num *= mp.mpf(k + delta) / 2 - ss + j
            den *= den_factor
        return (-1) ** k * num / den


def rational_fit(xs, ys, deg_num: int, deg_den: int, bits: int = 256):
    """Least-squares fit of a rational function num/den with den(0-coeff)=1.

    Returns (num_coeffs, den_coeffs) ascending.  Needs at least
    deg_num + deg_den + 1 sample points.
    """
    rows = len(xs)
    cols = deg_num + 1 + deg_den
    if rows < cols:
        raise DomainError("not enough sample points for the requested degrees")
    with mp.workprec(bits):
        a = mp.matrix(rows, cols)
        rhs = mp.matrix(rows, 1)
        for i, (x, y) in enumerate(zip(xs, ys)):
            x = mp.mpf(x)
            y = mp.mpf(y)
            for j in range(deg_num + 1):
                a[i, j] = x ** j
            for j in range(1, deg_den + 1):
                a[i, deg_num + j] = -y * x ** j
            rhs[i] = y
        sol = mp.qr_solve(a, rhs)[0]
        num = [sol[j] for j in range(deg_num + 1)]
        den = [mp.mpf(1)] + [sol[deg_num + j] for j in range(1, deg_den + 1)]
        return num, den


def rational_eval(num, den, x):
    x = mp.mpf(x)
    return mp.polyval(num[::-1], x) / mp.polyval(den[::-1], x)


# ---------------------------------------------------------------------------
# numerical operator identities


def fricke_relation_check(g: PlusForm, z, tol: float = 1e-10,
                          bits: int = 192) -> dict:
    """Check (g|U4)(z) = (2|2k+1) 2^k (-2iz)^(-k-1/2) g(-1/(4z)) numerically.

    The left side sums the index-4-restricted table, the right side the full
    table at the involuted point; (-2iz) has positive real part on the upper
    half-plane, so the principal branch of the half-integral power is
    unambiguous.
    """
    zc = mp.mpc(z)
    if mp.im(zc) <= 0:
        raise DomainError("need a point in the upper half-plane")
    restricted = halfint.u4(g)
    lhs, t1 = halfint.evaluate(restricted, zc, bits=bits, tol=tol / 16)
    w = -1 / (4 * zc)
    gval, t2 = halfint.evaluate(g, w, bits=bits, tol=tol / 16)
    with mp.workprec(bits):
        pref = (-2j * zc) ** mp.mpf(-g.k - 0.5)
        eps = arith.kronecker(2, 2 * g.k + 1)
        rhs = eps * 2 ** g.k * pref * gval
        diff = float(abs(lhs - rhs))
        scale = max(1.0, float(abs(lhs)), float(abs(rhs)))
    return {
        "z": complex(zc),
        "lhs": complex(lhs),
        "rhs": complex(rhs),
        "abs_diff": diff,
        "rel_diff": diff / scale,
        "tails": (t1, t2),
        "tol": tol,
        "passed": diff <= tol * scale,
    }


def coefficient_identity_check(basis: PlusEigenbasis, d: int, p: int) -> dict:
    """Verify c(|D|p^2) - c(|D|) p a(p) = c(|D|)(a(p)(1-p) - chi_D(p) p^(k-1)).

    Holds for every eigenform in the basis, for fundamental D divisible by 4
    of the parity-matching sign and odd prime p with |D| p^2 inside the
    tables.  Exact tables give exact equality.
    """
    k = basis.k
    if d % 4 != 0 or not arith.is_fundamental_discriminant(d):
        raise DomainError(f"{d} is not a fundamental discriminant divisible by 4")
    if (d > 0) != (k % 2 == 0):
        raise DomainError(f"sign of {d} does not match parity {k}")
    if p < 3 or arith.factorize(p) != [(p, 1)]:
        raise DomainError(f"{p} is not an odd prime")
    n_big = abs(d) * p * p
    per_form = []
    worst = 0.0
    exact_all = True
    for gnu, fnu in zip(basis.forms, basis.lifts):
        if n_big >= gnu.prec:
            raise DomainError(f"need coefficient {n_big} beyond table {gnu.prec}")
        with mp.workprec(fnu.bits + 16):
            cd = gnu.coeff(abs(d))
            ap = fnu.coeff(p)
            chi = arith.kronecker(d, p)
            lhs = gnu.coeff(n_big) - cd * p * ap
            rhs = cd * (ap * (1 - p) - chi * p ** (k - 1))
            dev = abs(lhs - rhs)
            exact = gnu.exact and fnu.exact
            scale = max(1.0, float(abs(lhs)), float(abs(rhs)))
            ok = dev == 0 if exact else float(dev) <= 2.0 ** (-fnu.bits / 2) * scale
        per_form.append({
            "index": fnu.index, "lhs": lhs, "rhs": rhs,
            "deviation": float(dev), "exact": exact, "passed": ok,
        })
        worst = max(worst, float(dev) / scale)
        exact_all = exact_all and exact
    return {
        "d": d, "p": p, "exact": exact_all, "max_rel_deviation": worst,
        "passed": all(e["passed"] for e in per_form),
        "per_form": per_form,
    }
