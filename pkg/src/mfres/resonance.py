"""Resonator experiments over quadratic-twist families.

A resonator is a short Dirichlet polynomial R(D) = sum r(n) lam1(n) chi_D(n)
over squarefree products of primes from a fixed window, designed so that
weighting a family of central L-values by R(D)^2 tilts the average toward
discriminants where the distinguished form's values run large.  This module
builds resonators, takes their moments over the discriminant family
X < (-1)^k D <= 2X with D = 1 mod 4, evaluates character sums with their
square/non-square main terms, predicts the weighted-to-unweighted shift from
coefficient data alone, and searches the top of the R(D)^2 ranking for
extreme L-values.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import arith, lfun
from .errors import DomainError, TableExhaustedError
from .modforms import Eigenform

_BLOCK = 1 << 16


def family_discriminants(x: int, k: int) -> np.ndarray:
    """Fundamental D = 1 mod 4, (-1)^k D > 0, X < |D| <= 2X, ascending |D|."""
    if x < 1:
        raise DomainError("family start must be positive")
    sign = 1 if k % 2 == 0 else -1
    return arith.enumerate_discriminants(x, 2 * x, sign=sign,
                                         residue="one_mod_four")


@dataclass
class Resonator:
    """Support, weights, and window data of one resonator polynomial.

    ``weights[i]`` is r(support[i]) * lam1(support[i]); both factors are
    multiplicative over the squarefree support, so they are accumulated
    along the DFS that enumerates products of window primes up to the cap.
    ``diag_factors`` carries prod_{odd p | n} p/(p+1) for the diagonal main
    term.  A resonator with support {1} is degenerate: R(D) = 1 identically.
    """

    k: int
    cap: int
    scale: float
    window: tuple
    strength: float
    degenerate: bool
    primes: np.ndarray
    prime_r: np.ndarray
    prime_lam: np.ndarray
    support: np.ndarray
    weights: np.ndarray
    diag_factors: np.ndarray = field(repr=False)


def build_resonator(x: int, k: int, f1: Eigenform,
                    overrides: dict | None = None) -> Resonator:
    """Resonator for the family at X, defaulting to the asymptotic recipe.

    Defaults: cap N = X^(1/24), scale L = (1/8) sqrt(log N log log N), prime
    window [L^2, L^4], prime weight r(p) = strength * L / (sqrt(p) log p).
    The defaults degenerate at any reachable X (N collapses to 1); explicit
    overrides {N, L, window, strength} select the experimental regime, and
    the returned object records which one was used.
    """
    if f1.weight != 2 * k:
        raise DomainError(f"form of weight {f1.weight} does not match k={k}")
    overrides = dict(overrides or {})
    unknown = set(overrides) - {"N", "L", "window", "strength"}
    if unknown:
        raise DomainError(f"unknown resonator overrides {sorted(unknown)}")
    cap = int(overrides.pop("N", int(float(x) ** (1 / 24))))
    if cap >= 3:
        default_scale = math.sqrt(math.log(cap) * math.log(math.log(cap))) / 8
    else:
        default_scale = 0.0
    scale = float(overrides.pop("L", default_scale))
    window = overrides.pop("window", (scale ** 2, scale ** 4))
    strength = float(overrides.pop("strength", 1.0))
    lo, hi = float(window[0]), float(window[1])

    if hi >= lo and hi >= 2:
        if hi > f1.prec_primes:
            raise TableExhaustedError(
                f"window reaches {hi}, coefficient table stops at {f1.prec_primes}",
                needed=math.ceil(hi),
            )
        primes = arith.primes_up_to(math.floor(hi))
        primes = primes[primes >= lo].astype(np.int64)
    else:
        primes = np.zeros(0, dtype=np.int64)
    primes = primes[primes <= cap]
    prime_r = np.array([strength * scale / (math.sqrt(p) * math.log(p))
                        for p in primes.tolist()])
    prime_lam = np.array([f1.lam(int(p)) for p in primes.tolist()])

    support = [1]
    weights = [1.0]
    diag = [1.0]

    def dfs(start, n, w, fac):
        for i in range(start, primes.size):
            p = int(primes[i])
            m = n * p
            if m > cap:
                break
            wp = w * prime_r[i] * prime_lam[i]
            fp = fac * (p / (p + 1) if p > 2 else 1.0)
            support.append(m)
            weights.append(wp)
            diag.append(fp)
            dfs(i + 1, m, wp, fp)

    dfs(0, 1, 1.0, 1.0)
    order = np.argsort(np.array(support, dtype=np.int64))
    return Resonator(
        k=k, cap=cap, scale=scale, window=(lo, hi), strength=strength,
        degenerate=len(support) == 1,
        primes=primes, prime_r=prime_r, prime_lam=prime_lam,
        support=np.array(support, dtype=np.int64)[order],
        weights=np.array(weights)[order],
        diag_factors=np.array(diag)[order],
    )


def resonator_value(res: Resonator, d: int) -> float:
    """R(D) as an exact-as-float sum over the support."""
    total = 0.0
    for n, w in zip(res.support.tolist(), res.weights.tolist()):
        total += w * arith.kronecker(int(d), n)
    return total


def resonator_values(res: Resonator, ds: np.ndarray) -> np.ndarray:
    """R(D) over an array of discriminants, blocked for deterministic order."""
    out = np.empty(ds.size)
    for lo in range(0, ds.size, _BLOCK):
        blk = ds[lo:lo + _BLOCK]
        acc = np.full(blk.size, float(res.weights[0]))
        for n, w in zip(res.support.tolist()[1:], res.weights.tolist()[1:]):
            acc += w * arith.chi_vec(blk, n)
        out[lo:lo + _BLOCK] = acc
    return out


def norm_product(res: Resonator) -> float:
    """prod over window primes of (1 + r(p)^2 lam1(p)^2), the diagonal proxy."""
    w = res.prime_r * res.prime_lam
    return float(np.prod(1.0 + w * w))


@dataclass
class ResonatorStats:
    calR: float
    moment2: float
    moment6: float
    count: int
    diagonal_main: float

    def holder_consistent(self) -> bool:
        return self.moment2 <= self.count ** (2 / 3) * self.moment6 ** (1 / 3) \
            * (1 + 1e-12)


def moments(res: Resonator, x: int, k: int) -> ResonatorStats:
    """Brute second and sixth moments of R(D) over the family at X.

    Also the exact diagonal main term
    X/(2 zeta(2)) * sum_n r(n)^2 lam1(n)^2 prod_{p | 2n} p/(p+1),
    which the second moment tracks once off-diagonal terms are subordinate.
    """
    if k != res.k:
        raise DomainError("parity mismatch between resonator and family")
    ds = family_discriminants(x, k)
    m2 = 0.0
    m6 = 0.0
    for lo in range(0, ds.size, _BLOCK):
        r = resonator_values(res, ds[lo:lo + _BLOCK])
        r2 = r * r
        m2 += float(r2.sum())
        m6 += float((r2 * r2 * r2).sum())
    zeta2 = math.pi ** 2 / 6
    diag = x / (2 * zeta2) * (2 / 3) \
        * float(np.dot(res.weights * res.weights, res.diag_factors))
    return ResonatorStats(calR=norm_product(res), moment2=m2, moment6=m6,
                          count=int(ds.size), diagonal_main=diag)


def family_charsum(u: int, x: int, parity: int):
    """(brute, main): sum of chi_D(u) over the family, and its main term.

    For square u the sum counts discriminants coprime to u, with main term
    X/(2 zeta(2)) prod_{p | 2u} p/(p+1); for non-square u cancellation
    drives it toward zero and the main term is 0 by convention.
    """
    if u < 1 or u % 2 == 0:
        raise DomainError("need odd positive u")
    if u > x:
        raise DomainError("need u <= X")
    ds = family_discriminants(x, parity)
    brute = 0
    for lo in range(0, ds.size, _BLOCK):
        brute += int(arith.chi_vec(ds[lo:lo + _BLOCK], u).sum())
    root = math.isqrt(u)
    if root * root == u:
        main = x / (2 * (math.pi ** 2 / 6)) * (2 / 3)
        for p, _ in arith.factorize(u):
            main *= p / (p + 1)
    else:
        main = 0.0
    return brute, main


# ---------------------------------------------------------------------------
# smooth windows


def _smooth_step(x: np.ndarray) -> np.ndarray:
    # exp(-1/x) / (exp(-1/x) + exp(-1/(1-x))) extended by 0 and 1
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.maximum(1.0 - x, 1e-300)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class SmoothWindow:
    """C-infinity bump: 0 off ``support``, 1 on ``plateau``, monotone between."""

    support: tuple
    plateau: tuple

    def __post_init__(self):
        a, d = self.support
        b, c = self.plateau
        if not a < b <= c < d:
            raise DomainError("need support_lo < plateau <= plateau < support_hi")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        a, d = self.support
        b, c = self.plateau
        rise = _smooth_step((t - a) / (b - a))
        fall = _smooth_step((d - t) / (d - c))
        out = np.minimum(rise, fall)
        return float(out) if out.ndim == 0 else out

    def integral(self, tol: float = 1e-12) -> float:
        a, d = self.support
        return _adaptive_simpson(self, a, d, tol)

    @staticmethod
    def unit_window() -> "SmoothWindow":
        return SmoothWindow((1.0, 2.0), (1.1, 1.9))

    @staticmethod
    def wide_window() -> "SmoothWindow":
        return SmoothWindow((0.5, 2.5), (1.0, 2.0))


def _adaptive_simpson(fn, a: float, b: float, tol: float) -> float:
    def simpson(lo, hi):
        mid = (lo + hi) / 2
        return (hi - lo) / 6 * (fn(lo) + 4 * fn(mid) + fn(hi)), mid

    def recurse(lo, hi, whole, eps, depth):
        mid = (lo + hi) / 2
        left, _ = simpson(lo, mid)
        right, _ = simpson(mid, hi)
        if depth > 48 or abs(left + right - whole) <= 15 * eps:
            return left + right + (left + right - whole) / 15
        return recurse(lo, mid, left, eps / 2, depth + 1) \
            + recurse(mid, hi, right, eps / 2, depth + 1)

    whole, _ = simpson(a, b)
    return recurse(a, b, whole, tol, 0)


# ---------------------------------------------------------------------------
# L-weighted sums and the shift


def weighted_lsum(res: Resonator, x: int, k: int, f: Eigenform,
                  window_fn: SmoothWindow, bits: int = 46) -> float:
    """sum over the window's discriminants of L(f, chi_D, k) R(D)^2 Phi(|D|/X)."""
    if f.weight != 2 * k:
        raise DomainError("weight mismatch")
    lo, hi = window_fn.support
    sign = 1 if k % 2 == 0 else -1
    ds = arith.enumerate_discriminants(math.floor(lo * x), math.ceil(hi * x),
                                       sign=sign, residue="one_mod_four")
    phi = window_fn(np.abs(ds) / x)
    keep = phi > 0
    ds, phi = ds[keep], phi[keep]
    if ds.size == 0:
        return 0.0
    r = resonator_values(res, ds)
    sweep = lfun.central_sweep([f], ds, bits=bits)
    return float(np.dot(sweep.values[0], r * r * phi))


def observed_shift(res: Resonator, x: int, k: int, f: Eigenform,
                   window_fn: SmoothWindow | None = None, bits: int = 46,
                   precomputed=None) -> dict:
    """Weighted-over-unweighted mean ratio of central values on the family.

    ``precomputed`` may carry (ds, lvalues) from an earlier sweep of the
    same family to avoid recomputation.
    """
    if precomputed is not None:
        ds, lvals = precomputed
        phi = np.ones(ds.size) if window_fn is None \
            else window_fn(np.abs(ds) / x)
    elif window_fn is None:
        ds = family_discriminants(x, k)
        phi = np.ones(ds.size)
        lvals = lfun.central_sweep([f], ds, bits=bits).values[0]
    else:
        lo, hi = window_fn.support
        sign = 1 if k % 2 == 0 else -1
        ds = arith.enumerate_discriminants(math.floor(lo * x),
                                           math.ceil(hi * x),
                                           sign=sign, residue="one_mod_four")
        phi = window_fn(np.abs(ds) / x)
        keep = phi > 0
        ds, phi = ds[keep], phi[keep]
        lvals = lfun.central_sweep([f], ds, bits=bits).values[0]
    r = resonator_values(res, ds)
    r2 = r * r
    weighted = float(np.dot(lvals, r2 * phi)) / float(np.dot(r2, phi))
    unweighted = float(np.dot(lvals, phi)) / float(phi.sum())
    return {
        "weighted_mean": weighted,
        "unweighted_mean": unweighted,
        "ratio": weighted / unweighted if unweighted else math.inf,
    }


def predicted_shift(res: Resonator, f_target: Eigenform) -> float:
    """exp of sum over window primes of 2 r(p) lam1(p) lam_target(p)/sqrt(p).

    The pure-coefficient prediction of the weighted mean shift; for the
    resonated form itself every summand is a positive square, so the shift
    exceeds 1; for an orthogonal form sign cancellation keeps it smaller.
    """
    total = 0.0
    for i, p in enumerate(res.primes.tolist()):
        total += 2 * float(res.prime_r[i]) * float(res.prime_lam[i]) \
            * f_target.lam(p) / math.sqrt(p)
    return math.exp(total)


def extreme_threshold(x: int) -> float:
    """The asymptotic large-value benchmark exp((1/40) sqrt(log X / log log X)).

    Reported for context only; at reachable X it is barely above 1 and is
    never asserted against.
    """
    lx = math.log(x)
    return math.exp(math.sqrt(lx / math.log(lx)) / 40)


def waldspurger_constants(basis, lifts=None, n_fit: int = 5,
                          bits: int = 96) -> list[float]:
    """Fitted proportionality constants c(|D|)^2 / (|D|^(k-1/2) L(f, chi_D, k)).

    One constant per eigenform, averaged over the first ``n_fit`` admissible
    discriminants with nonvanishing coefficient.
    """
    lifts = basis.lifts if lifts is None else lifts
    sign = 1 if basis.k % 2 == 0 else -1
    out = []
    for g, f in zip(basis.forms, lifts):
        ratios = []
        for n in range(1, g.prec):
            if len(ratios) >= n_fit:
                break
            d = sign * n
            if not arith.is_fundamental_discriminant(d):
                continue
            c = g.coeff(n)
            if not c:
                continue
            lv = lfun.central_lvalue(f, d, bits=bits)
            ratios.append(float(c) ** 2 / (n ** (basis.k - 0.5) * float(lv.value)))
        if not ratios:
            raise DomainError("no admissible nonvanishing coefficients to fit")
        out.append(sum(ratios) / len(ratios))
    return out


def search_large(res: Resonator, x: int, k: int, basis, a_factor: float = 1.0,
                 top_fraction: float = 0.01, bits: int = 46,
                 lifts=None) -> dict:
    """Rank the family by R(D)^2 and inspect the top fraction's L-values.

    The distinguished form is swept over the whole family (for the global
    mean); the remaining forms only over the top slice.  Reports the best
    discriminant, whether its first L-value dominates a_factor times the
    rest, a Waldspurger-based lower bound on |c(|D|)| there, and the
    top-versus-global mean shift.
    """
    lifts = basis.lifts if lifts is None else lifts
    if basis.k != k:
        raise DomainError("parity mismatch")
    ds = family_discriminants(x, k)
    if ds.size == 0:
        raise DomainError("empty discriminant family")
    r2 = resonator_values(res, ds) ** 2
    order = np.argsort(-r2, kind="stable")
    n_top = max(1, math.ceil(top_fraction * ds.size))
    top_idx = order[:n_top]
    top_ds = ds[top_idx]

    lead = lfun.central_sweep([lifts[0]], ds, bits=bits).values[0]
    if len(lifts) > 1:
        rest = lfun.central_sweep(lifts[1:], top_ds, bits=bits).values
    else:
        rest = []
    consts = waldspurger_constants(basis, lifts=lifts)

    top = []
    for j in range(n_top):
        d = int(top_ds[j])
        lvals = [float(lead[top_idx[j]])] + [float(v[j]) for v in rest]
        c_low = math.sqrt(max(consts[0] * abs(d) ** (k - 0.5) * lvals[0], 0.0))
        top.append({"D": d, "R2": float(r2[top_idx[j]]), "L": lvals,
                    "waldspurger_c_lower": c_low})

    best = top[0]
    condition = best["L"][0] > a_factor * sum(best["L"][1:])
    top_mean = float(lead[top_idx].mean())
    global_mean = float(lead.mean())
    return {
        "best": best,
        "condition_holds": bool(condition),
        "a_factor": a_factor,
        "threshold": extreme_threshold(x),
        "top": top,
        "top_mean": top_mean,
        "global_mean": global_mean,
        "shift_observed": top_mean / global_mean if global_mean else math.inf,
        "count": int(ds.size),
    }
