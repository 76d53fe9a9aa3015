"""Integer and character arithmetic: Kronecker symbols, fundamental
discriminants, squarefree sieves, and small multiplicative tables.

Everything here is exact. The vectorized helpers (``jacobi_vec``,
``chi_vec``) exist for the large discriminant sweeps and agree with the
scalar ``kronecker`` everywhere.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

# ---------------------------------------------------------------------------
# primes


class PrimeTable:
    """Sorted primes up to ``limit`` with O(log) membership tests."""

    def __init__(self, limit: int):
        self.limit = int(limit)
        self.primes = _sieve_primes(self.limit)

    def __contains__(self, n: int) -> bool:
        if n > self.limit:
            raise DomainError(f"prime table only covers n <= {self.limit}")
        i = int(np.searchsorted(self.primes, n))
        return i < len(self.primes) and int(self.primes[i]) == n

    def __iter__(self):
        return iter(self.primes.tolist())

    def __len__(self):
        return len(self.primes)


def _sieve_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return np.nonzero(mask)[0].astype(np.int64)


_PRIME_CACHE: dict[int, np.ndarray] = {}


def primes_up_to(limit: int) -> np.ndarray:
    """Primes <= limit as an int64 array (cached, shared, do not mutate)."""
    limit = int(limit)
    for cap, arr in _PRIME_CACHE.items():
        if cap >= limit:
            return arr[: int(np.searchsorted(arr, limit, side="right"))]
    cap = max(limit, 1 << 16)
    arr = _sieve_primes(cap)
    _PRIME_CACHE.clear()
    _PRIME_CACHE[cap] = arr
    return arr[: int(np.searchsorted(arr, limit, side="right"))]


def smallest_prime_factors(limit: int) -> np.ndarray:
    """spf[n] = smallest prime factor of n for 2 <= n <= limit (spf[0:2] = 0)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, int(limit**0.5) + 1):
        if spf[p] == 0:
            sl = spf[p * p :: p]
            sl[sl == 0] = p
            spf[p * p :: p] = sl
    rest = np.nonzero(spf == 0)[0]
    spf[rest] = rest
    if limit >= 1:
        spf[0:2] = 0
    return spf


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division, ascending primes."""
    if n < 1:
        raise DomainError("factorize needs n >= 1")
    out = []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            if e:
                out.append((p, e))
        f += 6
    if n > 1:
        out.append((n, 1))
    return out


def mobius_up_to(limit: int) -> np.ndarray:
    """mu[n] for 0 <= n <= limit as int8 (mu[0] = 0)."""
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    # product of the distinct small primes dividing n; for squarefree n this
    # is the full part below sqrt(limit), so P[n] < n flags one large prime.
    prod = np.ones(limit + 1, dtype=np.int64)
    for p in primes_up_to(int(limit**0.5) + 1):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
        prod[p::p] *= p
    has_big = prod < np.arange(limit + 1, dtype=np.int64)
    mu[has_big] *= -1
    return mu


# ---------------------------------------------------------------------------
# Kronecker symbol


def _jacobi_odd(a: int, n: int) -> int:
    # n odd, n > 0
    a %= n
    t = 1
    while a:
        while a & 1 == 0:
            a >>= 1
            if n & 7 in (3, 5):
                t = -t
        a, n = n, a
        if a & 3 == 3 and n & 3 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), completely multiplicative in both arguments.

    Follows the standard extension: (a|0) = 1 iff a = +-1, (a|-1) = sign rule,
    (a|2) = 0, +1, -1 for a even, a = +-1 mod 8, a = +-3 mod 8.
    """
    a = int(a)
    n = int(n)
    if n == 0:
        return 1 if a in (1, -1) else 0
    sign = 1
    if n < 0:
        n = -n
        if a < 0:
            sign = -1
    if n & 1 == 0:
        if a & 1 == 0:
            return 0
        v = 0
        while n & 1 == 0:
            n >>= 1
            v += 1
        if v & 1 and a & 7 in (3, 5):
            sign = -sign
    return sign * _jacobi_odd(a, n)


def jacobi_vec(a: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Vectorized Jacobi symbol (a|n) for odd positive n (int64 arrays).

    Shapes must broadcast; returns int8. Agrees with ``kronecker`` entrywise.
    """
    a = np.array(np.broadcast_to(a, np.broadcast(a, n).shape), dtype=np.int64)
    n = np.array(np.broadcast_to(n, a.shape), dtype=np.int64)
    if not np.all(n & 1):
        raise DomainError("jacobi_vec needs odd n")
    if not np.all(n > 0):
        raise DomainError("jacobi_vec needs positive n")
    t = np.ones(a.shape, dtype=np.int8)
    a = a % n
    active = (a != 0) & (n != 1)
    while active.any():
        # strip factors of two from a
        while True:
            even = active & (a & 1 == 0) & (a != 0)
            if not even.any():
                break
            flip = even & np.isin(n & 7, (3, 5))
            t[flip] = -t[flip]
            a[even] >>= 1
        zero = active & (a == 0)
        active &= ~zero
        # reciprocity swap where still active (a odd, a < n not guaranteed)
        sw = active
        if sw.any():
            flip = sw & (a & 3 == 3) & (n & 3 == 3)
            t[flip] = -t[flip]
            an = a[sw]
            a[sw] = n[sw] % an
            n[sw] = an
        active = active & (a != 0) & (n != 1)
    t[(n != 1) & (a == 0)] = 0
    return t


_CHI2_TABLE = np.array([0, 1, 0, -1, 0, -1, 0, 1], dtype=np.int8)  # (a|2) by a mod 8


def chi_vec(d: np.ndarray, n: int) -> np.ndarray:
    """chi_D(n) = (D|n) for an array of discriminants and one fixed n >= 1."""
    d = np.asarray(d, dtype=np.int64)
    n = int(n)
    if n < 1:
        raise DomainError("chi_vec needs n >= 1")
    out = np.ones(d.shape, dtype=np.int8)
    v = 0
    while n & 1 == 0:
        n >>= 1
        v += 1
    if v & 1:
        out = _CHI2_TABLE[(d & 7).astype(np.intp)].copy()
    elif v:
        out = (_CHI2_TABLE[(d & 7).astype(np.intp)] ** 2).astype(np.int8)
    if n > 1:
        out = out * jacobi_vec(d, np.int64(n))
    return out


# ---------------------------------------------------------------------------
# fundamental discriminants


def is_squarefree(n: int) -> bool:
    if n < 1:
        raise DomainError("is_squarefree needs n >= 1")
    return all(e == 1 for _, e in factorize(n))


def is_fundamental_discriminant(d: int) -> bool:
    """True for d = 1, squarefree d = 1 mod 4, and 4m with m squarefree, m = 2,3 mod 4."""
    d = int(d)
    if d == 0:
        return False
    if d % 4 == 1:
        return is_squarefree(abs(d))
    if d % 4 == 0:
        m = d // 4
        if m % 4 in (2, 3):
            return is_squarefree(abs(m))
    return False


def squarefree_decompose(n: int, parity: int) -> tuple[int, int]:
    """Write n = |D| * m**2 with D fundamental and (-1)**parity * D > 0.

    ``parity`` is the parity of the half-integral weight index k; even parity
    asks for positive D.  Raises DomainError when no such decomposition exists
    (n = 2, 3 mod 4 for even parity, n = 1, 2 mod 4 for odd).
    """
    if n < 1:
        raise DomainError("squarefree_decompose needs n >= 1")
    s = 1
    m0 = 1
    for p, e in factorize(n):
        if e & 1:
            s *= p
        m0 *= p ** (e // 2)
    if parity % 2 == 0:
        if s % 4 == 1:
            return s, m0
        if m0 % 2 == 0:
            return 4 * s, m0 // 2
    else:
        if (-s) % 4 == 1:
            return -s, m0
        if m0 % 2 == 0:
            return -4 * s, m0 // 2
    raise DomainError(f"{n} is not |D| m^2 for a fundamental D of the requested sign")


def squarefree_mask(lo: int, hi: int) -> np.ndarray:
    """Boolean mask over the integers lo+1 .. hi marking squarefree values."""
    if hi <= lo:
        return np.zeros(0, dtype=bool)
    mask = np.ones(hi - lo, dtype=bool)
    for p in primes_up_to(int(hi**0.5) + 1):
        pp = int(p) * int(p)
        start = -(-(lo + 1) // pp) * pp  # first multiple of pp > lo
        mask[start - lo - 1 :: pp] = False
    return mask


def enumerate_discriminants(
    lo: int, hi: int, sign: int = 1, residue: str = "all"
) -> np.ndarray:
    """Fundamental discriminants D with lo < |D| <= hi and sign(D) = sign.

    ``residue`` is ``"all"`` or ``"one_mod_four"`` (keep only D = 1 mod 4).
    Returned in ascending |D| as int64.  Uses a segmented squarefree sieve,
    so ranges up to 1e8 are fine.
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    if residue not in ("all", "one_mod_four"):
        raise DomainError(f"unknown residue filter {residue!r}")
    lo = max(int(lo), 0)
    hi = int(hi)
    out = []
    block = 1 << 22
    for blo in range(lo, max(hi, lo), block):
        bhi = min(blo + block, hi)
        vals = np.arange(blo + 1, bhi + 1, dtype=np.int64)
        sq = squarefree_mask(blo, bhi)
        want = 1 if sign > 0 else 3
        odd_part = vals[sq & (vals % 4 == want)]
        pieces = [odd_part]
        if residue == "all":
            mlo, mhi = blo // 4, bhi // 4
            mv = np.arange(mlo + 1, mhi + 1, dtype=np.int64)
            msq = squarefree_mask(mlo, mhi)
            wanted = (2, 3) if sign > 0 else (1, 2)
            keep = msq & ((mv % 4 == wanted[0]) | (mv % 4 == wanted[1]))
            four_m = 4 * mv[keep]
            four_m = four_m[(four_m > blo) & (four_m <= bhi)]
            pieces.append(four_m)
        absd = np.sort(np.concatenate(pieces))
        out.append(absd)
    absd = np.concatenate(out) if out else np.zeros(0, dtype=np.int64)
    return sign * absd


def character_table(d: int) -> np.ndarray:
    """chi_D(r) for r = 0 .. |D|-1 as int8; chi_D has period |D|."""
    d = int(d)
    if d == 0:
        raise DomainError("need a nonzero discriminant")
    q = abs(d)
    return np.array([kronecker(d, r) for r in range(q)], dtype=np.int8)


# ---------------------------------------------------------------------------
# divisor sums

_INT64_MAX = (1 << 62)


def sigma_up_to(limit: int, power: int) -> list[int]:
    """Exact sigma_power(n) for 0 <= n <= limit (entry 0 is 0)."""
    if limit < 0:
        raise DomainError("limit must be >= 0")
    # the numpy path needs headroom for the divisor sum itself:
    # sigma_power(n) <= max(zeta(power), 1 + ln n) * n**power < 16 * limit**power
    if power >= 1 and limit >= 1 and (limit**power) < (1 << 55):
        d = np.arange(limit + 1, dtype=np.int64)
        sig = np.zeros(limit + 1, dtype=np.int64)
        for dd in range(1, limit + 1):
            sig[dd::dd] += d[dd] ** power
        return sig.tolist()
    sig = [0] * (limit + 1)
    for dd in range(1, limit + 1):
        dp = dd**power
        for m in range(dd, limit + 1, dd):
            sig[m] += dp
    return sig
