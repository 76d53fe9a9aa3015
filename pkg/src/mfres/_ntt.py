"""Exact integer convolution via number-theoretic transforms.

Several word-sized primes p = c * 2^v + 1 are used; the convolution is done
modulo each prime with vectorized int64 radix-2 transforms and the results
are recombined by CRT.  The prime count is chosen from a rigorous bound on
the largest possible output coefficient, so the result is exact for
arbitrarily large (signed) integer inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import PrecisionError

_MR_BASES = (2, 3, 5, 7)  # deterministic below 3,215,031,751


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _small_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def _generator(p: int) -> int:
    qs = _small_factors(p - 1)
    g = 2
    while True:
        if all(pow(g, (p - 1) // q, p) != 1 for q in qs):
            return g
        g += 1


def _build_pool() -> list[tuple[int, int, int]]:
    """(p, v2(p-1), generator) for primes c * 2^20 + 1 < 2^31, largest first."""
    pool = []
    for c in range(2047, 0, -1):
        p = c * (1 << 20) + 1
        if _is_prime(p):
            v = 20
            cc = c
            while cc % 2 == 0:
                cc //= 2
                v += 1
            pool.append((p, v, _generator(p)))
    return pool


_POOL: list[tuple[int, int, int]] | None = None


def _pool() -> list[tuple[int, int, int]]:
    global _POOL
    if _POOL is None:
        _POOL = _build_pool()
    return _POOL


def _select_primes(bound: int, v_needed: int) -> list[tuple[int, int]]:
    """Primes (p, g) with 2^v_needed | p - 1 whose product exceeds 2*bound."""
    target = 2 * bound + 1
    chosen = []
    prod = 1
    for p, v, g in _pool():
        if v < v_needed:
            continue
        chosen.append((p, g))
        prod *= p
        if prod > target:
            return chosen
    raise PrecisionError(
        f"coefficient bound 2^{bound.bit_length()} exceeds NTT modulus capacity"
    )


# twiddle cache: (p, g, size) -> (w, winv, n_inv); keep it small
_TWIDDLES: dict[tuple[int, int, int], tuple[np.ndarray, np.ndarray, int]] = {}


def _twiddles(p: int, g: int, size: int):
    key = (p, g, size)
    hit = _TWIDDLES.get(key)
    if hit is not None:
        return hit
    if len(_TWIDDLES) > 48:
        _TWIDDLES.clear()
    root = pow(g, (p - 1) // size, p)
    w = np.empty(size // 2, dtype=np.int64)
    acc = 1
    for i in range(size // 2):
        w[i] = acc
        acc = acc * root % p
    rinv = pow(root, p - 2, p)
    winv = np.empty(size // 2, dtype=np.int64)
    acc = 1
    for i in range(size // 2):
        winv[i] = acc
        acc = acc * rinv % p
    entry = (w, winv, pow(size, p - 2, p))
    _TWIDDLES[key] = entry
    return entry


def _forward(a: np.ndarray, p: int, w: np.ndarray) -> None:
    """In-place DIF transform; output in bit-reversed order."""
    n = a.size
    m = n
    while m >= 2:
        half = m >> 1
        blk = a.reshape(-1, m)
        u = blk[:, :half]
        v = blk[:, half:]
        tw = w[0 : n >> 1 : n // m]
        diff = (u - v) % p
        np.add(u, v, out=u)
        u %= p
        np.multiply(diff, tw, out=v)
        v %= p
        m = half


def _inverse(a: np.ndarray, p: int, winv: np.ndarray, n_inv: int) -> None:
    """In-place DIT transform consuming bit-reversed input; natural output."""
    n = a.size
    m = 2
    while m <= n:
        half = m >> 1
        blk = a.reshape(-1, m)
        u = blk[:, :half]
        v = blk[:, half:]
        tw = winv[0 : n >> 1 : n // m]
        t = v * tw % p
        np.subtract(u, t, out=v)
        v %= p
        np.add(u, t, out=u)
        u %= p
        m <<= 1
    a *= n_inv
    a %= p


def _residues(vals: list, p: int) -> np.ndarray:
    try:
        arr = np.asarray(vals, dtype=np.int64)
    except OverflowError:
        return np.array([v % p for v in vals], dtype=np.int64)
    return arr % p


def convolve_exact(a: list, b: list, out_len: int, bound: int) -> list[int]:
    """Exact signed convolution of integer sequences, truncated to out_len.

    ``bound`` must dominate the absolute value of every output coefficient;
    the caller computes it as min(nnz) * max|a| * max|b|.
    """
    full = len(a) + len(b) - 1
    out_len = min(out_len, full)
    size = 1 << max(full - 1, 1).bit_length()
    if size < full:
        size <<= 1
    v_needed = size.bit_length() - 1
    primes = _select_primes(max(bound, 1), v_needed)

    residue_out = []
    for p, g in primes:
        w, winv, n_inv = _twiddles(p, g, size)
        fa = np.zeros(size, dtype=np.int64)
        fa[: len(a)] = _residues(a, p)
        _forward(fa, p, w)
        fb = np.zeros(size, dtype=np.int64)
        fb[: len(b)] = _residues(b, p)
        _forward(fb, p, w)
        np.multiply(fa, fb, out=fa)
        fa %= p
        del fb
        _inverse(fa, p, winv, n_inv)
        residue_out.append(fa[:out_len].copy())
        del fa

    return _crt(residue_out, [p for p, _ in primes])


def _crt(residues: list[np.ndarray], primes: list[int]) -> list[int]:
    if len(primes) == 1:
        p = primes[0]
        x = residues[0]
        x = np.where(x > p >> 1, x - p, x)
        return x.tolist()
    if len(primes) == 2:
        p1, p2 = primes
        inv = pow(p1, -1, p2)
        r1, r2 = residues
        t = (r2 - r1) % p2 * inv % p2
        x = r1 + p1 * t
        m = p1 * p2
        x = np.where(x > m >> 1, x - m, x)
        return x.tolist()
    # pair up moduli with int64 Garner first, then finish in objects
    combined: list[tuple[np.ndarray, int]] = []
    i = 0
    while i + 1 < len(primes):
        p1, p2 = primes[i], primes[i + 1]
        inv = pow(p1, -1, p2)
        t = (residues[i + 1] - residues[i]) % p2 * inv % p2
        combined.append((residues[i] + p1 * t, p1 * p2))
        i += 2
    if i < len(primes):
        combined.append((residues[i], primes[i]))
    x = combined[0][0].astype(object)
    m = combined[0][1]
    for r, p in combined[1:]:
        inv = pow(m % p, -1, p)
        t = (r - x) % p
        t = t * inv % p
        x = x + m * t
        m = m * p
    half = m >> 1
    mask = x > half
    x[mask] -= m
    return x.tolist()
