"""Exact Newton-basis transforms, integer tree-code encoding, and prime contexts.

The encoder maps an integer string z = (z_0, ..., z_{n-1}) to the pair
sequence ((z_0, a_0), ..., (z_{n-1}, a_{n-1})) where a is the Newton-basis
coefficient vector of z, i.e. z_i = sum_j a_j * C(i, j).  Everything here is
exact over the integers; prime-field reductions live in the decoder.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

import gmpy2

Pair = tuple[int, int]


class BoundViolation(ValueError):
    """An input value falls outside its declared alphabet bound."""


# ---------------------------------------------------------------------------
# Binomials via cached Pascal rows

_pascal: list[tuple[int, ...]] = [(1,)]


def pascal_row(i: int) -> tuple[int, ...]:
    """Row i of Pascal's triangle: (C(i,0), ..., C(i,i))."""
    while len(_pascal) <= i:
        prev = _pascal[-1]
        row = (1,) + tuple(prev[k] + prev[k + 1] for k in range(len(prev) - 1)) + (1,)
        _pascal.append(row)
    return _pascal[i]


def binomial(i: int, j: int) -> int:
    """C(i, j); zero when j > i."""
    if i < 0 or j < 0:
        raise ValueError(f"binomial expects nonnegative arguments, got ({i}, {j})")
    if j > i:
        return 0
    return pascal_row(i)[j]


# ---------------------------------------------------------------------------
# Transforms

def newton_to_eval(a: Sequence[int]) -> list[int]:
    """Evaluations z_i = sum_{j<=i} a_j * C(i, j).

    Online: z_i depends only on a_0..a_i.
    """
    out = []
    for i in range(len(a)):
        row = pascal_row(i)
        out.append(sum(a[j] * row[j] for j in range(i + 1)))
    return out


def eval_to_newton(z: Sequence[int]) -> list[int]:
    """Coefficients a_j = sum_{i<=j} (-1)^(j-i) * C(j, i) * z_i.

    Inverse of newton_to_eval; online in the same sense.
    """
    out = []
    for j in range(len(z)):
        row = pascal_row(j)
        acc = 0
        for i in range(j + 1):
            term = row[i] * z[i]
            acc += term if ((j - i) % 2 == 0) else -term
        out.append(acc)
    return out


def encode_tc(z: Sequence[int]) -> list[Pair]:
    """Tree-code encoding: pairs (z_i, a_i) with a = eval_to_newton(z)."""
    a = eval_to_newton(z)
    return list(zip(list(z), a))


def pair_hamming(x: Sequence[Pair], y: Sequence[Pair]) -> int:
    """Number of indices whose (z, a) pairs differ in either coordinate."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return sum(1 for p, q in zip(x, y) if p[0] != q[0] or p[1] != q[1])


def check_eval_bound(z: Sequence[int], z_bound: int) -> None:
    for i, v in enumerate(z):
        if abs(v) > z_bound:
            raise BoundViolation(f"|z_{i}| = {abs(v)} exceeds bound {z_bound}")


def check_received_bounds(pairs: Sequence[Pair], z_bound: int) -> None:
    """Received words must satisfy |z_i| <= Z and |a_i| <= Z * 2^n."""
    a_bound = z_bound << len(pairs)
    for i, (zv, av) in enumerate(pairs):
        if abs(zv) > z_bound:
            raise BoundViolation(f"|z_{i}| = {abs(zv)} exceeds bound {z_bound}")
        if abs(av) > a_bound:
            raise BoundViolation(f"|a_{i}| = {abs(av)} exceeds bound {a_bound}")


# ---------------------------------------------------------------------------
# Working prime

@dataclass(frozen=True)
class PrimeFieldCtx:
    """Working prime p with the (n, Z) provenance that sized it."""

    p: int
    n: int
    z_bound: int


def _ceil_sqrt(x: int) -> int:
    r = math.isqrt(x)
    return r if r * r == x else r + 1


def prime_interval(n: int, z_bound: int) -> tuple[int, int]:
    """Half-open-from-below interval (m, 2m] that the working prime must hit.

    m = max(2^(n^2) * n^(n/2), 2 * Z * 2^n), with n^(n/2) rounded up to an
    integer for odd n.
    """
    m = max((1 << (n * n)) * _ceil_sqrt(n**n), 2 * z_bound * (1 << n))
    return m, 2 * m


# product of odd primes below 1e5, built lazily; gcd against it rejects most
# composites before any modular exponentiation
_SMALL_PRIME_PRODUCT: list[int] = []


def _small_prime_product() -> int:
    if not _SMALL_PRIME_PRODUCT:
        limit = 100_000
        sieve = bytearray([1]) * limit
        sieve[0:2] = b"\x00\x00"
        for q in range(2, math.isqrt(limit) + 1):
            if sieve[q]:
                sieve[q * q :: q] = b"\x00" * len(sieve[q * q :: q])
        prod = gmpy2.mpz(1)
        for q in range(3, limit):
            if sieve[q]:
                prod *= q
        _SMALL_PRIME_PRODUCT.append(int(prod))
    return _SMALL_PRIME_PRODUCT[0]


def miller_rabin(p: int, rounds: int, rng: random.Random) -> bool:
    """Probabilistic primality test with rng-drawn bases.

    Error probability at most 4^-rounds for composite p.
    """
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13):
        if p == q:
            return True
        if p % q == 0:
            return False
    d = p - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    pz = gmpy2.mpz(p)
    dz = gmpy2.mpz(d)
    for _ in range(rounds):
        a = rng.randrange(2, p - 1)
        x = gmpy2.powmod(a, dz, pz)
        if x == 1 or x == p - 1:
            continue
        for _ in range(s - 1):
            x = (x * x) % pz
            if x == p - 1:
                break
        else:
            return False
    return True


def generate_prime(
    n: int,
    z_bound: int,
    seed: int,
    rounds: int = 100,
    max_attempts: int | None = None,
) -> PrimeFieldCtx:
    """Draw a random prime from prime_interval(n, z_bound), deterministically per seed.

    The interval provably contains a prime, so exhausting the attempt budget
    signals an implementation bug rather than bad luck.
    """
    if n < 1 or z_bound < 1:
        raise ValueError("generate_prime requires n >= 1 and z_bound >= 1")
    lo, hi = prime_interval(n, z_bound)
    if max_attempts is None:
        max_attempts = max(10_000, 60 * (hi.bit_length()))
    rng = random.Random(seed)
    filt = _small_prime_product() if hi.bit_length() > 64 else None
    for _ in range(max_attempts):
        cand = rng.randrange(lo + 1, hi + 1) | 1
        if cand > hi:
            cand -= 2
        if cand <= lo:
            continue
        if filt is not None and gmpy2.gcd(cand, filt) != 1:
            continue
        if miller_rabin(cand, rounds, rng):
            return PrimeFieldCtx(p=cand, n=n, z_bound=z_bound)
    raise RuntimeError(
        f"no prime found in ({lo}, {hi}] after {max_attempts} attempts; "
        "this indicates a bug, the interval contains a prime"
    )


# ---------------------------------------------------------------------------
# Serialization: decimal strings sidestep 64-bit limits in other tooling

def eval_vector_to_json(z: Sequence[int]) -> str:
    return json.dumps([str(v) for v in z])


def eval_vector_from_json(text: str) -> list[int]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("expected a JSON array of integers")
    return [int(v) for v in data]


def pairs_to_json(pairs: Sequence[Pair]) -> str:
    return json.dumps([[str(zv), str(av)] for zv, av in pairs])


def pairs_from_json(text: str) -> list[Pair]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("expected a JSON array of [z, a] pairs")
    out = []
    for item in data:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise ValueError(f"malformed pair: {item!r}")
        out.append((int(item[0]), int(item[1])))
    return out


def spawn_seed(seed: int, *labels) -> int:
    """Derive an independent child seed from a parent seed and labels.

    Stable across runs and platforms (sha256-based), so trial k of a seeded
    experiment is reproducible in isolation.
    """
    import hashlib

    material = repr((seed,) + tuple(labels)).encode()
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")
