"""Prime sieve, Bernoulli numbers and Dirichlet character tables.

Everything here is exact integer/rational arithmetic or tables of roots of
unity; the rest of the package consumes these as read-only data.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

from .errors import EmptyDomainError

_SIEVE_BLOCK = 1 << 20

# Construction cap for character tables; moduli beyond this are rejected
# rather than optimized.
MAX_CHARACTER_MODULUS = 10_000


@dataclass(frozen=True)
class PrimeTable:
    """All primes up to ``limit``, ascending."""

    limit: int
    primes: np.ndarray

    def __len__(self) -> int:
        return len(self.primes)

    def up_to(self, x: float) -> np.ndarray:
        """Primes <= x as a view into the table (requires x <= limit)."""
        if x > self.limit:
            raise ValueError(f"table only covers primes <= {self.limit}, asked for {x}")
        return self.primes[: int(np.searchsorted(self.primes, int(x), side="right"))]


def primes_up_to(limit: int) -> PrimeTable:
    """Segmented sieve of Eratosthenes.

    Raises EmptyDomainError for limit < 2.
    """
    limit = int(limit)
    if limit < 2:
        raise EmptyDomainError(f"no primes below 2 (limit={limit})")
    root = isqrt(limit)
    base = np.ones(root + 1, dtype=bool)
    base[:2] = False
    for p in range(2, isqrt(root) + 1):
        if base[p]:
            base[p * p :: p] = False
    base_primes = np.flatnonzero(base)

    chunks = [base_primes[base_primes <= limit]]
    lo = root + 1
    while lo <= limit:
        hi = min(lo + _SIEVE_BLOCK, limit + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base_primes:
            p = int(p)
            start = ((lo + p - 1) // p) * p
            seg[start - lo :: p] = False
        chunks.append(np.flatnonzero(seg) + lo)
        lo = hi
    primes = np.concatenate(chunks).astype(np.int64)
    return PrimeTable(limit=limit, primes=primes)


def is_prime(n: int) -> bool:
    """Trial division; fine at desk scale."""
    n = int(n)
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def bernoulli_numbers(count: int) -> list[Fraction]:
    """Exact Bernoulli numbers B_0 .. B_{2*count} as Fractions.

    Sign convention: B_1 = -1/2 (the one produced by
    sum_{k=0}^{m} C(m+1,k) B_k = 0, and the one the Euler-Maclaurin
    formulas in :mod:`lcritlab.evaluate` assume). Odd indices > 1 are zero.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    m_max = 2 * count
    out = [Fraction(1)]
    for m in range(1, m_max + 1):
        acc = Fraction(0)
        binom = 1  # C(m+1, k) built incrementally
        for k in range(m):
            acc += binom * out[k]
            binom = binom * (m + 1 - k) // (k + 1)
        out.append(-acc / (m + 1))
    return out


@dataclass(frozen=True)
class DirichletCharacter:
    """Value table of one Dirichlet character mod q.

    ``values[n]`` is chi(n) for n in 0..q-1; zero where gcd(n, q) > 1,
    a root of unity elsewhere. ``index`` is the position in the canonical
    enumeration produced by :func:`characters_mod` (0 = principal).
    """

    modulus: int
    values: np.ndarray
    is_principal: bool
    index: int = 0

    def __call__(self, n: int) -> complex:
        return complex(self.values[n % self.modulus])

    def on_array(self, n: np.ndarray) -> np.ndarray:
        return self.values[np.mod(n, self.modulus)]


def _factorize(q: int) -> list[tuple[int, int]]:
    out = []
    for p in range(2, isqrt(q) + 1):
        if q % p == 0:
            e = 0
            while q % p == 0:
                q //= p
                e += 1
            out.append((p, e))
    if q > 1:
        out.append((q, 1))
    return out


def _primitive_root(p: int, e: int) -> int:
    """A generator of the (cyclic) unit group mod p^e, p odd prime."""
    phi_p = p - 1
    factors = [f for f, _ in _factorize(phi_p)]
    g = 2
    while True:
        if all(pow(g, phi_p // f, p) != 1 for f in factors):
            break
        g += 1
    if e == 1:
        return g
    # g or g + p generates mod p^2, and then mod every higher power
    if pow(g, phi_p, p * p) == 1:
        g += p
    return g


def _unit_group_components(q: int) -> list[tuple[int, int]]:
    """Cyclic decomposition of (Z/qZ)* as [(generator mod q, order), ...].

    The power-of-two part contributes (-1, 3) generators for 2^e, e >= 3.
    Generators are lifted to mod q via CRT (congruent to 1 at the other
    prime-power components).
    """
    comps: list[tuple[int, int]] = []  # (generator mod pe, order, pe)
    raw = []
    for p, e in _factorize(q):
        pe = p**e
        if p == 2:
            if e == 1:
                continue  # trivial group
            if e == 2:
                raw.append((3, 2, pe))
            else:
                raw.append((pe - 1, 2, pe))  # -1
                raw.append((3, 2 ** (e - 2), pe))
        else:
            raw.append((_primitive_root(p, e), p ** (e - 1) * (p - 1), pe))
    for g, order, pe in raw:
        rest = q // pe
        if rest == 1:
            comps.append((g % q, order))
        else:
            # CRT: congruent to g mod pe, to 1 mod q/pe
            inv = pow(pe, -1, rest)
            lifted = (g + pe * ((1 - g) * inv % rest)) % q
            comps.append((lifted, order))
    return comps


def characters_mod(q: int) -> list[DirichletCharacter]:
    """All phi(q) Dirichlet characters mod q, principal first.

    Characters are indexed by exponent tuples against the cyclic
    decomposition of (Z/qZ)*, enumerated in row-major order, so the
    enumeration is stable for a fixed q.
    """
    q = int(q)
    if q < 1:
        raise EmptyDomainError(f"modulus must be >= 1, got {q}")
    if q > MAX_CHARACTER_MODULUS:
        raise ValueError(f"modulus {q} exceeds supported bound {MAX_CHARACTER_MODULUS}")
    if q == 1:
        values = np.ones(1, dtype=np.complex128)
        return [DirichletCharacter(modulus=1, values=values, is_principal=True, index=0)]

    comps = _unit_group_components(q)
    units = [n for n in range(q) if gcd(n, q) == 1]

    # discrete logs: unit -> exponent tuple, by enumerating the full group
    orders = [order for _, order in comps]
    dlog: dict[int, tuple[int, ...]] = {}
    exps = [0] * len(comps)
    total = 1
    for s in orders:
        total *= s
    val = 1
    # iterate the group as a product of cyclic factors, last factor fastest
    for counter in range(total):
        rem = counter
        e = []
        for s in reversed(orders):
            e.append(rem % s)
            rem //= s
        e.reverse()
        val = 1
        for (g, _), k in zip(comps, e):
            val = val * pow(g, k, q) % q
        dlog[val] = tuple(e)
    assert len(dlog) == len(units), "unit group enumeration incomplete"

    chars: list[DirichletCharacter] = []
    for idx in range(total):
        rem = idx
        kvec = []
        for s in reversed(orders):
            kvec.append(rem % s)
            rem //= s
        kvec.reverse()
        values = np.zeros(q, dtype=np.complex128)
        for n in units:
            e = dlog[n]
            phase = sum(k * ej / s for k, ej, s in zip(kvec, e, orders))
            values[n] = cmath.exp(2j * cmath.pi * phase)
        chars.append(
            DirichletCharacter(
                modulus=q,
                values=values,
                is_principal=all(k == 0 for k in kvec),
                index=idx,
            )
        )
    return chars
