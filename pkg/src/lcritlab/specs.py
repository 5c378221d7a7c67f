"""Pluggable L-function descriptions via local Euler roots.

An :class:`LFunctionSpec` carries the degree-d local roots alpha_i(p), a
growth exponent eta with |alpha_i(p)| <= p^eta, and the orthogonality
constant xi that sets the log log slope of sum_{p<=x} |beta(p)|^2 / p.
From the roots we derive the prime-power coefficients of log L,

    beta(p^r) = (1/r) * sum_i alpha_i(p)^r,

the truncated Dirichlet polynomial R_Y(s) = sum_{p^r <= Y} beta(p^r) p^{-rs},
and partial orthogonality sums. The shipped instances are GL(1): the zeta
function and Dirichlet characters, both with d = 1, eta = 0, xi = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log
from typing import Protocol

import numpy as np

from .arith import DirichletCharacter, PrimeTable, characters_mod, is_prime, primes_up_to
from .errors import EmptyDomainError


class CoefficientProvider(Protocol):
    degree: int

    def alpha(self, primes: np.ndarray) -> np.ndarray:
        """Local roots for each prime: array of shape (len(primes), degree)."""
        ...


class ZetaCoefficients:
    degree = 1

    def alpha(self, primes: np.ndarray) -> np.ndarray:
        return np.ones((len(primes), 1), dtype=np.complex128)


class DirichletCoefficients:
    """alpha(p) = chi(p); zero at primes dividing the modulus."""

    degree = 1

    def __init__(self, character: DirichletCharacter):
        self.character = character

    def alpha(self, primes: np.ndarray) -> np.ndarray:
        return self.character.on_array(np.asarray(primes))[:, None]


@dataclass(frozen=True)
class LFunctionSpec:
    label: str
    degree: int
    coeffs: CoefficientProvider
    eta: float = 0.0
    xi: float = 1.0

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        if not 0.0 <= self.eta < 0.5:
            raise ValueError("eta must lie in [0, 1/2)")
        if self.xi <= 0:
            raise ValueError("xi must be positive")

    def alpha(self, primes: np.ndarray) -> np.ndarray:
        a = self.coeffs.alpha(np.asarray(primes, dtype=np.int64))
        if a.shape != (len(np.atleast_1d(primes)), self.degree):
            raise ValueError("coefficient provider returned wrong shape")
        return a


@dataclass(frozen=True)
class PrimePowerCoefficient:
    p: int
    r: int
    value: complex

    def bound(self, degree: int, eta: float) -> float:
        return degree / self.r * self.p ** (self.r * eta)


def beta_coeff(spec: LFunctionSpec, p: int, r: int) -> complex:
    """beta(p^r) = (1/r) sum_i alpha_i(p)^r."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if not is_prime(p):
        raise EmptyDomainError(f"{p} is not prime")
    a = spec.alpha(np.array([p], dtype=np.int64))[0]
    return complex(np.sum(a**r) / r)


def beta_array(spec: LFunctionSpec, primes: np.ndarray, r: int) -> np.ndarray:
    """Vectorized beta(p^r) over a prime array."""
    a = spec.alpha(primes)
    return np.sum(a**r, axis=1) / r


def max_prime_power_exponent(Y: float) -> int:
    """Largest r with 2^r <= Y (0 if Y < 2)."""
    if Y < 2:
        return 0
    return int(log(Y) / log(2) + 1e-9)


def ry_eval(spec: LFunctionSpec, Y: float, s: complex, table: PrimeTable | None = None) -> complex:
    """Truncated log-series R_Y(s) = sum_{p^r <= Y} beta(p^r) p^{-rs}.

    The sum is exact and finite; Y < 2 gives 0. Requires Re(s) > 0.
    """
    if complex(s).real <= 0:
        raise ValueError("Re(s) must be positive")
    if Y < 2:
        return 0.0 + 0.0j
    if table is None or table.limit < int(Y):
        table = primes_up_to(int(Y))
    total = 0.0 + 0.0j
    for r in range(1, max_prime_power_exponent(Y) + 1):
        pmax = int(Y ** (1.0 / r) + 1e-9)
        ps = table.up_to(pmax)
        if len(ps) == 0:
            break
        b = beta_array(spec, ps, r)
        total += complex(np.sum(b * np.exp(-r * s * np.log(ps.astype(np.float64)))))
    return total


def selberg_partial_sum(spec: LFunctionSpec, x: float, table: PrimeTable | None = None) -> float:
    """sum_{p <= x} |beta(p)|^2 / p; grows like xi * log log x + const."""
    if x < 2:
        raise EmptyDomainError("the sum over primes <= x is empty for x < 2")
    if table is None or table.limit < int(x):
        table = primes_up_to(int(x))
    ps = table.up_to(x)
    b = beta_array(spec, ps, 1)
    return float(np.sum(np.abs(b) ** 2 / ps))


def selberg_cross_sum(
    spec_a: LFunctionSpec, spec_b: LFunctionSpec, x: float, table: PrimeTable | None = None
) -> complex:
    """sum_{p <= x} beta_a(p) * conj(beta_b(p)) / p.

    For distinct primitive inputs this stays bounded while the diagonal
    case grows like xi * log log x.
    """
    if x < 2:
        raise EmptyDomainError("the sum over primes <= x is empty for x < 2")
    if table is None or table.limit < int(x):
        table = primes_up_to(int(x))
    ps = table.up_to(x)
    ba = beta_array(spec_a, ps, 1)
    bb = beta_array(spec_b, ps, 1)
    return complex(np.sum(ba * np.conj(bb) / ps))


# --- registry -------------------------------------------------------------

_MAX_SHIPPED_MODULUS = 100

_registry: dict[str, LFunctionSpec] = {}


def register_spec(spec: LFunctionSpec) -> None:
    """Register a user spec; coefficient providers must be pure functions."""
    _registry[spec.label] = spec


def get_spec(label: str) -> LFunctionSpec:
    """Resolve a spec label.

    Built-in labels: ``"zeta"`` and ``"dirichlet:q=<q>:index=<i>"`` for
    q <= 100, index in 0..phi(q)-1 following the canonical enumeration of
    :func:`lcritlab.arith.characters_mod`.
    """
    if label in _registry:
        return _registry[label]
    if label == "zeta":
        spec = LFunctionSpec(label="zeta", degree=1, coeffs=ZetaCoefficients(), eta=0.0, xi=1.0)
    elif label.startswith("dirichlet:"):
        try:
            parts = dict(kv.split("=") for kv in label.split(":")[1:])
            q = int(parts["q"])
            index = int(parts["index"])
        except (KeyError, ValueError) as exc:
            raise ValueError(f"malformed dirichlet label {label!r}") from exc
        if not 1 <= q <= _MAX_SHIPPED_MODULUS:
            raise ValueError(f"shipped dirichlet specs cover moduli 1..{_MAX_SHIPPED_MODULUS}")
        chars = characters_mod(q)
        if not 0 <= index < len(chars):
            raise ValueError(f"index {index} out of range for modulus {q} ({len(chars)} characters)")
        spec = LFunctionSpec(
            label=label, degree=1, coeffs=DirichletCoefficients(chars[index]), eta=0.0, xi=1.0
        )
    else:
        raise KeyError(f"unknown spec label {label!r}")
    _registry[label] = spec
    return spec
