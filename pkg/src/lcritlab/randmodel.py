"""Random Euler products: sampling log L(sigma, X) and its moment oracles.

X assigns one uniform unit-circle value per prime; the same assignment
drives every L-function in a joint draw. The sampled quantity is the
log series

    log L(sigma, X) = sum_p sum_r beta(p^r) X(p)^r p^{-r sigma},

truncated at a prime cutoff P. The truncation tail has mean zero and
its root-mean-square size sqrt(sum_{p>P} sum_r |beta(p^r)|^2 p^{-2 r sigma})
is reported with every value; an absolute-value tail bound would diverge
for sigma <= 1, so the rms is the meaningful control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .arith import PrimeTable, primes_up_to
from .errors import CutoffError, EmptyDomainError
from .specs import LFunctionSpec, beta_array

_TERM_FLOOR = 1e-16  # r-cap: drop prime powers below this relative size
_DEFAULT_P = 100_000


@dataclass(frozen=True)
class RandomAssignment:
    """One realization of X: an angle per prime up to the cutoff.

    Angles are pure functions of (seed, stream_id, p), so raising the
    cutoff extends an assignment without disturbing existing entries.
    """

    cutoff: int
    seed: int
    stream_id: int
    primes: np.ndarray
    theta: np.ndarray

    def unit_values(self) -> np.ndarray:
        return np.exp(1j * self.theta)


@dataclass(frozen=True)
class RandomLogL:
    label: str
    sigma: float
    value: complex
    tail_bound: float


@dataclass(frozen=True)
class MomentEstimate:
    value: float
    std_error: float
    n_samples: int


def sample_assignment(
    seed: int, stream_id: int, cutoff: int, table: PrimeTable | None = None
) -> RandomAssignment:
    if cutoff < 2:
        raise EmptyDomainError("cutoff must be >= 2 so at least one prime is assigned")
    if table is None or table.limit < cutoff:
        table = primes_up_to(cutoff)
    primes = table.up_to(cutoff)
    theta = rng.angles(rng.DOMAIN_ASSIGNMENT, seed, stream_id, primes)
    return RandomAssignment(
        cutoff=cutoff, seed=seed, stream_id=stream_id, primes=primes, theta=theta
    )


def _r_cap_prefix(spec: LFunctionSpec, sigma: float, primes: np.ndarray, r: int, scale: float) -> int:
    """How many leading primes contribute at exponent r.

    Uses the coefficient bound |beta(p^r)| <= (d/r) p^{r eta}: keep primes with
    (d/r) p^{-r(sigma-eta)} >= floor * scale.
    """
    thr = _TERM_FLOOR * scale
    pmax = (spec.degree / (r * thr)) ** (1.0 / (r * (sigma - spec.eta)))
    return int(np.searchsorted(primes, pmax, side="right"))


def random_log_l(
    spec: LFunctionSpec,
    sigma: float,
    assignment: RandomAssignment,
    tail_tolerance: float = 1.0,
) -> RandomLogL:
    """Truncated log L(sigma, X) for one assignment, with its rms tail bound."""
    if sigma <= 0.5:
        raise ValueError("sigma must exceed 1/2")
    tail = random_tail_bound(spec, sigma, assignment.cutoff)
    if tail > tail_tolerance:
        raise CutoffError(
            f"rms truncation tail {tail:.3e} above tolerance {tail_tolerance:.3e}; raise the cutoff"
        )
    primes = assignment.primes
    z = assignment.unit_values()
    logp = np.log(primes.astype(np.float64))
    total = 0.0 + 0.0j
    zr = np.ones_like(z)
    r = 0
    while True:
        r += 1
        count = len(primes) if r == 1 else _r_cap_prefix(spec, sigma, primes, r, abs(total) + 1.0)
        if count == 0:
            if r > 2:
                break
            continue
        zr = zr[:count] * z[:count]
        w = beta_array(spec, primes[:count], r) * np.exp(-r * sigma * logp[:count])
        total += complex(np.einsum("i,i->", w, zr))
        if r > 60:
            break
    return RandomLogL(label=spec.label, sigma=sigma, value=total, tail_bound=tail)


def log_l_samples(
    specs: list[LFunctionSpec],
    sigma: float,
    seed: int,
    n_samples: int,
    cutoff: int = _DEFAULT_P,
    stream_offset: int = 0,
    table: PrimeTable | None = None,
    tail_tolerance: float = 1.0,
) -> np.ndarray:
    """Joint samples of (log L_j(sigma, X))_j: array of shape (n_samples, J).

    Sample i uses stream_offset + i as its stream id; one assignment is
    shared by all specs within a sample. Vectorized over blocks of streams
    with a fixed block layout, so results are independent of chunking.
    """
    if sigma <= 0.5:
        raise ValueError("sigma must exceed 1/2")
    for spec in specs:
        tail = random_tail_bound(spec, sigma, cutoff)
        if tail > tail_tolerance:
            raise CutoffError(
                f"rms truncation tail {tail:.3e} above tolerance {tail_tolerance:.3e} "
                f"for spec {spec.label!r}; raise the cutoff"
            )
    if table is None or table.limit < cutoff:
        table = primes_up_to(cutoff)
    primes = table.up_to(cutoff)
    logp = np.log(primes.astype(np.float64))

    # weight segments, one per (spec, prime-power exponent), sorted by exponent
    segments = []  # (r, j, weights over the leading prime prefix)
    for j, spec in enumerate(specs):
        segments.append((1, j, beta_array(spec, primes, 1) * np.exp(-sigma * logp)))
        r = 1
        while True:
            r += 1
            count = _r_cap_prefix(spec, sigma, primes, r, 1.0)
            if count == 0 and r > 2:
                break
            if count:
                w = beta_array(spec, primes[:count], r) * np.exp(-r * sigma * logp[:count])
                segments.append((r, j, w))
            if r > 60:
                break
    segments.sort(key=lambda t: t[0])
    w_flat = np.concatenate([w for _, _, w in segments])
    seg_count = np.array([len(w) for _, _, w in segments], dtype=np.int64)
    seg_off = np.concatenate([[0], np.cumsum(seg_count)[:-1]]).astype(np.int64)
    seg_r = np.array([r for r, _, _ in segments], dtype=np.int64)
    seg_j = np.array([j for _, j, _ in segments], dtype=np.int64)

    from ._kernels import joint_log_l_kernel

    base = rng.hash_u64(rng.DOMAIN_ASSIGNMENT, seed)
    streams = np.arange(stream_offset, stream_offset + n_samples, dtype=np.int64)
    row_hash = rng.fold(base, streams)
    out = np.zeros((n_samples, len(specs)), dtype=np.complex128)
    joint_log_l_kernel(row_hash, rng.prepared_key(primes), w_flat, seg_off, seg_count, seg_r, seg_j, out)
    return out


def analytic_moment2(
    spec: LFunctionSpec, sigma: float, cutoff: int, table: PrimeTable | None = None
) -> float:
    """E |log L(sigma, X)|^2 for the cutoff model: sum_{p<=P} sum_r |beta(p^r)|^2 p^{-2 r sigma}.

    Exact finite sum; the tail beyond the cutoff is reported separately by
    :func:`analytic_moment2_tail`.
    """
    if sigma <= 0.5:
        raise ValueError("sigma must exceed 1/2")
    if table is None or table.limit < cutoff:
        table = primes_up_to(cutoff)
    primes = table.up_to(cutoff)
    logp = np.log(primes.astype(np.float64))
    total = 0.0
    r = 0
    while True:
        r += 1
        count = len(primes) if r == 1 else _r_cap_prefix(spec, sigma, primes, r, total + 1.0)
        if count == 0:
            if r > 2:
                break
            continue
        b = beta_array(spec, primes[:count], r)
        total += float(np.add.reduce(np.abs(b) ** 2 * np.exp(-2 * r * sigma * logp[:count])))
        if r > 60:
            break
    return total


def analytic_moment2_tail(spec: LFunctionSpec, sigma: float, cutoff: int) -> float:
    """Upper estimate for sum_{p>P} sum_r |beta(p^r)|^2 p^{-2 r sigma}.

    Uses |beta(p^r)| <= (d/r) p^{r eta} and pi(x) <= 1.3 x / log x. Requires
    sigma - eta > 1/2 for the r = 1 piece to converge; returns inf otherwise.
    """
    d, eta = spec.degree, spec.eta
    x = 2.0 * (sigma - eta)
    if x <= 1.0:
        return math.inf
    lp = math.log(max(cutoff, 3))
    # partial summation against pi(v) <= 1.3 v / log v
    r1 = 1.3 * d * d * x * cutoff ** (1.0 - x) / ((x - 1.0) * lp)
    # r >= 2 piece: sum_{r>=2} (d/r)^2 p^{-rx} <= (d^2/4) p^{-2x) / (1 - 2^{-x})
    r2 = (d * d / 4.0) / (1.0 - 2.0 ** (-x)) * 1.3 * (2 * x) * cutoff ** (1.0 - 2 * x) / (
        (2 * x - 1.0) * lp
    )
    return r1 + r2


def random_tail_bound(spec: LFunctionSpec, sigma: float, cutoff: int) -> float:
    """Root-mean-square size of the dropped tail of log L(sigma, X)."""
    return math.sqrt(analytic_moment2_tail(spec, sigma, cutoff))


def empirical_moment(
    spec: LFunctionSpec,
    sigma: float,
    two_k: int,
    n_samples: int,
    seed: int,
    cutoff: int = _DEFAULT_P,
    table: PrimeTable | None = None,
) -> MomentEstimate:
    """Monte Carlo estimate of E |log L(sigma, X)|^{2k} with standard error."""
    if two_k < 2 or two_k % 2:
        raise ValueError("moment order must be an even integer >= 2")
    if n_samples < 1000:
        raise ValueError("need at least 1e3 samples for a usable standard error")
    vals = log_l_samples([spec], sigma, seed, n_samples, cutoff=cutoff, table=table)[:, 0]
    powers = np.abs(vals) ** two_k
    mean = float(np.add.reduce(powers) / n_samples)
    var = float(np.add.reduce((powers - mean) ** 2) / (n_samples - 1))
    return MomentEstimate(value=mean, std_error=math.sqrt(var / n_samples), n_samples=n_samples)


def analytic_cross_moment2(
    spec_a: LFunctionSpec,
    spec_b: LFunctionSpec,
    sigma: float,
    cutoff: int,
    table: PrimeTable | None = None,
) -> complex:
    """E[log L_a(sigma, X) * conj(log L_b(sigma, X))] for the cutoff model.

    Independence across primes and E[X^r conj(X^u)] = delta_{ru} reduce this
    to sum_{p<=P} sum_r beta_a(p^r) conj(beta_b(p^r)) p^{-2 r sigma}.
    """
    if table is None or table.limit < cutoff:
        table = primes_up_to(cutoff)
    primes = table.up_to(cutoff)
    logp = np.log(primes.astype(np.float64))
    total = 0.0 + 0.0j
    for r in range(1, 61):
        count = (
            len(primes)
            if r == 1
            else min(
                _r_cap_prefix(spec_a, sigma, primes, r, 1.0),
                _r_cap_prefix(spec_b, sigma, primes, r, 1.0),
            )
        )
        if count == 0:
            if r > 2:
                break
            continue
        ba = beta_array(spec_a, primes[:count], r)
        bb = beta_array(spec_b, primes[:count], r)
        total += complex(np.add.reduce(ba * np.conj(bb) * np.exp(-2 * r * sigma * logp[:count])))
    return total
