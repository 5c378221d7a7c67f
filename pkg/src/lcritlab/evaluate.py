"""Euler-Maclaurin evaluation of zeta / Dirichlet L and continuous log branches.

The evaluator targets the region Re(s) > 0, |Im(s)| <= 1e7. Cost is O(|t|)
per point, which is the right trade at desk scale: correctness off the
critical line matters more than asymptotic speed, and batches parallelize.

The continuous branch of log L(sigma + it) is produced by anchoring the
argument at a large abscissa (where the Euler log-series pins it inside
(-pi/2, pi/2)) and walking horizontally to the target sigma in adaptive
steps, unwinding the principal argument as it goes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from math import isqrt

from .arith import DirichletCharacter, bernoulli_numbers, primes_up_to
from .errors import NearZeroError, PathError, PoleError, PrecisionError
from .specs import DirichletCoefficients, LFunctionSpec, ZetaCoefficients, ry_eval

_TWO_PI = 2.0 * math.pi
_MAX_HEIGHT = 1.0e7
_ANCHOR_SIGMA = 2.0
_ANCHOR_Y = 20_000.0
_CHUNK = 1 << 14
_MAX_GRID = 40_000_000  # hard cap on q * N for the integer phase table


@dataclass(frozen=True)
class EvalParams:
    """Knobs of the Euler-Maclaurin evaluator.

    ``em_cutoff_factor`` scales the main-sum length N ~ factor*(|t|/2pi + 10);
    ``bernoulli_terms`` caps the number of even-Bernoulli corrections;
    ``target_abs_error`` is the certified absolute error per evaluation.
    """

    em_cutoff_factor: float = 2.2
    bernoulli_terms: int = 18
    target_abs_error: float = 1.0e-12
    path_initial_step: float = 0.05
    path_max_evals: int = 20_000

    def __post_init__(self):
        if self.em_cutoff_factor < 1.0:
            raise ValueError("em_cutoff_factor must be >= 1")
        if not 1 <= self.bernoulli_terms <= 30:
            raise ValueError("bernoulli_terms must lie in 1..30")
        if self.target_abs_error <= 0:
            raise ValueError("target_abs_error must be positive")
        if self.path_initial_step <= 0:
            raise ValueError("path_initial_step must be positive")


@dataclass(frozen=True)
class LogLValue:
    """log |L| and the continuously tracked argument at sigma + it."""

    sigma: float
    t: float
    re_log: float
    im_log: float

    @property
    def value(self) -> complex:
        return cmath.exp(complex(self.re_log, self.im_log))


@lru_cache(maxsize=1)
def _even_bernoulli_floats(count: int = 32) -> np.ndarray:
    bs = bernoulli_numbers(count)
    return np.array([float(bs[2 * k]) for k in range(count + 1)])


def _choose_n(t: float, params: EvalParams) -> int:
    return max(16, int(math.ceil(params.em_cutoff_factor * (abs(t) / _TWO_PI + 10.0))))


def _compensated_dot(amp: np.ndarray, pre: np.ndarray, pim: np.ndarray) -> complex:
    """sum(amp * (pre + i*pim)) with Kahan compensation across chunk partials."""
    tot_r = tot_i = 0.0
    c_r = c_i = 0.0
    for lo in range(0, len(amp), _CHUNK):
        hi = lo + _CHUNK
        a = amp[lo:hi]
        pr = float(np.add.reduce(a * pre[lo:hi]))
        pi = float(np.add.reduce(a * pim[lo:hi]))
        y = pr - c_r
        t = tot_r + y
        c_r = (t - tot_r) - y
        tot_r = t
        y = pi - c_i
        t = tot_i + y
        c_i = (t - tot_i) - y
        tot_i = t
    return complex(tot_r, tot_i)


# --- accurate phases m^{-it} --------------------------------------------
#
# The naive phase exp(-i t log m) carries an error of t * ulp(log m), which
# at t ~ 1e5 caps the main sum near 1e-10 absolute. Instead we compute
# t * log p mod 2pi for primes in double-double arithmetic and extend to all
# integers multiplicatively, pushing the phase error down to a few 1e-15.

_SPLITTER = 134217729.0  # 2^27 + 1, Veltkamp split
_TWO_PI_HI = 6.283185307179586
_TWO_PI_LO = 2.4492935982947064e-16


def _two_prod(a, b):
    p = a * b
    aa = a * _SPLITTER
    ah = aa - (aa - a)
    al = a - ah
    bb = b * _SPLITTER
    bh = bb - (bb - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


class _PhaseTables:
    """Caches: smallest-prime-factor sieve and double-double log p."""

    def __init__(self):
        self.limit = 0
        self.spf = None
        self.primes = None
        self.lnp_hi = None
        self.lnp_lo = None

    def ensure(self, m_max: int):
        if self.limit >= m_max:
            return
        size = max(m_max, 2 * self.limit, 1 << 16)
        spf = np.zeros(size + 1, dtype=np.int32)
        for p in range(2, isqrt(size) + 1):
            if spf[p] == 0:
                block = spf[p * p :: p]
                block[block == 0] = p
        primes = np.flatnonzero(spf[2:] == 0).astype(np.int64) + 2
        import mpmath

        with mpmath.workdps(40):
            hi = np.empty(len(primes))
            lo = np.empty(len(primes))
            for i, p in enumerate(primes):
                v = mpmath.ln(int(p))
                h = float(v)
                hi[i] = h
                lo[i] = float(v - h)
        self.limit = size
        self.spf = spf
        self.primes = primes
        self.lnp_hi = hi
        self.lnp_lo = lo


_PHASES = _PhaseTables()


def _prime_phase_angles(t: float, hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    """-t * log p reduced mod 2pi, in double-double, returned as floats."""
    p1, e1 = _two_prod(t, hi)
    tot_hi, tot_lo = _two_sum(p1, e1 + t * lo)
    k = np.round(tot_hi / _TWO_PI_HI)
    r1, r2 = _two_prod(k, _TWO_PI_HI)
    s, e = _two_sum(tot_hi, -r1)
    theta = s + (e + tot_lo - r2 - k * _TWO_PI_LO)
    return -theta


def _unit_phases_up_to(m_max: int, t: float) -> np.ndarray:
    """m^{-it} for m = 0..m_max (index 0 unused)."""
    from ._kernels import fill_multiplicative_phases

    _PHASES.ensure(m_max)
    spf = _PHASES.spf
    sel = _PHASES.primes <= m_max
    theta = _prime_phase_angles(t, _PHASES.lnp_hi[sel], _PHASES.lnp_lo[sel])
    wfull = np.zeros(m_max + 1, dtype=np.complex128)
    wfull[_PHASES.primes[sel]] = np.cos(theta) + 1j * np.sin(theta)
    out = np.empty(m_max + 1, dtype=np.complex128)
    fill_multiplicative_phases(spf[: m_max + 1], wfull, out)
    return out


class _HurwitzGrid:
    """Cached main-sum arrays for sum_{n=0}^{N-1} (n+a)^{-sigma-it} at fixed a, t, N.

    When ``phase`` is supplied, it must equal (n+a)^{-it} for n = 0..N-1;
    otherwise a direct exp(-i t log(n+a)) fallback is used (adequate for
    small |t| or non-rational shifts).
    """

    def __init__(self, a: float, n_terms: int, t: float, phase: np.ndarray | None = None):
        self.a = a
        self.t = t
        self.n_terms = n_terms
        ns = np.arange(n_terms, dtype=np.float64) + a
        self.logs = np.log(ns)
        if phase is None:
            phase = np.exp(-1j * t * self.logs)
        self.phase_re = np.ascontiguousarray(phase.real)
        self.phase_im = np.ascontiguousarray(phase.imag)

    def main_sum(self, sigma: float) -> complex:
        amp = np.exp(-sigma * self.logs)
        return _compensated_dot(amp, self.phase_re, self.phase_im)


def _em_bits(grid: _HurwitzGrid, s: complex, params: EvalParams) -> tuple[complex, complex, float]:
    """Pieces of the Euler-Maclaurin formula at s, except the pole term.

    Returns (main + half + corrections, pole term A^{1-s}/(s-1) or nan at
    s == 1, certified remainder bound). The pole term is kept separate so
    character sums can cancel it exactly near s = 1.
    """
    sigma = s.real
    a_edge = grid.n_terms + grid.a
    main = grid.main_sum(sigma)
    log_a = math.log(a_edge)
    edge_pow = cmath.exp(-s * log_a)  # A^{-s}
    val = main + 0.5 * edge_pow

    bern = _even_bernoulli_floats()
    inv_a2 = 1.0 / (a_edge * a_edge)
    # T_k = B_{2k}/(2k)! * s(s+1)...(s+2k-2) * A^{-s-2k+1}; the sequence can
    # rise before it falls when |s| > A, so truncate at the index whose
    # certified remainder bound |T_{j+1}| * |s+2j+1|/(sigma+2j+1) is smallest.
    cap = params.bernoulli_terms
    terms = [(bern[1] / 2.0) * s * edge_pow / a_edge]
    for k in range(1, cap + 1):
        terms.append(
            terms[-1]
            * ((bern[k + 1] / bern[k]) / ((2 * k + 2) * (2 * k + 1)))
            * ((s + 2 * k - 1) * (s + 2 * k))
            * inv_a2
        )
    best_j = 0
    rem = abs(terms[0]) * abs(s + 1) / max(sigma + 1, 1e-9)
    for j in range(1, cap + 1):
        bound = abs(terms[j]) * abs(s + 2 * j + 1) / max(sigma + 2 * j + 1, 1e-9)
        if bound < rem:
            best_j, rem = j, bound
    for piece in terms[:best_j]:
        val += piece
    if rem > params.target_abs_error:
        raise PrecisionError(
            f"Euler-Maclaurin tail {rem:.3e} above target {params.target_abs_error:.3e}; "
            "raise em_cutoff_factor or bernoulli_terms"
        )
    if s == 1:
        pole = complex(math.nan, math.nan)
    else:
        pole = cmath.exp((1.0 - s) * log_a) / (s - 1.0)
    return val, pole, rem


def hurwitz_zeta_em(s: complex, a: float, params: EvalParams | None = None) -> complex:
    """Hurwitz zeta sum_{n>=0} (n+a)^{-s} for Re(s) > 0, s != 1, 0 < a <= 1.

    Generic shifts use direct exp(-i t log(n+a)) phases, whose error grows
    like |t| * eps; the zeta and Dirichlet wrappers route through the exact
    integer phase tables instead and stay accurate across the full height range.
    """
    params = params or EvalParams()
    s = complex(s)
    if not 0.0 < a <= 1.0:
        raise ValueError("shift a must lie in (0, 1]")
    if s == 1:
        raise PoleError("Hurwitz zeta has its pole at s = 1")
    if s.real <= 0:
        raise ValueError("evaluator requires Re(s) > 0")
    if abs(s.imag) > _MAX_HEIGHT:
        raise ValueError(f"|Im(s)| beyond desk-scale bound {_MAX_HEIGHT:.0e}")
    grid = _HurwitzGrid(a, _choose_n(s.imag, params), s.imag)
    val, pole, _ = _em_bits(grid, s, params)
    return val + pole


@lru_cache(maxsize=1)
def _zeta_spec() -> LFunctionSpec:
    return LFunctionSpec(label="zeta", degree=1, coeffs=ZetaCoefficients())


def zeta_em(s: complex, params: EvalParams | None = None) -> complex:
    """Riemann zeta via Euler-Maclaurin; certified to params.target_abs_error."""
    params = params or EvalParams()
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has its pole at s = 1")
    if s.real <= 0:
        raise ValueError("evaluator requires Re(s) > 0")
    return EMEvaluator(_zeta_spec(), s.imag, params).eval(s.real)


def _grouped_pole_sum(weights: np.ndarray, edges: np.ndarray, s: complex) -> complex:
    """sum_a w_a * A_a^{1-s}/(s-1) when sum_a w_a = 0, stable near s = 1.

    Uses A^{1-s}/(s-1) = -1/w - sum_{m>=1} w^{m-1} (log A)^m / m! with
    w = 1 - s; the -1/w piece cancels against sum w_a = 0.
    """
    w = 1.0 - s
    logs = np.log(edges)
    total = 0.0 + 0.0j
    coeff = 1.0 + 0.0j  # w^{m-1}/m!
    for m in range(1, 12):
        sm = complex(np.sum(weights * logs**m))
        total -= coeff * sm
        coeff = coeff * w / (m + 1)
        if abs(coeff) * abs(sm) < 1e-18 and m >= 3:
            break
    return total


def dirichlet_l_em(
    chi: DirichletCharacter, s: complex, params: EvalParams | None = None
) -> complex:
    """L(s, chi) = q^{-s} sum_{a=1}^{q} chi(a) zeta_H(s, a/q), Euler-Maclaurin inside.

    All Hurwitz pieces share one cutoff N, so for nonprincipal chi the pole
    terms cancel exactly and s = 1 is evaluated through the cancelled form.
    """
    params = params or EvalParams()
    s = complex(s)
    if chi.is_principal and s == 1:
        raise PoleError("principal character: L(s, chi_0) has a pole at s = 1")
    if s.real <= 0:
        raise ValueError("evaluator requires Re(s) > 0")
    if chi.modulus == 1:
        return zeta_em(s, params)
    spec = _as_spec(chi)
    return EMEvaluator(spec, s.imag, params).eval(s.real)


class EMEvaluator:
    """L(sigma + it) along a fixed horizontal line, with per-t caches.

    Building one evaluator per t amortizes the phase arrays across the
    many sigma evaluations an argument-tracking walk performs.
    """

    def __init__(self, spec: LFunctionSpec, t: float, params: EvalParams):
        if abs(t) > _MAX_HEIGHT:
            raise ValueError(f"|t| beyond desk-scale bound {_MAX_HEIGHT:.0e}")
        self.spec = spec
        self.t = t
        self.params = params
        n_terms = _choose_n(t, params)
        provider = spec.coeffs
        if isinstance(provider, ZetaCoefficients):
            self._character = None
            q = 1
            residues = [(1.0 + 0.0j, 1)]
        elif isinstance(provider, DirichletCoefficients):
            chi = provider.character
            self._character = chi
            q = chi.modulus
            residues = [(chi(a), a) for a in range(1, q + 1) if chi(a) != 0]
        else:
            raise ValueError(
                f"no deterministic evaluator for spec {spec.label!r}; only GL(1) specs ship one"
            )
        if q * (n_terms + 1) > _MAX_GRID:
            raise ValueError("phase table q*N exceeds the desk-scale cap; lower |t| or the modulus")
        u_all = _unit_phases_up_to(q * n_terms + q, t)
        qphase = np.conj(u_all[q]) if q > 1 else 1.0 + 0.0j
        self._q = q
        self._grids = [
            (w, _HurwitzGrid(av / q, n_terms, t, phase=u_all[av::q][:n_terms] * qphase))
            for (w, av) in residues
        ]

    def eval(self, sigma: float) -> complex:
        s = complex(sigma, self.t)
        if self._q == 1:
            if s == 1:
                raise PoleError("zeta has its pole at s = 1")
            val, pole, _ = _em_bits(self._grids[0][1], s, self.params)
            return val + pole
        chi = self._character
        if chi.is_principal and s == 1:
            raise PoleError("principal character: pole at s = 1")
        total = 0.0 + 0.0j
        if not chi.is_principal and abs(s - 1.0) < 1e-3:
            weights = []
            edges = []
            for w, grid in self._grids:
                val, _, _ = _em_bits(grid, s, self.params)
                total += w * val
                weights.append(w)
                edges.append(grid.n_terms + grid.a)
            total += _grouped_pole_sum(np.array(weights), np.array(edges), s)
        else:
            for w, grid in self._grids:
                val, pole, _ = _em_bits(grid, s, self.params)
                total += w * (val + pole)
        return cmath.exp(-s * math.log(self._q)) * total


@lru_cache(maxsize=1)
def _anchor_prime_table():
    return primes_up_to(int(_ANCHOR_Y))


def _as_spec(spec_or_character) -> LFunctionSpec:
    if isinstance(spec_or_character, LFunctionSpec):
        return spec_or_character
    if isinstance(spec_or_character, DirichletCharacter):
        chi = spec_or_character
        return LFunctionSpec(
            label=f"dirichlet:q={chi.modulus}:index={chi.index}",
            degree=1,
            coeffs=DirichletCoefficients(chi),
        )
    raise TypeError("expected an LFunctionSpec or DirichletCharacter")


def log_l_continuous(
    spec_or_character,
    sigma: float,
    t: float,
    params: EvalParams | None = None,
    evaluator: EMEvaluator | None = None,
) -> LogLValue:
    """log |L(sigma+it)| and the continuous argument branch.

    The branch is anchored at sigma0 = max(2, sigma), where the truncated
    Euler log-series bounds |Im log L| well inside (-pi/2, pi/2), then
    carried to the target sigma by unwinding principal arguments along the
    horizontal segment. Steps halve whenever the phase jumps by >= pi/4.

    Raises NearZeroError when |L| dips below 1e3 * target_abs_error at a
    path point (callers resample t), and PathError if the walk exceeds the
    evaluation budget.
    """
    params = params or EvalParams()
    spec = _as_spec(spec_or_character)
    if sigma <= 0.5:
        raise ValueError("sigma must exceed 1/2")
    ev = evaluator if evaluator is not None else EMEvaluator(spec, t, params)

    sigma0 = max(_ANCHOR_SIGMA, sigma)
    anchor_series = ry_eval(spec, _ANCHOR_Y, complex(sigma0, t), table=_anchor_prime_table())
    floor = 1e3 * params.target_abs_error
    evals = 0

    def protected_eval(sg: float) -> complex:
        nonlocal evals
        evals += 1
        if evals > params.path_max_evals:
            raise PathError(f"argument walk exceeded {params.path_max_evals} evaluations")
        v = ev.eval(sg)
        if abs(v) < floor:
            raise NearZeroError(f"|L| = {abs(v):.3e} below safe floor at sigma = {sg}, t = {t}")
        return v

    v = protected_eval(sigma0)
    arg_p = cmath.phase(v)
    im = arg_p + _TWO_PI * round((anchor_series.imag - arg_p) / _TWO_PI)
    if abs(im - anchor_series.imag) > 1.0:
        raise PrecisionError("series anchor disagrees with evaluator by more than its tail bound")

    cur = sigma0
    step = params.path_initial_step
    while cur > sigma:
        nxt = max(sigma, cur - step)
        v_new = protected_eval(nxt)
        arg_p = cmath.phase(v_new)
        im_new = arg_p + _TWO_PI * round((im - arg_p) / _TWO_PI)
        if abs(im_new - im) >= math.pi / 4:
            if step <= 1e-9:
                raise NearZeroError(
                    f"unresolvable phase winding near sigma = {nxt}, t = {t}; zero suspected"
                )
            step *= 0.5
            continue
        cur = nxt
        im = im_new
        v = v_new
        step = min(step * 1.4, params.path_initial_step)

    return LogLValue(sigma=sigma, t=t, re_log=math.log(abs(v)), im_log=im)
