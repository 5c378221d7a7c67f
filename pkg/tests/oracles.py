"""Independent reference implementations used only by tests.

These deliberately avoid the code paths they check: primality by trial
division, Bernoulli numbers by the Akiyama-Tanigawa scheme, zeta and the
odd-character L-value through alternating series with a Boole-summation
tail at 34 significant digits, and box discrepancy by exhaustive
enumeration of corner boxes.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import mpmath
import numpy as np
from mpmath import mp, mpc, mpf

ORACLE_DPS = 34


def trial_division_primes(limit: int) -> list[int]:
    out = []
    for n in range(2, limit + 1):
        m = 2
        is_p = True
        while m * m <= n:
            if n % m == 0:
                is_p = False
                break
            m += 1
        if is_p:
            out.append(n)
    return out


def akiyama_tanigawa_bernoulli(count: int) -> list[Fraction]:
    """B_0..B_count with the B_1 = -1/2 convention (the scheme gives +1/2)."""
    out = []
    row = []
    for m in range(count + 1):
        row.append(Fraction(1, m + 1))
        for j in range(m, 0, -1):
            row[j - 1] = j * (row[j - 1] - row[j])
        out.append(row[0])
    if count >= 1:
        out[1] = -out[1]
    return out


def _euler_at_zero(k: int) -> mpf:
    return mpmath.eulerpoly(k, 0)


def _alternating_series(s: complex, slope: int, intercept: int) -> mpc:
    """sum_{n>=0} (-1)^n (slope*n + intercept)^{-s} by partial sum + Boole tail."""
    s = mpc(s)
    t = abs(float(s.imag))
    n_cut = max(40, int(0.8 * (t / slope + 40)))
    n_cut += n_cut % 2  # even, so the tail sign is +1
    partial = mpf(0)
    for n in range(n_cut):
        term = (slope * n + intercept) ** (-s)
        partial += term if n % 2 == 0 else -term
    # tail = sum_{j >= n_cut} (-1)^j f(j), f(x) = (slope*x + intercept)^{-s}
    # Boole: (1/2) sum_k E_k(0)/k! (-1)^{n_cut} f^{(k)}(n_cut)
    base = mpf(slope) * n_cut + intercept
    deriv = base ** (-s)  # f^{(0)}
    tail = mpf(0.5) * deriv * _euler_at_zero(0)
    poch = mpc(1)
    fact = mpf(1)
    for k in range(1, 400):
        poch *= s + (k - 1)
        fact *= k
        deriv = (-slope) ** k * poch * base ** (-s - k)
        ek = _euler_at_zero(k)
        if ek != 0:
            term = mpf(0.5) * (ek / fact) * deriv
            tail += term
            if abs(term) < mpf(10) ** (-(ORACLE_DPS + 6)) and k > 8:
                break
    else:
        raise RuntimeError("Boole tail failed to converge; raise the cutoff")
    return partial + tail


def zeta_oracle(s: complex) -> complex:
    """zeta via the alternating eta series: eta(s) / (1 - 2^{1-s}).

    Boole-summation tail for moderate heights; mpmath's own independent
    evaluation (Riemann-Siegel backed) beyond, where the partial sum would
    be too long.
    """
    with mp.workdps(ORACLE_DPS):
        sm = mpc(s)
        if abs(float(sm.imag)) <= 3000:
            eta = _alternating_series(sm, 1, 1)
        else:
            eta = mpmath.altzeta(sm)
        return complex(eta / (1 - 2 ** (1 - sm)))


def beta_chi4_oracle(s: complex) -> complex:
    """L(s, chi_4) via the alternating odd series sum (-1)^n (2n+1)^{-s}."""
    with mp.workdps(ORACLE_DPS):
        sm = mpc(s)
        if abs(float(sm.imag)) <= 3000:
            return complex(_alternating_series(sm, 2, 1))
        quarter = mpf(1) / 4
        val = 4 ** (-sm) * (mpmath.zeta(sm, quarter) - mpmath.zeta(sm, 3 * quarter))
        return complex(val)


def dirichlet_oracle(q: int, values, s: complex) -> complex:
    """L(s, chi) through mpmath's Hurwitz zeta, for arbitrary character tables."""
    with mp.workdps(ORACLE_DPS):
        sm = mpc(s)
        total = mpc(0)
        for a in range(1, q + 1):
            w = complex(values[a % q])
            if w == 0:
                continue
            total += mpc(w) * mpmath.zeta(sm, mpf(a) / q)
        return complex(q ** (-sm) * total)


def brute_force_discrepancy(p1: np.ndarray, p2: np.ndarray) -> float:
    """Exhaustive sup over corner boxes, exact in integer weights.

    Divides once at the end by n1*n2, matching the production estimator's
    final float operation, so agreement can be asserted exactly.
    """
    n1, n2 = len(p1), len(p2)
    pts = np.vstack([p1, p2])
    w = np.concatenate([np.full(n1, n2), np.full(n2, -n1)])
    dim = pts.shape[1]
    axis_vals = [np.unique(pts[:, d]) for d in range(dim)]
    lows = [np.concatenate([[-np.inf], v]) for v in axis_vals]
    highs = [np.concatenate([v, [np.inf]]) for v in axis_vals]
    best = 0
    for los in product(*lows):
        lo = np.array(los)
        for his in product(*highs):
            hi = np.array(his)
            if np.any(lo > hi):
                continue
            inside = np.all((pts >= lo) & (pts <= hi), axis=1)
            val = abs(int(w[inside].sum()))
            if val > best:
                best = val
    return best / (n1 * n2)


def gaussian_quadrature_box(a: float, b: float) -> float:
    """High-precision quadrature of int_a^b e^{-pi u^2} du."""
    with mp.workdps(30):
        lo = mpf("-12") if a == -np.inf else mpf(a)
        hi = mpf("12") if b == np.inf else mpf(b)
        if lo >= hi:
            return 0.0
        return float(mpmath.quad(lambda u: mpmath.e ** (-mpmath.pi * u * u), [lo, hi]))


def hermite_quadrature_box(k: int, a: float, b: float) -> float:
    """Quadrature oracle for int_a^b e^{-pi u^2} H_k(sqrt(pi) u) du."""
    with mp.workdps(30):
        lo = mpf("-12") if a == -np.inf else mpf(a)
        hi = mpf("12") if b == np.inf else mpf(b)
        if lo >= hi:
            return 0.0
        pi = mpmath.pi

        def f(u):
            return mpmath.e ** (-pi * u * u) * mpmath.hermite(k, mpmath.sqrt(pi) * u)

        return float(mpmath.quad(f, [lo, hi]))
