"""Interval minorants built from the sign-function approximant.

The building blocks are the Fejer kernel K(z) = sin^2(pi z)/(pi z)^2, the
odd sign-approximant

    H(z) = (sin^2(pi z)/pi^2) (sum_n sgn(n)/(z-n)^2 + 2/z),

and the interval function

    F_{[a,b],D}(x) = (H(D(x-a)) - K(D(x-a)) + H(D(b-x)) - K(D(b-x))) / 2,

which satisfies |F| <= 1, the sandwich 0 <= 1_{[a,b]} - F <= K(D(x-a)) +
K(D(b-x)), and has Fourier transform supported in [-D, D].

H is evaluated through the symmetric pairing sum_{n=1}^{N} [(z-n)^{-2} -
(z+n)^{-2}] with an Euler-Maclaurin correction for the dropped tail, so a
short series carries a certified error bound. Fourier transforms are
computed by panel quadrature over a core window plus closed-form tails:
outside the core, F reduces to trigonometric factors times asymptotic
inverse powers, and each power integrates to a generalized exponential
integral E_m of imaginary argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import exp1

from .errors import PrecisionError

_H_TAIL_LIMIT = 1e-8
_NEAR_INT = 1e-4

# asymptotic coefficients of 1/v - psi'(1+v) in inverse powers v^{-m}
_P_COEFF = {2: 0.5, 3: -1.0 / 6.0, 5: 1.0 / 30.0, 7: -1.0 / 42.0}
_NEXT_COEFF = 1.0 / 30.0  # v^{-9} term, used for the truncation bound


@dataclass(frozen=True)
class BSFunction:
    """Interval approximant parameters: [a, b], bandwidth delta, series floor."""

    a: float
    b: float
    delta: float
    series_terms: int = 64

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("need a < b")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.series_terms < 64:
            raise ValueError("series_terms floor is 64")


def bs_K(z):
    """Fejer kernel sin^2(pi z)/(pi z)^2 with K(0) = 1."""
    return np.sinc(np.asarray(z, dtype=np.float64)) ** 2


def khat(x):
    """Tent function max(0, 1 - |x|): the Fourier transform of the Fejer kernel."""
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(0.0, 1.0 - np.abs(x))


def _h_series_tail(z: np.ndarray, edge: float) -> np.ndarray:
    """Euler-Maclaurin value of sum_{n>N} [(z-n)^{-2} - (z+n)^{-2}], edge = N+1."""
    z2 = z * z
    a2 = edge * edge
    den = a2 - z2
    integral = 2.0 * z / den
    f0 = 4.0 * z * edge / den**2
    f1 = -4.0 * z * (3.0 * a2 + z2) / den**3
    f3 = -48.0 * z * (5.0 * a2 * a2 + 10.0 * a2 * z2 + z2 * z2) / den**5
    return integral + 0.5 * f0 - f1 / 12.0 + f3 / 720.0


def bs_h_tail_bound(z, n_terms: int) -> float:
    """Certified bound on the dropped part of the H series (before sin^2/pi^2)."""
    zmax = float(np.max(np.abs(z))) if np.ndim(z) else abs(float(z))
    edge = float(n_terms + 1)
    if edge <= zmax + 1:
        return math.inf
    a2, z2 = edge * edge, zmax * zmax
    f5 = 1440.0 * zmax * (7 * a2**3 + 35 * a2**2 * z2 + 21 * a2 * z2**2 + z2**3) / (a2 - z2) ** 7
    return 2.0 * abs(f5) / 30240.0


def _effective_terms(z, floor: int) -> int:
    zmax = float(np.max(np.abs(z))) if np.ndim(z) else abs(float(z))
    return max(64, int(floor), 2 * int(math.ceil(zmax)) + 32)


def _h_paired_series(z: np.ndarray, n_terms: int) -> np.ndarray:
    """sum_{n=1}^{N} [(z-n)^{-2} - (z+n)^{-2}], rows chunked to bound memory.

    Entries within 1e-4 of a nonzero integer are flagged by the caller and
    must not be fed through here (the singular column would poison them).
    """
    out = np.empty_like(z)
    n = np.arange(1.0, n_terms + 1.0)
    chunk = max(1, 4_000_000 // n_terms)
    for lo in range(0, len(z), chunk):
        zz = z[lo : lo + chunk, None]
        out[lo : lo + chunk] = np.add.reduce(
            (zz - n) ** -2.0 - (zz + n) ** -2.0, axis=1
        )
    return out


def _bs_h_one(z: float, n_terms: int) -> float:
    """Scalar H with the nearest-integer term split out exactly.

    The n0 term of the series times sin^2(pi z)/pi^2 is sgn(n0) K(z - n0),
    which the sinc form evaluates cleanly however close z is to n0.
    """
    n0 = int(round(z))
    n = np.arange(1, n_terms + 1, dtype=np.float64)
    with np.errstate(divide="ignore"):
        term = (z - n) ** -2.0 - (z + n) ** -2.0
    if n0 != 0 and abs(n0) <= n_terms:
        if z == n0:
            term[abs(n0) - 1] = -((z + abs(n0)) ** -2.0) if n0 > 0 else (z - abs(n0)) ** -2.0
        else:
            term[abs(n0) - 1] -= math.copysign(1.0, n0) / (z - n0) ** 2
    series = float(np.add.reduce(term)) + float(_h_series_tail(np.array([z]), n_terms + 1.0)[0])
    s = math.sin(math.pi * z) ** 2 / math.pi**2
    base = s * series + 2.0 * z * float(np.sinc(z)) ** 2
    if n0 != 0 and abs(n0) <= n_terms:
        base += math.copysign(1.0, n0) * float(np.sinc(z - n0)) ** 2
    return base


def bs_H(z, n_terms: int | None = None):
    """Odd sign-approximant H; majorizes sgn with Fejer-kernel-sized error.

    ``n_terms`` is a floor; the series length adapts to 2|z| + 32 so the
    certified tail stays below 1e-8 (PrecisionError otherwise).
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    n_eff = _effective_terms(z, n_terms or 0)
    bound = bs_h_tail_bound(z, n_eff)
    if bound > _H_TAIL_LIMIT:
        raise PrecisionError(f"series tail bound {bound:.2e} above {_H_TAIL_LIMIT:.0e}")
    n0 = np.rint(z)
    near = (np.abs(z - n0) < _NEAR_INT) & (n0 != 0) & (np.abs(n0) <= n_eff)
    out = np.empty_like(z)
    ok = ~near
    if np.any(ok):
        zs = z[ok]
        series = _h_paired_series(zs, n_eff) + _h_series_tail(zs, n_eff + 1.0)
        s = np.sin(np.pi * zs) ** 2 / np.pi**2
        out[ok] = s * series + 2.0 * zs * np.sinc(zs) ** 2
    for idx in np.flatnonzero(near):
        out[idx] = _bs_h_one(float(z[idx]), n_eff)
    return float(out[0]) if scalar else out


def bs_F(f: BSFunction, x):
    """The interval minorant F_{[a,b],delta} at x (scalar or array)."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    z1 = f.delta * (x - f.a)
    z2 = f.delta * (f.b - x)
    both = np.concatenate([z1, z2])
    h = bs_H(both, f.series_terms)
    k = bs_K(both)
    m = len(x)
    vals = 0.5 * ((h[:m] - k[:m]) + (h[m:] - k[m:]))
    return float(vals[0]) if scalar else vals


# --- Fourier machinery ------------------------------------------------------


@lru_cache(maxsize=4)
def _gl_nodes(order: int = 16):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


@dataclass(frozen=True)
class FourierParams:
    """Quadrature controls: core half-width W = core_pad/delta beyond [a, b]."""

    core_pad: float = 60.0
    panel_cycles: float = 1.2
    gl_order: int = 16


def _exp_integral_chain(zval: complex, m_max: int) -> list[complex]:
    """E_1..E_m for one complex argument via upward recurrence."""
    if zval == 0:
        es = [math.inf]
        for m in range(1, m_max):
            es.append(1.0 / m)
        return es
    es = [complex(exp1(zval))]
    emz = np.exp(-zval)
    for m in range(1, m_max):
        es.append((emz - zval * es[-1]) / m)
    return es


def _j_power_integral(g: float, lower: float, m_max: int = 8) -> list[complex]:
    """J_m = int_lower^inf e^{i g v} v^{-m} dv for m = 1..m_max."""
    es = _exp_integral_chain(complex(0.0, -g * lower), m_max)
    return [lower ** (1 - m) * es[m - 1] for m in range(1, m_max + 1)]


def _tail_piece(mu: float, delta: float, shift: float, lower_v: float, coeffs: dict) -> complex:
    """int_W^inf sin^2(pi(delta w + shift)) R(delta w + shift) e^{i mu w} dw.

    R(v) = sum coeffs[m] v^{-m}; lower_v = delta*W + shift. The sin^2 splits
    into carriers sigma = 0, +-1 with amplitudes 1/2, -e^{+-2 pi i shift}/4.
    """
    total = 0.0 + 0.0j
    for sgn, amp in (
        (0.0, 0.5),
        (1.0, -0.25 * np.exp(2j * np.pi * shift)),
        (-1.0, -0.25 * np.exp(-2j * np.pi * shift)),
    ):
        beta = mu + sgn * 2.0 * np.pi * delta
        g = beta / delta
        js = _j_power_integral(g, lower_v)
        phase = np.exp(-1j * beta * shift / delta)
        acc = 0.0 + 0.0j
        for m, c in coeffs.items():
            acc += c * js[m - 1]
        total += amp * phase * acc / delta
    return total


def _tail_transform(f: BSFunction, w_edge: float, mu: float) -> complex:
    """int_{W}^inf F(b + w) e^{i mu w} dw in closed form.

    Beyond the core, F(b+w) = (1/pi^2)[sin^2(pi(v+c)) Q(v+c) - sin^2(pi v) P(v)]
    with v = delta w, c = delta (b-a), P(v) = 1/v - psi'(1+v) expanded
    asymptotically and Q = P - 1/v^2.
    """
    c = f.delta * (f.b - f.a)
    q_coeff = dict(_P_COEFF)
    q_coeff[2] = _P_COEFF[2] - 1.0
    lower = f.delta * w_edge
    piece_q = _tail_piece(mu, f.delta, c, lower + c, q_coeff)
    piece_p = _tail_piece(mu, f.delta, 0.0, lower, _P_COEFF)
    return (piece_q - piece_p) / np.pi**2


def _tail_error_bound(f: BSFunction, w_edge: float) -> float:
    lower = f.delta * w_edge
    return 4.0 * _NEXT_COEFF * lower ** (-8) / (8.0 * f.delta * np.pi**2)


def fourier_core_nodes(f: BSFunction, y_max: float, params: FourierParams):
    """Panel quadrature nodes/weights on [a - W, b + W] resolving delta + y_max."""
    w_edge = params.core_pad / f.delta
    lo, hi = f.a - w_edge, f.b + w_edge
    freq = f.delta + max(y_max, 1.3 * f.delta)
    n_panels = max(4, int(math.ceil((hi - lo) * freq / params.panel_cycles)))
    gx, gw = _gl_nodes(params.gl_order)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    weights = (half[:, None] * gw[None, :]).ravel()
    return nodes, weights, w_edge


def bs_F_fourier(
    f: BSFunction, y, params: FourierParams | None = None
) -> tuple[np.ndarray | complex, float]:
    """Fourier transform int F(x) e^{-2 pi i x y} dx with an error bound.

    Accepts a scalar or array of frequencies; the core quadrature is shared
    across frequencies. Returns (values, certified error bound).
    """
    params = params or FourierParams()
    scalar = np.ndim(y) == 0
    ys = np.atleast_1d(np.asarray(y, dtype=np.float64))
    nodes, weights, w_edge = fourier_core_nodes(f, float(np.max(np.abs(ys))), params)
    fv = bs_F(f, nodes) * weights
    out = np.empty(len(ys), dtype=np.complex128)
    for i, yv in enumerate(ys):
        core = complex(np.einsum("i,i->", fv, np.exp(-2j * np.pi * yv * nodes)))
        tails = np.exp(-2j * np.pi * f.b * yv) * _tail_transform(f, w_edge, -2.0 * np.pi * yv)
        tails += np.exp(-2j * np.pi * f.a * yv) * _tail_transform(f, w_edge, 2.0 * np.pi * yv)
        out[i] = core + tails
    err = _tail_error_bound(f, w_edge) + 1e-12 * (1.0 + nodes[-1] - nodes[0])
    return (complex(out[0]) if scalar else out), err


def indicator_fourier(a: float, b: float, y):
    """Closed form for the transform of the interval indicator 1_{[a,b]}."""
    ys = np.atleast_1d(np.asarray(y, dtype=np.float64))
    out = np.empty(len(ys), dtype=np.complex128)
    nz = ys != 0
    yv = ys[nz]
    out[nz] = (np.exp(-2j * np.pi * a * yv) - np.exp(-2j * np.pi * b * yv)) / (2j * np.pi * yv)
    out[~nz] = b - a
    return complex(out[0]) if np.ndim(y) == 0 else out


def k_fourier(y: float, width: float = 40.0, params: FourierParams | None = None) -> complex:
    """Quadrature + closed-form-tail transform of the Fejer kernel.

    Converges to the tent khat(y); used as an independent certificate of the
    Fourier pair rather than asserting the tent formula by fiat.
    """
    params = params or FourierParams()
    gx, gw = _gl_nodes(params.gl_order)
    freq = 1.0 + abs(y)
    n_panels = max(8, int(math.ceil(2 * width * freq / params.panel_cycles)))
    edges = np.linspace(-width, width, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
    weights = (half[:, None] * gw[None, :]).ravel()
    core = complex(np.einsum("i,i->", bs_K(nodes) * weights, np.exp(-2j * np.pi * y * nodes)))

    def right_tail(yv: float) -> complex:
        total = 0.0 + 0.0j
        for sgn, amp in ((0.0, 0.5), (1.0, -0.25), (-1.0, -0.25)):
            beta = -2.0 * np.pi * yv + sgn * 2.0 * np.pi
            total += amp * _j_power_integral(beta, width, m_max=2)[1]
        return total / np.pi**2

    return core + right_tail(y) + right_tail(-y)
