"""Hermite polynomials, Gaussian box integrals, and limit-law comparisons.

Conventions: H_0 = 1, H_1 = 2x, H_{n+1} = 2x H_n - 2n H_{n-1} (the variant
generated by (-1)^n e^{x^2} d^n/dx^n e^{-x^2}; beware the probabilists'
variant, which differs by powers of 2). The reference density on the
normalized scale is e^{-pi u^2}, which has total mass 1 and variance
1/(2 pi); samples are brought to that scale by dividing by sqrt(pi psi)
with psi = xi * log G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf

from .errors import DimensionMismatchError

_MAX_DEGREE = 40


def hermite(n: int, x):
    """H_n(x) by the three-term recurrence; n in 0..40."""
    if not 0 <= n <= _MAX_DEGREE:
        raise ValueError(f"degree must lie in 0..{_MAX_DEGREE}")
    x = np.asarray(x, dtype=np.float64)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h_cur = 2.0 * x
    for k in range(1, n):
        h_prev, h_cur = h_cur, 2.0 * x * h_cur - 2.0 * k * h_prev
    return h_cur if h_cur.ndim else float(h_cur)


def hermite_coefficient_table(max_degree: int) -> tuple[tuple[int, ...], ...]:
    """Integer coefficients of H_0..H_max, ascending powers; exact arithmetic."""
    if not 0 <= max_degree <= _MAX_DEGREE:
        raise ValueError(f"degree must lie in 0..{_MAX_DEGREE}")
    rows = [(1,), (0, 2)]
    for n in range(1, max_degree):
        prev, cur = rows[n - 1], rows[n]
        nxt = [0] * (n + 2)
        for i, c in enumerate(cur):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(prev):
            nxt[i] -= 2 * n * c
        rows.append(tuple(nxt))
    return tuple(rows[: max_degree + 1])


@dataclass(frozen=True)
class HermiteBasis:
    max_degree: int
    table: tuple[tuple[int, ...], ...] = field(default=None)

    def __post_init__(self):
        if self.table is None:
            object.__setattr__(self, "table", hermite_coefficient_table(self.max_degree))


def gaussian_box_integral(a: float, b: float) -> float:
    """int_a^b e^{-pi u^2} du; total mass 1 on the whole line."""
    if not a <= b:
        raise ValueError("need a <= b")

    def cdf_part(x: float) -> float:
        if math.isinf(x):
            return math.copysign(0.5, x)
        return 0.5 * float(erf(math.sqrt(math.pi) * x))

    return cdf_part(b) - cdf_part(a)


def hermite_box_integral(k: int, a: float, b: float) -> float:
    """int_a^b e^{-pi u^2} H_k(sqrt(pi) u) du.

    For k >= 1 the integrand is the derivative of -e^{-pi u^2}
    H_{k-1}(sqrt(pi) u)/sqrt(pi), so only boundary values are needed.
    """
    if not 0 <= k <= _MAX_DEGREE:
        raise ValueError(f"degree must lie in 0..{_MAX_DEGREE}")
    if not a <= b:
        raise ValueError("need a <= b")
    if k == 0:
        return gaussian_box_integral(a, b)

    def boundary(u: float) -> float:
        if math.isinf(u):
            return 0.0
        return math.exp(-math.pi * u * u) * float(hermite(k - 1, math.sqrt(math.pi) * u))

    return (boundary(a) - boundary(b)) / math.sqrt(math.pi)


def normal_scale_cdf(u):
    """CDF of the density e^{-pi u^2}."""
    return 0.5 * (1.0 + erf(math.sqrt(math.pi) * np.asarray(u, dtype=np.float64)))


@dataclass(frozen=True)
class CLTRectangle:
    """Normalized-scale box: per-function intervals for log-modulus and argument."""

    log_abs: tuple[tuple[float, float], ...]
    arg: tuple[tuple[float, float], ...]
    psi: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.log_abs) == len(self.arg) == len(self.psi)):
            raise DimensionMismatchError("log_abs, arg and psi must have equal length")
        for lo, hi in (*self.log_abs, *self.arg):
            if not lo <= hi:
                raise ValueError("interval bounds must be ordered")
        if any(p <= 0 for p in self.psi):
            raise ValueError("psi values must be positive")

    @property
    def n_functions(self) -> int:
        return len(self.psi)


class ExpansionCoefficients:
    """Correction coefficients b_{k,l} keyed by exponent vectors.

    The zeroth coefficient is pinned to 1 and every total-order-one
    coefficient vanishes; further orders are caller-supplied data, not
    defaults this package invents.
    """

    def __init__(self, n_functions: int, entries: dict | None = None):
        self.n_functions = n_functions
        zero = (0,) * n_functions
        table = {(zero, zero): 1.0}
        for (k, l), v in (entries or {}).items():
            k, l = tuple(k), tuple(l)
            if len(k) != n_functions or len(l) != n_functions:
                raise DimensionMismatchError("exponent vectors must have length J")
            order = sum(k) + sum(l)
            if order == 0:
                if v != 1.0:
                    raise ValueError("the order-zero coefficient is fixed at 1")
                continue
            if order == 1 and v != 0.0:
                raise ValueError("total-order-one coefficients must vanish")
            table[(k, l)] = float(v)
        self.entries = table

    @classmethod
    def from_config(cls, n_functions: int, rows: list[dict]) -> "ExpansionCoefficients":
        entries = {}
        for row in rows:
            entries[(tuple(row["k"]), tuple(row["l"]))] = float(row["value"])
        return cls(n_functions, entries)

    @property
    def max_order(self) -> int:
        return max(sum(k) + sum(l) for k, l in self.entries)


def expansion_eval(coeffs: ExpansionCoefficients, rect: CLTRectangle) -> float:
    """Box probability from the Hermite correction series.

    sum over (k, l) of b_{k,l} prod_j psi_j^{-(k_j+l_j)/2}
    * prod_j int_{a_j}^{b_j} e^{-pi u^2} H_{k_j} du * int_{c_j}^{d_j} e^{-pi v^2} H_{l_j} dv.
    """
    if coeffs.n_functions != rect.n_functions:
        raise DimensionMismatchError("coefficient and rectangle dimensions differ")
    total = 0.0
    for (k, l), b in coeffs.entries.items():
        term = b
        for j in range(rect.n_functions):
            term *= rect.psi[j] ** (-(k[j] + l[j]) / 2.0)
            term *= hermite_box_integral(k[j], *rect.log_abs[j])
            term *= hermite_box_integral(l[j], *rect.arg[j])
        total += term
    return total


def ks_distance(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a callable CDF."""
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    n = len(xs)
    fx = np.asarray(cdf(xs), dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    return float(np.max(np.maximum(grid - fx, fx - (grid - 1.0 / n))))


_DEFAULT_BATTERY = (
    ((-1.0, 1.0), (-1.0, 1.0)),
    ((-math.inf, 0.0), (-math.inf, math.inf)),
    ((0.0, math.inf), (-0.5, 0.5)),
    ((-2.0, -0.25), (-math.inf, 1.0)),
    ((-0.75, 0.75), (0.25, 2.0)),
)


@dataclass(frozen=True)
class AxisFit:
    axis: int
    kind: str  # "log_abs" or "arg"
    psi: float
    ks: float
    ks_threshold: float

    @property
    def passed(self) -> bool:
        return self.ks <= self.ks_threshold


@dataclass(frozen=True)
class BoxFit:
    bounds: tuple
    observed: float
    predicted: float
    std_error: float


@dataclass(frozen=True)
class CLTReport:
    n_samples: int
    axes: tuple[AxisFit, ...]
    boxes: tuple[BoxFit, ...]

    @property
    def max_ks(self) -> float:
        return max(a.ks for a in self.axes)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.axes)


def clt_fit(
    points: np.ndarray,
    psi: list[float],
    ks_scale: float = 1.63,
    battery=_DEFAULT_BATTERY,
    coefficients: ExpansionCoefficients | None = None,
) -> CLTReport:
    """Compare samples of (log|L_j|, arg L_j)_j against the limiting law.

    ``points`` has interleaved columns (log_abs_1, arg_1, log_abs_2, ...);
    psi gives the per-function normalizer, so column 2j/(2j+1) is divided by
    sqrt(pi psi_j). Per-axis KS distances are the headline statistic; a
    battery of normalized boxes is also compared against the series
    prediction (order zero unless coefficients are supplied).
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2 * len(psi):
        raise DimensionMismatchError("points must have 2 * len(psi) columns")
    n, dim = points.shape
    n_fun = len(psi)
    if coefficients is None:
        coefficients = ExpansionCoefficients(n_fun)
    scale = np.repeat(np.sqrt(np.pi * np.asarray(psi, dtype=np.float64)), 2)
    normalized = points / scale[None, :]
    thr = ks_scale / math.sqrt(n)
    axes = []
    for axis in range(dim):
        axes.append(
            AxisFit(
                axis=axis,
                kind="log_abs" if axis % 2 == 0 else "arg",
                psi=psi[axis // 2],
                ks=ks_distance(normalized[:, axis], normal_scale_cdf),
                ks_threshold=thr,
            )
        )
    boxes = []
    for uv in battery:
        rect = CLTRectangle(
            log_abs=tuple(uv[0] for _ in range(n_fun)),
            arg=tuple(uv[1] for _ in range(n_fun)),
            psi=tuple(psi),
        )
        lo = np.array([b for pair in ((uv[0][0], uv[1][0]),) * n_fun for b in pair])
        hi = np.array([b for pair in ((uv[0][1], uv[1][1]),) * n_fun for b in pair])
        inside = np.all((normalized >= lo) & (normalized <= hi), axis=1)
        obs = float(np.mean(inside))
        pred = expansion_eval(coefficients, rect)
        se = math.sqrt(max(pred * (1 - pred), 1e-12) / n)
        boxes.append(BoxFit(bounds=uv, observed=obs, predicted=pred, std_error=se))
    return CLTReport(n_samples=n, axes=tuple(axes), boxes=tuple(boxes))
