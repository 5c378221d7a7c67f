"""Empirical joint measures of log L values and their box discrepancy.

Two collectors produce point clouds in R^{2J} with interleaved columns
(log_abs_1, arg_1, log_abs_2, arg_2, ...): one samples t in [T, 2T] by
stratified draws and evaluates the deterministic functions, the other
draws random multiplicative phases, one assignment shared by all J
functions. The discrepancy between two clouds is the sup over axis-aligned
(possibly unbounded) closed boxes of the difference in box mass; on point
masses the sup is attained with corners on pooled sample coordinates,
which makes the 2-D sweep exact rather than heuristic.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .arith import PrimeTable, primes_up_to
from .errors import DimensionMismatchError, NearZeroError, PathError
from .evaluate import EMEvaluator, EvalParams, log_l_continuous
from .randmodel import log_l_samples, random_tail_bound
from .specs import get_spec, ry_eval

SCHEMA = "lcrit-lab/1"


@dataclass(frozen=True)
class RunConfig:
    """Experiment parameters; sigma is tied to G by sigma = 1/2 + 1/G."""

    T: float = 1.0e5
    G: float = 4.0
    Y: float = 1.0e3
    n_t: int = 500
    n_rand: int = 2000
    P: int = 100_000
    seed: int = 1
    specs: tuple[str, ...] = ("zeta",)
    tail_tolerance: float = 1.0

    def __post_init__(self):
        if self.T < 100:
            raise ValueError("T must be >= 100")
        if not self.G > 2:
            raise ValueError("need G > 2 so that sigma lies in (1/2, 1)")
        if self.n_t < 1 or self.n_rand < 1:
            raise ValueError("sample counts must be positive")
        if not self.specs:
            raise ValueError("at least one spec label required")

    @property
    def sigma(self) -> float:
        return 0.5 + 1.0 / self.G

    @property
    def n_functions(self) -> int:
        return len(self.specs)

    @property
    def regime_ok(self) -> bool:
        """Whether log log T <= G <= log T / (log log T)^2 holds.

        Essentially empty at desk scale; recorded so reports state plainly
        which side of the asymptotic hypothesis an experiment sits on.
        """
        llt = math.log(math.log(self.T))
        return llt <= self.G <= math.log(self.T) / llt**2

    @property
    def bound_shape(self) -> float:
        """The comparison curve sqrt(G) log log T / sqrt(log T)."""
        return math.sqrt(self.G) * math.log(math.log(self.T)) / math.sqrt(math.log(self.T))


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Uniformly weighted point cloud in R^dim."""

    points: np.ndarray
    provenance: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must be a nonempty (n, dim) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def count(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned closed box; +-inf bounds mark unbounded sides."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatchError("lower/upper must be 1-D of equal length")
        if np.any(lo > hi):
            raise ValueError("needs lower <= upper on every axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_bounds(cls, bounds) -> "Rectangle":
        lo, hi = zip(*bounds)
        return cls(np.array(lo, dtype=np.float64), np.array(hi, dtype=np.float64))

    @property
    def dim(self) -> int:
        return len(self.lower)


def measure_rect(m: EmpiricalMeasure, rect: Rectangle) -> float:
    """Fraction of points inside the closed box."""
    if rect.dim != m.dim:
        raise DimensionMismatchError(f"box dim {rect.dim} != measure dim {m.dim}")
    inside = np.all((m.points >= rect.lower) & (m.points <= rect.upper), axis=1)
    return float(np.count_nonzero(inside)) / m.count


# --- collection -------------------------------------------------------------


def _stratum_t(config: RunConfig, stratum: int, attempt: int) -> float:
    u = float(rng.uniform01(rng.DOMAIN_STRATA, config.seed, stratum, attempt))
    return config.T * (1.0 + (stratum + u) / config.n_t)


_MAX_REDRAWS = 100


def collect_deterministic(
    config: RunConfig, params: EvalParams | None = None, workers: int = 1
) -> EmpiricalMeasure:
    """Sample t stratified over [T, 2T] and record (log|L_j|, arg L_j)_j.

    One uniform draw per equal subinterval; near-zero or unresolvable path
    points are redrawn within their stratum (counted in meta["rejections"]).
    """
    params = params or EvalParams()
    specs = [get_spec(label) for label in config.specs]
    sigma = config.sigma
    out = np.empty((config.n_t, 2 * len(specs)))
    rejections = np.zeros(config.n_t, dtype=np.int64)

    def run_stratum(i: int) -> None:
        for attempt in range(_MAX_REDRAWS):
            t = _stratum_t(config, i, attempt)
            try:
                for j, spec in enumerate(specs):
                    ev = EMEvaluator(spec, t, params)
                    lv = log_l_continuous(spec, sigma, t, params, evaluator=ev)
                    out[i, 2 * j] = lv.re_log
                    out[i, 2 * j + 1] = lv.im_log
                return
            except (NearZeroError, PathError):
                rejections[i] += 1
                continue
        raise RuntimeError(f"stratum {i}: more than {_MAX_REDRAWS} redraws; evaluation failing")

    if workers <= 1:
        for i in range(config.n_t):
            run_stratum(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_stratum, range(config.n_t)))

    meta = {
        "provenance": "deterministic",
        "seed": config.seed,
        "T": config.T,
        "G": config.G,
        "sigma": sigma,
        "specs": list(config.specs),
        "rejections": int(rejections.sum()),
    }
    return EmpiricalMeasure(points=out, provenance="deterministic", meta=meta)


def collect_random(config: RunConfig, table: PrimeTable | None = None) -> EmpiricalMeasure:
    """Draw n_rand assignments; each drives all J functions jointly."""
    specs = [get_spec(label) for label in config.specs]
    vals = log_l_samples(
        specs,
        config.sigma,
        config.seed,
        config.n_rand,
        cutoff=config.P,
        table=table,
        tail_tolerance=config.tail_tolerance,
    )
    out = np.empty((config.n_rand, 2 * len(specs)))
    out[:, 0::2] = vals.real
    out[:, 1::2] = vals.imag
    meta = {
        "provenance": "random",
        "seed": config.seed,
        "G": config.G,
        "sigma": config.sigma,
        "P": config.P,
        "specs": list(config.specs),
        "tail_bounds": [random_tail_bound(s, config.sigma, config.P) for s in specs],
    }
    return EmpiricalMeasure(points=out, provenance="random", meta=meta)


# --- discrepancy ------------------------------------------------------------


@dataclass(frozen=True)
class DiscrepancyResult:
    value: float
    method: str
    grid_resolution: float | None = None


def _integer_weights(m1: EmpiricalMeasure, m2: EmpiricalMeasure):
    n1, n2 = m1.count, m2.count
    pts = np.vstack([m1.points, m2.points])
    w = np.concatenate([np.full(n1, n2), np.full(n2, -n1)]).astype(np.int64)
    return pts, w, n1 * n2


def _axis_ranks(col: np.ndarray):
    u = np.unique(col)
    return np.searchsorted(u, col).astype(np.int64), len(u)


def discrepancy_exact(m1: EmpiricalMeasure, m2: EmpiricalMeasure) -> float:
    """Sup over closed boxes of |m1(box) - m2(box)|, exact for dim 2 and 4."""
    from ._kernels import box_sweep_2d, box_sweep_4d

    if m1.dim != m2.dim:
        raise DimensionMismatchError("measures have different dimensions")
    pts, w, denom = _integer_weights(m1, m2)
    if m1.dim == 2:
        xr, mx = _axis_ranks(pts[:, 0])
        yr, my = _axis_ranks(pts[:, 1])
        order = np.argsort(xr, kind="stable").astype(np.int64)
        starts = np.searchsorted(xr[order], np.arange(mx + 1)).astype(np.int64)
        best = int(box_sweep_2d(order, starts, yr, w, my))
    elif m1.dim == 4:
        ranks = []
        sizes = []
        for d in range(4):
            r, m = _axis_ranks(pts[:, d])
            ranks.append(r)
            sizes.append(m)
        best = int(box_sweep_4d(ranks[0], ranks[1], ranks[2], ranks[3], w, sizes[0], sizes[1], sizes[3]))
    else:
        raise ValueError("exact path covers dim 2 and dim 4 only")
    return best / denom


def _grid_cuts(pooled: np.ndarray, grid_n: int):
    qs = np.linspace(0.0, 1.0, grid_n + 1)[1:-1]
    cuts = [np.unique(np.quantile(pooled[:, d], qs)) for d in range(pooled.shape[1])]
    return cuts


def discrepancy_grid(
    m1: EmpiricalMeasure, m2: EmpiricalMeasure, grid_n: int = 64
) -> tuple[float, float]:
    """Lower bound for the box sup on an adaptive quantile grid.

    Cell counts are accumulated on up-to-grid_n bins per axis; the bound
    maximizes |difference| over all orthants in every corner orientation and
    over single-axis slabs. Returns (value, resolution), resolution being
    the largest pooled mass caught strictly between adjacent cuts.
    """
    if m1.dim != m2.dim:
        raise DimensionMismatchError("measures have different dimensions")
    dim = m1.dim
    pooled = np.vstack([m1.points, m2.points])
    cuts = _grid_cuts(pooled, grid_n)
    shape = tuple(len(c) + 1 for c in cuts)

    def cell_counts(m: EmpiricalMeasure):
        idx = np.zeros(m.count, dtype=np.int64)
        for d in range(dim):
            idx = idx * shape[d] + np.searchsorted(cuts[d], m.points[:, d], side="right")
        return np.bincount(idx, minlength=int(np.prod(shape))).reshape(shape)

    diff = cell_counts(m1) / m1.count - cell_counts(m2) / m2.count
    best = 0.0
    for orient in range(1 << dim):
        g = diff
        for d in range(dim):
            if orient >> d & 1:
                g = np.flip(g, axis=d)
        cdf = g
        for d in range(dim):
            cdf = np.cumsum(cdf, axis=d)
        best = max(best, float(np.max(np.abs(cdf))))
    # single-axis slabs: exact 1-D interval sweep per axis
    for d in range(dim):
        axis_diff = diff
        for dd in reversed(range(dim)):
            if dd != d:
                axis_diff = axis_diff.sum(axis=dd)
        run_max = run_min = 0.0
        for v in axis_diff:
            run_max = max(run_max + v, 0.0)
            run_min = min(run_min + v, 0.0)
            best = max(best, run_max, -run_min)
    resolution = 0.0
    for d in range(dim):
        inner = np.searchsorted(cuts[d], pooled[:, d], side="right")
        counts = np.bincount(inner, minlength=len(cuts[d]) + 1)
        resolution = max(resolution, float(np.max(counts)) / len(pooled))
    return best, resolution


_EXACT_DIM4_LIMIT = 64


def discrepancy(
    m1: EmpiricalMeasure,
    m2: EmpiricalMeasure,
    method: str = "auto",
    grid_n: int = 64,
    exact_dim4_limit: int = _EXACT_DIM4_LIMIT,
) -> DiscrepancyResult:
    """Box-sup distance between two point clouds.

    dim 2 runs the exact sweep; dim 4 runs it when the pooled count stays
    within ``exact_dim4_limit`` (the exact 4-D cost grows like n^6), else the
    quantile-grid lower bound with its resolution; higher dims always grid.
    """
    if m1.dim != m2.dim:
        raise DimensionMismatchError("measures have different dimensions")
    pooled = m1.count + m2.count
    if method == "auto":
        if m1.dim == 2:
            method = "exact"
        elif m1.dim == 4 and pooled <= exact_dim4_limit:
            method = "exact"
        else:
            method = "grid"
    if method == "exact":
        return DiscrepancyResult(value=discrepancy_exact(m1, m2), method="exact")
    value, resolution = discrepancy_grid(m1, m2, grid_n)
    return DiscrepancyResult(value=value, method="grid", grid_resolution=resolution)


def permutation_noise_floor(
    m1: EmpiricalMeasure,
    m2: EmpiricalMeasure,
    n_splits: int = 12,
    seed: int = 0,
    **disc_kwargs,
) -> float:
    """Mean discrepancy across random re-splits of the pooled sample.

    Under the null that both clouds share one distribution this calibrates
    the sampling noise of the estimator; reported alongside every estimate.
    """
    pooled = np.vstack([m1.points, m2.points])
    n1 = m1.count
    total = 0.0
    for split in range(n_splits):
        keys = rng.uniform01(rng.DOMAIN_SPLIT, seed, split, np.arange(len(pooled)))
        order = np.argsort(keys, kind="stable")
        a = EmpiricalMeasure(points=pooled[order[:n1]], provenance="split")
        b = EmpiricalMeasure(points=pooled[order[n1:]], provenance="split")
        total += discrepancy(a, b, **disc_kwargs).value
    return total / n_splits


# --- characteristic functions ------------------------------------------------


def char_fn(m: EmpiricalMeasure, x, y) -> complex:
    """Empirical mean of exp(2 pi i (x . u + y . v)).

    u are the log-modulus columns (even), v the argument columns (odd).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if 2 * len(x) != m.dim or 2 * len(y) != m.dim:
        raise DimensionMismatchError("x and y must each have length dim/2")
    phase = m.points[:, 0::2] @ x + m.points[:, 1::2] @ y
    vals = np.exp(2j * np.pi * phase)
    return complex(np.add.reduce(vals) / m.count)


@dataclass(frozen=True)
class CharFnGap:
    value: float
    noise_floor: float
    box_half_width: float
    grid_n: int


def char_fn_gap(
    m1: EmpiricalMeasure, m2: EmpiricalMeasure, box_half_width: float, grid_n: int
) -> CharFnGap:
    """Max |ecf_1 - ecf_2| over the lattice [-M, M]^{2J}, with its noise floor."""
    if m1.dim != m2.dim:
        raise DimensionMismatchError("measures have different dimensions")
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    dim = m1.dim
    axes = [np.linspace(-box_half_width, box_half_width, grid_n)] * dim
    lattice = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    # interleave back into (x, y) order: columns 0::2 pair with x, 1::2 with y
    worst = 0.0
    chunk = max(1, 4_000_000 // (m1.count + m2.count))
    for lo in range(0, len(lattice), chunk):
        block = lattice[lo : lo + chunk]
        ph1 = m1.points @ block.T * (2.0 * np.pi)
        ph2 = m2.points @ block.T * (2.0 * np.pi)
        ecf1 = np.exp(1j * ph1).mean(axis=0)
        ecf2 = np.exp(1j * ph2).mean(axis=0)
        worst = max(worst, float(np.max(np.abs(ecf1 - ecf2))))
    floor = 1.0 / math.sqrt(m1.count) + 1.0 / math.sqrt(m2.count)
    return CharFnGap(
        value=worst, noise_floor=floor, box_half_width=box_half_width, grid_n=grid_n
    )


# --- truncated-series gap -----------------------------------------------------


@dataclass(frozen=True)
class GapEstimate:
    y_cutoff: float
    mean: float
    std_error: float
    n_samples: int


def second_moment_gap_sweep(
    config: RunConfig,
    y_values,
    params: EvalParams | None = None,
    workers: int = 1,
) -> list[GapEstimate]:
    """Mean |log L - R_Y|^2 over the stratified t sample, for each cutoff Y.

    The same t draws serve every Y, so the sweep isolates the effect of the
    truncation length.
    """
    if len(config.specs) != 1:
        raise ValueError("the gap estimate is defined for a single spec")
    params = params or EvalParams()
    spec = get_spec(config.specs[0])
    sigma = config.sigma
    y_values = [float(y) for y in y_values]
    table = primes_up_to(max(2, int(max(y_values)))) if max(y_values) >= 2 else None

    gaps = np.empty((config.n_t, len(y_values)))

    def run_stratum(i: int) -> None:
        for attempt in range(_MAX_REDRAWS):
            t = _stratum_t(config, i, attempt)
            try:
                lv = log_l_continuous(spec, sigma, t, params)
            except (NearZeroError, PathError):
                continue
            full = complex(lv.re_log, lv.im_log)
            for k, y in enumerate(y_values):
                ry = ry_eval(spec, y, complex(sigma, t), table=table) if y >= 2 else 0.0
                gaps[i, k] = abs(full - ry) ** 2
            return
        raise RuntimeError(f"stratum {i}: more than {_MAX_REDRAWS} redraws")

    if workers <= 1:
        for i in range(config.n_t):
            run_stratum(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_stratum, range(config.n_t)))

    out = []
    for k, y in enumerate(y_values):
        mean = float(np.mean(gaps[:, k]))
        se = float(np.std(gaps[:, k], ddof=1) / math.sqrt(config.n_t))
        out.append(GapEstimate(y_cutoff=y, mean=mean, std_error=se, n_samples=config.n_t))
    return out


def second_moment_gap(
    config: RunConfig, params: EvalParams | None = None, workers: int = 1
) -> GapEstimate:
    return second_moment_gap_sweep(config, [config.Y], params, workers)[0]


# --- serialization ------------------------------------------------------------


def write_measure_csv(m: EmpiricalMeasure, path, config_hash: str = "") -> None:
    """One point per row; '#'-prefixed metadata lines precede the header."""
    path = Path(path)
    n_fun = m.dim // 2
    header = ",".join(f"log_abs_{j+1},arg_{j+1}" for j in range(n_fun))
    lines = [
        f"# schema={SCHEMA}",
        f"# dim={m.dim}",
        f"# provenance={m.provenance}",
        f"# config_hash={config_hash}",
        f"# seed={m.meta.get('seed', '')}",
        header,
    ]
    for row in m.points:
        lines.append(",".join(f"{v:.17g}" for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_measure_csv(path) -> EmpiricalMeasure:
    path = Path(path)
    meta = {}
    rows = []
    header_seen = False
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = val.strip()
            continue
        if not line.strip():
            continue
        if not header_seen:
            header_seen = True
            continue
        rows.append([float(v) for v in line.split(",")])
    pts = np.array(rows, dtype=np.float64)
    return EmpiricalMeasure(
        points=pts, provenance=meta.get("provenance", "unknown"), meta=meta
    )


def write_sidecar(path, payload: dict) -> None:
    path = Path(path)
    body = {"schema": SCHEMA, **payload}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
