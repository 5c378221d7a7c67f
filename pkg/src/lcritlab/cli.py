"""Command-line orchestration: reproducible experiments, tabular outputs.

Every command reads one config document, writes its results under --out,
embeds the config hash and seed in every file, and finishes with exit code
0 exactly when all of its checks pass (failing checks are listed on
stderr). Timing and worker counts go to run.log, which is the one file
excluded from the byte-identical reproducibility contract.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time
from pathlib import Path

import numpy as np
from scipy.special import erfinv

from . import rng
from .clt import clt_fit, ExpansionCoefficients
from .config import ExperimentConfig
from .errors import LabError
from .measures import (
    char_fn_gap,
    collect_deterministic,
    collect_random,
    discrepancy,
    permutation_noise_floor,
    read_measure_csv,
    second_moment_gap_sweep,
    write_measure_csv,
    write_sidecar,
)
from .randmodel import analytic_moment2, empirical_moment
from .smoothing import (
    BSFunction,
    bs_F,
    bs_F_fourier,
    bs_K,
    indicator_fourier,
    k_fourier,
    khat,
)
from .specs import get_spec


class Check:
    def __init__(self, name: str, passed: bool, detail: str):
        self.name = name
        self.passed = bool(passed)
        self.detail = detail

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _stamp(config: ExperimentConfig) -> dict:
    return {"config_hash": config.config_hash, "seed": config.run.seed}


def _write_table(path_base: Path, rows: list[dict], config: ExperimentConfig) -> Path:
    """Rows as CSV (17 significant digits) or JSON, per the output format."""
    if config.output.format == "json":
        path = path_base.with_suffix(".json")
        write_sidecar(path, {**_stamp(config), "rows": rows})
        return path
    path = path_base.with_suffix(".csv")
    cols = list(rows[0].keys())
    lines = [f"# config_hash={config.config_hash}", f"# seed={config.run.seed}", ",".join(cols)]
    for row in rows:
        cells = []
        for c in cols:
            v = row[c]
            cells.append(f"{v:.17g}" if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    return path


def cmd_sample(config: ExperimentConfig, out: Path, workers: int) -> list[Check]:
    det = collect_deterministic(config.run, config.eval, workers=workers)
    rand = collect_random(config.run)
    for m, name in ((det, "det_measure"), (rand, "rand_measure")):
        write_measure_csv(m, out / f"{name}.csv", config.config_hash)
        write_sidecar(out / f"{name}.meta.json", {**_stamp(config), **m.meta})
    return []


def _load_or_collect(config, out, workers, det_path=None, rand_path=None):
    det = read_measure_csv(det_path) if det_path else collect_deterministic(
        config.run, config.eval, workers=workers
    )
    rand = read_measure_csv(rand_path) if rand_path else collect_random(config.run)
    return det, rand


def cmd_discrepancy(
    config: ExperimentConfig, out: Path, workers: int, det_path=None, rand_path=None
) -> list[Check]:
    det, rand = _load_or_collect(config, out, workers, det_path, rand_path)
    opts = config.discrepancy
    res = discrepancy(det, rand, grid_n=opts.grid_n, exact_dim4_limit=opts.exact_dim4_limit)
    floor = permutation_noise_floor(
        det, rand, n_splits=opts.n_permutations, seed=config.run.seed,
        grid_n=opts.grid_n, exact_dim4_limit=opts.exact_dim4_limit,
    )
    report = {
        **_stamp(config),
        "d_hat": res.value,
        "noise_floor": floor,
        "bound_shape_value": config.run.bound_shape,
        "regime_flag": config.run.regime_ok,
        "method": res.method,
        "grid_resolution": res.grid_resolution,
        "n_det": det.count,
        "n_rand": rand.count,
    }
    write_sidecar(out / "discrepancy.json", report)
    checks = [
        Check(
            "discrepancy_within_noise",
            res.value <= opts.max_floor_ratio * floor,
            f"d_hat={res.value:.5f} floor={floor:.5f} ratio_limit={opts.max_floor_ratio}",
        )
    ]
    return checks


def cmd_charfn(
    config: ExperimentConfig, out: Path, workers: int, det_path=None, rand_path=None
) -> list[Check]:
    det, rand = _load_or_collect(config, out, workers, det_path, rand_path)
    opts = config.charfn
    gap = char_fn_gap(det, rand, opts.box_half_width, opts.grid_n)
    report = {
        **_stamp(config),
        "max_gap": gap.value,
        "noise_floor": gap.noise_floor,
        "box_half_width": gap.box_half_width,
        "grid_n": gap.grid_n,
    }
    write_sidecar(out / "charfn.json", report)
    return [
        Check(
            "charfn_within_noise",
            gap.value <= opts.max_floor_ratio * gap.noise_floor,
            f"gap={gap.value:.5f} floor={gap.noise_floor:.5f}",
        )
    ]


def cmd_moments(config: ExperimentConfig, out: Path, workers: int) -> list[Check]:
    opts = config.moments
    spec = get_spec(config.run.specs[0])
    sigma = config.run.sigma
    rows = []
    checks = []
    for k in opts.k_list:
        est = empirical_moment(
            spec, sigma, 2 * k, opts.n_samples, config.run.seed, cutoff=config.run.P
        )
        row = {
            "k": k,
            "empirical": est.value,
            "std_error": est.std_error,
            "n_samples": est.n_samples,
        }
        if k == 1:
            analytic = analytic_moment2(spec, sigma, config.run.P)
            row["analytic"] = analytic
            delta = abs(est.value - analytic)
            ok = delta <= opts.se_factor * est.std_error
            row["pass"] = ok
            checks.append(
                Check(
                    "moment2_matches_analytic",
                    ok,
                    f"|{est.value:.6f} - {analytic:.6f}| vs {opts.se_factor} SE = "
                    f"{opts.se_factor * est.std_error:.6f}",
                )
            )
        rows.append(row)
    _write_table(out / "moments", rows, config)
    return checks


def cmd_secondmoment(config: ExperimentConfig, out: Path, workers: int) -> list[Check]:
    opts = config.secondmoment
    gaps = second_moment_gap_sweep(config.run, opts.y_list, config.eval, workers=workers)
    rows = [
        {"Y": g.y_cutoff, "mean_sq_gap": g.mean, "std_error": g.std_error, "n": g.n_samples}
        for g in gaps
    ]
    _write_table(out / "secondmoment", rows, config)
    checks = []
    ok = True
    for a, b in zip(gaps, gaps[1:]):
        slack = opts.se_factor * math.hypot(a.std_error, b.std_error)
        if b.mean > a.mean + slack:
            ok = False
    checks.append(
        Check(
            "gap_nonincreasing_in_Y",
            ok,
            "mean |log L - R_Y|^2 non-increasing within "
            f"{opts.se_factor} combined SE over Y={list(opts.y_list)}",
        )
    )
    return checks


def _synthetic_gaussian_points(n: int, seed: int) -> np.ndarray:
    u = np.stack(
        [
            rng.uniform01(rng.DOMAIN_GAUSS, seed, 0, np.arange(n)),
            rng.uniform01(rng.DOMAIN_GAUSS, seed, 1, np.arange(n)),
        ],
        axis=1,
    )
    target = erfinv(2.0 * u - 1.0) / math.sqrt(math.pi)
    return target * math.sqrt(math.pi)  # raw scale for psi = 1


def cmd_clt(config: ExperimentConfig, out: Path, workers: int, measure_path=None) -> list[Check]:
    opts = config.clt
    source = opts.source
    if measure_path:
        source = "file"
    if source == "synthetic":
        points = _synthetic_gaussian_points(opts.n_samples, config.run.seed)
        psi = [1.0]
        limit = None  # per-axis 1.63/sqrt(n) thresholds apply
    elif source == "random":
        run = dataclasses.replace(
            config.run, G=opts.model_G, n_rand=opts.n_samples
        )
        m = collect_random(run)
        points = m.points
        psi = [get_spec(lbl).xi * math.log(opts.model_G) for lbl in run.specs]
        limit = opts.model_ks_limit
    elif source == "file":
        m = read_measure_csv(measure_path or opts.measure_file)
        points = m.points
        psi = [get_spec(lbl).xi * math.log(opts.model_G) for lbl in config.run.specs]
        limit = opts.model_ks_limit
    else:
        raise ValueError(f"unknown clt source {source!r}")
    coeffs = None
    if opts.coefficients:
        coeffs = ExpansionCoefficients.from_config(len(psi), [dict(r) for r in opts.coefficients])
    report = clt_fit(points, psi, ks_scale=opts.ks_scale, coefficients=coeffs)
    payload = {
        **_stamp(config),
        "source": source,
        "n_samples": report.n_samples,
        "axes": [
            {
                "axis": a.axis,
                "kind": a.kind,
                "psi": a.psi,
                "ks": a.ks,
                "ks_threshold": a.ks_threshold,
            }
            for a in report.axes
        ],
        "boxes": [
            {
                "bounds": [list(b.bounds[0]), list(b.bounds[1])],
                "observed": b.observed,
                "predicted": b.predicted,
                "std_error": b.std_error,
            }
            for b in report.boxes
        ],
    }
    write_sidecar(out / "clt.json", payload)
    if limit is None:
        ok = report.passed
        detail = f"max KS {report.max_ks:.5f} vs 1.63/sqrt(n) = {report.axes[0].ks_threshold:.5f}"
    else:
        ok = report.max_ks <= limit
        detail = f"max KS {report.max_ks:.5f} vs limit {limit}"
    return [Check("clt_ks", ok, detail)]


def cmd_bs_check(config: ExperimentConfig, out: Path, workers: int) -> list[Check]:
    opts = config.bs
    n = opts.n_points
    ua = rng.uniform01(rng.DOMAIN_SPLIT, opts.seed, 1, np.arange(n))
    uw = rng.uniform01(rng.DOMAIN_SPLIT, opts.seed, 2, np.arange(n))
    ud = rng.uniform01(rng.DOMAIN_SPLIT, opts.seed, 3, np.arange(n))
    ux = rng.uniform01(rng.DOMAIN_SPLIT, opts.seed, 4, np.arange(n))
    a = -5.0 + 10.0 * ua
    width = opts.width_range[0] + (opts.width_range[1] - opts.width_range[0]) * uw
    delta = opts.delta_range[0] * (opts.delta_range[1] / opts.delta_range[0]) ** ud
    b = a + width
    span = width + 22.0 / delta + 2.0
    x = a - 11.0 / delta - 1.0 + span * ux

    bound_violations = 0
    sandwich_violations = 0
    worst_slack = 0.0
    for i in range(n):
        f = BSFunction(float(a[i]), float(b[i]), float(delta[i]))
        fv = float(bs_F(f, float(x[i])))
        if abs(fv) > 1.0 + opts.sandwich_slack:
            bound_violations += 1
        ind = 1.0 if a[i] <= x[i] <= b[i] else 0.0
        gap = ind - fv
        k2 = float(bs_K(delta[i] * (x[i] - a[i])) + bs_K(delta[i] * (b[i] - x[i])))
        low = -gap
        high = gap - k2
        worst_slack = max(worst_slack, low, high)
        if low > opts.sandwich_slack or high > opts.sandwich_slack:
            sandwich_violations += 1

    support_leaks = []
    match_errors = []
    for i in range(opts.fourier_instances):
        av = float(-3.0 + 6.0 * rng.uniform01(rng.DOMAIN_SPLIT, opts.seed, 5, i))
        wv = float(
            opts.width_range[0]
            + (opts.width_range[1] - opts.width_range[0])
            * rng.uniform01(rng.DOMAIN_SPLIT, opts.seed, 6, i)
        )
        dv = float(
            opts.delta_range[0]
            * (opts.delta_range[1] / opts.delta_range[0])
            ** rng.uniform01(rng.DOMAIN_SPLIT, opts.seed, 7, i)
        )
        f = BSFunction(av, av + wv, dv)
        ys = np.concatenate(
            [
                [1.2 * dv, -1.2 * dv],
                dv / 2.0 * (2.0 * rng.uniform01(rng.DOMAIN_SPLIT, opts.seed, 8, np.arange(10)) - 1.0),
            ]
        )
        vals, _ = bs_F_fourier(f, ys)
        support_leaks.append(float(np.max(np.abs(vals[:2]))))
        match_errors.append(
            float(np.max(np.abs(vals[2:] - indicator_fourier(av, av + wv, ys[2:])))) * dv
        )
    tent_errs = [abs(k_fourier(y) - float(khat(y))) for y in (-1.5, -1.0, -0.5, 0.0, 0.3, 1.0, 2.0)]

    report = {
        **_stamp(config),
        "n_points": n,
        "bound_violations": bound_violations,
        "sandwich_violations": sandwich_violations,
        "worst_sandwich_slack": worst_slack,
        "max_support_leak": max(support_leaks),
        "max_indicator_gap_times_delta": max(match_errors),
        "max_tent_error": max(tent_errs),
    }
    write_sidecar(out / "bs.json", report)
    return [
        Check("bs_bound", bound_violations == 0, f"{bound_violations} violations of |F| <= 1"),
        Check(
            "bs_sandwich",
            sandwich_violations == 0,
            f"{sandwich_violations} sandwich violations beyond {opts.sandwich_slack}",
        ),
        Check(
            "bs_fourier_support",
            max(support_leaks) <= 1e-6,
            f"max |Fhat(1.2 delta)| = {max(support_leaks):.2e}",
        ),
        Check(
            "bs_fourier_match",
            max(match_errors) <= 3.0,
            f"max delta*|Fhat - indicator_hat| = {max(match_errors):.3f} (limit 3)",
        ),
        Check("bs_tent", max(tent_errs) <= 1e-6, f"max tent error {max(tent_errs):.2e}"),
    ]


def cmd_sweep(config: ExperimentConfig, out: Path, workers: int) -> list[Check]:
    opts = config.sweep
    rows = []
    prev = None
    monotone = True
    for T in opts.t_list:
        run = dataclasses.replace(config.run, T=float(T))
        det = collect_deterministic(run, config.eval, workers=workers)
        rand = collect_random(run)
        res = discrepancy(
            det,
            rand,
            grid_n=config.discrepancy.grid_n,
            exact_dim4_limit=config.discrepancy.exact_dim4_limit,
        )
        floor = permutation_noise_floor(
            det, rand, n_splits=config.discrepancy.n_permutations, seed=run.seed
        )
        rows.append(
            {
                "T": float(T),
                "d_hat": res.value,
                "noise_floor": floor,
                "bound_shape_value": run.bound_shape,
                "regime_flag": run.regime_ok,
            }
        )
        if prev is not None and res.value > prev["d_hat"] + opts.floor_factor * max(
            floor, prev["noise_floor"]
        ):
            monotone = False
        prev = rows[-1]
    _write_table(out / "sweep", rows, config)
    return [
        Check(
            "sweep_nonincreasing",
            monotone,
            f"d_hat non-increasing within {opts.floor_factor} noise floors over T={list(opts.t_list)}",
        )
    ]


_COMMANDS = {
    "sample": cmd_sample,
    "discrepancy": cmd_discrepancy,
    "charfn": cmd_charfn,
    "moments": cmd_moments,
    "secondmoment": cmd_secondmoment,
    "clt": cmd_clt,
    "bs-check": cmd_bs_check,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcrit-lab",
        description="Numerical experiments on L-function value distributions near the critical line",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", type=Path, default=None, help="TOML or JSON config file")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--format", choices=["csv", "json"], default=None)
    parser.add_argument("--det", type=Path, default=None, help="existing deterministic measure CSV")
    parser.add_argument("--rand", type=Path, default=None, help="existing random-model measure CSV")
    parser.add_argument("--measure", type=Path, default=None, help="measure CSV for clt")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.format is not None:
        config = dataclasses.replace(
            config, output=dataclasses.replace(config.output, format=args.format)
        )
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    fn = _COMMANDS[args.command]
    try:
        if args.command in ("discrepancy", "charfn"):
            checks = fn(config, out, args.workers, det_path=args.det, rand_path=args.rand)
        elif args.command == "clt":
            checks = fn(config, out, args.workers, measure_path=args.measure)
        else:
            checks = fn(config, out, args.workers)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.time() - started
    with open(out / "run.log", "a") as fh:
        fh.write(
            f"command={args.command} config_hash={config.config_hash} "
            f"workers={args.workers} elapsed_s={elapsed:.3f}\n"
        )
    write_sidecar(
        out / f"{args.command.replace('-', '_')}_checks.json",
        {**_stamp(config), "checks": [c.as_dict() for c in checks]},
    )
    failed = [c for c in checks if not c.passed]
    for c in failed:
        print(f"FAILED {c.name}: {c.detail}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
