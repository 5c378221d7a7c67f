"""Experiment configuration: one human-editable document, TOML or JSON.

The parsed object round-trips exactly (parse -> emit -> parse is identity),
and its canonical JSON form is hashed into every output file so results can
be traced back to the exact configuration that produced them.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .evaluate import EvalParams
from .measures import RunConfig


@dataclass(frozen=True)
class DiscrepancyOptions:
    n_permutations: int = 12
    grid_n: int = 64
    exact_dim4_limit: int = 64
    max_floor_ratio: float = 5.0


@dataclass(frozen=True)
class CharFnOptions:
    box_half_width: float = 1.0
    grid_n: int = 9
    max_floor_ratio: float = 5.0


@dataclass(frozen=True)
class MomentOptions:
    k_list: tuple[int, ...] = (1, 2)
    n_samples: int = 20_000
    se_factor: float = 4.0


@dataclass(frozen=True)
class SecondMomentOptions:
    y_list: tuple[float, ...] = (100.0, 1000.0, 10000.0)
    se_factor: float = 2.0


@dataclass(frozen=True)
class CLTOptions:
    source: str = "random"  # random | synthetic | file
    n_samples: int = 10_000
    model_G: float = 64.0
    ks_scale: float = 1.63
    model_ks_limit: float = 0.1
    measure_file: str = ""
    coefficients: tuple = ()  # rows {k: [...], l: [...], value: float}


@dataclass(frozen=True)
class BSOptions:
    n_points: int = 10_000
    width_range: tuple[float, float] = (0.1, 10.0)
    delta_range: tuple[float, float] = (1.0, 100.0)
    fourier_instances: int = 20
    sandwich_slack: float = 1.0e-8
    seed: int = 7


@dataclass(frozen=True)
class SweepOptions:
    t_list: tuple[float, ...] = (1.0e3, 1.0e4, 1.0e5)
    floor_factor: float = 2.0


@dataclass(frozen=True)
class OutputOptions:
    format: str = "csv"  # csv | json

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ValueError("format must be 'csv' or 'json'")


@dataclass(frozen=True)
class ExperimentConfig:
    run: RunConfig = field(default_factory=RunConfig)
    eval: EvalParams = field(default_factory=EvalParams)
    discrepancy: DiscrepancyOptions = field(default_factory=DiscrepancyOptions)
    charfn: CharFnOptions = field(default_factory=CharFnOptions)
    moments: MomentOptions = field(default_factory=MomentOptions)
    secondmoment: SecondMomentOptions = field(default_factory=SecondMomentOptions)
    clt: CLTOptions = field(default_factory=CLTOptions)
    bs: BSOptions = field(default_factory=BSOptions)
    sweep: SweepOptions = field(default_factory=SweepOptions)
    output: OutputOptions = field(default_factory=OutputOptions)

    def to_dict(self) -> dict:
        def strip(obj):
            if dataclasses.is_dataclass(obj):
                return {f.name: strip(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
            if isinstance(obj, (list, tuple)):
                return [strip(v) for v in obj]
            if isinstance(obj, dict):
                return {k: strip(v) for k, v in obj.items()}
            return obj

        return strip(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        sections = {
            "run": RunConfig,
            "eval": EvalParams,
            "discrepancy": DiscrepancyOptions,
            "charfn": CharFnOptions,
            "moments": MomentOptions,
            "secondmoment": SecondMomentOptions,
            "clt": CLTOptions,
            "bs": BSOptions,
            "sweep": SweepOptions,
            "output": OutputOptions,
        }
        kwargs = {}
        unknown = set(data) - set(sections)
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        for name, klass in sections.items():
            if name not in data:
                continue
            section = dict(data[name])
            valid = {f.name for f in dataclasses.fields(klass)}
            bad = set(section) - valid
            if bad:
                raise ValueError(f"unknown keys in [{name}]: {sorted(bad)}")
            for key, val in section.items():
                if isinstance(val, list):
                    section[key] = tuple(
                        tuple(v) if isinstance(v, list) else v for v in val
                    )
            kwargs[name] = klass(**section)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        text = path.read_text()
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            try:
                import tomllib as toml_reader  # py >= 3.11
            except ImportError:
                import tomli as toml_reader
            data = toml_reader.loads(text)
        return cls.from_dict(data)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return dataclasses.replace(self, run=dataclasses.replace(self.run, seed=seed))
