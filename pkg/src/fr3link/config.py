"""Simulation configuration: dataclasses plus a strict TOML loader."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .architectures import ARCHITECTURE_NAMES, parse_architectures
from .beamforming import COMBINER_METHODS

__all__ = [
    "SWEEP_PARAMS",
    "ScenarioConfig",
    "HardwareConfig",
    "OptimizerConfig",
    "SweepConfig",
    "SimConfig",
    "config_from_dict",
    "load_config",
    "parse_grid",
]

SWEEP_PARAMS = ("lna_gain_db", "csi_mse", "n_ues", "p_max_dbm", "adc_bits")


@dataclass
class ScenarioConfig:
    carriers_ghz: tuple[float, ...] = (6.0, 12.0, 18.0, 24.0)
    bandwidths_mhz: tuple[float, ...] = (100.0, 100.0, 200.0, 400.0)
    n_antennas: int = 16
    array_dims: tuple[int, int] = (4, 4)
    ue_count_per_band: int = 4
    n_ues: int | None = None  # total; overrides ue_count_per_band when set
    distance_range_m: tuple[float, float] = (20.0, 150.0)
    q_clusters: int = 5
    p_scatterers: int = 10
    spread_deg: float = 2.0
    azimuth_range_deg: tuple[float, float] = (-60.0, 60.0)
    elevation_range_deg: tuple[float, float] = (-30.0, 30.0)
    shadowing_std_db: float = 0.0
    varsigma: float = 0.01
    csi_mse: float = 0.0
    block_length: int = 200
    seed: int = 0

    def validate(self) -> list[str]:
        errs = []
        if len(self.carriers_ghz) != len(self.bandwidths_mhz):
            errs.append("carriers_ghz and bandwidths_mhz differ in length")
        if any(f <= 0 for f in self.carriers_ghz) or any(b <= 0 for b in self.bandwidths_mhz):
            errs.append("carriers and bandwidths must be positive")
        if self.array_dims[0] * self.array_dims[1] != self.n_antennas:
            errs.append("array_dims do not multiply to n_antennas")
        if self.total_ues < 1:
            errs.append("at least one UE required")
        lo, hi = self.distance_range_m
        if not 0 < lo <= hi:
            errs.append("distance_range_m must satisfy 0 < lo <= hi")
        if self.varsigma < 0 or self.csi_mse < 0:
            errs.append("varsigma and csi_mse must be >= 0")
        if self.q_clusters < 1 or self.p_scatterers < 1:
            errs.append("q_clusters and p_scatterers must be >= 1")
        return errs

    @property
    def n_subbands(self) -> int:
        return len(self.carriers_ghz)

    @property
    def total_ues(self) -> int:
        if self.n_ues is not None:
            return int(self.n_ues)
        return self.ue_count_per_band * self.n_subbands

    @property
    def bandwidths_hz(self) -> tuple[float, ...]:
        return tuple(b * 1e6 for b in self.bandwidths_mhz)


@dataclass
class HardwareConfig:
    n_rf_chains: int = 8
    adc_bits: int = 4
    adc_nu: float = 1.0
    adc_chi_db: float = 0.0
    adc_oversampling: float = 1.0  # f_s / (2B)
    lna_gain_db: float | None = None
    impairments: bool = True  # False forces NF = 0 dB and varsigma = 0
    time_shares: tuple[float, ...] | None = None
    components: dict[str, dict[str, Any]] = field(default_factory=dict)

    def validate(self) -> list[str]:
        errs = []
        if self.adc_bits < 1:
            errs.append("adc_bits must be >= 1")
        if not 0.5 <= self.adc_nu <= 2.0:
            errs.append("adc_nu must lie in [0.5, 2]")
        if self.adc_oversampling < 1.0:
            errs.append("adc_oversampling below 1 is sub-Nyquist")
        if self.n_rf_chains < 1:
            errs.append("n_rf_chains must be >= 1")
        return errs


@dataclass
class OptimizerConfig:
    combiner: str = "lmmse"
    power_mode: str = "optimal"
    p_max_dbm: float = 10.0
    am_eps: float = 1e-3
    am_max_iter: int = 20
    wf_tol: float = 1e-6
    wf_max_iter: int = 100
    codebook_oversampling: int = 2

    def validate(self) -> list[str]:
        errs = []
        if self.combiner not in COMBINER_METHODS:
            errs.append(f"combiner must be one of {COMBINER_METHODS}")
        if self.power_mode not in ("optimal", "max"):
            errs.append("power_mode must be 'optimal' or 'max'")
        if self.am_max_iter < 1 or self.wf_max_iter < 1:
            errs.append("iteration limits must be >= 1")
        if self.codebook_oversampling < 1:
            errs.append("codebook_oversampling must be >= 1")
        return errs

    @property
    def p_max_w(self) -> float:
        return 10.0 ** (self.p_max_dbm / 10.0) / 1000.0


@dataclass
class SweepConfig:
    param: str | None = None
    grid: tuple[float, ...] = ()
    architectures: tuple[str, ...] = ARCHITECTURE_NAMES
    combiners: tuple[str, ...] = ("lmmse",)
    trials: int = 200
    knee_threshold: float = 1.0
    workers: int = 1

    def validate(self) -> list[str]:
        errs = []
        if self.param is not None and self.param not in SWEEP_PARAMS:
            errs.append(f"sweep param must be one of {SWEEP_PARAMS}")
        if list(self.grid) != sorted(self.grid):
            errs.append("sweep grid must be sorted")
        if self.trials < 1:
            errs.append("trials must be >= 1")
        for a in self.architectures:
            if a not in ARCHITECTURE_NAMES:
                errs.append(f"unknown architecture {a!r}")
        for m in self.combiners:
            if m not in COMBINER_METHODS:
                errs.append(f"unknown combiner {m!r}")
        return errs


@dataclass
class SimConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    hardware: HardwareConfig = field(default_factory=HardwareConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def validate(self) -> None:
        """Raise one ``ValueError`` listing every problem found."""
        errs = (self.scenario.validate() + self.hardware.validate()
                + self.optimizer.validate() + self.sweep.validate())
        if errs:
            raise ValueError("invalid configuration: " + "; ".join(errs))

    def with_value(self, param: str, value: float) -> "SimConfig":
        """Copy with one sweep parameter set."""
        sc, hw, op = (dataclasses.replace(self.scenario), dataclasses.replace(self.hardware),
                      dataclasses.replace(self.optimizer))
        if param == "lna_gain_db":
            hw.lna_gain_db = float(value)
        elif param == "csi_mse":
            sc.csi_mse = float(value)
        elif param == "n_ues":
            sc.n_ues = int(round(value))
        elif param == "p_max_dbm":
            op.p_max_dbm = float(value)
        elif param == "adc_bits":
            hw.adc_bits = int(round(value))
        else:
            raise ValueError(f"unknown sweep parameter {param!r}")
        return SimConfig(sc, hw, op, self.sweep)


_SECTIONS = {
    "scenario": ScenarioConfig,
    "hardware": HardwareConfig,
    "optimizer": OptimizerConfig,
    "sweep": SweepConfig,
}


def _coerce(cls, name: str, value):
    default = getattr(cls(), name)
    if isinstance(value, list):
        return tuple(value)
    if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def config_from_dict(data: Mapping[str, Mapping[str, Any]]) -> SimConfig:
    """Build a :class:`SimConfig`, rejecting unknown sections and keys."""
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ValueError(f"unknown config section(s): {sorted(unknown)}")
    parts = {}
    for sec, cls in _SECTIONS.items():
        raw = dict(data.get(sec, {}))
        names = {f.name for f in dataclasses.fields(cls)}
        bad = set(raw) - names
        if bad:
            raise ValueError(f"unknown key(s) in [{sec}]: {sorted(bad)}")
        if sec == "sweep" and "architectures" in raw and isinstance(raw["architectures"], str):
            raw["architectures"] = parse_architectures(raw["architectures"])
        if sec == "sweep" and "grid" in raw and isinstance(raw["grid"], str):
            raw["grid"] = parse_grid(raw["grid"])
        kwargs = {}
        for k, v in raw.items():
            kwargs[k] = v if k == "components" else _coerce(cls, k, v)
        parts[sec] = cls(**kwargs)
    cfg = SimConfig(**parts)
    cfg.validate()
    return cfg


def load_config(path: str | Path) -> SimConfig:
    with open(path, "rb") as fh:
        return config_from_dict(tomllib.load(fh))


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse ``a:b:step`` (inclusive of ``b``) or a comma-separated list."""
    text = text.strip()
    if not text:
        raise ValueError("empty grid")
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ValueError("grid must be 'start:stop:step' with step > 0 and stop >= start")
        a, b, step = parts
        n = int(round((b - a) / step))
        vals = [a + i * step for i in range(n + 1) if a + i * step <= b + 1e-9 * max(1.0, abs(b))]
        return tuple(round(v, 12) for v in vals)
    vals = tuple(float(x) for x in text.split(","))
    return vals
