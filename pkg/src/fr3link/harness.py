"""Monte-Carlo evaluation of architectures, parameter sweeps and knee search."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .allocation import AmResult, AmSettings, BandProblem, alternating_maximization, overhead_factor
from .architectures import (
    ArchitectureDescriptor,
    PowerBreakdown,
    architecture_nf_db,
    make_architecture,
    power_breakdown,
    structure_mask,
)
from .beamforming import dft_codebook
from .channel import ScenarioGeometry, balanced_assignment, draw_channel_set, thermal_noise_w
from .components import (
    ComponentKind,
    ComponentSpec,
    adc_quantization_noise_db,
    db2lin,
    load_component_table,
)
from .config import SimConfig

__all__ = [
    "PointResult",
    "SweepRow",
    "KneePoint",
    "build_architecture",
    "component_table",
    "trial_problem",
    "run_trial",
    "run_point",
    "sweep",
    "knee_index",
    "se_power_tradeoff",
]

Z95 = 1.959963984540054


def build_architecture(cfg: SimConfig, name: str) -> ArchitectureDescriptor:
    sc, hw = cfg.scenario, cfg.hardware
    n_rf = hw.n_rf_chains if "HAD" in name else sc.n_antennas
    shares = hw.time_shares if name.startswith("FP") else None
    return make_architecture(name, n_antennas=sc.n_antennas, n_rf_chains=n_rf,
                             n_subbands=sc.n_subbands, time_shares=shares)


def component_table(cfg: SimConfig) -> dict[ComponentKind, ComponentSpec]:
    """Default table with config overrides and the LNA gain sweep applied."""
    table = load_component_table(cfg.hardware.components)
    if cfg.hardware.lna_gain_db is not None:
        table[ComponentKind.LNA] = replace(table[ComponentKind.LNA],
                                           gain_db=float(cfg.hardware.lna_gain_db))
    return table


def _band_nf_db(cfg: SimConfig, arch: ArchitectureDescriptor, table) -> list[float]:
    return [architecture_nf_db(arch, c, table) for c in range(arch.n_subbands)]


def _geometry(cfg: SimConfig, arch: ArchitectureDescriptor, rng: np.random.Generator):
    sc = cfg.scenario
    k = sc.total_ues
    dist = rng.uniform(*sc.distance_range_m, size=k)
    if arch.is_shared:
        layouts = ScenarioGeometry.shared_aperture(sc.carriers_ghz, sc.array_dims)
    else:
        layouts = ScenarioGeometry.dedicated_apertures(sc.carriers_ghz, sc.array_dims)
    return ScenarioGeometry(tuple(sc.carriers_ghz), sc.bandwidths_hz, layouts, dist,
                            tuple(balanced_assignment(k, sc.n_subbands)))


def trial_problem(cfg: SimConfig, arch: ArchitectureDescriptor, trial: int,
                  seed: int | None = None, table=None) -> list[BandProblem]:
    """Per-band optimisation problems of one Monte-Carlo trial.

    The random streams depend only on ``(seed, trial)``, so every
    architecture and grid point sees the same UE drops and scatterers.
    """
    sc, hw = cfg.scenario, cfg.hardware
    seed = sc.seed if seed is None else seed
    table = component_table(cfg) if table is None else table
    drop_ss, chan_ss = np.random.SeedSequence([seed, trial]).spawn(2)
    geo = _geometry(cfg, arch, np.random.default_rng(drop_ss))
    chans = draw_channel_set(geo, chan_ss, sc.csi_mse, sc.q_clusters, sc.p_scatterers,
                             sc.spread_deg, sc.azimuth_range_deg, sc.elevation_range_deg,
                             sc.shadowing_std_db)
    k_per = [len(u) for u in chans.ue_index]
    structure_mask(arch, k_per)  # raises on infeasible RF-chain budgets
    nf = _band_nf_db(cfg, arch, table)
    varsigma = sc.varsigma if hw.impairments else 0.0
    weights = arch.band_weights()
    codebook = (dft_codebook(sc.array_dims, cfg.optimizer.codebook_oversampling)
                if arch.is_hybrid else None)
    bands = []
    for c in range(arch.n_subbands):
        bw = sc.bandwidths_hz[c]
        noise = thermal_noise_w(bw, nf[c] if hw.impairments else 0.0)
        q = db2lin(adc_quantization_noise_db(hw.adc_bits, hw.adc_chi_db,
                                             2.0 * bw * hw.adc_oversampling, bw))
        bands.append(BandProblem(
            h_est=chans.est[c], h_true=chans.true[c], noise_w=noise, mse=chans.mse[c],
            varsigma=varsigma, quant=q, mu=overhead_factor(k_per[c], sc.block_length),
            weight=weights[c], codebook=codebook, n_rf=arch.n_rf_chains,
        ))
    return bands


def _settings(cfg: SimConfig, method: str | None) -> AmSettings:
    op = cfg.optimizer
    return AmSettings(p_max_w=op.p_max_w, method=method or op.combiner, eps=op.am_eps,
                      max_iter=op.am_max_iter, wf_tol=op.wf_tol, wf_max_iter=op.wf_max_iter,
                      power_mode=op.power_mode)


def run_trial(cfg: SimConfig, arch_name: str, method: str | None, trial: int,
              seed: int | None = None) -> AmResult:
    arch = build_architecture(cfg, arch_name)
    return alternating_maximization(trial_problem(cfg, arch, trial, seed), _settings(cfg, method))


@dataclass
class PointResult:
    arch: str
    method: str
    eta_mean: float
    eta_ci95: float
    eta_samples: np.ndarray
    power: PowerBreakdown
    nf_db: float
    am_iterations: np.ndarray = field(default_factory=lambda: np.zeros(0, int))

    @property
    def ee_bpshz_per_w(self) -> float:
        return self.eta_mean / self.power.total_w


def _trial_eta(args) -> tuple[float, int]:
    cfg, arch, method, trial, seed, table = args
    res = alternating_maximization(trial_problem(cfg, arch, trial, seed, table),
                                   _settings(cfg, method))
    return res.eta_true, res.iterations


def _mean_ci(x: np.ndarray) -> tuple[float, float]:
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(Z95 * x.std(ddof=1) / math.sqrt(x.size))


def run_point(cfg: SimConfig, arch_name: str, method: str | None = None,
              trials: int | None = None, seed: int | None = None,
              workers: int | None = None) -> PointResult:
    """Average the optimised sum rate of one architecture over Monte-Carlo trials.

    Trials are independent; with ``workers > 1`` they run in a process pool
    and are reduced in trial order, so the result does not depend on the
    worker count.
    """
    cfg.validate()
    method = method or cfg.optimizer.combiner
    trials = cfg.sweep.trials if trials is None else trials
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seed = cfg.scenario.seed if seed is None else seed
    workers = cfg.sweep.workers if workers is None else workers
    arch = build_architecture(cfg, arch_name)
    table = component_table(cfg)
    jobs = [(cfg, arch, method, t, seed, table) for t in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_trial_eta, jobs, chunksize=max(1, trials // (4 * workers))))
    else:
        out = [_trial_eta(j) for j in jobs]
    eta = np.array([o[0] for o in out])
    its = np.array([o[1] for o in out])
    mean, ci = _mean_ci(eta)
    power = power_breakdown(arch, cfg.scenario.bandwidths_hz, cfg.hardware.adc_bits,
                            cfg.hardware.adc_nu, table)
    nf = _band_nf_db(cfg, arch, table)[0]
    return PointResult(arch_name, method, mean, ci, eta, power, nf, its)


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepRow:
    sweep_param: str
    value: float
    arch: str
    method: str
    eta_tot_mean: float
    eta_tot_ci95: float
    p_static_w: float
    p_dynamic_w: float
    p_total_dbw: float
    nf_db: float
    ee_bpshz_per_w: float
    status: str = "ok"

    @classmethod
    def from_point(cls, param: str, value: float, pt: PointResult) -> "SweepRow":
        return cls(param, float(value), pt.arch, pt.method, pt.eta_mean, pt.eta_ci95,
                   pt.power.static_w, pt.power.dynamic_w, pt.power.total_dbw, pt.nf_db,
                   pt.ee_bpshz_per_w)

    @classmethod
    def failed(cls, param: str, value: float, arch: str, method: str, msg: str) -> "SweepRow":
        nan = float("nan")
        return cls(param, float(value), arch, method, nan, nan, nan, nan, nan, nan, nan,
                   f"error: {msg}")

    @property
    def key(self) -> tuple[float, str, str]:
        return (self.value, self.arch, self.method)


def sweep(cfg: SimConfig, param: str | None = None, grid: Sequence[float] | None = None,
          architectures: Iterable[str] | None = None, methods: Iterable[str] | None = None,
          trials: int | None = None, seed: int | None = None,
          resume: Iterable[SweepRow] = ()) -> list[SweepRow]:
    """Run every (grid value, architecture, method) combination.

    Rows come out in grid-major, then architecture, then method order.  Rows
    passed in ``resume`` with a matching key are reused instead of being
    recomputed.  A point that raises is recorded with ``status`` set to the
    error and the sweep carries on.
    """
    sw = cfg.sweep
    param = param or sw.param
    grid = tuple(sw.grid if grid is None else grid)
    archs = tuple(sw.architectures if architectures is None else architectures)
    methods = tuple(sw.combiners if methods is None else methods)
    if param is None:
        raise ValueError("no sweep parameter given")
    if not grid:
        raise ValueError("empty sweep grid")
    if list(grid) != sorted(grid):
        raise ValueError("sweep grid must be sorted")
    cfg.with_value(param, grid[0]).validate()
    done = {r.key: r for r in resume if r.sweep_param == param}
    rows = []
    for v in grid:
        point_cfg = cfg.with_value(param, v)
        for a in archs:
            for m in methods:
                key = (float(v), a, m)
                if key in done:
                    rows.append(done[key])
                    continue
                try:
                    pt = run_point(point_cfg, a, m, trials, seed)
                    rows.append(SweepRow.from_point(param, v, pt))
                except ValueError as exc:
                    rows.append(SweepRow.failed(param, v, a, m, str(exc)))
    return rows


# ---------------------------------------------------------------- knee

@dataclass(frozen=True)
class KneePoint:
    arch: str
    method: str
    n_bits: int
    se: float
    p_total_dbw: float
    flagged: bool


def knee_index(se: Sequence[float], p_dbw: Sequence[float], threshold: float = 1.0
               ) -> tuple[int, bool]:
    """Index of the last grid point whose marginal gain still pays off.

    Point ``i >= 1`` qualifies when ``(SE_i - SE_{i-1}) / (P_i - P_{i-1}) >=
    threshold`` (bps/Hz per dB).  Returns ``(0, True)`` when no point
    qualifies.
    """
    se = np.asarray(se, dtype=float)
    p = np.asarray(p_dbw, dtype=float)
    if se.size == 0 or se.size != p.size:
        raise ValueError("need matching, nonempty SE and power curves")
    best = None
    for i in range(1, se.size):
        dp = p[i] - p[i - 1]
        ds = se[i] - se[i - 1]
        gain = math.inf if dp <= 0.0 and ds > 0.0 else (ds / dp if dp > 0.0 else -math.inf)
        if gain >= threshold:
            best = i
    if best is None:
        return 0, True
    return best, False


def se_power_tradeoff(rows: Sequence[SweepRow], threshold: float = 1.0) -> list[KneePoint]:
    """Knee of every (architecture, method) curve of an ``adc_bits`` sweep."""
    curves: dict[tuple[str, str], list[SweepRow]] = {}
    for r in rows:
        if r.sweep_param != "adc_bits":
            raise ValueError("trade-off analysis needs an adc_bits sweep")
        if r.status == "ok":
            curves.setdefault((r.arch, r.method), []).append(r)
    out = []
    for (arch, method), pts in curves.items():
        pts = sorted(pts, key=lambda r: r.value)
        i, flag = knee_index([r.eta_tot_mean for r in pts], [r.p_total_dbw for r in pts],
                             threshold)
        out.append(KneePoint(arch, method, int(pts[i].value), pts[i].eta_tot_mean,
                             pts[i].p_total_dbw, flag))
    return out
