"""Acceptance suite: one test and one PASS/FAIL line per criterion.

The Monte-Carlo criteria share one cache of operating points so each
(architecture, combiner, configuration) is evaluated once.
"""

import dataclasses
import math
import time

import numpy as np

from fr3link import cli
from fr3link.allocation import LinkModel, iterative_waterfilling
from fr3link.architectures import ARCHITECTURE_NAMES, component_counts, make_architecture
from fr3link.beamforming import dft_codebook, omp_hybrid
from fr3link.channel import cluster_power_db
from fr3link.components import (
    adc_power,
    adc_quantization_noise_db,
    divider_insertion_loss_db,
    friis_total_nf,
)
from fr3link.config import SimConfig
from fr3link.harness import run_point, run_trial, sweep

TRIALS = 200

# hand-evaluated values frozen before the build
FRIIS_CASES = [
    ([(1.0, 18.0)], 1.0),
    ([(1.0, 18.0), (2.0, -0.2)], 1.0318615446628254),
    ([(1.0, 18.0), (22.0, -0.5)], 5.7460565173621125),
]
FORMULA_CASES = [
    ("adc_power 4 bit", lambda: adc_power(10 ** -11.4, 1.0, 4, 100e6), 0.012739429457711903),
    ("adc_power 5 bit", lambda: adc_power(10 ** -11.4, 1.0, 5, 100e6), 0.025478858915423806),
    ("Q_N fs=2B", lambda: adc_quantization_noise_db(4, 0.0, 2.0, 1.0), -28.839999999999996),
    ("Q_N fs=8B", lambda: adc_quantization_noise_db(4, 0.0, 8.0, 1.0), -34.86059991327962),
    ("divider 8", lambda: divider_insertion_loss_db(8, 0.5), 9.530899869919436),
    ("divider 2", lambda: divider_insertion_loss_db(2, 0.5), 3.510299956639812),
    ("pathloss 6 GHz", lambda: cluster_power_db(100.0, 6.0), -89.96302500767288),
    ("pathloss 24 GHz", lambda: cluster_power_db(100.0, 24.0), -102.00422483423213),
]
EXPECTED_COUNTS = {
    "FI-FD-SRF": (16, 32, 0, 64, 80, 16, 16),
    "FI-HAD-SRF": (16, 16, 512, 64, 72, 80, 8),
    "FI-FD-DRF": (64, 128, 0, 128, 128, 0, 0),
    "FI-HAD-DRF": (64, 64, 512, 128, 96, 64, 32),
    "FP-FD-SRF": (16, 32, 0, 64, 80, 0, 0),
    "FP-HAD-SRF": (16, 16, 512, 64, 72, 64, 8),
    "FP-FD-DRF": (64, 128, 0, 128, 128, 0, 0),
    "FP-HAD-DRF": (64, 64, 512, 128, 72, 64, 32),
}
COUNT_KEYS = ("antennas", "adcs", "phase_shifters", "rf_if_filters", "if_bb_mixers",
              "dividers", "combiners")

_POINTS: dict = {}


def point(arch, method="lmmse", **overrides):
    """Cached Monte-Carlo evaluation at the canonical point plus overrides."""
    key = (arch, method, tuple(sorted(overrides.items())))
    if key not in _POINTS:
        cfg = SimConfig()
        for name, value in overrides.items():
            cfg = cfg.with_value(name, value)
        _POINTS[key] = run_point(cfg, arch, method, trials=TRIALS)
    return _POINTS[key]


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def rel(a, b):
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------- 1-3

def test_criterion_01_friis(verdict):
    t0 = time.perf_counter()
    errs = [rel(friis_total_nf(s), ref) for s, ref in FRIIS_CASES]
    rng = np.random.default_rng(2024)
    monotone = 0
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        nf = rng.uniform(0.0, 25.0, n)
        g = rng.uniform(-5.0, 25.0, n)
        g_up = g.copy()
        g_up[0] += rng.uniform(0.0, 20.0)
        monotone += friis_total_nf(list(zip(nf, g_up))) <= friis_total_nf(list(zip(nf, g))) + 1e-12
    dt = time.perf_counter() - t0
    ok = max(errs) < 1e-9 and monotone == 1000 and dt < 1.0
    verdict(1, ok, f"max rel err {max(errs):.1e}, monotone {monotone}/1000, {dt:.2f} s")
    assert ok


def test_criterion_02_formulas(verdict):
    t0 = time.perf_counter()
    errs = {name: rel(f(), ref) for name, f, ref in FORMULA_CASES}
    dt = time.perf_counter() - t0
    worst = max(errs, key=errs.get)
    ok = errs[worst] < 1e-9 and dt < 1.0
    verdict(2, ok, f"{len(errs)} formulas, worst {worst} rel err {errs[worst]:.1e}, {dt:.3f} s")
    assert ok


def test_criterion_03_component_counts(verdict):
    t0 = time.perf_counter()
    bad = []
    for name, row in EXPECTED_COUNTS.items():
        counts = component_counts(make_architecture(name, n_antennas=16, n_rf_chains=8))
        if tuple(counts[k] for k in COUNT_KEYS) != row:
            bad.append(name)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 1.0
    verdict(3, ok, f"{8 - len(bad)}/8 rows exact, {dt:.3f} s")
    assert ok


# ---------------------------------------------------------------- 4-6

def test_criterion_04_omp_recovery(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    d = dft_codebook((4, 4), oversampling=1).matrix
    worst, monotone = 0.0, 0
    for _ in range(100):
        n_rf = int(rng.integers(1, 9))
        k = int(rng.integers(1, n_rf + 1))
        cols = rng.choice(d.shape[1], n_rf, replace=False)
        w_opt = d[:, cols] @ crandn(rng, n_rf, k)
        res = omp_hybrid(w_opt, d, n_rf)
        err = np.linalg.norm(w_opt - res.combiner) / np.linalg.norm(w_opt)
        worst = max(worst, err)
        monotone += bool(np.all(np.diff(res.residual_norms) <= 1e-12 * res.residual_norms[0]))
    dt = time.perf_counter() - t0
    ok = worst < 1e-8 and monotone == 100 and dt < 10.0
    verdict(4, ok, f"worst relative error {worst:.1e}, residual monotone {monotone}/100, "
                   f"{dt:.2f} s")
    assert ok


def _grid_optimum(model, p_max, n=1000):
    g = np.linspace(0.0, p_max, n)
    l1, l2 = (x.ravel() for x in np.meshgrid(g, g, indexing="ij"))
    floor = model.floor_w + model.coupling[0] * l1 + model.coupling[1] * l2
    s1 = l1 * model.gains[0, 0] / (l2 * model.gains[0, 1] + floor)
    s2 = l2 * model.gains[1, 1] / (l1 * model.gains[1, 0] + floor)
    return float(np.max(model.mu * (np.log2(1 + s1) + np.log2(1 + s2))))


def test_criterion_05_waterfilling_oracle(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    gaps = []
    for _ in range(20):
        h = crandn(rng, 4, 2) * np.sqrt(rng.uniform(0.2, 3.0, 2))
        h[:, 1] += 0.7 * h[:, 0]  # strongly coupled pair
        w = h if rng.random() < 0.5 else crandn(rng, 4, 2)
        model = LinkModel.from_combiner(w, h, 10 ** rng.uniform(-2, 0), rng.uniform(0, 0.05),
                                        quant=rng.uniform(0, 0.01), mu=0.98)
        got = model.sum_rate(iterative_waterfilling(model, 1.0).powers)
        best = _grid_optimum(model, 1.0)
        gaps.append((best - got) / best)
    dt = time.perf_counter() - t0
    worst = max(abs(g) for g in gaps)
    ok = worst <= 0.01 and dt < 60.0
    verdict(5, ok, f"worst gap to 1000x1000 grid {max(gaps):+.2e} over 20 draws, {dt:.1f} s")
    assert ok


def test_criterion_06_am_monotone(verdict):
    t0 = time.perf_counter()
    cfg = SimConfig()
    l_max = cfg.optimizer.am_max_iter
    worst_drop, too_long = 0.0, 0
    runs = 0
    for arch in ("FI-FD-SRF", "FI-HAD-SRF"):
        for trial in range(50):
            res = run_trial(cfg, arch, "lmmse", trial)
            steps = np.diff(res.trace)
            worst_drop = max(worst_drop, float(-steps.min()) if steps.size else 0.0)
            too_long += len(res.trace) > l_max
            runs += 1
    dt = time.perf_counter() - t0
    ok = worst_drop <= 1e-9 and too_long == 0 and dt < 300.0
    verdict(6, ok, f"{runs} runs, largest trace drop {worst_drop:.1e}, "
                   f"{too_long} over L_max={l_max}, {dt:.1f} s")
    assert ok


# ---------------------------------------------------------------- 7-8

def test_criterion_07_combiner_ordering(verdict):
    t0 = time.perf_counter()
    pts = {m: point("FI-FD-SRF", m) for m in ("lmmse", "rzfc", "mrc")}
    parts, ok = [], True
    for hi, lo in (("lmmse", "rzfc"), ("rzfc", "mrc")):
        gap = pts[hi].eta_mean - pts[lo].eta_mean
        ci = math.hypot(pts[hi].eta_ci95, pts[lo].eta_ci95)
        ok &= gap > ci
        parts.append(f"{hi}-{lo} {gap:.3f} (CI {ci:.3f})")
    dt = time.perf_counter() - t0
    ok &= dt < 600.0
    means = ", ".join(f"{m} {p.eta_mean:.2f}" for m, p in pts.items())
    verdict(7, ok, f"{means}; " + "; ".join(parts) + f"; {dt:.0f} s")
    assert ok


def test_criterion_08_architecture_classes(verdict):
    t0 = time.perf_counter()
    pts = {a: point(a) for a in ARCHITECTURE_NAMES}
    ratios = [pts[f"FI-{r}"].eta_mean / pts[f"FP-{r}"].eta_mean
              for r in ("FD-SRF", "FD-DRF", "HAD-SRF", "HAD-DRF")]
    power = {a: p.power.total_w for a, p in pts.items()}
    srf_drf = {a[:-4]: power[a] / power[a[:-3] + "DRF"] for a in pts if a.endswith("SRF")}
    fd_had = [(pts[f"{c}-FD-{r}"].eta_mean >= pts[f"{c}-HAD-{r}"].eta_mean,
               power[f"{c}-HAD-{r}"] < power[f"{c}-FD-{r}"])
              for c in ("FI", "FP") for r in ("SRF", "DRF")]
    ok_a = min(ratios) >= 3.5
    ok_b = max(srf_drf.values()) <= 0.6
    ok_c = all(e and p for e, p in fd_had)
    dt = time.perf_counter() - t0
    ok = ok_a and ok_b and ok_c and dt < 900.0
    verdict(8, ok,
            f"(a) {'ok' if ok_a else 'FAIL'} min FI/FP {min(ratios):.2f}; "
            f"(b) {'ok' if ok_b else 'FAIL'} SRF/DRF power "
            + ", ".join(f"{k} {v:.3f}" for k, v in srf_drf.items())
            + f"; (c) {'ok' if ok_c else 'FAIL'} {sum(e and p for e, p in fd_had)}/4 pairs; "
            f"{dt:.0f} s")
    assert ok_a, "FI/FP ratio below 3.5"
    assert ok_c, "FD/HAD ordering violated"
    assert ok_b, "SRF total power above 0.6x DRF"


# ---------------------------------------------------------------- 9

def plateau_onset(x, y, fraction=0.98):
    """Gain at which ``y`` first reaches ``fraction`` of its maximum.

    Linear interpolation between the bracketing grid points keeps the
    estimate from snapping to the grid step.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    target = fraction * y.max()
    i = int(np.argmax(y >= target))
    if i == 0:
        return float(x[0])
    return float(x[i - 1] + (target - y[i - 1]) / (y[i] - y[i - 1]) * (x[i] - x[i - 1]))


def _curve(param, grid, arch, **kw):
    cfg = SimConfig()
    if kw:
        cfg = dataclasses.replace(cfg, optimizer=dataclasses.replace(cfg.optimizer, **kw))
    rows = sweep(cfg, param, grid, [arch], ["lmmse"], trials=TRIALS)
    assert all(r.status == "ok" for r in rows)
    return rows


def test_criterion_09_trends(verdict):
    t0 = time.perf_counter()
    notes, ok = [], True

    # (a) ADC resolution
    bits = [float(b) for b in range(1, 11)]
    ok_a = True
    for arch in ("FI-FD-SRF", "FI-HAD-SRF"):
        rows = _curve("adc_bits", bits, arch)
        se = np.array([r.eta_tot_mean for r in rows])
        p = np.array([r.p_total_dbw for r in rows])
        ok_a &= bool(np.all(np.diff(p) > 0.0))
        ok_a &= bool(se[-1] - se[-2] < 0.02 * (se.max() - se.min()))
    notes.append(f"(a) {'ok' if ok_a else 'FAIL'}")

    # (b) LNA gain
    gains = [float(g) for g in range(0, 55, 5)]
    onsets, ok_b = {}, True
    for arch in ("FI-FD-SRF", "FI-HAD-SRF", "FI-FD-DRF", "FI-HAD-DRF"):
        se = np.array([r.eta_tot_mean for r in _curve("lna_gain_db", gains, arch)])
        ok_b &= bool(np.all(np.diff(se) >= -1e-9))
        ok_b &= bool(se[-1] - se[-2] < 0.02 * (se.max() - se.min()))  # saturates
        onsets[arch] = plateau_onset(gains, se)
    for rf in ("SRF", "DRF"):
        ok_b &= onsets[f"FI-HAD-{rf}"] < onsets[f"FI-FD-{rf}"]
    notes.append(f"(b) {'ok' if ok_b else 'FAIL'} onset dB "
                 + ", ".join(f"{a} {v:.2f}" for a, v in onsets.items()))

    # (c) CSI error
    mse = [0.0, 0.05, 0.1, 0.2, 0.5, 1.0]
    ok_c, margins = True, []
    for arch in ("FI-FD-SRF", "FI-HAD-SRF"):
        opt = np.array([r.eta_tot_mean for r in _curve("csi_mse", mse, arch)])
        flat = np.array([r.eta_tot_mean
                         for r in _curve("csi_mse", mse, arch, power_mode="max")])
        ok_c &= bool(np.all(np.diff(opt) <= 1e-9) and np.all(opt >= flat))
        i = int(np.argmin(opt - flat))
        margins.append(f"{arch} min(opt-max) {opt[i] - flat[i]:+.3f} at mse {mse[i]}")
    notes.append(f"(c) {'ok' if ok_c else 'FAIL'} " + ", ".join(margins))

    dt = time.perf_counter() - t0
    ok = ok_a and ok_b and ok_c and dt < 1800.0
    verdict(9, ok, "; ".join(notes) + f"; {dt:.0f} s")
    assert ok_a, "ADC sweep trend"
    assert ok_c, "CSI sweep trend"
    assert ok_b, "LNA sweep trend"


# ---------------------------------------------------------------- 10

def test_criterion_10_determinism(tmp_path, verdict):
    t0 = time.perf_counter()
    args = ["sweep", "--param", "p_max_dbm", "--grid", "0,10", "--arch",
            "FI-FD-SRF,FP-HAD-DRF", "--combiner", "lmmse,mrc", "--trials", "5", "--seed", "11"]
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        assert cli.main(args + ["--out", str(out)]) == 0
        outs.append(out.read_bytes())
    dt = time.perf_counter() - t0
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    verdict(10, ok, f"{len(outs[0])} bytes, identical={outs[0] == outs[1]}, {dt:.1f} s")
    assert ok
