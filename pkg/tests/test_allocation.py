import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fr3link.allocation import (
    AmSettings,
    BandProblem,
    LinkModel,
    alternating_maximization,
    iterative_waterfilling,
    overhead_factor,
    sinr,
    spectral_efficiency,
    waterfill_update,
)
from fr3link.beamforming import dft_codebook


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def grid_optimum(model, p_max, n=1000):
    g = np.linspace(0.0, p_max, n)
    l1, l2 = [x.ravel() for x in np.meshgrid(g, g, indexing="ij")]
    lam = np.stack([l1, l2])
    floor = model.floor_w + model.coupling @ lam
    s1 = l1 * model.gains[0, 0] / (l2 * model.gains[0, 1] + floor)
    s2 = l2 * model.gains[1, 1] / (l1 * model.gains[1, 0] + floor)
    return float(np.max(model.mu * (np.log2(1 + s1) + np.log2(1 + s2))))


# ---------------------------------------------------------------- SINR and rates

def test_sinr_single_user_example():
    h = np.full((16, 1), 1.0 + 0j)
    assert sinr(h, h, [1.0], 1.0)[0] == pytest.approx(16.0)
    assert sinr(h, h, [0.0], 1.0)[0] == 0.0


def test_sinr_two_user_matches_direct_formula():
    rng = np.random.default_rng(0)
    h = crandn(rng, 4, 2)
    w = crandn(rng, 4, 2)
    lam = np.array([0.7, 1.3])
    s2, vs = 0.2, 0.05
    hwi = vs * np.sum(lam * np.sum(np.abs(h) ** 2, axis=0))
    k = 0
    sig = lam[0] * abs(np.vdot(w[:, 0], h[:, 0])) ** 2
    intf = lam[1] * abs(np.vdot(w[:, 0], h[:, 1])) ** 2
    direct = sig / (intf + (s2 + hwi) * np.linalg.norm(w[:, 0]) ** 2)
    assert sinr(w, h, lam, s2, vs)[k] == pytest.approx(direct, rel=1e-12)


def test_sinr_saturates_with_hardware_distortion():
    rng = np.random.default_rng(1)
    h = crandn(rng, 8, 2)
    w = h.copy()
    vals = [sinr(w, h, [p, p], 1e-3, 0.01)[0] for p in (1e2, 1e4, 1e6)]
    m = LinkModel.from_combiner(w, h, 1e-3, 0.01)
    ceiling = m.gains[0, 0] / (m.gains[0, 1] + m.coupling.sum())
    assert vals[-1] == pytest.approx(ceiling, rel=1e-6)
    assert vals[0] < vals[1] < vals[2] < ceiling


def test_sinr_zero_combiner_rejected():
    with pytest.raises(ValueError, match="zero-norm"):
        sinr(np.zeros((4, 1)), np.ones((4, 1)), [1.0], 1.0)


def test_spectral_efficiency_examples():
    assert spectral_efficiency(0.0) == 0.0
    assert spectral_efficiency(15.0, 1.0) == pytest.approx(4.0)
    assert overhead_factor(4, 200) == pytest.approx(0.98)
    with pytest.raises(ValueError):
        spectral_efficiency(1.0, 0.0)


# ---------------------------------------------------------------- water-filling

def test_waterfill_update_examples():
    assert waterfill_update(1.0, 1.0, 2.0, 10.0) == pytest.approx(1.0)
    assert waterfill_update(1.0, 1.0, 0.5, 10.0) == 0.0
    assert waterfill_update(1.0, 1.0, 1e9, 3.0) == 3.0
    with pytest.warns(RuntimeWarning):
        assert waterfill_update(0.0, 1.0, 2.0, 1.0) == 0.0


def test_single_user_goes_to_pmax_in_one_pass():
    m = LinkModel(np.array([[2.0]]), 0.1, np.array([0.01]), 0.98)
    res = iterative_waterfilling(m, 0.5)
    assert res.converged and res.iterations == 1
    assert res.powers[0] == 0.5


def test_orthogonal_users_both_at_pmax():
    h = np.eye(4)[:, :2].astype(complex)
    m = LinkModel.from_combiner(h, h, 0.1)
    res = iterative_waterfilling(m, 1.0, init=[0.3, 0.2])
    assert np.allclose(res.powers, 1.0)


def test_coupled_pair_matches_grid_search():
    rng = np.random.default_rng(3)
    for _ in range(5):
        h = crandn(rng, 4, 2) * np.sqrt(rng.uniform(0.2, 3, 2))
        m = LinkModel.from_combiner(h, h, 0.1 * rng.uniform(0.1, 3), 0.01)
        got = m.sum_rate(iterative_waterfilling(m, 1.0).powers)
        assert got >= grid_optimum(m, 1.0) * 0.99


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5), st.floats(0.01, 2.0))
def test_waterfilling_feasible_and_ascending(seed, k, p_max):
    rng = np.random.default_rng(seed)
    h = crandn(rng, 6, k)
    w = crandn(rng, 6, k)
    m = LinkModel.from_combiner(w, h, 10 ** rng.uniform(-2, 0), rng.uniform(0, 0.05), mu=0.98)
    init = rng.uniform(0, p_max, k)
    res = iterative_waterfilling(m, p_max, init=init)
    assert np.all(res.powers >= 0.0) and np.all(res.powers <= p_max)
    assert m.sum_rate(res.powers) >= m.sum_rate(init) - 1e-12


def test_waterfilling_rejects_negative_cap():
    with pytest.raises(ValueError):
        iterative_waterfilling(LinkModel(np.eye(1), 1.0, np.zeros(1)), -1.0)


# ---------------------------------------------------------------- AM

def band(rng, n_a=16, k=4, noise=1e-3, varsigma=0.0, hybrid=False, csi=0.0):
    h = crandn(rng, n_a, k) * np.sqrt(rng.uniform(0.3, 3, k))
    mse = csi * np.sum(np.abs(h) ** 2, axis=0) / n_a
    est = h + crandn(rng, n_a, k) * np.sqrt(mse)
    cb = dft_codebook((4, n_a // 4)) if hybrid else None
    return BandProblem(est, h, noise, mse, varsigma, 0.0, 0.98, 1.0, cb, 8 if hybrid else 0)


def test_am_single_user_fd():
    rng = np.random.default_rng(0)
    b = band(rng, k=1, varsigma=0.01)
    res = alternating_maximization([b], AmSettings(p_max_w=0.01))
    assert res.iterations <= 2 and res.converged
    assert res.powers[0][0] == 0.01
    w = res.w_bb[0][:, 0]
    assert abs(np.vdot(w, b.h_true[:, 0])) == pytest.approx(
        np.linalg.norm(w) * np.linalg.norm(b.h_true[:, 0]), rel=1e-9)


def test_am_beats_fixed_mrc_at_max_power():
    rng = np.random.default_rng(1)
    for _ in range(10):
        b = band(rng, n_a=4, k=2, noise=0.5, varsigma=0.01)
        am = alternating_maximization([b], AmSettings(p_max_w=1.0))
        base = alternating_maximization([b], AmSettings(p_max_w=1.0, method="mrc",
                                                        power_mode="max"))
        assert am.eta_true >= base.eta_true - 1e-12


@pytest.mark.parametrize("hybrid", [False, True])
def test_am_trace_nondecreasing_and_feasible(hybrid):
    rng = np.random.default_rng(2)
    for _ in range(10):
        bands = [band(rng, noise=10 ** rng.uniform(-3, 0), varsigma=0.01, hybrid=hybrid,
                      csi=0.05) for _ in range(2)]
        res = alternating_maximization(bands, AmSettings(p_max_w=0.5))
        assert np.all(np.diff(res.trace) >= -1e-9)
        assert len(res.trace) <= 20
        for lam in res.powers:
            assert np.all((lam >= 0) & (lam <= 0.5))
        if hybrid:
            for rf in res.w_rf:
                assert rf.shape[1] <= 8
                assert np.allclose(np.abs(rf), 0.25)


def test_am_fd_perfect_csi_beats_max_power_lmmse():
    rng = np.random.default_rng(4)
    for _ in range(20):
        b = band(rng, noise=10 ** rng.uniform(-3, 0))
        opt = alternating_maximization([b], AmSettings(p_max_w=1.0))
        base = alternating_maximization([b], AmSettings(p_max_w=1.0, power_mode="max"))
        assert opt.eta_true >= base.eta_true - 1e-12


def test_am_rate_invariant_to_combiner_phase():
    rng = np.random.default_rng(5)
    b = band(rng, varsigma=0.01)
    res = alternating_maximization([b], AmSettings(p_max_w=1.0))
    w = res.w_bb[0]
    rot = w * np.exp(1j * rng.uniform(0, 2 * np.pi, w.shape[1]))
    m1 = LinkModel.from_combiner(w, b.h_true, b.noise_w, b.varsigma, mu=b.mu)
    m2 = LinkModel.from_combiner(rot, b.h_true, b.noise_w, b.varsigma, mu=b.mu)
    assert m1.sum_rate(res.powers[0]) == pytest.approx(m2.sum_rate(res.powers[0]), rel=1e-12)


def test_am_settings_validation():
    with pytest.raises(ValueError):
        AmSettings(power_mode="greedy")
    with pytest.raises(ValueError):
        AmSettings(max_iter=0)
