"""SINR evaluation, water-filling power control and alternating maximisation.

With combiners fixed, every quantity needed for the rates of one band is
captured by a :class:`LinkModel`: the normalised cross gains
``G[k, l] = |w_k^H h_l|^2 / ||w_k||^2`` plus a noise floor that grows
linearly with the transmit powers (hardware distortion, quantisation and
channel-estimation leakage all behave that way).  Then

    SINR_k = lambda_k G[k, k] / (sum_{l != k} lambda_l G[k, l] + a0 + sum_l b_l lambda_l).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .beamforming import Codebook, combiner_matrix, omp_hybrid

__all__ = [
    "overhead_factor",
    "spectral_efficiency",
    "LinkModel",
    "sinr",
    "waterfill_update",
    "WaterfillResult",
    "iterative_waterfilling",
    "BandProblem",
    "AmSettings",
    "AmResult",
    "alternating_maximization",
]

LN2 = math.log(2.0)


def overhead_factor(n_pilots: int, block_length: int = 200) -> float:
    """Pilot overhead ``mu = 1 - tau_p / tau_b``."""
    if not 0 <= n_pilots < block_length:
        raise ValueError("pilot length must lie in [0, block_length)")
    return 1.0 - n_pilots / block_length


def spectral_efficiency(sinr_lin, mu: float = 1.0):
    """``mu * log2(1 + SINR)`` in bps/Hz."""
    if not 0.0 < mu <= 1.0:
        raise ValueError("mu must lie in (0, 1]")
    return mu * np.log2(1.0 + np.asarray(sinr_lin, dtype=float))


@dataclass(frozen=True)
class LinkModel:
    """Power-to-rate map of one band for fixed combiners.

    Attributes
    ----------
    gains : ndarray, shape (K, K)
        ``|w_k^H h_l|^2 / ||w_k||^2``; row ``k`` is seen by UE ``k``'s combiner.
    floor_w : float
        Power-independent noise per unit-norm combiner.
    coupling : ndarray, shape (K,)
        Extra noise per watt transmitted by each UE.
    mu : float
        Overhead factor applied to every rate.
    """

    gains: np.ndarray
    floor_w: float
    coupling: np.ndarray
    mu: float = 1.0

    @classmethod
    def from_combiner(
        cls,
        w: np.ndarray,
        h: np.ndarray,
        noise_var: float,
        varsigma: float = 0.0,
        quant: float = 0.0,
        mse=None,
        mu: float = 1.0,
    ) -> "LinkModel":
        """Build the model from combiners ``w`` and channels ``h`` (both N_a x K).

        ``varsigma`` scales the hardware distortion ``varsigma * sum lambda ||h||^2``.
        ``quant`` is the linear quantisation noise ratio of the ADCs, applied to
        the per-antenna input power (signals plus thermal noise).  ``mse``
        holds the per-UE channel-estimation error variances.
        """
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        h = np.atleast_2d(np.asarray(h, dtype=complex))
        wn = np.sum(np.abs(w) ** 2, axis=0)
        if np.any(wn <= 0.0):
            raise ValueError("zero-norm combiner")
        cross = np.abs(w.conj().T @ h) ** 2 / wn[:, None]
        hn = np.sum(np.abs(h) ** 2, axis=0)
        n_a = h.shape[0]
        coupling = (varsigma + quant / n_a) * hn
        if mse is not None:
            coupling = coupling + np.asarray(mse, dtype=float)
        return cls(cross, noise_var * (1.0 + quant), coupling, mu)

    @property
    def n_ues(self) -> int:
        return self.gains.shape[0]

    def denominators(self, powers: np.ndarray) -> np.ndarray:
        lam = np.asarray(powers, dtype=float)
        interference = self.gains @ lam - np.diag(self.gains) * lam
        return interference + self.floor_w + float(self.coupling @ lam)

    def sinr(self, powers) -> np.ndarray:
        lam = np.asarray(powers, dtype=float)
        return lam * np.diag(self.gains) / self.denominators(lam)

    def rates(self, powers) -> np.ndarray:
        return spectral_efficiency(self.sinr(powers), self.mu)

    def sum_rate(self, powers) -> float:
        return float(np.sum(self.rates(powers)))


def sinr(w: np.ndarray, h: np.ndarray, powers, noise_var: float, varsigma: float = 0.0,
         quant: float = 0.0) -> np.ndarray:
    """Per-UE SINR of one band with combiners ``w`` and true channels ``h``."""
    return LinkModel.from_combiner(w, h, noise_var, varsigma, quant).sinr(powers)


# ---------------------------------------------------------------- water-filling

def waterfill_update(gain: float, interference_plus_noise: float, water_level: float,
                     p_max: float) -> float:
    """``clip(level - (I + N) / g, 0, P_max)``; a zero gain yields zero power."""
    if gain <= 0.0:
        warnings.warn("zero effective gain; UE switched off", RuntimeWarning)
        return 0.0
    return float(min(max(water_level - interference_plus_noise / gain, 0.0), p_max))


@dataclass
class WaterfillResult:
    powers: np.ndarray
    iterations: int
    converged: bool


def _price(model: LinkModel, lam: np.ndarray, k: int) -> float:
    """Marginal sum-rate loss (nats scaled by mu) caused by one watt of UE k.

    Counts the interference UE ``k`` inflicts on the others plus the
    power-proportional noise it adds everywhere, its own receiver included.
    """
    d = model.denominators(lam)
    s = lam * np.diag(model.gains) / d
    weight = s / (d * (1.0 + s))
    hurt = model.gains[:, k] + model.coupling[k]
    hurt[k] = model.coupling[k]
    return model.mu / LN2 * float(weight @ hurt)


def _gauss_seidel(model: LinkModel, lam: np.ndarray, p_max: float, tol: float,
                  max_iter: int) -> WaterfillResult:
    g = np.diag(model.gains)
    for it in range(1, max_iter + 1):
        delta = 0.0
        for k in range(model.n_ues):
            pi = _price(model, lam, k)
            level = math.inf if pi <= 0.0 else model.mu / (LN2 * pi)
            ipn = model.denominators(lam)[k]
            old = lam[k]
            best, best_rate = old, model.sum_rate(lam)
            for cand in (waterfill_update(g[k], ipn, level, p_max), 0.0, p_max):
                lam[k] = cand
                r = model.sum_rate(lam)
                if r > best_rate:
                    best, best_rate = cand, r
            lam[k] = best
            delta = max(delta, abs(best - old))
        if delta < tol:
            return WaterfillResult(lam, it, True)
    return WaterfillResult(lam, max_iter, False)


def iterative_waterfilling(
    model: LinkModel,
    p_max: float,
    tol: float = 1e-6,
    max_iter: int = 100,
    init=None,
    multistart: bool | None = None,
) -> WaterfillResult:
    """Gauss-Seidel water-filling over the UEs of one band.

    Each UE treats the others' powers as fixed and sets its level to
    ``mu / (ln2 * pi_k)``, where ``pi_k`` is the marginal rate loss its power
    causes elsewhere.  With no coupling the level is infinite and every UE
    transmits at ``P_max``.

    The sum rate is not concave in one UE's power, so the water-filling
    point can be a local maximum along that coordinate.  Each update
    therefore also tries the box endpoints and keeps whichever of
    {water-filling, 0, P_max, current} gives the highest sum rate.  Every
    update is then an ascent step, and fixed points satisfy the KKT
    conditions of the sum rate under ``0 <= lambda_k <= P_max``.

    Parameters
    ----------
    init : array_like, optional
        Starting powers; all UEs at ``P_max`` when omitted.
    multistart : bool, optional
        Also start from every "only UE k at P_max" vertex and return the
        best fixed point.  Defaults to true when ``init`` is omitted.
    """
    if p_max < 0.0:
        raise ValueError("p_max must be >= 0")
    k_tot = model.n_ues
    if multistart is None:
        multistart = init is None
    first = np.full(k_tot, p_max) if init is None else np.clip(np.asarray(init, float), 0.0, p_max)
    starts = [first]
    if multistart and k_tot > 1:
        starts += [p_max * np.eye(k_tot)[k] for k in range(k_tot)]
    best: WaterfillResult | None = None
    best_rate = -math.inf
    for lam0 in starts:
        res = _gauss_seidel(model, lam0.copy(), p_max, tol, max_iter)
        r = model.sum_rate(res.powers)
        if r > best_rate + 1e-12:
            best, best_rate = res, r
    return best


# ---------------------------------------------------------------- AM driver

@dataclass
class BandProblem:
    """Everything the optimiser needs for one sub-band.

    ``h_est`` drives the design, ``h_true`` the final evaluation.
    ``codebook`` and ``n_rf`` are only used for hybrid architectures.
    """

    h_est: np.ndarray
    h_true: np.ndarray
    noise_w: float
    mse: np.ndarray | None = None
    varsigma: float = 0.0
    quant: float = 0.0
    mu: float = 1.0
    weight: float = 1.0
    codebook: Codebook | None = None
    n_rf: int = 0

    @property
    def n_ues(self) -> int:
        return self.h_true.shape[1]

    @property
    def hybrid(self) -> bool:
        return self.codebook is not None


@dataclass
class AmSettings:
    p_max_w: float = 0.01
    method: str = "lmmse"
    eps: float = 1e-3
    max_iter: int = 20
    wf_tol: float = 1e-6
    wf_max_iter: int = 100
    power_mode: str = "optimal"

    def __post_init__(self):
        if self.power_mode not in ("optimal", "max"):
            raise ValueError("power_mode must be 'optimal' or 'max'")
        if self.max_iter < 1 or self.eps < 0.0:
            raise ValueError("max_iter must be >= 1 and eps >= 0")


@dataclass
class AmResult:
    """Outcome of one optimisation run.

    ``trace`` holds the weighted design-model sum rate after every
    iteration; ``eta_true`` is the final rate on the true channels.
    """

    w_rf: list[np.ndarray | None]
    w_bb: list[np.ndarray]
    powers: list[np.ndarray]
    trace: list[float]
    eta_true: float
    band_rates: list[np.ndarray]
    converged: bool
    iterations: int = field(default=0)


def _design_model(band: BandProblem, w: np.ndarray) -> LinkModel:
    return LinkModel.from_combiner(w, band.h_est, band.noise_w, band.varsigma, band.quant,
                                   band.mse, band.mu)


def _design_noise(band: BandProblem, lam: np.ndarray) -> float:
    # per-antenna noise seen by the LMMSE design, matching the design model
    hn = np.sum(np.abs(band.h_est) ** 2, axis=0)
    n_a = band.h_est.shape[0]
    coupling = (band.varsigma + band.quant / n_a) * hn
    if band.mse is not None:
        coupling = coupling + band.mse
    return band.noise_w * (1.0 + band.quant) + float(coupling @ lam)


def _combine(band: BandProblem, lam: np.ndarray, method: str):
    w_opt = combiner_matrix(method, band.h_est, lam, _design_noise(band, lam))
    if not band.hybrid:
        return None, w_opt, w_opt
    norms = np.linalg.norm(w_opt, axis=0)
    norms[norms == 0.0] = 1.0
    res = omp_hybrid(w_opt / norms, band.codebook, band.n_rf)
    w = res.w_rf @ res.w_bb
    return res.w_rf, res.w_bb, w


def _usable(w: np.ndarray) -> bool:
    return bool(np.all(np.sum(np.abs(w) ** 2, axis=0) > 0.0))


def alternating_maximization(bands: Sequence[BandProblem], settings: AmSettings) -> AmResult:
    """Alternate combiner design and power control until the sum rate settles.

    Every iteration recomputes each band's combiner for the current powers
    (factored through OMP for hybrid bands) and then water-fills the powers
    for that combiner.  A step is kept only if it does not lower the design
    sum rate, so the trace is nondecreasing.  Bands are weighted by
    ``band.weight`` (the FP time shares).
    """
    n_b = len(bands)
    lam = [np.full(b.n_ues, settings.p_max_w) for b in bands]
    w_rf: list = [None] * n_b
    w_bb: list = [None] * n_b
    w_eff: list = [None] * n_b
    rate = [0.0] * n_b
    # bands share no UEs, so each one stops on its own rate change
    active = [b.n_ues > 0 for b in bands]
    trace: list[float] = []
    n_iter = 0
    iters = 1 if settings.power_mode == "max" else settings.max_iter
    for n in range(iters):
        if not any(active):
            break
        n_iter = n + 1
        for i, band in enumerate(bands):
            if not active[i]:
                continue
            before = rate[i]
            rf, bb, w = _combine(band, lam[i], settings.method)
            if _usable(w):
                cand = _design_model(band, w).sum_rate(lam[i])
                if w_eff[i] is None or cand >= rate[i]:
                    w_rf[i], w_bb[i], w_eff[i], rate[i] = rf, bb, w, cand
            elif w_eff[i] is None:
                raise ValueError("combiner design produced a zero column")
            if settings.power_mode == "optimal":
                model = _design_model(band, w_eff[i])
                wf = iterative_waterfilling(model, settings.p_max_w, settings.wf_tol,
                                            settings.wf_max_iter, init=lam[i])
                r = model.sum_rate(wf.powers)
                if r >= rate[i]:
                    lam[i], rate[i] = wf.powers, r
            if n > 0 and abs(rate[i] - before) < settings.eps:
                active[i] = False
        trace.append(float(sum(b.weight * r for b, r in zip(bands, rate))))
    converged = settings.power_mode == "max" or not any(active)

    band_rates = []
    eta = 0.0
    for i, band in enumerate(bands):
        if band.n_ues == 0:
            band_rates.append(np.zeros(0))
            continue
        truth = LinkModel.from_combiner(w_eff[i], band.h_true, band.noise_w, band.varsigma,
                                        band.quant, None, band.mu)
        r = truth.rates(lam[i])
        band_rates.append(r)
        eta += band.weight * float(np.sum(r))
    return AmResult(w_rf, w_bb, lam, trace, eta, band_rates, converged, n_iter)
