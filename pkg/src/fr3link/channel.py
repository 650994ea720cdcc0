"""Cluster channel model, channel estimates and receiver noise levels.

Channels are far-field sums over Q clusters of P_q scatterers each.  The
cluster directions are shared by every carrier; the complex gains are drawn
independently per carrier with a frequency-dependent cluster power.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "BOLTZMANN",
    "T0_KELVIN",
    "SPEED_OF_LIGHT",
    "ArrayLayout",
    "upa_layout",
    "array_response",
    "cluster_power_db",
    "ScenarioGeometry",
    "ClusterSet",
    "draw_clusters",
    "generate_channel",
    "estimate_channel",
    "ChannelSet",
    "draw_channel_set",
    "thermal_noise_w",
    "hwi_noise_w",
    "balanced_assignment",
]

BOLTZMANN = 1.380649e-23
T0_KELVIN = 290.0
SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayLayout:
    """Element positions (N_a x 3, metres) of a planar array in the y-z plane."""

    positions: np.ndarray
    dims: tuple[int, int]
    spacing_m: float

    @property
    def n_antennas(self) -> int:
        return self.positions.shape[0]


def upa_layout(ny: int, nz: int, spacing_m: float) -> ArrayLayout:
    """Uniform planar array, element index ``m = iy * nz + iz``."""
    if spacing_m <= 0.0:
        raise ValueError("element spacing must be positive")
    iy, iz = np.meshgrid(np.arange(ny), np.arange(nz), indexing="ij")
    pos = np.zeros((ny * nz, 3))
    pos[:, 1] = iy.ravel() * spacing_m
    pos[:, 2] = iz.ravel() * spacing_m
    return ArrayLayout(pos, (ny, nz), spacing_m)


def _directions(azimuth, elevation) -> np.ndarray:
    az = np.asarray(azimuth, dtype=float)
    el = np.asarray(elevation, dtype=float)
    return np.stack([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)], axis=-1)


def array_response(azimuth, elevation, carrier_freq_hz: float, layout: ArrayLayout) -> np.ndarray:
    """Steering vector(s) of unit-modulus entries.

    Scalar angles give an ``(N_a,)`` vector; arrays of angles give
    ``(N_a, n_angles)``.
    """
    wavelength = SPEED_OF_LIGHT / carrier_freq_hz
    u = _directions(azimuth, elevation)
    phase = (2.0 * np.pi / wavelength) * (layout.positions @ u.reshape(-1, 3).T)
    a = np.exp(1j * phase)
    if np.ndim(azimuth) == 0 and np.ndim(elevation) == 0:
        return a[:, 0]
    return a


def cluster_power_db(distance_m, carrier_freq_ghz):
    """3GPP-style cluster power ``-32.4 - 21 log10(d) - 20 log10(f_GHz)``."""
    d = np.asarray(distance_m, dtype=float)
    f = np.asarray(carrier_freq_ghz, dtype=float)
    if np.any(d <= 0) or np.any(f <= 0):
        raise ValueError("distance and carrier frequency must be positive")
    out = -32.4 - 21.0 * np.log10(d) - 20.0 * np.log10(f)
    return float(out) if out.ndim == 0 else out


def balanced_assignment(n_ues: int, n_subbands: int) -> list[int]:
    """Band index of every UE: K // C per band, remainder round-robin."""
    if n_ues < 1:
        raise ValueError("need at least one UE")
    return [k % n_subbands for k in range(n_ues)]


@dataclass
class ScenarioGeometry:
    carrier_freqs_ghz: tuple[float, ...] = (6.0, 12.0, 18.0, 24.0)
    bandwidths_hz: tuple[float, ...] = (100e6, 100e6, 200e6, 400e6)
    layouts: tuple[ArrayLayout, ...] = ()
    distances_m: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ue_band: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.carrier_freqs_ghz) != len(self.bandwidths_hz):
            raise ValueError("one bandwidth per carrier required")
        if self.layouts and len(self.layouts) != self.n_subbands:
            raise ValueError("one array layout per sub-band required")
        if len(self.ue_band) != len(self.distances_m):
            raise ValueError("one band assignment per UE required")
        if any(not 0 <= b < self.n_subbands for b in self.ue_band):
            raise ValueError("UE assigned to a nonexistent sub-band")

    @property
    def n_subbands(self) -> int:
        return len(self.carrier_freqs_ghz)

    @property
    def n_ues(self) -> int:
        return len(self.ue_band)

    def ues_in_band(self, c: int) -> list[int]:
        return [k for k, b in enumerate(self.ue_band) if b == c]

    @staticmethod
    def shared_aperture(carriers_ghz: Sequence[float], dims=(4, 4)) -> tuple[ArrayLayout, ...]:
        """One array for all bands, half-wavelength at the lowest carrier."""
        spacing = SPEED_OF_LIGHT / (min(carriers_ghz) * 1e9) / 2.0
        lay = upa_layout(dims[0], dims[1], spacing)
        return tuple(lay for _ in carriers_ghz)

    @staticmethod
    def dedicated_apertures(carriers_ghz: Sequence[float], dims=(4, 4)) -> tuple[ArrayLayout, ...]:
        """One half-wavelength array per carrier."""
        return tuple(upa_layout(dims[0], dims[1], SPEED_OF_LIGHT / (f * 1e9) / 2.0)
                     for f in carriers_ghz)


@dataclass(frozen=True)
class ClusterSet:
    """Scatterer directions of one UE plus its per-carrier cluster powers.

    ``azimuth`` and ``elevation`` have shape ``(Q, P)``; ``power_db`` has
    shape ``(Q, n_carriers)``.
    """

    azimuth: np.ndarray
    elevation: np.ndarray
    power_db: np.ndarray

    @property
    def n_clusters(self) -> int:
        return self.azimuth.shape[0]

    @property
    def n_scatterers(self) -> int:
        return self.azimuth.shape[1]


def draw_clusters(
    rng: np.random.Generator,
    distance_m: float,
    carrier_freqs_ghz: Sequence[float],
    q_clusters: int = 5,
    p_scatterers: int = 10,
    azimuth_range_deg: tuple[float, float] = (-60.0, 60.0),
    elevation_range_deg: tuple[float, float] = (-30.0, 30.0),
    spread_deg: float = 2.0,
    shadowing_std_db: float = 0.0,
) -> ClusterSet:
    """Cluster centres uniform over the angular sector, scatterers Gaussian around them."""
    az_c = np.deg2rad(rng.uniform(*azimuth_range_deg, size=q_clusters))
    el_c = np.deg2rad(rng.uniform(*elevation_range_deg, size=q_clusters))
    s = np.deg2rad(spread_deg)
    az = az_c[:, None] + s * rng.standard_normal((q_clusters, p_scatterers))
    el = el_c[:, None] + s * rng.standard_normal((q_clusters, p_scatterers))
    az = np.mod(az + np.pi, 2 * np.pi) - np.pi
    el = np.clip(el, -np.pi / 2, np.pi / 2)
    base = cluster_power_db(distance_m, np.asarray(carrier_freqs_ghz))
    power = np.broadcast_to(base, (q_clusters, len(carrier_freqs_ghz))).copy()
    if shadowing_std_db > 0.0:
        power += shadowing_std_db * rng.standard_normal((q_clusters, 1))
    return ClusterSet(az, el, power)


def generate_channel(
    clusters: ClusterSet,
    subband: int,
    carrier_freq_ghz: float,
    layout: ArrayLayout,
    rng: np.random.Generator | None = None,
    gains: np.ndarray | None = None,
) -> np.ndarray:
    """One channel vector ``h = sum_q sum_p alpha_qp a(theta_qp, phi_qp)``.

    ``alpha_qp`` is circular Gaussian with variance ``gamma_q / P_q`` so each
    cluster carries ``gamma_q`` on average.  Explicit ``gains`` (Q x P)
    bypass the draw.
    """
    q, p = clusters.azimuth.shape
    if gains is None:
        if rng is None:
            raise ValueError("either rng or gains is required")
        gamma = 10.0 ** (clusters.power_db[:, subband] / 10.0)
        std = np.sqrt(gamma / p / 2.0)[:, None]
        gains = std * (rng.standard_normal((q, p)) + 1j * rng.standard_normal((q, p)))
    a = array_response(clusters.azimuth.ravel(), clusters.elevation.ravel(),
                       carrier_freq_ghz * 1e9, layout)
    return a @ np.asarray(gains).ravel()


def estimate_channel(h: np.ndarray, sigma_nh_sq: float, rng: np.random.Generator) -> np.ndarray:
    """Least-squares style estimate ``h + n``, ``n ~ CN(0, sigma^2 I)``."""
    if sigma_nh_sq < 0.0:
        raise ValueError("estimation MSE must be >= 0")
    if sigma_nh_sq == 0.0:
        return np.array(h, copy=True)
    n = rng.standard_normal(h.shape) + 1j * rng.standard_normal(h.shape)
    return h + np.sqrt(sigma_nh_sq / 2.0) * n


@dataclass
class ChannelSet:
    """True channels and their estimates, one ``(N_a, K_c)`` matrix per band.

    ``ue_index[c]`` lists the global UE ids in column order and ``mse[c]``
    the per-UE estimation error variances.
    """

    true: list[np.ndarray]
    est: list[np.ndarray]
    mse: list[np.ndarray]
    ue_index: list[list[int]]

    @property
    def n_subbands(self) -> int:
        return len(self.true)


def draw_channel_set(
    geometry: ScenarioGeometry,
    seed_seq: np.random.SeedSequence,
    csi_nmse: float = 0.0,
    q_clusters: int = 5,
    p_scatterers: int = 10,
    spread_deg: float = 2.0,
    azimuth_range_deg=(-60.0, 60.0),
    elevation_range_deg=(-30.0, 30.0),
    shadowing_std_db: float = 0.0,
) -> ChannelSet:
    """Draw every UE's channel on its own band plus a noisy estimate.

    Each UE gets an independent child stream of ``seed_seq``; inside it the
    cluster geometry is drawn first, then one gain stream per carrier, so
    the geometry does not depend on which carrier is evaluated.  The
    estimation error is normalised per UE:
    ``sigma_nh^2 = csi_nmse * ||h||^2 / N_a``.
    """
    ue_streams = seed_seq.spawn(geometry.n_ues)
    true, est, mse, idx = [], [], [], []
    for c in range(geometry.n_subbands):
        ues = geometry.ues_in_band(c)
        lay = geometry.layouts[c]
        h_cols, e_cols, m = [], [], []
        for k in ues:
            geo_ss, *carrier_ss = ue_streams[k].spawn(1 + geometry.n_subbands)
            rng_geo = np.random.default_rng(geo_ss)
            cl = draw_clusters(rng_geo, float(geometry.distances_m[k]), geometry.carrier_freqs_ghz,
                               q_clusters, p_scatterers, azimuth_range_deg,
                               elevation_range_deg, spread_deg, shadowing_std_db)
            gain_ss, est_ss = carrier_ss[c].spawn(2)
            h = generate_channel(cl, c, geometry.carrier_freqs_ghz[c], lay,
                                 np.random.default_rng(gain_ss))
            s2 = csi_nmse * float(np.vdot(h, h).real) / h.size
            h_cols.append(h)
            e_cols.append(estimate_channel(h, s2, np.random.default_rng(est_ss)))
            m.append(s2)
        n_a = lay.n_antennas
        true.append(np.array(h_cols).T if h_cols else np.zeros((n_a, 0), complex))
        est.append(np.array(e_cols).T if e_cols else np.zeros((n_a, 0), complex))
        mse.append(np.array(m))
        idx.append(ues)
    return ChannelSet(true, est, mse, idx)


def thermal_noise_w(bandwidth_hz, nf_db):
    """``k_B T B 10^(NF/10)`` at T = 290 K."""
    b = np.asarray(bandwidth_hz, dtype=float)
    if np.any(b <= 0):
        raise ValueError("bandwidth must be positive")
    out = BOLTZMANN * T0_KELVIN * b * 10.0 ** (np.asarray(nf_db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def hwi_noise_w(varsigma: float, channels: np.ndarray, powers) -> float:
    """Expected hardware-distortion power ``varsigma * sum_k lambda_k ||h_k||^2``.

    ``channels`` is ``(N_a, K_c)``; ``powers`` holds the K_c transmit powers.
    """
    if varsigma < 0.0:
        raise ValueError("varsigma must be >= 0")
    h = np.asarray(channels)
    if h.ndim == 1:
        h = h[:, None]
    norms = np.sum(np.abs(h) ** 2, axis=0)
    return float(varsigma * np.dot(np.asarray(powers, dtype=float).ravel(), norms))
