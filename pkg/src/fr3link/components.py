"""Component-level noise-figure and power-dissipation models.

Every RF block in a receiver chain is described by a :class:`ComponentSpec`
holding its noise figure and gain in dB plus a static/dynamic power model
``P(B) = P_s + kappa * B``.  The Friis evaluator combines an ordered chain
of such blocks into a single noise figure.

All values are stored in dB; conversions to linear noise factors happen
inside the formulas.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

__all__ = [
    "ComponentKind",
    "ComponentSpec",
    "CascadeStage",
    "DEFAULT_COMPONENT_VALUES",
    "default_component_table",
    "load_component_table",
    "db2lin",
    "lin2db",
    "dbw_to_w",
    "friis_total_nf",
    "cascade_nf_db",
    "lna_power",
    "mixer_power",
    "adc_power",
    "adc_quantization_noise_db",
    "adc_nf_db",
    "divider_insertion_loss_db",
    "phase_shifter_nf_db",
]


class ComponentKind(str, enum.Enum):
    LNA = "LNA"
    RF_FILTER = "RF_FILTER"
    IF_FILTER = "IF_FILTER"
    RF_IF_MIXER = "RF_IF_MIXER"
    IF_BB_MIXER = "IF_BB_MIXER"
    ADC = "ADC"
    DIVIDER = "DIVIDER"
    COMBINER = "COMBINER"
    PHASE_SHIFTER = "PHASE_SHIFTER"


def db2lin(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def lin2db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbw_to_w(x_dbw: float | None) -> float:
    """dBW to watts; ``None`` (a "-" table entry) maps to exactly zero."""
    if x_dbw is None:
        return 0.0
    return 10.0 ** (x_dbw / 10.0)


@dataclass(frozen=True)
class ComponentSpec:
    """Noise/gain/power description of one receiver block.

    Parameters
    ----------
    kind : ComponentKind
    nf_db : float
        Noise figure in dB (>= 0).
    gain_db : float
        Power gain in dB, negative for lossy elements.
    static_power_w : float
        Bias power in watts.
    kappa_w_per_hz : float
        Dynamic dissipation coefficient in W/Hz.
    """

    kind: ComponentKind
    nf_db: float
    gain_db: float
    static_power_w: float = 0.0
    kappa_w_per_hz: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.gain_db):
            raise ValueError(f"{self.kind.value}: gain_db must be finite")
        if not (math.isfinite(self.nf_db) and self.nf_db >= 0.0):
            raise ValueError(f"{self.kind.value}: nf_db must be finite and >= 0")
        if self.static_power_w < 0.0 or self.kappa_w_per_hz < 0.0:
            raise ValueError(f"{self.kind.value}: power terms must be >= 0")

    def power_w(self, bandwidth_hz: float) -> float:
        """Static plus bandwidth-proportional dissipation."""
        return _static_plus_dynamic(self, bandwidth_hz)


@dataclass(frozen=True)
class CascadeStage:
    spec: ComponentSpec
    multiplicity: int = 1

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")


# Hardware parameter table: (NF dB, G dB, P_s dBW, kappa dBW/Hz); None is "-".
DEFAULT_COMPONENT_VALUES: dict[ComponentKind, tuple[float, float, float | None, float | None]] = {
    ComponentKind.LNA: (1.0, 18.0, -20.0, -123.0),
    ComponentKind.RF_FILTER: (2.0, -0.2, None, None),
    ComponentKind.IF_FILTER: (1.0, -0.2, None, None),
    ComponentKind.RF_IF_MIXER: (22.0, -0.5, -23.0, -123.0),
    ComponentKind.IF_BB_MIXER: (18.0, -0.5, None, None),
    ComponentKind.ADC: (22.0, 0.0, -23.0, -114.0),
    ComponentKind.DIVIDER: (3.0, -0.5, None, None),
    ComponentKind.COMBINER: (3.0, -0.5, None, None),
    ComponentKind.PHASE_SHIFTER: (3.0, 0.2, None, None),
}


def default_component_table() -> dict[ComponentKind, ComponentSpec]:
    return {
        kind: ComponentSpec(kind, nf, g, dbw_to_w(ps), dbw_to_w(kappa))
        for kind, (nf, g, ps, kappa) in DEFAULT_COMPONENT_VALUES.items()
    }


_TABLE_FIELDS = {"nf_db", "gain_db", "p_static_dbw", "kappa_dbw_per_hz"}


def _parse_dbw(value) -> float | None:
    if value is None or value == "-":
        return None
    return float(value)


def load_component_table(
    section: Mapping[str, Mapping[str, object]],
    base: Mapping[ComponentKind, ComponentSpec] | None = None,
) -> dict[ComponentKind, ComponentSpec]:
    """Build a component table from a config section keyed by component kind.

    Each entry may carry ``nf_db``, ``gain_db``, ``p_static_dbw`` and
    ``kappa_dbw_per_hz``.  Kinds or fields that are absent keep the values
    of ``base`` (the built-in defaults when omitted); power fields given as ``"-"`` are zero.
    """
    table = dict(base if base is not None else default_component_table())
    for key, fields in section.items():
        try:
            kind = ComponentKind(key.upper())
        except ValueError:
            raise ValueError(f"unknown component kind {key!r}") from None
        unknown = set(fields) - _TABLE_FIELDS
        if unknown:
            raise ValueError(f"unknown field(s) for {key}: {sorted(unknown)}")
        spec = table[kind]
        updates = {}
        if "nf_db" in fields:
            updates["nf_db"] = float(fields["nf_db"])
        if "gain_db" in fields:
            updates["gain_db"] = float(fields["gain_db"])
        if "p_static_dbw" in fields:
            updates["static_power_w"] = dbw_to_w(_parse_dbw(fields["p_static_dbw"]))
        if "kappa_dbw_per_hz" in fields:
            updates["kappa_w_per_hz"] = dbw_to_w(_parse_dbw(fields["kappa_dbw_per_hz"]))
        table[kind] = replace(spec, **updates)
    return table


def friis_total_nf(stages: Sequence[tuple[float, float]]) -> float:
    """Total noise figure (dB) of an ordered cascade of ``(nf_db, gain_db)``.

    >>> round(friis_total_nf([(1.0, 18.0), (2.0, -0.2)]), 4)
    1.0319
    """
    if len(stages) == 0:
        raise ValueError("empty cascade")
    total = 0.0
    gain = 1.0
    for i, (nf_db, gain_db) in enumerate(stages):
        if not (math.isfinite(nf_db) and math.isfinite(gain_db)):
            raise ValueError("cascade values must be finite")
        f = db2lin(nf_db)
        total += f if i == 0 else (f - 1.0) / gain
        g = db2lin(gain_db)
        if not g > 0.0:
            raise ValueError("invalid gain")
        gain *= g
    return lin2db(total)


def cascade_nf_db(stages: Iterable[CascadeStage]) -> float:
    # parallel identical instances do not change the noise figure
    return friis_total_nf([(s.spec.nf_db, s.spec.gain_db) for s in stages])


def _check_bandwidth(bandwidth_hz: float) -> None:
    if bandwidth_hz < 0.0 or not math.isfinite(bandwidth_hz):
        raise ValueError("bandwidth must be finite and non-negative")


def _static_plus_dynamic(spec: ComponentSpec, bandwidth_hz: float) -> float:
    _check_bandwidth(bandwidth_hz)
    return spec.static_power_w + spec.kappa_w_per_hz * bandwidth_hz


def lna_power(spec: ComponentSpec, bandwidth_hz: float) -> float:
    """LNA dissipation ``P_s + kappa * B`` in watts."""
    return _static_plus_dynamic(spec, bandwidth_hz)


def mixer_power(spec: ComponentSpec, bandwidth_hz: float) -> float:
    """Mixer dissipation ``P_s + kappa * B`` in watts."""
    return _static_plus_dynamic(spec, bandwidth_hz)


def adc_power(kappa_adc: float, nu: float, n_bits: int, bandwidth_hz: float) -> float:
    """Walden-type ADC power ``kappa * (2B)^nu * 2^n_bits``.

    ``kappa_adc`` is the inverse figure of merit in W/Hz^nu.
    """
    if not 0.5 <= nu <= 2.0:
        raise ValueError("nu must lie in [0.5, 2]")
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    _check_bandwidth(bandwidth_hz)
    return kappa_adc * (2.0 * bandwidth_hz) ** nu * 2.0 ** n_bits


def adc_quantization_noise_db(
    n_bits: int, chi_db: float = 0.0, fs_hz: float | None = None, bandwidth_hz: float = 1.0
) -> float:
    """Quantization noise-to-signal ratio in dB.

    ``fs_hz`` defaults to Nyquist rate ``2 * bandwidth_hz``.
    """
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    if bandwidth_hz <= 0.0:
        raise ValueError("bandwidth must be positive")
    if fs_hz is None:
        fs_hz = 2.0 * bandwidth_hz
    osr = fs_hz / (2.0 * bandwidth_hz)
    if osr < 1.0 - 1e-12:
        raise ValueError("sub-Nyquist sampling")
    return -6.02 * n_bits - 4.76 + chi_db - 10.0 * math.log10(osr)


def adc_nf_db(
    n_bits: int,
    chi_db: float = 0.0,
    fs_hz: float | None = None,
    bandwidth_hz: float = 1.0,
    xi_adc: float = 0.0,
) -> float:
    """ADC noise figure ``1 + Q_N + xi`` with every addend in linear units.

    ``xi_adc`` is the linear excess factor covering jitter, comparator and
    circuit noise.
    """
    q = db2lin(adc_quantization_noise_db(n_bits, chi_db, fs_hz, bandwidth_hz))
    return lin2db(1.0 + q + xi_adc)


def divider_insertion_loss_db(n_paths: int, delta_db: float = 0.0) -> float:
    """Passive divider/combiner loss: ideal split ``10 log10(N_p)`` plus excess."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    return 10.0 * math.log10(n_paths) + delta_db


def phase_shifter_nf_db(p_in_w: float, sigma_phi_sq: float, il_linear: float) -> float:
    """Signal-dependent phase-shifter noise figure ``1 + P_in sigma^2 + IL``.

    ``il_linear`` is the loss term in linear units.
    """
    if sigma_phi_sq < 0.0 or p_in_w < 0.0:
        raise ValueError("p_in_w and sigma_phi_sq must be >= 0")
    return lin2db(1.0 + p_in_w * sigma_phi_sq + il_linear)
