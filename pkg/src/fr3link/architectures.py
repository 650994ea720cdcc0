"""The eight multi-band receiver architectures.

An architecture is the triple (access class, beamforming class, RF sharing):

* FI / FP  -- all sub-bands at once vs one sub-band per time slot,
* FD / HAD -- fully digital vs hybrid analog (phase shifters) + digital,
* SRF / DRF -- RF chains shared by all sub-bands vs one set per sub-band.

This module turns a descriptor into a component cascade (for the noise
figure), static and dynamic power budgets, component counts, and the
structural constraints the combiner must respect.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .components import (
    CascadeStage,
    ComponentKind,
    ComponentSpec,
    cascade_nf_db,
    default_component_table,
)

__all__ = [
    "AccessClass",
    "BfClass",
    "RfSharing",
    "ArchitectureDescriptor",
    "ARCHITECTURE_NAMES",
    "parse_architectures",
    "make_architecture",
    "build_cascade",
    "architecture_nf_db",
    "static_power_w",
    "dynamic_power_w",
    "PowerBreakdown",
    "power_breakdown",
    "component_counts",
    "StructureMask",
    "structure_mask",
]


class AccessClass(str, enum.Enum):
    FI = "FI"
    FP = "FP"


class BfClass(str, enum.Enum):
    FD = "FD"
    HAD = "HAD"


class RfSharing(str, enum.Enum):
    SRF = "SRF"
    DRF = "DRF"


ARCHITECTURE_NAMES = tuple(
    f"{a}-{b}-{r}" for a in ("FI", "FP") for b in ("FD", "HAD") for r in ("SRF", "DRF")
)


@dataclass(frozen=True)
class ArchitectureDescriptor:
    access_class: AccessClass
    bf_class: BfClass
    rf_sharing: RfSharing
    n_antennas: int = 16
    n_rf_chains: int = 8
    n_subbands: int = 4
    time_shares: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "access_class", AccessClass(self.access_class))
        object.__setattr__(self, "bf_class", BfClass(self.bf_class))
        object.__setattr__(self, "rf_sharing", RfSharing(self.rf_sharing))
        if self.n_antennas < 1 or self.n_subbands < 1:
            raise ValueError("n_antennas and n_subbands must be >= 1")
        if self.bf_class is BfClass.FD:
            # fully digital: one RF chain per antenna
            object.__setattr__(self, "n_rf_chains", self.n_antennas)
        elif not 1 <= self.n_rf_chains < self.n_antennas:
            raise ValueError("HAD requires 1 <= n_rf_chains < n_antennas")
        if self.access_class is AccessClass.FP:
            shares = self.time_shares
            if shares is None:
                shares = (1.0 / self.n_subbands,) * self.n_subbands
            shares = tuple(float(t) for t in shares)
            if len(shares) != self.n_subbands:
                raise ValueError("time_shares length must equal n_subbands")
            if any(t < 0.0 or t > 1.0 for t in shares):
                raise ValueError("time shares must lie in [0, 1]")
            if abs(sum(shares) - 1.0) > 1e-9:
                raise ValueError("time shares must sum to 1")
            object.__setattr__(self, "time_shares", shares)
        elif self.time_shares is not None:
            raise ValueError("time_shares only apply to FP architectures")

    @property
    def name(self) -> str:
        return f"{self.access_class.value}-{self.bf_class.value}-{self.rf_sharing.value}"

    @property
    def is_hybrid(self) -> bool:
        return self.bf_class is BfClass.HAD

    @property
    def is_shared(self) -> bool:
        return self.rf_sharing is RfSharing.SRF

    @property
    def is_partitioned(self) -> bool:
        return self.access_class is AccessClass.FP

    def band_weights(self) -> tuple[float, ...]:
        """Fraction of time each sub-band is served (all ones for FI)."""
        if self.is_partitioned:
            return self.time_shares
        return (1.0,) * self.n_subbands


def make_architecture(
    name: str,
    n_antennas: int = 16,
    n_rf_chains: int = 8,
    n_subbands: int = 4,
    time_shares: Sequence[float] | None = None,
) -> ArchitectureDescriptor:
    """Descriptor from a token such as ``"FI-HAD-SRF"``."""
    parts = name.strip().upper().split("-")
    if len(parts) != 3:
        raise ValueError(f"unknown architecture {name!r}")
    try:
        acc, bf, rf = AccessClass(parts[0]), BfClass(parts[1]), RfSharing(parts[2])
    except ValueError:
        raise ValueError(f"unknown architecture {name!r}") from None
    return ArchitectureDescriptor(
        acc,
        bf,
        rf,
        n_antennas=n_antennas,
        n_rf_chains=n_rf_chains,
        n_subbands=n_subbands,
        time_shares=None if acc is AccessClass.FI else (tuple(time_shares) if time_shares else None),
    )


def parse_architectures(token: str) -> list[str]:
    """Expand a CLI/config token; ``"all"`` selects the eight variants."""
    token = token.strip()
    if token.lower() == "all":
        return list(ARCHITECTURE_NAMES)
    names = [t.strip().upper() for t in token.split(",") if t.strip()]
    for n in names:
        if n not in ARCHITECTURE_NAMES:
            raise ValueError(f"unknown architecture {n!r}")
    return names


# --------------------------------------------------------------------------
# cascades and noise figure
# --------------------------------------------------------------------------

K = ComponentKind

_CASCADES: dict[tuple[AccessClass, BfClass, RfSharing], tuple[ComponentKind, ...]] = {
    (AccessClass.FI, BfClass.FD, RfSharing.SRF): (
        K.LNA, K.DIVIDER, K.RF_FILTER, K.RF_IF_MIXER, K.IF_FILTER, K.IF_BB_MIXER, K.COMBINER, K.ADC,
    ),
    (AccessClass.FI, BfClass.HAD, RfSharing.SRF): (
        K.LNA, K.DIVIDER, K.RF_FILTER, K.RF_IF_MIXER, K.IF_FILTER, K.PHASE_SHIFTER, K.COMBINER,
        K.IF_BB_MIXER, K.ADC,
    ),
    (AccessClass.FI, BfClass.FD, RfSharing.DRF): (
        K.LNA, K.RF_FILTER, K.RF_IF_MIXER, K.IF_FILTER, K.IF_BB_MIXER, K.ADC,
    ),
    (AccessClass.FI, BfClass.HAD, RfSharing.DRF): (
        K.LNA, K.RF_FILTER, K.RF_IF_MIXER, K.IF_FILTER, K.DIVIDER, K.PHASE_SHIFTER, K.COMBINER,
        K.IF_BB_MIXER, K.ADC,
    ),
}
# FP chains: no divider/combiner for FD, the DRF-style HAD chain for both sharings
for _r in RfSharing:
    _CASCADES[(AccessClass.FP, BfClass.FD, _r)] = _CASCADES[(AccessClass.FI, BfClass.FD, RfSharing.DRF)]
    _CASCADES[(AccessClass.FP, BfClass.HAD, _r)] = _CASCADES[(AccessClass.FI, BfClass.HAD, RfSharing.DRF)]


def _fanouts(arch: ArchitectureDescriptor) -> dict[ComponentKind, int]:
    """Parallel instance counts per cascade position (scales power, not NF)."""
    n_a, n_rf, c = arch.n_antennas, arch.n_rf_chains, arch.n_subbands
    if arch.is_hybrid:
        return {K.DIVIDER: n_a, K.PHASE_SHIFTER: n_a * n_rf, K.COMBINER: n_rf}
    if arch.is_shared and not arch.is_partitioned:
        return {K.DIVIDER: n_a, K.COMBINER: n_a}
    return {}


def build_cascade(arch: ArchitectureDescriptor, subband_index: int = 0,
                  component_table: Mapping[ComponentKind, ComponentSpec] | None = None
                  ) -> list[CascadeStage]:
    """Ordered receive chain seen by one antenna signal on ``subband_index``."""
    if not 0 <= subband_index < arch.n_subbands:
        raise ValueError("subband_index out of range")
    table = component_table if component_table is not None else default_component_table()
    key = (arch.access_class, arch.bf_class, arch.rf_sharing)
    if key not in _CASCADES:
        raise ValueError(f"unknown variant {arch.name}")
    fan = _fanouts(arch)
    return [CascadeStage(table[k], fan.get(k, 1)) for k in _CASCADES[key]]


def architecture_nf_db(arch: ArchitectureDescriptor, subband_index: int = 0,
                       component_table: Mapping[ComponentKind, ComponentSpec] | None = None
                       ) -> float:
    return cascade_nf_db(build_cascade(arch, subband_index, component_table))


# --------------------------------------------------------------------------
# power budgets
# --------------------------------------------------------------------------

def _static_terms(arch: ArchitectureDescriptor, table) -> dict[ComponentKind, float]:
    n_a, n_rf, c = arch.n_antennas, arch.n_rf_chains, arch.n_subbands
    p_lna = table[K.LNA].static_power_w
    p_rfif = table[K.RF_IF_MIXER].static_power_w
    p_ifbb = table[K.IF_BB_MIXER].static_power_w
    p_adc = table[K.ADC].static_power_w
    if arch.is_shared:
        # one RF-IF mixer per carrier behind each shared antenna
        front = {K.LNA: n_a * p_lna, K.RF_IF_MIXER: n_a * c * p_rfif}
        back_n = n_rf
    else:
        front = {K.LNA: c * n_a * p_lna, K.RF_IF_MIXER: c * n_a * p_rfif}
        back_n = c * n_rf
    # I/Q pair of converters per RF chain
    back = {K.IF_BB_MIXER: back_n * p_ifbb, K.ADC: back_n * 2.0 * p_adc}
    return {**front, **back}


def static_power_w(arch: ArchitectureDescriptor,
                   component_table: Mapping[ComponentKind, ComponentSpec] | None = None) -> float:
    """Always-on bias power; FP shares the FI formulas (no time weighting)."""
    table = component_table if component_table is not None else default_component_table()
    return sum(_static_terms(arch, table).values())


def _dynamic_terms(arch, bandwidths_hz, n_bits, nu, table) -> dict[ComponentKind, float]:
    b = [float(x) for x in bandwidths_hz]
    if len(b) != arch.n_subbands:
        raise ValueError("bandwidths must have one entry per sub-band")
    if any(x <= 0.0 for x in b):
        raise ValueError("bandwidths must be positive")
    if not 0.5 <= nu <= 2.0:
        raise ValueError("nu must lie in [0.5, 2]")
    n_a, n_rf = arch.n_antennas, arch.n_rf_chains
    k_lna = table[K.LNA].kappa_w_per_hz
    k_rfif = table[K.RF_IF_MIXER].kappa_w_per_hz
    k_ifbb = table[K.IF_BB_MIXER].kappa_w_per_hz
    k_adc = table[K.ADC].kappa_w_per_hz
    adc_scale = 2.0 ** (n_bits + nu) * k_adc

    if arch.is_partitioned:
        tau = arch.time_shares
        if tau is None:
            raise ValueError("FP architecture requires time shares")
        # per-band activity, each weighted by its time share
        segments = [(bc, t) for bc, t in zip(b, tau)]
    elif arch.is_shared:
        # a single chain processes the aggregate bandwidth
        segments = [(sum(b), 1.0)]
    else:
        segments = [(bc, 1.0) for bc in b]

    n_back = n_rf  # FD has n_rf == n_a
    out = {K.LNA: 0.0, K.RF_IF_MIXER: 0.0, K.IF_BB_MIXER: 0.0, K.ADC: 0.0}
    for bw, w in segments:
        out[K.LNA] += w * bw * n_a * k_lna
        out[K.RF_IF_MIXER] += w * bw * n_a * k_rfif
        out[K.IF_BB_MIXER] += w * bw * n_back * k_ifbb
        out[K.ADC] += w * bw * n_back * adc_scale * bw ** (nu - 1.0)
    return out


def dynamic_power_w(arch: ArchitectureDescriptor, bandwidths_hz: Sequence[float],
                    n_bits: int = 4, nu: float = 1.0,
                    component_table: Mapping[ComponentKind, ComponentSpec] | None = None
                    ) -> float:
    table = component_table if component_table is not None else default_component_table()
    return sum(_dynamic_terms(arch, bandwidths_hz, n_bits, nu, table).values())


@dataclass(frozen=True)
class PowerBreakdown:
    static_w: float
    dynamic_w: float
    per_component_w: dict = field(default_factory=dict)

    @property
    def total_w(self) -> float:
        return self.static_w + self.dynamic_w

    @property
    def total_dbw(self) -> float:
        return 10.0 * math.log10(self.total_w) if self.total_w > 0 else float("-inf")


def power_breakdown(arch: ArchitectureDescriptor, bandwidths_hz: Sequence[float],
                    n_bits: int = 4, nu: float = 1.0,
                    component_table: Mapping[ComponentKind, ComponentSpec] | None = None
                    ) -> PowerBreakdown:
    table = component_table if component_table is not None else default_component_table()
    st = _static_terms(arch, table)
    dy = _dynamic_terms(arch, bandwidths_hz, n_bits, nu, table)
    per = {k.value: st.get(k, 0.0) + dy.get(k, 0.0) for k in set(st) | set(dy)}
    return PowerBreakdown(sum(st.values()), sum(dy.values()), dict(sorted(per.items())))


# --------------------------------------------------------------------------
# component counts
# --------------------------------------------------------------------------

def component_counts(arch: ArchitectureDescriptor) -> dict[str, int]:
    """Hardware inventory, one row of the architecture comparison table.

    The divider/combiner column is written there as ``x/y``; it is returned
    as ``dividers = x`` and ``combiners = y``.
    """
    n_a, n_rf, c = arch.n_antennas, arch.n_rf_chains, arch.n_subbands
    fp = arch.is_partitioned
    if arch.bf_class is BfClass.FD:
        if arch.is_shared:
            counts = dict(antennas=n_a, adcs=2 * n_a, phase_shifters=0,
                          rf_if_filters=c * n_a, if_bb_mixers=(c + 1) * n_a,
                          dividers=0 if fp else n_a, combiners=0 if fp else n_a)
        else:
            counts = dict(antennas=c * n_a, adcs=2 * c * n_a, phase_shifters=0,
                          rf_if_filters=2 * c * n_a, if_bb_mixers=2 * c * n_a,
                          dividers=0, combiners=0)
    else:
        if arch.is_shared:
            counts = dict(antennas=n_a, adcs=2 * n_rf, phase_shifters=c * n_a * n_rf,
                          rf_if_filters=c * n_a, if_bb_mixers=c * n_a + n_rf,
                          dividers=(c if fp else c + 1) * n_a, combiners=n_rf)
        else:
            counts = dict(antennas=c * n_a, adcs=2 * c * n_rf, phase_shifters=c * n_a * n_rf,
                          rf_if_filters=2 * c * n_a,
                          if_bb_mixers=c * n_a + (n_rf if fp else c * n_rf),
                          dividers=c * n_a, combiners=c * n_rf)
    return counts


# --------------------------------------------------------------------------
# combiner structure
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StructureMask:
    """Shape rules a combiner must satisfy for one architecture.

    ``rf_shape[c]`` is ``None`` for FD (no analog stage).  ``block_diagonal``
    is true for DRF, whose global combiner stacks the per-band blocks on the
    diagonal.  ``active_band`` selects the single nonzero block of an FP
    time slot (``None`` for FI).
    """

    n_antennas: int
    n_rf_chains: int
    k_per_subband: tuple[int, ...]
    hybrid: bool
    block_diagonal: bool
    partitioned: bool
    active_band: int | None = None

    @property
    def n_subbands(self) -> int:
        return len(self.k_per_subband)

    def rf_shape(self, c: int) -> tuple[int, int] | None:
        return (self.n_antennas, self.n_rf_chains) if self.hybrid else None

    def bb_shape(self, c: int) -> tuple[int, int]:
        rows = self.n_rf_chains if self.hybrid else self.n_antennas
        return (rows, self.k_per_subband[c])

    def combiner_shape(self, c: int) -> tuple[int, int]:
        return (self.n_antennas, self.k_per_subband[c])

    def active_bands(self) -> list[int]:
        if self.partitioned:
            return [self.active_band]
        return list(range(self.n_subbands))

    def for_slot(self, band: int) -> "StructureMask":
        if not self.partitioned:
            raise ValueError("time slots only exist for FP architectures")
        if not 0 <= band < self.n_subbands:
            raise ValueError("band out of range")
        return StructureMask(self.n_antennas, self.n_rf_chains, self.k_per_subband, self.hybrid,
                             self.block_diagonal, True, band)


def structure_mask(arch: ArchitectureDescriptor, k_per_subband: Sequence[int],
                   active_band: int | None = None) -> StructureMask:
    k = tuple(int(x) for x in k_per_subband)
    if len(k) != arch.n_subbands:
        raise ValueError("k_per_subband must have one entry per sub-band")
    if arch.is_hybrid and any(kc > arch.n_rf_chains for kc in k):
        raise ValueError("insufficient RF chains")
    if any(kc > arch.n_antennas for kc in k):
        raise ValueError("more users than antennas in a sub-band")
    if arch.is_partitioned and active_band is None:
        active_band = 0
    if not arch.is_partitioned:
        active_band = None
    return StructureMask(arch.n_antennas, arch.n_rf_chains, k, arch.is_hybrid,
                         not arch.is_shared, arch.is_partitioned, active_band)
