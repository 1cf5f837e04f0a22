from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields

from ..iq_core import ModOrder, Numerology

LOAD_PRESETS_BPS = (10e6, 20e6, 30e6)


@dataclass(frozen=True)
class ScenarioConfig:
    """Deployment, traffic and model constants of one simulation run.

    Defaults describe the 21-cell urban-micro layout: 7 sites with 3 cells,
    200 m inter-site distance, RUs at 10 m with 30 dBm, 100 MHz subbands
    around 2 GHz with reuse 3, four UEs per cell and 600-byte CBR packets.
    """

    n_sites: int = 7
    cells_per_site: int = 3
    isd: float = 200.0
    ru_height: float = 10.0
    ue_height: float = 1.5
    min_distance: float = 10.0
    tx_power: float = 30.0  # dBm
    carrier: float = 2.0e9
    subband_bandwidth: float = 100e6
    overhead: float = 0.04
    numerology: int = 1
    ues_per_cell: int = 4
    mod_cap: ModOrder = ModOrder.QAM256
    offered_load_per_ue: float = 10e6
    packet_size: int = 600  # bytes
    sim_duration: float = 1.0
    # traffic stops at sim_duration; queues keep draining for this long
    drain_duration: float = 0.1
    channel_update_period: float = 0.1
    rng_seed: int = 1
    layers: int = 1
    ru_antennas: int = 64
    noise_figure: float = 9.0  # dB
    shadowing: bool = True
    fading: bool = True
    interferer_gain_min: float = -10.0  # dB
    harq_max_transmissions: int = 4
    harq_retx_delay_slots: int = 4
    dl_fraction: float = 1.0
    bler_gap_db: float = 1.5
    bler_slope_per_db: float = 1.5
    # forces every first and repeated transmission to fail with this probability
    bler_override: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mod_cap", ModOrder.parse(self.mod_cap))
        Numerology(self.numerology)
        positive = ("n_sites", "cells_per_site", "isd", "subband_bandwidth", "packet_size",
                    "sim_duration", "channel_update_period", "layers", "ru_antennas",
                    "harq_max_transmissions")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        nonneg = ("ues_per_cell", "offered_load_per_ue", "drain_duration", "harq_retx_delay_slots")
        for name in nonneg:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.cells_per_site > 3:
            raise ValueError("at most 3 cells per site (120 degree sectors)")
        if not 0 <= self.overhead < 1:
            raise ValueError("overhead must be in [0, 1)")
        if not 0 < self.dl_fraction <= 1:
            raise ValueError("dl_fraction must be in (0, 1]")
        if self.bler_override is not None and not 0 <= self.bler_override <= 1:
            raise ValueError("bler_override must be a probability")

    @property
    def n_cells(self) -> int:
        return self.n_sites * self.cells_per_site

    @property
    def num(self) -> Numerology:
        return Numerology(self.numerology)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.label if isinstance(value, ModOrder) else value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise KeyError(f"unknown scenario keys: {', '.join(unknown)}")
        return cls(**data)
