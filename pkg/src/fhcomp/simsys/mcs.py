"""NR MCS Table 2 (TS 38.214 Table 5.1.3.1-2), BLER curves and link adaptation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..iq_core import ModOrder

DATA_SYMBOLS_PER_SLOT = 13  # one of 14 symbols reserved for control
BLER_TARGET = 0.1


@dataclass(frozen=True)
class McsEntry:
    index: int
    mod_order: ModOrder
    code_rate_x1024: float

    @property
    def code_rate(self) -> float:
        return self.code_rate_x1024 / 1024

    @property
    def spectral_efficiency(self) -> float:
        return int(self.mod_order) * self.code_rate


_TABLE2_ROWS = [
    (2, 120), (2, 193), (2, 308), (2, 449), (2, 602),
    (4, 378), (4, 434), (4, 490), (4, 553), (4, 616), (4, 658),
    (6, 466), (6, 517), (6, 567), (6, 616), (6, 666), (6, 719), (6, 772), (6, 822), (6, 873),
    (8, 682.5), (8, 711), (8, 754), (8, 797), (8, 841), (8, 885), (8, 916.5), (8, 948),
]

MCS_TABLE2: tuple[McsEntry, ...] = tuple(
    McsEntry(i, ModOrder(qm), rate) for i, (qm, rate) in enumerate(_TABLE2_ROWS)
)


@dataclass(frozen=True)
class BlerModel:
    """Logistic BLER curve per MCS in SINR (dB).

    The curve is centred where the MCS spectral efficiency equals
    log2(1 + snr / gap), i.e. Shannon capacity with an SNR gap ``gap_db``.
    """

    gap_db: float = 1.5
    slope_per_db: float = 1.5

    def center_db(self, entry: McsEntry) -> float:
        return 10 * math.log10(2**entry.spectral_efficiency - 1) + self.gap_db

    def bler(self, sinr_db: float, entry: McsEntry) -> float:
        x = self.slope_per_db * (sinr_db - self.center_db(entry))
        if x > 700:
            return 0.0
        return 1.0 / (1.0 + math.exp(x))

    def required_sinr_db(self, entry: McsEntry, target: float = BLER_TARGET) -> float:
        """SINR at which the BLER of ``entry`` drops to ``target``."""
        return self.center_db(entry) + math.log((1 - target) / target) / self.slope_per_db


def select_mcs(
    sinr_db: float,
    cap: ModOrder | int | str,
    table: Sequence[McsEntry] = MCS_TABLE2,
    model: BlerModel = BlerModel(),
    target: float = BLER_TARGET,
) -> McsEntry:
    """Highest entry within the modulation cap whose predicted BLER meets the target."""
    cap = ModOrder.parse(cap)
    allowed = [e for e in table if e.mod_order <= cap]
    if not allowed:
        raise ValueError(f"no MCS entry at or below {cap.label}")
    best = allowed[0]
    for entry in allowed:
        if model.bler(sinr_db, entry) <= target:
            best = entry
    return best


def transport_block_size(
    mcs: McsEntry,
    n_prb: int,
    layers: int = 1,
    data_symbols: int = DATA_SYMBOLS_PER_SLOT,
) -> int:
    """Simplified TBS in bits: floor(PRBs * 12 * data symbols * Qm * R * layers)."""
    if n_prb < 1:
        raise ValueError("n_prb must be at least 1")
    return math.floor(n_prb * 12 * data_symbols * int(mcs.mod_order) * mcs.code_rate * layers)
