"""Transport capacity and one-way latency requirements per functional split.

Capacities are evaluated with exact rational arithmetic; results are ints
when they come out integral.  ``None`` marks a direction where an option has
no defined requirement (Option 7-3 uplink).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Mapping, NamedTuple, Union

from .iq_core import SUBCARRIERS_PER_PRB, UNCOMPRESSED_BITWIDTH, Numerology, prb_count

Number = Union[int, float, Fraction]

MODCOMP_BITWIDTHS = (2, 4, 6, 8, UNCOMPRESSED_BITWIDTH)


class SplitOption(enum.Enum):
    OPT1 = "1"
    OPT2 = "2"
    OPT4 = "4"
    OPT6 = "6"
    OPT7_3 = "7-3"
    OPT7_2X = "7-2x"
    OPT7_1 = "7-1"
    OPT8 = "8"

    @classmethod
    def parse(cls, value: "SplitOption | str") -> "SplitOption":
        if isinstance(value, SplitOption):
            return value
        key = str(value).strip().lower().replace("opt", "").replace("_", "-").lstrip("ion ")
        if key == "7-2":
            key = "7-2x"
        for opt in cls:
            if opt.value == key:
                return opt
        raise ValueError(f"unknown split option {value!r}")


class Direction(enum.Enum):
    DL = "DL"
    UL = "UL"


@dataclass(frozen=True)
class SplitParams:
    """Every symbol of the split requirement formulas; unset ones are None.

    ``mac_info`` may be one rate for all options or a mapping from option to
    rate, since the MAC overhead differs between the intra-PHY splits.
    """

    peak_rate: Number | None = None
    bandwidth: Number | None = None
    reference_bandwidth: Number | None = None
    layers: int | None = None
    reference_layers: int | None = None
    mod_order: Number | None = None
    reference_mod_order: Number | None = None
    control_rate: Number | None = None
    code_rate: Number | str | None = None
    subcarriers: int | None = None
    symbols_per_ms: int | None = None
    bitwidth: int | None = None
    antenna_ports: int | None = None
    sample_rate: Number | None = None
    mac_info: Number | Mapping | None = None
    signaling: Number | None = None
    direction: Direction = Direction.DL

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in ("direction", "mac_info", "code_rate") or value is None:
                continue
            if value < 0:
                raise ValueError(f"{f.name} must be non-negative, got {value}")
        for name in ("reference_bandwidth", "reference_layers", "reference_mod_order"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.code_rate is not None:
            rate = _frac(self.code_rate)
            if not 0 < rate <= 1:
                raise ValueError(f"code_rate must be in (0, 1], got {self.code_rate}")
        if isinstance(self.direction, str):
            object.__setattr__(self, "direction", Direction(self.direction.upper()))

    def mac_info_for(self, option: SplitOption) -> Number | None:
        if isinstance(self.mac_info, Mapping):
            for key, value in self.mac_info.items():
                if SplitOption.parse(key) is option:
                    return value
            return None
        return self.mac_info


PARAMS_BY_OPTION = {
    SplitOption.OPT1: ("peak_rate", "bandwidth", "reference_bandwidth", "layers",
                       "reference_layers", "mod_order", "reference_mod_order"),
}
PARAMS_BY_OPTION[SplitOption.OPT4] = PARAMS_BY_OPTION[SplitOption.OPT1]
PARAMS_BY_OPTION[SplitOption.OPT2] = PARAMS_BY_OPTION[SplitOption.OPT1] + ("signaling",)
PARAMS_BY_OPTION[SplitOption.OPT6] = PARAMS_BY_OPTION[SplitOption.OPT1] + ("control_rate",)
PARAMS_BY_OPTION[SplitOption.OPT7_3] = PARAMS_BY_OPTION[SplitOption.OPT6] + ("code_rate", "mac_info")
PARAMS_BY_OPTION[SplitOption.OPT7_2X] = ("subcarriers", "symbols_per_ms", "bitwidth", "layers", "mac_info")
PARAMS_BY_OPTION[SplitOption.OPT7_1] = ("subcarriers", "symbols_per_ms", "bitwidth", "antenna_ports", "mac_info")
PARAMS_BY_OPTION[SplitOption.OPT8] = ("sample_rate", "bitwidth", "antenna_ports")


class MissingParameterError(ValueError):
    def __init__(self, name: str, option: SplitOption):
        super().__init__(f"split option {option.value} needs parameter {name!r}")
        self.name = name
        self.option = option


def _frac(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _result(value: Fraction) -> int | float:
    return int(value) if value.denominator == 1 else float(value)


def _get(p: SplitParams, name: str, option: SplitOption) -> Fraction:
    value = p.mac_info_for(option) if name == "mac_info" else getattr(p, name)
    if value is None:
        raise MissingParameterError(name, option)
    return _frac(value)


def required_capacity(option: SplitOption | str, p: SplitParams) -> int | float | None:
    """Required transport capacity in bit/s for one split option and direction."""
    option = SplitOption.parse(option)
    if option is SplitOption.OPT7_3 and p.direction is Direction.UL:
        return None
    v = {name: _get(p, name, option) for name in PARAMS_BY_OPTION[option]}

    if option in (SplitOption.OPT1, SplitOption.OPT2, SplitOption.OPT4,
                  SplitOption.OPT6, SplitOption.OPT7_3):
        scaling = (
            v["bandwidth"] / v["reference_bandwidth"]
            * v["layers"] / v["reference_layers"]
            * v["mod_order"] / v["reference_mod_order"]
        )
        rate = v["peak_rate"]
        if option in (SplitOption.OPT6, SplitOption.OPT7_3):
            rate += v["control_rate"]
        total = rate * scaling
        if option is SplitOption.OPT2:
            total += v["signaling"]
        if option is SplitOption.OPT7_3:
            total = total / v["code_rate"] + v["mac_info"]
        return _result(total)

    if option is SplitOption.OPT7_2X:
        total = v["subcarriers"] * v["symbols_per_ms"] * v["bitwidth"] * v["layers"] * 1000 + v["mac_info"]
    elif option is SplitOption.OPT7_1:
        total = v["subcarriers"] * v["symbols_per_ms"] * v["bitwidth"] * v["antenna_ports"] * 1000 + v["mac_info"]
    else:
        total = v["sample_rate"] * v["bitwidth"] * v["antenna_ports"] * 5
    return _result(total)


class LatencyBound(NamedTuple):
    low: float
    high: float

    @property
    def is_range(self) -> bool:
        return self.low != self.high


_LATENCY = {
    SplitOption.OPT1: LatencyBound(10e-3, 10e-3),
    SplitOption.OPT2: LatencyBound(1.5e-3, 10e-3),
    SplitOption.OPT4: LatencyBound(100e-6, 100e-6),
}


def latency_requirement(option: SplitOption | str) -> LatencyBound:
    """Maximum one-way latency in seconds; Option 2 is a range."""
    option = SplitOption.parse(option)
    return _LATENCY.get(option, LatencyBound(250e-6, 250e-6))


def modcomp_capacity(
    bandwidth: float,
    numerology: Numerology | int,
    overhead: float = 0.04,
    layers: int = 1,
    bitwidth: int = UNCOMPRESSED_BITWIDTH,
) -> int:
    """Per-RU 7-2x fronthaul rate: 12 * PRBs * symbols/ms * W * layers * 1000."""
    if bitwidth not in MODCOMP_BITWIDTHS:
        raise ValueError(f"bitwidth must be one of {MODCOMP_BITWIDTHS}, got {bitwidth}")
    if layers < 0:
        raise ValueError("layers must be non-negative")
    num = numerology if isinstance(numerology, Numerology) else Numerology(int(numerology))
    prbs = prb_count(bandwidth, num, overhead)
    return SUBCARRIERS_PER_PRB * prbs * num.symbols_per_ms * bitwidth * layers * 1000


def reduction_percent(compressed_bitwidth: float, uncompressed_bitwidth: float = UNCOMPRESSED_BITWIDTH) -> float:
    if compressed_bitwidth <= 0 or uncompressed_bitwidth <= 0:
        raise ValueError("bitwidths must be positive")
    if compressed_bitwidth > uncompressed_bitwidth:
        raise ValueError("compressed bitwidth exceeds the uncompressed one")
    return float(100 * (1 - Fraction(compressed_bitwidth) / Fraction(uncompressed_bitwidth)))


def scenario_fronthaul_capacity(n_ru: int, per_ru: int | float) -> int | float:
    """Capacity of a fronthaul link shared by ``n_ru`` identical RUs."""
    if n_ru < 1:
        raise ValueError(f"need at least one RU, got {n_ru}")
    return n_ru * per_ru


# N_SC * N_symb must equal 84,000 for the 7-2x/7-1 example values to come
# out; 3000 subcarriers and 28 symbols/ms (mu=1) is the natural reading.
_TABLE1_COMMON = dict(
    bandwidth=100_000_000,
    reference_bandwidth=20_000_000,
    layers=8,
    code_rate=Fraction(1, 3),
    subcarriers=3000,
    symbols_per_ms=28,
    bitwidth=32,
    antenna_ports=32,
    sample_rate=30_720_000,
)

TABLE1_EXAMPLE = {
    Direction.DL: SplitParams(
        **_TABLE1_COMMON,
        peak_rate=150_000_000, reference_layers=2,
        mod_order=8, reference_mod_order=6,
        control_rate=5_000_000, signaling=16_000_000,
        mac_info={"7-1": 120_000_000, "7-2x": 700_000_000, "7-3": 800_000_000},
        direction=Direction.DL,
    ),
    Direction.UL: SplitParams(
        **_TABLE1_COMMON,
        peak_rate=50_000_000, reference_layers=1,
        mod_order=6, reference_mod_order=4,
        control_rate=44_000_000, signaling=24_000_000,
        mac_info={"7-1": 80_000_000, "7-2x": 120_000_000},
        direction=Direction.UL,
    ),
}


@dataclass(frozen=True)
class PlanRow:
    option: str
    capacity_dl: int | float | None
    capacity_ul: int | float | None
    latency: LatencyBound | None
    compression_ratio: float | None = None
    reduction_percent: float | None = None


def _try(option: SplitOption, p: SplitParams | None):
    if p is None:
        return None
    return required_capacity(option, p)


def plan_rows(
    dl: SplitParams | None,
    ul: SplitParams | None,
    modcomp: Mapping | None = None,
) -> list[PlanRow]:
    """Rows of a dimensioning report: every split option, then 7-2x variants.

    ``modcomp`` optionally holds ``bandwidth``, ``numerology``, ``overhead``,
    ``layers`` and ``bitwidths`` for per-RU modulation-compression lines.
    """
    rows = []
    for option in SplitOption:
        rows.append(PlanRow(f"Opt{option.value}", _try(option, dl), _try(option, ul),
                            latency_requirement(option)))
    if modcomp:
        base = dict(modcomp)
        widths = base.pop("bitwidths", MODCOMP_BITWIDTHS)
        uncompressed = modcomp_capacity(bitwidth=UNCOMPRESSED_BITWIDTH, **base)
        for w in sorted(widths, reverse=True):
            cap = modcomp_capacity(bitwidth=w, **base)
            rows.append(PlanRow(
                f"Opt7-2x W={w}", cap, None, latency_requirement(SplitOption.OPT7_2X),
                compression_ratio=cap / uncompressed if uncompressed else w / UNCOMPRESSED_BITWIDTH,
                reduction_percent=reduction_percent(w),
            ))
    return rows


def with_bitwidth(p: SplitParams, bitwidth: int) -> SplitParams:
    return replace(p, bitwidth=bitwidth)
