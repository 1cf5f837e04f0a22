"""Per-PRB block compression: block floating point, block scaling, mu-law.

All three turn the 24 components of a PRB (I and Q of 12 samples) into
``value_bits`` signed integers plus one shared parameter.  Payloads are
packed MSB first, I before Q, subcarrier by subcarrier.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..iq_core import SAMPLE_MAX, SAMPLE_MIN, SUBCARRIERS_PER_PRB, PrbBlock, as_prb
from .bits import from_bits, to_bits

COMPONENTS_PER_PRB = 2 * SUBCARRIERS_PER_PRB
FULL_SCALE = 1 << 15


class Method(enum.IntEnum):
    """Compression method; the value is the method tag byte of the block file."""

    BFP = 1
    BLOCK_SCALING = 2
    MU_LAW = 3
    BEAMSPACE = 4
    MODULATION = 5

    @classmethod
    def parse(cls, value: "Method | str | int") -> "Method":
        if isinstance(value, Method):
            return value
        if isinstance(value, int):
            return cls(value)
        key = value.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "bfp": cls.BFP, "block_floating_point": cls.BFP,
            "blockscale": cls.BLOCK_SCALING, "block_scaling": cls.BLOCK_SCALING,
            "bs": cls.BLOCK_SCALING,
            "mulaw": cls.MU_LAW, "mu_law": cls.MU_LAW, "ulaw": cls.MU_LAW,
            "beamspace": cls.BEAMSPACE,
            "modcomp": cls.MODULATION, "modulation": cls.MODULATION,
            "modulation_compression": cls.MODULATION,
        }
        if key not in aliases:
            raise ValueError(f"unknown compression method {value!r}")
        return aliases[key]


def _check_range(name: str, value: int, lo: int, hi: int):
    if not isinstance(value, (int, np.integer)) or not lo <= value <= hi:
        raise ValueError(f"{name} must be an integer in [{lo}, {hi}], got {value!r}")


@dataclass(frozen=True)
class BfpConfig:
    mantissa_bits: int = 9
    exponent_bits: int = 8

    def __post_init__(self):
        _check_range("mantissa_bits", self.mantissa_bits, 2, 16)
        _check_range("exponent_bits", self.exponent_bits, 2, 8)

    @property
    def value_bits(self) -> int:
        return self.mantissa_bits

    @property
    def shared_bits(self) -> int:
        return self.exponent_bits


@dataclass(frozen=True)
class BlockScalingConfig:
    value_bits: int = 9
    scaler_bits: int = 8

    def __post_init__(self):
        _check_range("value_bits", self.value_bits, 2, 16)
        _check_range("scaler_bits", self.scaler_bits, 1, 8)

    @property
    def shared_bits(self) -> int:
        return self.scaler_bits

    @property
    def max_value(self) -> int:
        return (1 << (self.value_bits - 1)) - 1

    @property
    def scaler_step(self) -> int:
        """Grid step of the unsigned fixed-point scaler.

        The smallest power of two (at least 1) for which the largest scaler
        code still covers a full-scale input.
        """
        codes = (1 << self.scaler_bits) - 1
        step = 1
        while self.max_value * codes * step < FULL_SCALE:
            step *= 2
        return step


@dataclass(frozen=True)
class MuLawConfig:
    value_bits: int = 9
    mu: float = 255.0
    shift_bits: int = 0
    # width of the shared field that carries the shift
    shift_field_bits: int = 8

    def __post_init__(self):
        _check_range("value_bits", self.value_bits, 2, 16)
        _check_range("shift_bits", self.shift_bits, 0, 14)
        _check_range("shift_field_bits", self.shift_field_bits, 4, 8)
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    @property
    def shared_bits(self) -> int:
        return self.shift_field_bits

    @property
    def max_code(self) -> int:
        return (1 << (self.value_bits - 1)) - 1

    @property
    def full_scale(self) -> int:
        return FULL_SCALE >> self.shift_bits


@dataclass(frozen=True, eq=False)
class CompressedPrb:
    method: Method
    shared_param: int
    payload: np.ndarray  # uint8 bit array
    value_bits: int
    shared_bits: int

    def __post_init__(self):
        payload = np.asarray(self.payload, dtype=np.uint8).reshape(-1)
        if payload.size != COMPONENTS_PER_PRB * self.value_bits:
            raise ValueError(
                f"payload has {payload.size} bits, expected "
                f"{COMPONENTS_PER_PRB} x {self.value_bits}"
            )
        if not 0 <= self.shared_param < (1 << self.shared_bits):
            raise ValueError(f"shared parameter {self.shared_param} exceeds {self.shared_bits} bits")
        object.__setattr__(self, "payload", payload)

    def __eq__(self, other):
        if not isinstance(other, CompressedPrb):
            return NotImplemented
        return (
            (self.method, self.shared_param, self.value_bits, self.shared_bits)
            == (other.method, other.shared_param, other.value_bits, other.shared_bits)
            and np.array_equal(self.payload, other.payload)
        )

    @property
    def total_bits(self) -> int:
        return self.payload.size + self.shared_bits

    def values(self) -> np.ndarray:
        return from_bits(self.payload, self.value_bits, signed=True)

    def to_bits(self) -> np.ndarray:
        """Shared parameter followed by the payload."""
        return np.concatenate([to_bits([self.shared_param], self.shared_bits), self.payload])


def _pack(method: Method, shared: int, values: np.ndarray, cfg) -> CompressedPrb:
    return CompressedPrb(
        method=method,
        shared_param=int(shared),
        payload=to_bits(values, cfg.value_bits, signed=True),
        value_bits=cfg.value_bits,
        shared_bits=cfg.shared_bits,
    )


def _expect(c: CompressedPrb, method: Method, cfg):
    if c.method is not method:
        raise ValueError(f"expected a {method.name} block, got {c.method.name}")
    if c.value_bits != cfg.value_bits:
        raise ValueError(f"block uses {c.value_bits}-bit values, config says {cfg.value_bits}")


def _to_block(components: np.ndarray) -> PrbBlock:
    clipped = np.clip(components, SAMPLE_MIN, SAMPLE_MAX)
    return PrbBlock(clipped.reshape(SUBCARRIERS_PER_PRB, 2).astype(np.int32))


# --- block floating point --------------------------------------------------


def bfp_exponent(components: np.ndarray, mantissa_bits: int) -> int:
    """Smallest right shift that makes every component a valid signed mantissa."""
    lo, hi = -(1 << (mantissa_bits - 1)), (1 << (mantissa_bits - 1)) - 1
    e = 0
    while True:
        shifted = components >> e
        if shifted.min(initial=0) >= lo and shifted.max(initial=0) <= hi:
            return e
        e += 1


def bfp_compress(block, cfg: BfpConfig = BfpConfig()) -> CompressedPrb:
    comps = as_prb(block).components()
    e = bfp_exponent(comps, cfg.mantissa_bits)
    if e >= 1 << cfg.exponent_bits:
        raise OverflowError(
            f"exponent {e} does not fit in {cfg.exponent_bits} bits"
        )
    # arithmetic right shift truncates toward -inf, like the hardware shifter
    return _pack(Method.BFP, e, comps >> e, cfg)


def bfp_decompress(c: CompressedPrb, cfg: BfpConfig = BfpConfig()) -> PrbBlock:
    _expect(c, Method.BFP, cfg)
    return _to_block(c.values() << c.shared_param)


# --- block scaling ----------------------------------------------------------


def _round_half_away(num: np.ndarray, den: int) -> np.ndarray:
    return np.sign(num) * ((2 * np.abs(num) + den) // (2 * den))


def block_scaling_scaler(c: CompressedPrb, cfg: BlockScalingConfig = BlockScalingConfig()) -> int:
    return c.shared_param * cfg.scaler_step


def block_scaling_compress(block, cfg: BlockScalingConfig = BlockScalingConfig()) -> CompressedPrb:
    """Scale the PRB by a shared scaler so its peak fits ``value_bits``.

    The scaler is max|x| / (2**(value_bits-1) - 1) rounded up onto the
    unsigned grid ``k * scaler_step``.  Components are rounded to nearest,
    except the peak ones which round away from zero; that keeps the scaler
    chosen for a reconstructed block equal to the original one, so repeated
    roundtrips are stable.
    """
    comps = as_prb(block).components()
    step = cfg.scaler_step
    peak = int(np.abs(comps).max())
    if peak == 0:
        return _pack(Method.BLOCK_SCALING, 1, np.zeros(COMPONENTS_PER_PRB, dtype=np.int64), cfg)
    code = -(-peak // (cfg.max_value * step))
    scaler = code * step
    values = _round_half_away(comps, scaler)
    at_peak = np.abs(comps) == peak
    values[at_peak] = np.sign(comps[at_peak]) * (-(-peak // scaler))
    return _pack(Method.BLOCK_SCALING, code, values, cfg)


def block_scaling_decompress(c: CompressedPrb, cfg: BlockScalingConfig = BlockScalingConfig()) -> PrbBlock:
    _expect(c, Method.BLOCK_SCALING, cfg)
    if c.shared_param == 0:
        raise ValueError("block scaling scaler code must be positive")
    return _to_block(c.values() * block_scaling_scaler(c, cfg))


# --- mu-law -------------------------------------------------------------------


def mulaw_breakpoints(cfg: MuLawConfig = MuLawConfig()) -> np.ndarray:
    """Input magnitudes of the 9 segment ends of the 8-segment compander.

    They lie on the mu-law curve at outputs 0, 1/8, ..., 1.  For mu=255 they
    are full_scale * (2**k - 1) / 255, the power-of-two layout of G.711.
    """
    k = np.arange(9)
    return cfg.full_scale * ((1 + cfg.mu) ** (k / 8) - 1) / cfg.mu


def mulaw_curve(x, cfg: MuLawConfig = MuLawConfig()) -> np.ndarray:
    """Exact (non-segmented) mu-law characteristic on [-full_scale, full_scale]."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.log1p(cfg.mu * np.abs(x) / cfg.full_scale) / math.log1p(cfg.mu)


def mulaw_compand(magnitude, cfg: MuLawConfig = MuLawConfig()) -> np.ndarray:
    """Piecewise-linear compander output in [0, 1] for magnitudes in [0, full_scale]."""
    bp = mulaw_breakpoints(cfg)
    a = np.clip(np.asarray(magnitude, dtype=float), 0, cfg.full_scale)
    seg = np.clip(np.searchsorted(bp, a, side="right") - 1, 0, 7)
    return (seg + (a - bp[seg]) / (bp[seg + 1] - bp[seg])) / 8


def mulaw_expand(y, cfg: MuLawConfig = MuLawConfig()) -> np.ndarray:
    bp = mulaw_breakpoints(cfg)
    y8 = np.clip(np.asarray(y, dtype=float), 0, 1) * 8
    seg = np.minimum(np.floor(y8).astype(int), 7)
    return bp[seg] + (y8 - seg) * (bp[seg + 1] - bp[seg])


def mulaw_compress(block, cfg: MuLawConfig = MuLawConfig()) -> CompressedPrb:
    comps = as_prb(block).components()
    sign = np.sign(comps)
    magnitude = np.abs(comps) >> cfg.shift_bits
    y = mulaw_compand(magnitude, cfg)
    codes = np.floor(y * cfg.max_code + 0.5).astype(np.int64)
    return _pack(Method.MU_LAW, cfg.shift_bits, sign * codes, cfg)


def mulaw_decompress(c: CompressedPrb, cfg: MuLawConfig = MuLawConfig()) -> PrbBlock:
    _expect(c, Method.MU_LAW, cfg)
    codes = c.values()
    magnitude = mulaw_expand(np.abs(codes) / cfg.max_code, cfg)
    restored = np.floor(magnitude + 0.5).astype(np.int64) << c.shared_param
    return _to_block(np.sign(codes) * restored)


COMPRESSORS = {
    Method.BFP: (bfp_compress, bfp_decompress, BfpConfig),
    Method.BLOCK_SCALING: (block_scaling_compress, block_scaling_decompress, BlockScalingConfig),
    Method.MU_LAW: (mulaw_compress, mulaw_decompress, MuLawConfig),
}
