"""Fixed-point IQ samples, NR QAM constellations and numerology arithmetic.

Uncompressed samples use 16-bit I plus 16-bit Q, i.e. 32 bits per complex
resource element.  The bit-to-symbol mapping follows the 3GPP NR modulation
mapper (TS 38.211 5.1): bits with even index drive the I dimension, odd index
the Q dimension, and each dimension is Gray coded.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

SAMPLE_MIN = -32768
SAMPLE_MAX = 32767
UNCOMPRESSED_BITWIDTH = 32
SUBCARRIERS_PER_PRB = 12
SYMBOLS_PER_SLOT = 14

# Fixed-point amplitude of a unit-power constellation point in IQ files.
# 256QAM corners (15/sqrt(170) * 2**14 = 18849) still fit in int16.
FIXED_POINT_AMPLITUDE = 2**14


class ModOrder(enum.IntEnum):
    """NR modulation, valued by bits per symbol."""

    QPSK = 2
    QAM16 = 4
    QAM64 = 6
    QAM256 = 8

    @property
    def bits_per_symbol(self) -> int:
        return int(self)

    @property
    def levels_per_dimension(self) -> int:
        return 2 ** (int(self) // 2)

    @property
    def label(self) -> str:
        return "QPSK" if self is ModOrder.QPSK else f"{2 ** int(self)}QAM"

    @classmethod
    def parse(cls, value: "ModOrder | int | str") -> "ModOrder":
        """Accept a ModOrder, bits per symbol, or a name like ``"64QAM"``."""
        if isinstance(value, ModOrder):
            return value
        if isinstance(value, str):
            key = value.strip().upper().replace("-", "")
            names = {
                "QPSK": cls.QPSK, "4QAM": cls.QPSK,
                "16QAM": cls.QAM16, "QAM16": cls.QAM16,
                "64QAM": cls.QAM64, "QAM64": cls.QAM64,
                "256QAM": cls.QAM256, "QAM256": cls.QAM256,
            }
            if key in names:
                return names[key]
            if key.isdigit():
                value = int(key)
            else:
                raise ValueError(f"unknown modulation {value!r}")
        try:
            return cls(int(value))
        except ValueError:
            raise ValueError(
                f"modulation order must be one of 2, 4, 6, 8 bits/symbol, got {value!r}"
            ) from None


@dataclass(frozen=True)
class IQSample:
    i: int
    q: int

    def __post_init__(self):
        for name in ("i", "q"):
            v = getattr(self, name)
            if not SAMPLE_MIN <= v <= SAMPLE_MAX:
                raise ValueError(f"{name}={v} outside 16-bit range")


@dataclass(frozen=True, eq=False)
class PrbBlock:
    """Twelve fixed-point IQ samples, stored as an int32 array of shape (12, 2)."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.shape != (SUBCARRIERS_PER_PRB, 2):
            raise ValueError(f"PRB block must have shape (12, 2), got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise TypeError("PRB samples must be integers")
        if arr.size and (arr.min() < SAMPLE_MIN or arr.max() > SAMPLE_MAX):
            raise ValueError("PRB sample outside 16-bit range")
        arr = arr.astype(np.int32)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_samples(cls, samples: Sequence[IQSample]) -> "PrbBlock":
        return cls(np.array([[s.i, s.q] for s in samples], dtype=np.int32).reshape(-1, 2))

    @classmethod
    def zeros(cls) -> "PrbBlock":
        return cls(np.zeros((SUBCARRIERS_PER_PRB, 2), dtype=np.int32))

    def __iter__(self) -> Iterator[IQSample]:
        for i, q in self.samples:
            yield IQSample(int(i), int(q))

    def __eq__(self, other):
        if not isinstance(other, PrbBlock):
            return NotImplemented
        return bool(np.array_equal(self.samples, other.samples))

    def __hash__(self):
        return hash(self.samples.tobytes())

    def components(self) -> np.ndarray:
        """Flat int64 view I0, Q0, I1, Q1, ... (24 values)."""
        return self.samples.reshape(-1).astype(np.int64)


def as_prb(block) -> PrbBlock:
    return block if isinstance(block, PrbBlock) else PrbBlock(np.asarray(block))


@dataclass(frozen=True)
class Numerology:
    mu: int

    def __post_init__(self):
        if self.mu not in (0, 1, 2):
            raise ValueError(f"numerology must be 0, 1 or 2, got {self.mu}")

    @property
    def subcarrier_spacing(self) -> int:
        return 15000 * 2**self.mu

    @property
    def symbols_per_ms(self) -> int:
        return SYMBOLS_PER_SLOT * 2**self.mu

    @property
    def slots_per_ms(self) -> int:
        return 2**self.mu

    @property
    def slot_duration(self) -> float:
        return 1e-3 / 2**self.mu


def _numerology(numerology: "Numerology | int") -> Numerology:
    return numerology if isinstance(numerology, Numerology) else Numerology(int(numerology))


# --- constellations -------------------------------------------------------


def normalization_scale(order: ModOrder | int) -> float:
    """Scale that gives the odd-integer lattice unit average power."""
    order = ModOrder.parse(order)
    levels = order.levels_per_dimension
    # mean |l|^2 per dimension over odd l in [-(L-1), L-1] is (L^2 - 1) / 3
    return 1.0 / math.sqrt(2 * (levels * levels - 1) / 3)


def _level_from_bits(bits: Sequence[int]) -> int:
    # NR mapper, e.g. 64QAM: (1-2b0) * [4 - (1-2b2) * [2 - (1-2b4)]]
    signs = [1 - 2 * b for b in bits]
    level = 1
    for j in range(len(signs) - 1, 0, -1):
        level = 2 ** (len(signs) - j) - signs[j] * level
    return signs[0] * level


@lru_cache(maxsize=None)
def _tables(order: ModOrder):
    """Lattice point for each bit pattern and the inverse per-dimension map."""
    m = order.bits_per_symbol
    points = {}
    for code in range(2**m):
        bits = tuple((code >> (m - 1 - k)) & 1 for k in range(m))
        points[bits] = (_level_from_bits(bits[0::2]), _level_from_bits(bits[1::2]))
    inverse = {point: bits for bits, point in points.items()}
    return points, inverse


def _check_bits(bit_group: Sequence[int], order: ModOrder) -> tuple:
    bits = tuple(int(b) for b in bit_group)
    if len(bits) != order.bits_per_symbol:
        raise ValueError(
            f"{order.label} needs {order.bits_per_symbol} bits, got {len(bits)}"
        )
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    return bits


def modulate(bit_group: Sequence[int], order: ModOrder | int) -> tuple[tuple[int, int], complex]:
    """Map one bit group to its lattice point and unit-power complex value."""
    order = ModOrder.parse(order)
    bits = _check_bits(bit_group, order)
    li, lq = _tables(order)[0][bits]
    return (li, lq), lattice_value((li, lq), order)


def lattice_value(point: tuple[int, int], order: ModOrder | int) -> complex:
    scale = normalization_scale(order)
    return complex(point[0] * scale, point[1] * scale)


def constellation(order: ModOrder | int) -> list[tuple[tuple[int, ...], tuple[int, int]]]:
    """All (bits, lattice point) pairs of ``order`` in bit-pattern order."""
    return list(_tables(ModOrder.parse(order))[0].items())


def nearest_level(x: float, levels: int) -> int:
    """Nearest odd lattice level in [-(levels-1), levels-1]; ties go to the smaller."""
    t = (x + levels - 1) / 2
    u = math.ceil(t - 0.5)
    u = min(max(u, 0), levels - 1)
    return 2 * u - (levels - 1)


def demodulate(value: complex, order: ModOrder | int) -> tuple[int, ...]:
    """Hard-decision nearest-point demapper."""
    order = ModOrder.parse(order)
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError("value must be finite")
    scale = normalization_scale(order)
    levels = order.levels_per_dimension
    point = (nearest_level(value.real / scale, levels), nearest_level(value.imag / scale, levels))
    return _tables(order)[1][point]


def is_lattice_point(point: tuple[int, int], order: ModOrder | int) -> bool:
    levels = ModOrder.parse(order).levels_per_dimension
    return all(
        isinstance(l, (int, np.integer)) and l % 2 == 1 and abs(l) <= levels - 1
        for l in point
    )


# --- PRB arithmetic --------------------------------------------------------


def prb_count(bandwidth: float, numerology: Numerology | int, overhead: float = 0.04) -> int:
    """Number of whole PRBs that fit the bandwidth after overhead."""
    num = _numerology(numerology)
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if not 0 <= overhead < 1:
        raise ValueError(f"overhead must be in [0, 1), got {overhead}")
    usable = bandwidth * (1 - overhead) / (num.subcarrier_spacing * SUBCARRIERS_PER_PRB)
    # guard against 532.9999999 from binary fractions like 0.96
    return int(math.floor(usable + 1e-9))


# --- fixed-point symbols and IQ files ---------------------------------------


def fixed_point_levels(order: ModOrder | int, amplitude: int = FIXED_POINT_AMPLITUDE) -> dict[int, int]:
    """Map each lattice level to its int16 amplitude."""
    order = ModOrder.parse(order)
    scale = normalization_scale(order) * amplitude
    levels = order.levels_per_dimension
    return {l: int(round(l * scale)) for l in range(-(levels - 1), levels, 2)}


def symbols_to_iq(points, orders, amplitude: int = FIXED_POINT_AMPLITUDE) -> np.ndarray:
    """Fixed-point (n, 2) int16 samples for lattice points of the given orders."""
    points = np.asarray(points, dtype=np.int64).reshape(-1, 2)
    orders = np.asarray([int(ModOrder.parse(o)) for o in orders], dtype=np.int64)
    out = np.empty(points.shape, dtype=np.int16)
    for order in ModOrder:
        sel = orders == int(order)
        if sel.any():
            scale = normalization_scale(order) * amplitude
            out[sel] = np.round(points[sel] * scale).astype(np.int16)
    return out


@lru_cache(maxsize=None)
def _amplitude_lookup(amplitude: int) -> dict[int, list[tuple[ModOrder, int]]]:
    lookup: dict[int, list[tuple[ModOrder, int]]] = {}
    for order in ModOrder:
        for level, value in fixed_point_levels(order, amplitude).items():
            lookup.setdefault(value, []).append((order, level))
    return lookup


def iq_to_symbols(iq: np.ndarray, amplitude: int = FIXED_POINT_AMPLITUDE):
    """Recover lattice points and orders from fixed-point constellation samples.

    Each sample gets the smallest order whose level set contains both its I
    and Q amplitude.  Raises ``ValueError`` naming the first sample that is
    not a constellation point.
    """
    iq = np.asarray(iq).reshape(-1, 2)
    lookup = _amplitude_lookup(amplitude)
    points = np.empty(iq.shape, dtype=np.int64)
    orders = np.empty(len(iq), dtype=np.int64)
    for n, (i, q) in enumerate(iq.tolist()):
        found = None
        for order_i, level_i in lookup.get(i, ()):
            for order_q, level_q in lookup.get(q, ()):
                if order_i == order_q:
                    found = (order_i, level_i, level_q)
                    break
            if found:
                break
        if found is None:
            raise ValueError(f"sample {n} ({i}, {q}) is not a constellation point")
        orders[n] = int(found[0])
        points[n] = found[1:]
    return points, orders


def read_iq(source: "str | Path | bytes") -> np.ndarray:
    """Little-endian interleaved int16 I/Q, no header -> (n, 2) int16 array."""
    data = source if isinstance(source, (bytes, bytearray)) else Path(source).read_bytes()
    if len(data) % 4:
        raise ValueError(
            f"IQ data length {len(data)} is not a multiple of 4 bytes "
            f"(trailing bytes start at offset {len(data) - len(data) % 4})"
        )
    return np.frombuffer(bytes(data), dtype="<i2").reshape(-1, 2).astype(np.int16)


def iq_bytes(samples: np.ndarray) -> bytes:
    arr = np.asarray(samples).reshape(-1, 2)
    if arr.size and (arr.min() < SAMPLE_MIN or arr.max() > SAMPLE_MAX):
        raise ValueError("sample outside 16-bit range")
    return arr.astype("<i2").tobytes()


def iter_prbs(samples: np.ndarray) -> Iterator[tuple[PrbBlock, int]]:
    """Split (n, 2) samples into PRBs; the last one is zero padded.

    Yields (block, valid_sample_count).
    """
    samples = np.asarray(samples).reshape(-1, 2)
    for start in range(0, len(samples), SUBCARRIERS_PER_PRB):
        chunk = samples[start:start + SUBCARRIERS_PER_PRB]
        n = len(chunk)
        if n < SUBCARRIERS_PER_PRB:
            chunk = np.vstack([chunk, np.zeros((SUBCARRIERS_PER_PRB - n, 2), dtype=chunk.dtype)])
        yield PrbBlock(chunk.astype(np.int32)), n
