"""MSB-first fixed-width bit packing on numpy bit arrays."""

from __future__ import annotations

import numpy as np


def to_bits(values, width: int, signed: bool = False) -> np.ndarray:
    """Concatenate ``width``-bit fields, most significant bit first.

    Signed values are written in two's complement.  Raises ``OverflowError``
    if any value does not fit.
    """
    values = np.asarray(values, dtype=np.int64).reshape(-1)
    if width == 0:
        if values.size and np.any(values):
            raise OverflowError("non-zero value in a zero-width field")
        return np.zeros(0, dtype=np.uint8)
    lo, hi = (-(1 << (width - 1)), (1 << (width - 1)) - 1) if signed else (0, (1 << width) - 1)
    if values.size and (values.min() < lo or values.max() > hi):
        kind = "signed" if signed else "unsigned"
        raise OverflowError(f"value outside {width}-bit {kind} range [{lo}, {hi}]")
    raw = values & ((1 << width) - 1)
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((raw[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def from_bits(bits, width: int, signed: bool = False) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    if width == 0:
        return np.zeros(0, dtype=np.int64)
    if bits.size % width:
        raise ValueError(f"{bits.size} bits is not a multiple of field width {width}")
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    raw = bits.reshape(-1, width) @ weights
    if signed:
        raw = np.where(raw >= 1 << (width - 1), raw - (1 << width), raw)
    return raw


def bits_to_bytes(bits) -> bytes:
    """Pack bits MSB first, zero padding the final byte."""
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def bytes_to_bits(data: bytes, nbits: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))
    if bits.size < nbits:
        raise ValueError(f"need {nbits} bits, only {bits.size} available")
    return bits[:nbits]
