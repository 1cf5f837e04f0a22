"""Beamspace compression of beamforming weight vectors.

Weights are moved to beamspace with the unitary DFT, weak beams are
switched off, and the surviving coefficients are block scaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bits import from_bits, to_bits
from .block import BlockScalingConfig


@dataclass(frozen=True)
class BeamspaceConfig:
    threshold: float = 0.0
    # None keeps active coefficients unquantized
    inner: BlockScalingConfig | None = field(default_factory=BlockScalingConfig)
    full_scale: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if not self.full_scale > 0:
            raise ValueError("full_scale must be positive")

    @property
    def scaler_step(self) -> float:
        inner = self.inner
        return self.full_scale / (inner.max_value * ((1 << inner.scaler_bits) - 1))


@dataclass(frozen=True, eq=False)
class CompressedBeamVector:
    length: int
    active: np.ndarray  # bool mask over beamspace bins
    scaler_code: int
    values: np.ndarray  # (n_active, 2) ints, or complex when unquantized

    def payload_bits(self, cfg: BeamspaceConfig) -> np.ndarray:
        """Bitmap, then scaler, then I/Q of each active coefficient."""
        if cfg.inner is None:
            raise ValueError("unquantized beamspace vectors have no bit format")
        parts = [
            self.active.astype(np.uint8),
            to_bits([self.scaler_code], cfg.inner.scaler_bits),
            to_bits(self.values.reshape(-1), cfg.inner.value_bits, signed=True),
        ]
        return np.concatenate(parts)

    @classmethod
    def from_bits(cls, bits, length: int, cfg: BeamspaceConfig) -> "CompressedBeamVector":
        bits = np.asarray(bits, dtype=np.uint8)
        active = bits[:length].astype(bool)
        sb, vb = cfg.inner.scaler_bits, cfg.inner.value_bits
        code = int(from_bits(bits[length:length + sb], sb)[0])
        n = int(active.sum())
        body = bits[length + sb:length + sb + 2 * n * vb]
        values = from_bits(body, vb, signed=True).reshape(n, 2)
        return cls(length, active, code, values)


def _check_length(n: int):
    if n < 1 or n & (n - 1):
        raise ValueError(f"weight vector length must be a power of two, got {n}")


def to_beamspace(weights) -> np.ndarray:
    return np.fft.fft(np.asarray(weights, dtype=complex), norm="ortho")


def from_beamspace(coefficients) -> np.ndarray:
    return np.fft.ifft(np.asarray(coefficients, dtype=complex), norm="ortho")


def beamspace_compress(weights, cfg: BeamspaceConfig = BeamspaceConfig()) -> CompressedBeamVector:
    weights = np.asarray(weights, dtype=complex).reshape(-1)
    _check_length(weights.size)
    coeffs = to_beamspace(weights)
    mags = np.abs(coeffs)
    peak = mags.max()
    active = mags >= cfg.threshold * peak if peak > 0 else np.ones(weights.size, dtype=bool)
    kept = coeffs[active]
    if cfg.inner is None:
        return CompressedBeamVector(weights.size, active, 0, kept.copy())

    parts = np.stack([kept.real, kept.imag], axis=1)
    comp_peak = np.abs(parts).max(initial=0.0)
    step = cfg.scaler_step
    qmax = cfg.inner.max_value
    code = max(1, math.ceil(comp_peak / (qmax * step) - 1e-12))
    if code >= 1 << cfg.inner.scaler_bits:
        raise ValueError(
            f"beamspace coefficient {comp_peak:.4g} exceeds full scale {cfg.full_scale}"
        )
    scaler = code * step
    values = np.clip(np.sign(parts) * np.floor(np.abs(parts) / scaler + 0.5), -qmax, qmax)
    return CompressedBeamVector(weights.size, active, code, values.astype(np.int64))


def beamspace_coefficients(c: CompressedBeamVector, cfg: BeamspaceConfig = BeamspaceConfig()) -> np.ndarray:
    """Dequantized beamspace vector with inactive bins zero filled."""
    out = np.zeros(c.length, dtype=complex)
    if cfg.inner is None:
        out[c.active] = c.values
    else:
        scaler = c.scaler_code * cfg.scaler_step
        out[c.active] = (c.values[:, 0] + 1j * c.values[:, 1]) * scaler
    return out


def beamspace_decompress(c: CompressedBeamVector, cfg: BeamspaceConfig = BeamspaceConfig()) -> np.ndarray:
    _check_length(c.length)
    return from_beamspace(beamspace_coefficients(c, cfg))
