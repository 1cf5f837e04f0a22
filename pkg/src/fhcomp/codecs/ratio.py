from __future__ import annotations

import warnings

from ..iq_core import SUBCARRIERS_PER_PRB, UNCOMPRESSED_BITWIDTH, ModOrder
from .block import BfpConfig, BlockScalingConfig, Method, MuLawConfig

UNCOMPRESSED_PRB_BITS = SUBCARRIERS_PER_PRB * UNCOMPRESSED_BITWIDTH


def block_ratio(value_bits: int, shared_bits: int) -> float:
    """(12 * 2 * value_bits + shared_bits) / (12 * 32).

    Ratios above 1 mean the "compressed" block is larger than the input;
    they are returned with a warning rather than rejected.
    """
    ratio = (2 * SUBCARRIERS_PER_PRB * value_bits + shared_bits) / UNCOMPRESSED_PRB_BITS
    if ratio > 1:
        warnings.warn(f"configuration expands data (ratio {ratio:.4f})", stacklevel=2)
    return ratio


def compression_ratio(method: Method | str, cfg=None) -> float:
    """Compressed over uncompressed size for one PRB (block methods) or symbol."""
    method = Method.parse(method)
    if method is Method.MODULATION:
        order = ModOrder.parse(cfg if cfg is not None else ModOrder.QAM256)
        return order.bits_per_symbol / UNCOMPRESSED_BITWIDTH
    defaults = {Method.BFP: BfpConfig, Method.BLOCK_SCALING: BlockScalingConfig,
                Method.MU_LAW: MuLawConfig}
    if method not in defaults:
        raise ValueError(f"no fixed compression ratio for {method.name}")
    cfg = cfg if cfg is not None else defaults[method]()
    return block_ratio(cfg.value_bits, cfg.shared_bits)
