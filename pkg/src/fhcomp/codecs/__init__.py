"""Fronthaul IQ compression methods."""

from .beamspace import (
    BeamspaceConfig,
    CompressedBeamVector,
    beamspace_compress,
    beamspace_decompress,
)
from .block import (
    BfpConfig,
    BlockScalingConfig,
    CompressedPrb,
    Method,
    MuLawConfig,
    bfp_compress,
    bfp_decompress,
    block_scaling_compress,
    block_scaling_decompress,
    mulaw_compress,
    mulaw_decompress,
)
from .container import BlockFormatError, CodecReport, compress_iq, decompress_iq
from .modcomp import CorruptBlockError, ModCompBlock, modcomp_compress, modcomp_decompress
from .ratio import block_ratio, compression_ratio

__all__ = [
    "BeamspaceConfig", "BfpConfig", "BlockFormatError", "BlockScalingConfig",
    "CodecReport", "CompressedBeamVector", "CompressedPrb", "CorruptBlockError",
    "Method", "ModCompBlock", "MuLawConfig",
    "beamspace_compress", "beamspace_decompress", "bfp_compress", "bfp_decompress",
    "block_ratio", "block_scaling_compress", "block_scaling_decompress",
    "compress_iq", "compression_ratio", "decompress_iq",
    "modcomp_compress", "modcomp_decompress", "mulaw_compress", "mulaw_decompress",
]
