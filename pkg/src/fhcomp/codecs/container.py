"""Compressed-block file format.

A file is a plain concatenation of blocks.  Every block is::

    byte 0      method tag (1 BFP, 2 block scaling, 3 mu-law, 5 modulation)
    byte 1      config id
    bytes 2-3   symbol count, big endian
    ...         shared parameter, ceil(shared_bits / 8) bytes (block methods)
    ...         order metadata, ceil(2 * count / 8) bytes (modulation only)
    ...         payload bits, MSB first, zero padded to a byte boundary

For block methods the config id is ``(value_bits - 1) << 3 | (shared_bits - 1)``,
the symbol count is the number of valid samples (12, or fewer for a padded
final PRB) and the payload always holds a full PRB.  For modulation
compression the config id is the block bitwidth ``W`` and the payload holds
``count * W`` bits.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ..iq_core import SUBCARRIERS_PER_PRB, UNCOMPRESSED_BITWIDTH, iq_to_symbols, iter_prbs, symbols_to_iq
from .bits import bits_to_bytes, bytes_to_bits, from_bits, to_bits
from .block import (
    COMPONENTS_PER_PRB,
    COMPRESSORS,
    BfpConfig,
    BlockScalingConfig,
    CompressedPrb,
    Method,
    MuLawConfig,
)
from .modcomp import ModCompBlock, modcomp_compress, modcomp_decompress, modcomp_from_bits

HEADER = struct.Struct(">BBH")
MODCOMP_BLOCK_SYMBOLS = SUBCARRIERS_PER_PRB


class BlockFormatError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


@dataclass
class CodecReport:
    samples: int = 0
    blocks: int = 0
    # bits the codec itself produces: payload plus shared parameters
    compressed_bits: int = 0
    file_bytes: int = 0
    config: dict = field(default_factory=dict)

    @property
    def uncompressed_bits(self) -> int:
        return self.samples * UNCOMPRESSED_BITWIDTH

    @property
    def ratio(self) -> float | None:
        if self.samples == 0:
            return None
        return self.compressed_bits / self.uncompressed_bits


def _nbytes(bits: int) -> int:
    return (bits + 7) // 8


def config_id(value_bits: int, shared_bits: int) -> int:
    return ((value_bits - 1) << 3) | (shared_bits - 1)


def split_config_id(cid: int) -> tuple[int, int]:
    return (cid >> 3) + 1, (cid & 7) + 1


def encode_prb_block(c: CompressedPrb, count: int = SUBCARRIERS_PER_PRB) -> bytes:
    header = HEADER.pack(int(c.method), config_id(c.value_bits, c.shared_bits), count)
    shared = bits_to_bytes(to_bits([c.shared_param], 8 * _nbytes(c.shared_bits)))
    return header + shared + bits_to_bytes(c.payload)


def encode_modcomp_block(b: ModCompBlock) -> bytes:
    header = HEADER.pack(int(Method.MODULATION), b.bitwidth, b.symbol_count)
    return header + bits_to_bytes(b.order_metadata_bits()) + bits_to_bytes(b.payload)


def _config_for(method: Method, value_bits: int, shared_bits: int, shared: int, base):
    if method is Method.BFP:
        return BfpConfig(value_bits, shared_bits)
    if method is Method.BLOCK_SCALING:
        return BlockScalingConfig(value_bits, shared_bits)
    mu = base.mu if isinstance(base, MuLawConfig) else MuLawConfig().mu
    return MuLawConfig(value_bits, mu, shift_bits=shared, shift_field_bits=shared_bits)


def iter_blocks(data: bytes):
    """Yield (offset, block, count) for every block in a compressed file."""
    data = bytes(data)
    pos = 0
    while pos < len(data):
        start = pos
        if len(data) - pos < HEADER.size:
            raise BlockFormatError("truncated block header", start)
        tag, cid, count = HEADER.unpack_from(data, pos)
        pos += HEADER.size
        try:
            method = Method(tag)
        except ValueError:
            raise BlockFormatError(f"unknown method tag {tag}", start) from None
        if method is Method.MODULATION:
            if cid not in (2, 4, 6, 8):
                raise BlockFormatError(f"invalid bitwidth {cid}", start + 1)
            meta_len, body_len = _nbytes(2 * count), _nbytes(count * cid)
            if len(data) - pos < meta_len + body_len:
                raise BlockFormatError("truncated modulation block", start)
            meta = bytes_to_bits(data[pos:pos + meta_len], 2 * count)
            pos += meta_len
            payload = bytes_to_bits(data[pos:pos + body_len], count * cid)
            pos += body_len
            yield start, modcomp_from_bits(payload, meta, count, cid), count
        elif method in COMPRESSORS:
            value_bits, shared_bits = split_config_id(cid)
            if count > SUBCARRIERS_PER_PRB:
                raise BlockFormatError(f"PRB block claims {count} samples", start + 2)
            shared_len = _nbytes(shared_bits)
            body_len = _nbytes(COMPONENTS_PER_PRB * value_bits)
            if len(data) - pos < shared_len + body_len:
                raise BlockFormatError("truncated PRB block", start)
            shared = int(from_bits(bytes_to_bits(data[pos:pos + shared_len], 8 * shared_len), 8 * shared_len)[0])
            pos += shared_len
            payload = bytes_to_bits(data[pos:pos + body_len], COMPONENTS_PER_PRB * value_bits)
            pos += body_len
            try:
                block = CompressedPrb(method, shared, payload, value_bits, shared_bits)
            except ValueError as exc:
                raise BlockFormatError(str(exc), start) from None
            yield start, block, count
        else:
            raise BlockFormatError(f"method {method.name} is not a sample codec", start)


def compress_iq(samples: np.ndarray, method: Method | str, cfg=None) -> tuple[bytes, CodecReport]:
    """Compress (n, 2) int16 samples into the block file format."""
    method = Method.parse(method)
    samples = np.asarray(samples).reshape(-1, 2)
    report = CodecReport(samples=len(samples))
    out = bytearray()
    if method is Method.MODULATION:
        points, orders = iq_to_symbols(samples)
        for start in range(0, len(points), MODCOMP_BLOCK_SYMBOLS):
            stop = start + MODCOMP_BLOCK_SYMBOLS
            block = modcomp_compress(points[start:stop], orders[start:stop])
            out += encode_modcomp_block(block)
            report.blocks += 1
            report.compressed_bits += block.payload.size
    elif method in COMPRESSORS:
        compress, _, default_cfg = COMPRESSORS[method]
        cfg = cfg if cfg is not None else default_cfg()
        for block, count in iter_prbs(samples):
            c = compress(block, cfg)
            out += encode_prb_block(c, count)
            report.blocks += 1
            report.compressed_bits += c.total_bits
    else:
        raise ValueError(f"{method.name} does not compress IQ samples")
    report.file_bytes = len(out)
    return bytes(out), report


def decompress_iq(data: bytes, cfg=None) -> tuple[np.ndarray, CodecReport]:
    """Inverse of :func:`compress_iq`; the method is read from each block."""
    report = CodecReport(file_bytes=len(data))
    chunks = []
    for offset, block, count in iter_blocks(data):
        report.blocks += 1
        report.samples += count
        if isinstance(block, ModCompBlock):
            try:
                symbols = modcomp_decompress(block)
            except ValueError as exc:
                raise BlockFormatError(str(exc), offset) from None
            chunks.append(symbols_to_iq(symbols.points, symbols.orders))
            report.compressed_bits += block.payload.size
        else:
            _, decompress, _ = COMPRESSORS[block.method]
            block_cfg = _config_for(block.method, block.value_bits, block.shared_bits,
                                    block.shared_param, cfg)
            prb = decompress(block, block_cfg)
            chunks.append(prb.samples[:count].astype(np.int16))
            report.compressed_bits += block.total_bits
    samples = np.vstack(chunks) if chunks else np.zeros((0, 2), dtype=np.int16)
    return samples, report
