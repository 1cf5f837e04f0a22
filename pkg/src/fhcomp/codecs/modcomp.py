"""Lossless modulation compression of DL constellation symbols.

Each lattice level ``l`` of a symbol with ``L`` levels per dimension is
shifted to the index ``u = (l + L - 1) / 2`` and sent in ``W/2`` bits per
dimension, where ``W`` is the bits per symbol of the largest constellation
in the block.  Smaller constellations then occupy the low corner of the big
index grid, so one ``W``-bit word serves every order in the block.  The
per-symbol orders travel in the block header; the receiver uses them to undo
the shift and to pick the unit-power scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..iq_core import ModOrder, normalization_scale
from .bits import from_bits, to_bits


class CorruptBlockError(ValueError):
    """Payload and order metadata of a modulation-compressed block disagree."""


@dataclass(frozen=True, eq=False)
class ModCompBlock:
    max_order: ModOrder
    per_symbol_orders: np.ndarray  # bits per symbol of each symbol
    payload: np.ndarray  # uint8 bit array

    @property
    def bitwidth(self) -> int:
        return self.max_order.bits_per_symbol

    @property
    def symbol_count(self) -> int:
        return len(self.per_symbol_orders)

    def __eq__(self, other):
        if not isinstance(other, ModCompBlock):
            return NotImplemented
        return (
            self.max_order == other.max_order
            and np.array_equal(self.per_symbol_orders, other.per_symbol_orders)
            and np.array_equal(self.payload, other.payload)
        )

    def order_metadata_bits(self) -> np.ndarray:
        """Two bits per symbol: 0=QPSK, 1=16QAM, 2=64QAM, 3=256QAM."""
        return to_bits(self.per_symbol_orders // 2 - 1, 2)


class DecompressedSymbols(NamedTuple):
    points: np.ndarray  # (n, 2) odd lattice levels
    values: np.ndarray  # (n,) unit-power complex values
    orders: np.ndarray  # (n,) bits per symbol


def _levels(orders: np.ndarray) -> np.ndarray:
    return np.left_shift(1, orders // 2)


def _split_symbols(symbols, orders):
    if orders is None:
        symbols = list(symbols)
        points = np.array([p for p, _ in symbols], dtype=np.int64).reshape(-1, 2)
        orders = [o for _, o in symbols]
    else:
        points = np.asarray(symbols, dtype=np.int64).reshape(-1, 2)
    if isinstance(orders, np.ndarray) and np.issubdtype(orders.dtype, np.integer):
        orders = orders.astype(np.int64)
        bad = ~np.isin(orders, [2, 4, 6, 8])
        if bad.any():
            raise ValueError(f"invalid modulation order {orders[bad][0]}")
    else:
        orders = np.array([int(ModOrder.parse(o)) for o in orders], dtype=np.int64)
    if len(orders) != len(points):
        raise ValueError(f"{len(points)} points but {len(orders)} orders")
    return points, orders


def modcomp_compress(symbols, orders=None) -> ModCompBlock:
    """Compress lattice points with their modulation orders.

    ``symbols`` is either a sequence of ``((li, lq), order)`` pairs, or an
    (n, 2) array of lattice levels when ``orders`` is given separately.
    """
    points, orders = _split_symbols(symbols, orders)
    if len(points) == 0:
        raise ValueError("cannot compress an empty block")
    levels = _levels(orders)[:, None]
    valid = (points % 2 == 1) & (np.abs(points) <= levels - 1)
    if not valid.all():
        n = int(np.flatnonzero(~valid.all(axis=1))[0])
        raise ValueError(
            f"symbol {n}: {tuple(points[n])} is not a {ModOrder(orders[n]).label} lattice point"
        )
    max_order = ModOrder(int(orders.max()))
    indices = (points + levels - 1) // 2
    payload = to_bits(indices.reshape(-1), max_order.bits_per_symbol // 2)
    return ModCompBlock(max_order, orders, payload)


def modcomp_decompress(block: ModCompBlock) -> DecompressedSymbols:
    orders = np.asarray(block.per_symbol_orders, dtype=np.int64)
    width = block.bitwidth
    if block.payload.size != orders.size * width:
        raise CorruptBlockError(
            f"payload has {block.payload.size} bits for {orders.size} symbols at W={width}"
        )
    if orders.size and (orders.max() > width or not np.isin(orders, [2, 4, 6, 8]).all()):
        raise CorruptBlockError("symbol order exceeds the block bitwidth or is invalid")
    indices = from_bits(block.payload, width // 2).reshape(-1, 2)
    levels = _levels(orders)[:, None]
    if (indices >= levels).any():
        raise CorruptBlockError("shifted index outside its constellation")
    points = 2 * indices - (levels - 1)
    scales = np.array([normalization_scale(o) for o in (2, 4, 6, 8)])[orders // 2 - 1]
    values = (points[:, 0] * scales) + 1j * (points[:, 1] * scales)
    return DecompressedSymbols(points, values, orders)


def modcomp_from_bits(payload, order_bits, symbol_count: int, max_order: ModOrder | int) -> ModCompBlock:
    """Rebuild a block from its serialized order metadata and payload bits."""
    max_order = ModOrder.parse(max_order)
    orders = (from_bits(order_bits[: 2 * symbol_count], 2) + 1) * 2
    payload = np.asarray(payload, dtype=np.uint8)[: symbol_count * max_order.bits_per_symbol]
    return ModCompBlock(max_order, orders.astype(np.int64), payload)
