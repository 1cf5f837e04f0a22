"""Slot-level downlink engine and KPI collection.

Each UE receives a CBR packet stream.  Per slot and cell, pending HARQ
retransmissions are served first, then the remaining PRBs are shared
round-robin among UEs with new data: an equal share each, with PRBs a UE
cannot use handed on to the others.  Transport blocks carry a contiguous
byte range of the UE's stream.  Decoding outcomes are drawn from the BLER
curve at the SINR of the slot; the k-th transmission of a block gains
10*log10(k) dB from incremental redundancy.  Bytes are released to the IP
layer strictly in order, so packets behind a block still in HARQ wait for
it (reordering delay).  A block that fails its last transmission loses the
packets it touches.

Link adaptation sees the SINR with every co-subband interferer fully
loaded; the decoding draw uses the actual interference, i.e. each
interferer's PRB occupancy in the previous slot.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..capacity import modcomp_capacity, scenario_fronthaul_capacity
from ..iq_core import SUBCARRIERS_PER_PRB, SYMBOLS_PER_SLOT, UNCOMPRESSED_BITWIDTH, prb_count
from .config import ScenarioConfig
from .mcs import MCS_TABLE2, BLER_TARGET, BlerModel, McsEntry, transport_block_size
from .scenario import Scenario, build_scenario


class TransportBlock:
    __slots__ = ("ue", "start", "end", "n_prb", "mcs", "tx", "due", "state")

    PENDING, OK, LOST = 0, 1, 2

    def __init__(self, ue, start, end, n_prb, mcs, due):
        self.ue = ue
        self.start = start
        self.end = end
        self.n_prb = n_prb
        self.mcs = mcs
        self.tx = 0
        self.due = due
        self.state = TransportBlock.PENDING


@dataclass(frozen=True)
class Allocation:
    cell: int
    ue: int
    n_prb: int
    mcs: int
    transmission: int
    success: bool
    bytes: int
    offset: int  # first byte of the block in the UE's stream


@dataclass
class SlotEvents:
    slot: int
    time: float
    allocations: list[Allocation] = field(default_factory=list)


@dataclass
class SlotLog:
    """Per-slot, per-cell PRB usage and largest scheduled modulation."""

    slot_duration: float
    n_prb: int
    prbs: np.ndarray      # (slots, cells) allocated PRBs
    max_qm: np.ndarray    # (slots, cells) bits per symbol, 0 if idle


@dataclass
class KpiReport:
    mean_e2e_throughput: float         # bit/s per UE
    median_e2e_delay: float            # s
    delivered_ratio: float
    offered_bytes: int
    delivered_bytes: int
    dropped_bytes: int
    in_flight_bytes: int
    fronthaul_requirement: int         # bit/s, all RUs, W = bits/symbol of the cap
    fronthaul_requirement_uncompressed: int  # same with W = 32
    fronthaul_utilization_trace: np.ndarray  # bit/s per 1 ms window
    packet_delays: np.ndarray          # s, every delivered packet
    config: dict

    @property
    def fronthaul_utilization_mean(self) -> float:
        trace = self.fronthaul_utilization_trace
        return float(trace.mean()) if trace.size else 0.0

    @property
    def saturated(self) -> bool:
        return self.offered_bytes > 0 and self.delivered_ratio < 0.95

    def summary(self) -> dict:
        return {
            "mean_e2e_throughput": self.mean_e2e_throughput,
            "median_e2e_delay": self.median_e2e_delay,
            "delivered_ratio": self.delivered_ratio,
            "offered_bytes": self.offered_bytes,
            "delivered_bytes": self.delivered_bytes,
            "dropped_bytes": self.dropped_bytes,
            "in_flight_bytes": self.in_flight_bytes,
            "fronthaul_requirement": self.fronthaul_requirement,
            "fronthaul_requirement_uncompressed": self.fronthaul_requirement_uncompressed,
            "fronthaul_utilization_mean": self.fronthaul_utilization_mean,
        }


def static_fronthaul_requirement(cfg: ScenarioConfig, bitwidth: int | None = None) -> int:
    w = int(cfg.mod_cap) if bitwidth is None else bitwidth
    per_ru = modcomp_capacity(cfg.subband_bandwidth, cfg.num, cfg.overhead, cfg.layers, w)
    return scenario_fronthaul_capacity(cfg.n_cells, per_ru)


class _UeStream:
    """Packet arrivals and in-order delivery bookkeeping of one UE."""

    __slots__ = ("offset", "interval", "n_packets", "size", "sent", "frontier",
                 "next_packet", "blocks", "delays", "lost")

    def __init__(self, offset, interval, n_packets, size):
        self.offset = offset
        self.interval = interval
        self.n_packets = n_packets
        self.size = size
        self.sent = 0           # bytes handed to transport blocks
        self.frontier = 0       # bytes resolved in order
        self.next_packet = 0    # first packet not yet resolved
        self.blocks = deque()
        self.delays = np.full(n_packets, np.nan)
        self.lost = np.zeros(n_packets, dtype=bool)

    def arrival(self, k):
        return self.offset + k * self.interval

    def arrived_bytes(self, t: float) -> int:
        if self.n_packets == 0 or t < self.offset:
            return 0
        k = int(math.floor((t - self.offset) / self.interval + 1e-9)) + 1
        return min(k, self.n_packets) * self.size

    def resolve(self, now: float):
        """Release every packet completed by blocks resolved at the head."""
        blocks = self.blocks
        while blocks and blocks[0].state != TransportBlock.PENDING:
            tb = blocks.popleft()
            if tb.state == TransportBlock.LOST:
                first = tb.start // self.size
                last = (tb.end - 1) // self.size
                self.lost[first:last + 1] = True
            self.frontier = tb.end
        done = self.frontier // self.size
        if done > self.next_packet:
            k = np.arange(self.next_packet, done)
            ok = ~self.lost[k]
            self.delays[k[ok]] = now - (self.offset + k[ok] * self.interval)
            self.next_packet = done


class Simulator:
    def __init__(self, cfg: ScenarioConfig, scenario: Scenario | None = None):
        self.cfg = cfg
        self.scenario = scenario if scenario is not None else build_scenario(cfg)
        sc = self.scenario
        self.num = cfg.num
        self.slot_duration = self.num.slot_duration
        self.n_prb = prb_count(cfg.subband_bandwidth, self.num, cfg.overhead)
        self.model = BlerModel(cfg.bler_gap_db, cfg.bler_slope_per_db)
        self.allowed = [e for e in MCS_TABLE2 if e.mod_order <= cfg.mod_cap]
        self.thresholds = np.array([self.model.required_sinr_db(e, BLER_TARGET) for e in self.allowed])

        *_, traffic_seed = np.random.SeedSequence(cfg.rng_seed).spawn(4)
        traffic_rng, self.harq_rng = (np.random.default_rng(s) for s in traffic_seed.spawn(2))
        self.streams = []
        for _ in range(sc.n_ues):
            if cfg.offered_load_per_ue > 0:
                interval = cfg.packet_size * 8 / cfg.offered_load_per_ue
                offset = traffic_rng.uniform(0, interval)
                n = max(0, math.ceil((cfg.sim_duration - offset) / interval - 1e-9))
            else:
                interval, offset, n = math.inf, 0.0, 0
            self.streams.append(_UeStream(offset, interval, n, cfg.packet_size))

        self.cell_ues = [np.flatnonzero(sc.ue_cell == c).tolist() for c in range(sc.n_cells)]
        self.retx: list[list[TransportBlock]] = [[] for _ in range(sc.n_cells)]
        self.rr_pointer = [0] * sc.n_cells
        self.activity = np.zeros(sc.n_cells)
        self.mask = sc.interferer_mask
        self.slot = 0
        self.n_slots = round(cfg.sim_duration / self.slot_duration)
        self.n_drain = round(cfg.drain_duration / self.slot_duration)
        self.prbs_log = np.zeros((self.n_slots + self.n_drain, sc.n_cells), dtype=np.int64)
        self.qm_log = np.zeros_like(self.prbs_log)
        self._period = None

    # --- channel ---------------------------------------------------------------

    def _channel(self, slot: int):
        period = self.scenario.period(slot)
        if period != self._period:
            sc = self.scenario
            rx = sc.received_mw(period)
            self._signal = rx[np.arange(sc.n_ues), sc.ue_cell]
            self._interf = np.where(self.mask, rx, 0.0)
            full = self._interf.sum(axis=1)
            est = 10 * np.log10(self._signal / (sc.noise_mw + full))
            # highest allowed MCS index reaching the BLER target, else the lowest
            idx = np.searchsorted(self.thresholds, est, side="right") - 1
            self._mcs = np.maximum(idx, 0)
            self._period = period

    def link_mcs(self, ue: int) -> McsEntry:
        self._channel(self.slot)
        return self.allowed[self._mcs[ue]]

    def _block_error(self, tb: TransportBlock, sinr_db: float) -> bool:
        p = self.cfg.bler_override
        if p is None:
            p = self.model.bler(sinr_db + 10 * math.log10(tb.tx), self.allowed[tb.mcs])
        return self.harq_rng.random() < p

    # --- scheduling --------------------------------------------------------------

    def _share(self, needs: dict[int, int], free: int, start: int) -> dict[int, int]:
        """Round-robin equal split of ``free`` PRBs, capped at each UE's need."""
        grant = {u: 0 for u in needs}
        open_ues = [u for u in needs if needs[u] > 0]
        while free > 0 and open_ues:
            share, extra = divmod(free, len(open_ues))
            order = open_ues[start % len(open_ues):] + open_ues[:start % len(open_ues)]
            given = 0
            for rank, u in enumerate(order):
                want = share + (1 if rank < extra else 0)
                take = min(want, needs[u] - grant[u])
                grant[u] += take
                given += take
            free -= given
            open_ues = [u for u in open_ues if grant[u] < needs[u]]
            if given == 0:
                break
        return grant

    def step(self) -> SlotEvents:
        cfg = self.cfg
        slot = self.slot
        t0 = slot * self.slot_duration
        t_end = t0 + self.slot_duration
        events = SlotEvents(slot, t0)
        self._channel(slot)
        interference = self._interf @ self.activity
        actual = 10 * np.log10(self._signal / (self.scenario.noise_mw + interference))

        dl_slot = cfg.dl_fraction >= 1 or (slot % 10) < round(cfg.dl_fraction * 10)
        used = np.zeros(self.scenario.n_cells, dtype=np.int64)
        touched = set()
        if dl_slot:
            for cell in range(self.scenario.n_cells):
                used[cell] = self._schedule_cell(cell, slot, t0, actual, events, touched)

        for ue in touched:
            self.streams[ue].resolve(t_end)
        self.activity = used / self.n_prb
        if slot < len(self.prbs_log):
            self.prbs_log[slot] = used
        self.slot += 1
        return events

    def _transmit(self, tb: TransportBlock, cell: int, slot: int, actual, events, touched):
        tb.tx += 1
        failed = self._block_error(tb, actual[tb.ue])
        if not failed:
            tb.state = TransportBlock.OK
        elif tb.tx >= self.cfg.harq_max_transmissions:
            tb.state = TransportBlock.LOST
        else:
            tb.due = slot + max(1, self.cfg.harq_retx_delay_slots)
            self.retx[cell].append(tb)
        if tb.state != TransportBlock.PENDING:
            touched.add(tb.ue)
        qm = int(self.allowed[tb.mcs].mod_order)
        if slot < len(self.qm_log) and qm > self.qm_log[slot, cell]:
            self.qm_log[slot, cell] = qm
        events.allocations.append(
            Allocation(cell, tb.ue, tb.n_prb, self.allowed[tb.mcs].index, tb.tx, not failed,
                       tb.end - tb.start, tb.start))

    def _schedule_cell(self, cell, slot, t0, actual, events, touched) -> int:
        free = self.n_prb
        pending = self.retx[cell]
        if pending:
            due = sorted((tb for tb in pending if tb.due <= slot), key=lambda b: (b.due, b.ue, b.start))
            # blocks failing again in this slot are appended by _transmit
            self.retx[cell] = [tb for tb in pending if tb.due > slot]
            for tb in due:
                if tb.n_prb <= free:
                    free -= tb.n_prb
                    self._transmit(tb, cell, slot, actual, events, touched)
                else:
                    self.retx[cell].append(tb)

        if free > 0:
            needs = {}
            pending_bytes = {}
            for ue in self.cell_ues[cell]:
                stream = self.streams[ue]
                backlog = stream.arrived_bytes(t0) - stream.sent
                if backlog <= 0:
                    continue
                entry = self.allowed[self._mcs[ue]]
                bits_per_prb = 12 * 13 * int(entry.mod_order) * entry.code_rate * self.cfg.layers
                needs[ue] = max(1, math.ceil(backlog * 8 / bits_per_prb - 1e-9))
                pending_bytes[ue] = backlog
            if needs:
                grant = self._share(needs, free, self.rr_pointer[cell])
                self.rr_pointer[cell] += 1
                for ue in self.cell_ues[cell]:
                    n = grant.get(ue, 0)
                    if n <= 0:
                        continue
                    stream = self.streams[ue]
                    mcs = int(self._mcs[ue])
                    tbs = transport_block_size(self.allowed[mcs], n, self.cfg.layers)
                    nbytes = min(pending_bytes[ue], tbs // 8)
                    if nbytes <= 0:
                        continue
                    tb = TransportBlock(ue, stream.sent, stream.sent + nbytes, n, mcs, slot)
                    stream.sent += nbytes
                    stream.blocks.append(tb)
                    free -= n
                    self._transmit(tb, cell, slot, actual, events, touched)
        return self.n_prb - free

    # --- results -------------------------------------------------------------------

    def slot_log(self) -> SlotLog:
        n = min(self.slot, self.n_slots)
        return SlotLog(self.slot_duration, self.n_prb, self.prbs_log[:n].copy(), self.qm_log[:n].copy())

    def report(self) -> KpiReport:
        cfg = self.cfg
        size = cfg.packet_size
        offered = delivered = dropped = 0
        per_ue = []
        delays = []
        for s in self.streams:
            ok = ~np.isnan(s.delays)
            n_ok = int(ok.sum())
            n_lost = int(s.lost.sum())
            offered += s.n_packets * size
            delivered += n_ok * size
            dropped += n_lost * size
            per_ue.append(n_ok * size * 8 / cfg.sim_duration)
            delays.append(s.delays[ok])
        all_delays = np.concatenate(delays) if delays else np.zeros(0)
        return KpiReport(
            mean_e2e_throughput=float(np.mean(per_ue)) if per_ue else 0.0,
            median_e2e_delay=float(np.median(all_delays)) if all_delays.size else 0.0,
            delivered_ratio=delivered / offered if offered else 0.0,
            offered_bytes=offered,
            delivered_bytes=delivered,
            dropped_bytes=dropped,
            in_flight_bytes=offered - delivered - dropped,
            fronthaul_requirement=static_fronthaul_requirement(cfg),
            fronthaul_requirement_uncompressed=static_fronthaul_requirement(cfg, UNCOMPRESSED_BITWIDTH),
            fronthaul_utilization_trace=fronthaul_utilization(self.slot_log(), "adaptive"),
            packet_delays=all_delays,
            config=cfg.as_dict(),
        )


def step_slot(sim: Simulator) -> SlotEvents:
    return sim.step()


def fronthaul_utilization(log: SlotLog, w_policy: int | str = "adaptive") -> np.ndarray:
    """Fronthaul bit rate per 1 ms window summed over RUs.

    Each RU sends 12 * PRBs * 14 symbols * W bits per slot for its allocated
    PRBs.  With ``w_policy="adaptive"`` W is the largest modulation the RU
    scheduled within the window; an integer fixes W for every RU.
    """
    slots_per_ms = max(1, round(1e-3 / log.slot_duration))
    n_windows = len(log.prbs) // slots_per_ms
    if n_windows == 0:
        return np.zeros(0)
    prbs = log.prbs[: n_windows * slots_per_ms].reshape(n_windows, slots_per_ms, -1).sum(axis=1)
    if w_policy == "adaptive":
        w = log.max_qm[: n_windows * slots_per_ms].reshape(n_windows, slots_per_ms, -1).max(axis=1)
    else:
        w = np.full_like(prbs, int(w_policy))
    bits = SUBCARRIERS_PER_PRB * SYMBOLS_PER_SLOT * prbs * w
    return (bits * 1000).sum(axis=1).astype(float)


def run(cfg: ScenarioConfig, scenario: Scenario | None = None) -> KpiReport:
    sim = Simulator(cfg, scenario)
    for _ in range(sim.n_slots + sim.n_drain):
        sim.step()
    return sim.report()
