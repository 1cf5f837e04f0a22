"""Hexagonal multi-cell layout and a simplified urban-micro channel.

Large-scale loss follows the UMi street-canyon formulas with a per-link
LOS draw and log-normal shadowing, both drawn once.  Every channel update
period redraws block Rayleigh fading on all links and the beam gain each
interfering array points at the UE; the serving array always points its
full gain, 10*log10(antennas) dB, at its UE.  Because the serving array
steers its weights at the channel it sees, its fading power is the mean
over the array elements (Gamma(N, 1/N), unit mean) rather than the single
exponential draw the interfering links get.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_HZ = -174.0
SIGMA_SF_LOS = 4.0
SIGMA_SF_NLOS = 7.82


def umi_los_probability(d2d):
    d2d = np.asarray(d2d, dtype=float)
    with np.errstate(divide="ignore"):
        p = 18 / d2d + np.exp(-d2d / 36) * (1 - 18 / d2d)
    return np.where(d2d <= 18, 1.0, p)


def umi_path_loss(d2d, ru_height: float, ue_height: float, carrier: float, los):
    """Street-canyon path loss in dB for LOS (True) or NLOS (False) links."""
    d2d = np.maximum(np.asarray(d2d, dtype=float), 1.0)
    d3d = np.sqrt(d2d**2 + (ru_height - ue_height) ** 2)
    fc = carrier / 1e9
    d_bp = 4 * (ru_height - 1) * (ue_height - 1) * carrier / SPEED_OF_LIGHT
    pl1 = 32.4 + 21 * np.log10(d3d) + 20 * np.log10(fc)
    pl2 = (32.4 + 40 * np.log10(d3d) + 20 * np.log10(fc)
           - 9.5 * np.log10(d_bp**2 + (ru_height - ue_height) ** 2))
    pl_los = np.where(d2d <= d_bp, pl1, pl2)
    pl_nlos = 35.3 * np.log10(d3d) + 22.4 + 21.3 * np.log10(fc) - 0.3 * (ue_height - 1.5)
    return np.where(los, pl_los, np.maximum(pl_los, pl_nlos))


def site_positions(n_sites: int, isd: float) -> np.ndarray:
    """Central site first, then rings of the hexagonal grid, nearest first."""
    coords = [(0.0, 0.0)]
    ring = 1
    while len(coords) < n_sites:
        # axial hex coordinates on ring k
        q, r = ring, 0
        for dq, dr in ((-1, 1), (-1, 0), (0, -1), (1, -1), (1, 0), (0, 1)):
            for _ in range(ring):
                x = isd * (q + r / 2)
                y = isd * (r * math.sqrt(3) / 2)
                coords.append((x, y))
                q, r = q + dq, r + dr
        ring += 1
    return np.array(coords[:n_sites])


@dataclass
class Scenario:
    cfg: ScenarioConfig
    cell_xy: np.ndarray        # (C, 2)
    cell_site: np.ndarray      # (C,)
    cell_subband: np.ndarray   # (C,)
    ue_xy: np.ndarray          # (U, 2)
    ue_cell: np.ndarray        # (U,)
    path_gain_db: np.ndarray   # (U, C): -(path loss + shadowing)
    los: np.ndarray            # (U, C)
    fading: np.ndarray         # (P, U, C) linear power
    beam_gain_db: np.ndarray   # (P, U, C)

    @property
    def n_cells(self) -> int:
        return len(self.cell_xy)

    @property
    def n_ues(self) -> int:
        return len(self.ue_xy)

    @property
    def noise_mw(self) -> float:
        dbm = THERMAL_NOISE_DBM_HZ + 10 * math.log10(self.cfg.subband_bandwidth) + self.cfg.noise_figure
        return 10 ** (dbm / 10)

    @property
    def slots_per_period(self) -> int:
        return max(1, round(self.cfg.channel_update_period / self.cfg.num.slot_duration))

    def period(self, slot: int) -> int:
        return min(slot // self.slots_per_period, len(self.fading) - 1)

    @property
    def interferer_mask(self) -> np.ndarray:
        """(U, C) True where cell c shares the subband of UE u's serving cell."""
        same = self.cell_subband[None, :] == self.cell_subband[self.ue_cell][:, None]
        same[np.arange(self.n_ues), self.ue_cell] = False
        return same

    def received_mw(self, period: int) -> np.ndarray:
        """(U, C) received power from every cell during one channel period."""
        dbm = self.cfg.tx_power + self.beam_gain_db[period] + self.path_gain_db
        return 10 ** (dbm / 10) * self.fading[period]

    def serving_distance(self) -> np.ndarray:
        return np.linalg.norm(self.ue_xy - self.cell_xy[self.ue_cell], axis=1)


def _link_state(cfg: ScenarioConfig, cell_xy, ue_xy, rng):
    d2d = np.linalg.norm(ue_xy[:, None, :] - cell_xy[None, :, :], axis=2)
    los = rng.random(d2d.shape) < umi_los_probability(d2d)
    pl = umi_path_loss(d2d, cfg.ru_height, cfg.ue_height, cfg.carrier, los)
    if cfg.shadowing:
        sigma = np.where(los, SIGMA_SF_LOS, SIGMA_SF_NLOS)
        pl = pl + sigma * rng.standard_normal(d2d.shape)
    return -pl, los


def _fast_state(cfg: ScenarioConfig, ue_cell, n_cells, rng):
    horizon = cfg.sim_duration + cfg.drain_duration
    n_periods = max(1, math.ceil(horizon / cfg.channel_update_period - 1e-9))
    shape = (n_periods, len(ue_cell), n_cells)
    serving = (slice(None), np.arange(len(ue_cell)), ue_cell)
    if cfg.fading:
        fading = rng.exponential(1.0, shape)
        n = cfg.ru_antennas
        fading[serving] = rng.gamma(n, 1.0 / n, (n_periods, len(ue_cell)))
    else:
        fading = np.ones(shape)
    full_gain = 10 * math.log10(cfg.ru_antennas)
    beams = rng.uniform(cfg.interferer_gain_min, full_gain, shape)
    beams[serving] = full_gain
    return fading, beams


def make_scenario(cfg: ScenarioConfig, cell_xy, cell_subband, ue_xy, ue_cell, cell_site=None,
                  link_state=None) -> Scenario:
    """Scenario from explicit positions; channel draws still follow ``cfg.rng_seed``.

    ``link_state`` optionally supplies precomputed ``(path_gain_db, los)``.
    """
    cell_xy = np.asarray(cell_xy, dtype=float).reshape(-1, 2)
    ue_xy = np.asarray(ue_xy, dtype=float).reshape(-1, 2)
    ue_cell = np.asarray(ue_cell, dtype=np.int64)
    _, link_seed, fast_seed, _ = np.random.SeedSequence(cfg.rng_seed).spawn(4)
    if link_state is None:
        link_state = _link_state(cfg, cell_xy, ue_xy, np.random.default_rng(link_seed))
    path_gain, los = link_state
    fading, beams = _fast_state(cfg, ue_cell, len(cell_xy), np.random.default_rng(fast_seed))
    if cell_site is None:
        cell_site = np.arange(len(cell_xy))
    return Scenario(cfg, cell_xy, np.asarray(cell_site), np.asarray(cell_subband, dtype=np.int64),
                    ue_xy, ue_cell, path_gain, los, fading, beams)


MAX_DROP_ATTEMPTS = 1000


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    """Hexagonal deployment with reuse-3 sectors and UEs dropped per sector.

    Each UE is placed uniformly in its cell's 120-degree sector; a drop is
    redrawn, together with its LOS state and shadowing, until the cell is
    the UE's strongest server by path gain, so every cell keeps exactly
    ``ues_per_cell`` attached UEs under best-server association.
    """
    sites = site_positions(cfg.n_sites, cfg.isd)
    boresights = np.deg2rad([30.0, 150.0, 270.0])[: cfg.cells_per_site]
    cell_xy = np.repeat(sites, cfg.cells_per_site, axis=0)
    cell_site = np.repeat(np.arange(cfg.n_sites), cfg.cells_per_site)
    cell_subband = np.tile(np.arange(cfg.cells_per_site), cfg.n_sites)
    cell_bore = np.tile(boresights, cfg.n_sites)

    drop_seed = np.random.SeedSequence(cfg.rng_seed).spawn(4)[0]
    rng = np.random.default_rng(drop_seed)
    n = cfg.n_cells * cfg.ues_per_cell
    ue_cell = np.repeat(np.arange(cfg.n_cells), cfg.ues_per_cell)
    ue_xy = np.zeros((n, 2))
    path_gain = np.zeros((n, cfg.n_cells))
    los = np.zeros((n, cfg.n_cells), dtype=bool)
    radius = cfg.isd / math.sqrt(3)
    todo = np.arange(n)
    for _ in range(MAX_DROP_ATTEMPTS):
        if todo.size == 0:
            break
        k = todo.size
        r = np.sqrt(rng.uniform(cfg.min_distance**2, radius**2, k))
        theta = cell_bore[ue_cell[todo]] + rng.uniform(-math.pi / 3, math.pi / 3, k)
        ue_xy[todo] = cell_xy[ue_cell[todo]] + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
        path_gain[todo], los[todo] = _link_state(cfg, cell_xy, ue_xy[todo], rng)
        best = np.argmax(path_gain[todo], axis=1)
        todo = todo[best != ue_cell[todo]]
    else:
        if todo.size:
            raise RuntimeError("could not drop UEs with their own cell as best server")
    return make_scenario(cfg, cell_xy, cell_subband, ue_xy, ue_cell, cell_site, (path_gain, los))


def sinr(scenario: Scenario, ue: int, slot: int, activity=None) -> float:
    """SINR in dB of ``ue`` in ``slot``.

    ``activity`` gives each cell's fraction of occupied PRBs; by default
    every co-subband cell transmits on the whole band.
    """
    rx = scenario.received_mw(scenario.period(slot))[ue]
    mask = scenario.interferer_mask[ue]
    weights = np.ones(scenario.n_cells) if activity is None else np.asarray(activity, dtype=float)
    interference = float(np.sum(rx[mask] * weights[mask]))
    signal = rx[scenario.ue_cell[ue]]
    return 10 * math.log10(signal / (scenario.noise_mw + interference))
