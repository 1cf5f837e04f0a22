import math

import numpy as np
import pytest

from fhcomp.capacity import modcomp_capacity, scenario_fronthaul_capacity
from fhcomp.iq_core import ModOrder
from fhcomp.simsys import (
    MCS_TABLE2,
    BlerModel,
    ScenarioConfig,
    Simulator,
    SlotLog,
    build_scenario,
    fronthaul_utilization,
    make_scenario,
    run,
    select_mcs,
    sinr,
    site_positions,
    step_slot,
    transport_block_size,
    umi_path_loss,
)

SHORT = dict(sim_duration=0.1, drain_duration=0.05)


# --- MCS table and link adaptation ------------------------------------------------


def test_mcs_table_shape():
    assert len(MCS_TABLE2) == 28
    assert [e.index for e in MCS_TABLE2] == list(range(28))
    se = [e.spectral_efficiency for e in MCS_TABLE2]
    assert all(a < b for a, b in zip(se, se[1:]))
    assert max(e.mod_order for e in MCS_TABLE2) is ModOrder.QAM256
    assert MCS_TABLE2[-1].code_rate_x1024 == 948


def test_select_mcs_examples():
    assert select_mcs(60.0, "256QAM") is MCS_TABLE2[27]
    assert select_mcs(60.0, "QPSK") is MCS_TABLE2[4]
    assert select_mcs(-30.0, "256QAM") is MCS_TABLE2[0]


def test_select_mcs_meets_target_and_is_monotone():
    model = BlerModel()
    last = -1
    for snr in np.linspace(-10, 40, 101):
        e = select_mcs(snr, ModOrder.QAM256, model=model)
        if e.index > 0:
            assert model.bler(snr, e) <= 0.1
        assert e.index >= last
        last = e.index


def test_bler_curve_properties():
    model = BlerModel()
    e = MCS_TABLE2[10]
    assert model.bler(model.center_db(e), e) == pytest.approx(0.5)
    assert model.bler(model.required_sinr_db(e), e) == pytest.approx(0.1)
    # higher MCS needs more SINR for the same BLER
    assert model.bler(15.0, MCS_TABLE2[20]) > model.bler(15.0, MCS_TABLE2[10])


def test_transport_block_size():
    assert transport_block_size(MCS_TABLE2[0], 1) == math.floor(12 * 13 * 2 * 120 / 1024) == 36
    e = MCS_TABLE2[15]
    one = transport_block_size(e, 1)
    assert abs(transport_block_size(e, 50) - 50 * one) < 50
    assert abs(transport_block_size(e, 10, layers=2) - 2 * transport_block_size(e, 10)) <= 1
    with pytest.raises(ValueError):
        transport_block_size(e, 0)


# --- deployment and channel ----------------------------------------------------------


def test_default_layout():
    sc = build_scenario(ScenarioConfig())
    assert sc.n_cells == 21 and sc.n_ues == 84
    assert np.bincount(sc.ue_cell).tolist() == [4] * 21
    # cells of one site use different subbands
    for site in range(7):
        assert sorted(sc.cell_subband[sc.cell_site == site]) == [0, 1, 2]


def test_site_positions_hex_rings():
    xy = site_positions(7, 200.0)
    d = np.linalg.norm(xy[1:], axis=1)
    assert np.allclose(d, 200.0)
    ring2 = site_positions(19, 200.0)[7:]
    assert len(np.unique(np.round(ring2, 6), axis=0)) == 12


def test_single_site_has_no_interference():
    sc = build_scenario(ScenarioConfig(n_sites=1))
    assert sc.n_cells == 3
    assert not sc.interferer_mask.any()


def test_same_seed_same_positions():
    a = build_scenario(ScenarioConfig(rng_seed=7))
    b = build_scenario(ScenarioConfig(rng_seed=7))
    c = build_scenario(ScenarioConfig(rng_seed=8))
    assert np.array_equal(a.ue_xy, b.ue_xy)
    assert not np.array_equal(a.ue_xy, c.ue_xy)


def test_ues_inside_their_sector():
    cfg = ScenarioConfig()
    sc = build_scenario(cfg)
    d = sc.serving_distance()
    assert (d >= cfg.min_distance - 1e-9).all() and (d <= cfg.isd / math.sqrt(3) + 1e-9).all()


def test_isolated_ue_at_10m_oracle():
    cfg = ScenarioConfig(n_sites=1, cells_per_site=1, shadowing=False, fading=False)
    sc = make_scenario(cfg, [[0, 0]], [0], [[10, 0]], [0])
    # oracle: LOS street-canyon loss below the breakpoint
    d3d = math.hypot(10, 10 - 1.5)
    pl = 32.4 + 21 * math.log10(d3d) + 20 * math.log10(2.0)
    noise_dbm = -174 + 10 * math.log10(100e6) + 9
    expected = 30 + 10 * math.log10(64) - pl - noise_dbm
    got = sinr(sc, 0, 0)
    assert got > 30
    assert got == pytest.approx(expected, abs=1e-9)


def test_two_cell_symmetric_sinr_is_beam_gain_difference():
    cfg = ScenarioConfig(n_sites=1, cells_per_site=1, shadowing=False, fading=False)
    # 15 m from both cells: LOS is certain below 18 m
    sc = make_scenario(cfg, [[-15, 0], [15, 0]], [0, 0], [[0, 0]], [0])
    beams = sc.beam_gain_db[0, 0]
    assert sinr(sc, 0, 0) == pytest.approx(beams[0] - beams[1], abs=0.01)
    assert sinr(sc, 0, 0, activity=[1.0, 0.0]) > sinr(sc, 0, 0)


def test_path_loss_monotone_in_distance():
    d = np.linspace(5, 500, 400)
    for los in (True, False):
        pl = umi_path_loss(d, 10, 1.5, 2e9, los)
        assert (np.diff(pl) >= 0).all()
    cfg = ScenarioConfig(n_sites=1, cells_per_site=1, shadowing=False, fading=False)
    ue_xy = np.stack([np.linspace(10, 300, 30), np.zeros(30)], axis=1)
    sc = make_scenario(cfg, [[0, 0]], [0], ue_xy, np.zeros(30, dtype=int),
                       link_state=(-umi_path_loss(ue_xy[:, :1], 10, 1.5, 2e9, True), np.ones((30, 1), bool)))
    values = [sinr(sc, u, 0) for u in range(30)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_channel_constant_within_update_period():
    cfg = ScenarioConfig(**SHORT)
    sc = build_scenario(cfg)
    per = sc.slots_per_period
    assert sinr(sc, 3, 0) == sinr(sc, 3, per - 1)
    assert sinr(sc, 3, 0) != sinr(sc, 3, per)


def test_config_validation_and_unknown_keys():
    with pytest.raises(ValueError):
        ScenarioConfig(numerology=4)
    with pytest.raises(ValueError):
        ScenarioConfig(isd=-1)
    with pytest.raises(KeyError):
        ScenarioConfig.from_dict({"isd": 200, "inter_site": 3})
    cfg = ScenarioConfig.from_dict({"mod_cap": "64QAM"})
    assert cfg.mod_cap is ModOrder.QAM64
    assert cfg.as_dict()["mod_cap"] == "64QAM"


# --- engine -----------------------------------------------------------------------


def test_zero_load_is_idle():
    cfg = ScenarioConfig(offered_load_per_ue=0, **SHORT)
    sim = Simulator(cfg)
    assert all(not step_slot(sim).allocations for _ in range(20))
    r = run(cfg)
    assert r.mean_e2e_throughput == 0 and r.median_e2e_delay == 0
    assert r.offered_bytes == r.delivered_bytes == 0
    assert not r.fronthaul_utilization_trace.any()


def test_error_free_delivery_has_only_queueing_and_transmission_delay():
    cfg = ScenarioConfig(bler_override=0.0, **SHORT)
    r = run(cfg)
    assert r.delivered_bytes == r.offered_bytes and r.dropped_bytes == 0
    slot = cfg.num.slot_duration
    # a packet waits for the next slot boundary, then takes one slot
    assert r.packet_delays.min() >= slot - 1e-12
    assert r.packet_delays.max() <= 2 * slot + 1e-12


def test_certain_errors_drop_everything():
    cfg = ScenarioConfig(bler_override=1.0, **SHORT)
    r = run(cfg)
    assert r.delivered_bytes == 0 and r.mean_e2e_throughput == 0
    assert r.dropped_bytes == r.offered_bytes


def test_harq_retransmissions_follow_delay_and_limit():
    cfg = ScenarioConfig(bler_override=1.0, n_sites=1, ues_per_cell=1, **SHORT)
    sim = Simulator(cfg)
    history = {}
    for _ in range(60):
        for a in sim.step().allocations:
            history.setdefault((a.ue, a.offset), []).append((sim.slot - 1, a.transmission))
    first = history[min(history)]
    slots, tx = zip(*first)
    assert tx == (1, 2, 3, 4)
    assert all(b - a >= cfg.harq_retx_delay_slots for a, b in zip(slots, slots[1:]))
    assert all(len(h) <= cfg.harq_max_transmissions for h in history.values())


def test_conservation_and_determinism():
    cfg = ScenarioConfig(offered_load_per_ue=30e6, mod_cap="QPSK", **SHORT)
    a, b = run(cfg), run(cfg)
    assert a.delivered_bytes + a.dropped_bytes + a.in_flight_bytes == a.offered_bytes
    assert a.delivered_bytes <= a.offered_bytes
    assert a.summary() == b.summary()
    assert np.array_equal(a.packet_delays, b.packet_delays)
    assert np.array_equal(a.fronthaul_utilization_trace, b.fronthaul_utilization_trace)


def test_static_requirement_comes_from_capacity_module():
    cfg = ScenarioConfig(mod_cap="64QAM", **SHORT)
    r = run(cfg)
    assert r.fronthaul_requirement == scenario_fronthaul_capacity(21, modcomp_capacity(100e6, 1, 0.04, 1, 6))
    assert r.fronthaul_requirement_uncompressed == 21 * modcomp_capacity(100e6, 1, 0.04, 1, 32)
    assert (r.fronthaul_utilization_trace <= r.fronthaul_requirement).all()


def test_fronthaul_utilization_definition():
    prbs = np.full((4, 21), 266)
    full = SlotLog(0.5e-3, 266, prbs, np.full((4, 21), 6))
    per_ru = modcomp_capacity(100e6, 1, 0.04, 1, 6)
    assert np.array_equal(fronthaul_utilization(full), np.full(2, 21 * per_ru))
    idle = SlotLog(0.5e-3, 266, np.zeros((4, 21), int), np.zeros((4, 21), int))
    assert not fronthaul_utilization(idle).any()
    rng = np.random.default_rng(0)
    log = SlotLog(0.5e-3, 266, rng.integers(0, 267, (10, 21)), np.full((10, 21), 8))
    assert np.array_equal(fronthaul_utilization(log, 6) * 32, fronthaul_utilization(log, 32) * 6)


def test_higher_numerology_lowers_delay():
    delays = [run(ScenarioConfig(numerology=mu, **SHORT)).median_e2e_delay for mu in (0, 2)]
    assert delays[1] < delays[0]
