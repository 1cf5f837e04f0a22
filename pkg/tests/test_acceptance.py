"""Acceptance criteria 1-7, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines are printed even while
output capture is on) or directly as a script.
"""

import hashlib
import sys
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from fhcomp.capacity import (
    TABLE1_EXAMPLE,
    Direction,
    modcomp_capacity,
    reduction_percent,
    required_capacity,
)
from fhcomp.cli import main as cli_main
from fhcomp.codecs import (
    BlockScalingConfig,
    Method,
    MuLawConfig,
    bfp_compress,
    bfp_decompress,
    block_scaling_compress,
    block_scaling_decompress,
    compression_ratio,
    modcomp_compress,
    modcomp_decompress,
    mulaw_compress,
    mulaw_decompress,
)
from fhcomp.iq_core import PrbBlock, prb_count
from fhcomp.simsys import MCS_TABLE2, ScenarioConfig, run

CAPS = ("QPSK", "16QAM", "64QAM", "256QAM")
LOADS = (10e6, 20e6, 30e6)
NUMEROLOGIES = (0, 1, 2)


@pytest.fixture
def report(capsys):
    """Print one line for a criterion, bypassing capture, and return its verdict."""

    def emit(number, title, checks):
        failed = [name for name, ok in checks if not ok]
        status = "PASS" if not failed else "FAIL"
        detail = "" if not failed else f" (failed: {'; '.join(failed)})"
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {status}: {title}{detail}")
        return not failed

    return emit


# --- 1 -------------------------------------------------------------------------------


def test_criterion_1_split_capacity_example_column(report):
    dl, ul = TABLE1_EXAMPLE[Direction.DL], TABLE1_EXAMPLE[Direction.UL]
    published = [
        ("1", dl, 4e9), ("1", ul, 3e9),
        ("2", dl, 4.016e9), ("2", ul, 3.024e9),
        ("6", dl, 4.133e9), ("6", ul, 5.640e9),
        ("7-3", dl, 13.2e9),
        ("7-2x", dl, 22.204e9), ("7-2x", ul, 21.624e9),
        ("7-1", dl, 86.136e9),
        ("8", dl, 157.28e9), ("8", ul, 157.28e9),
    ]
    checks = [
        (f"Opt{opt} {p.direction.value}", abs(required_capacity(opt, p) - want) <= 0.005 * want)
        for opt, p, want in published
    ]
    # the uplink 7-1 cell of the table disagrees with its own formula; assert the formula
    checks.append(("Opt7-1 UL formula value 86.096 Gbps", required_capacity("7-1", ul) == 86_096_000_000))
    checks.append(("Opt7-3 UL not applicable", required_capacity("7-3", ul) is None))
    assert report(1, "split-option capacities within 0.5% (Opt7-1 UL = 86.096 Gbps by formula)", checks)


# --- 2 -------------------------------------------------------------------------------


def test_criterion_2_modcomp_worked_example(report):
    w32 = modcomp_capacity(20e6, 1, 0.04, 1, 32)
    w6 = modcomp_capacity(20e6, 1, 0.04, 1, 6)
    # oracle: 53 PRBs by integer arithmetic, 28 symbols per ms at 30 kHz
    prbs = (20_000_000 * 96) // (100 * 30_000 * 12)
    checks = [
        ("53 PRBs", prbs == prb_count(20e6, 1, 0.04) == 53),
        ("W=32 -> 569,856,000", w32 == 12 * prbs * 28 * 32 * 1000 == 569_856_000),
        ("W=6 -> 106,848,000", w6 == 12 * prbs * 28 * 6 * 1000 == 106_848_000),
    ]
    assert report(2, "20 MHz, mu=1 modulation-compression capacity exact", checks)


# --- 3 -------------------------------------------------------------------------------


def test_criterion_3_compression_ratios(report):
    checks = []
    for m, exact, rounded in ((8, 0.25, 0.25), (6, 0.1875, 0.18), (4, 0.125, 0.12), (2, 0.0625, 0.06)):
        r = compression_ratio(Method.MODULATION, m)
        checks.append((f"M={m} exact", r == exact))
        checks.append((f"M={m} vs rounded {rounded}", abs(r - rounded) <= 0.008))
    for method in (Method.BFP, Method.BLOCK_SCALING, Method.MU_LAW):
        checks.append((f"{method.name} 9/8", abs(compression_ratio(method) - 224 / 384) <= 1e-5))
    checks.append(("reduction(6,32)=81.25", reduction_percent(6, 32) == 81.25))
    checks.append(("reduction(2,32)=93.75", reduction_percent(2, 32) == 93.75))
    checks.append(("rounds to 82%/94%", round(100 * (1 - 0.18)) == 82 and round(reduction_percent(2, 32)) == 94))
    assert report(3, "compression ratios and reduction percentages", checks)


# --- 4 -------------------------------------------------------------------------------


def _prb(components):
    return PrbBlock(np.asarray(components, dtype=np.int32).reshape(12, 2))


def test_criterion_4_losslessness_properties(report):
    rng = np.random.default_rng(2024)

    n = 100_000
    orders = rng.choice([2, 4, 6, 8], size=(n, 12))
    levels = np.left_shift(1, orders // 2)
    points = 2 * rng.integers(0, levels[..., None], (n, 12, 2)) - (levels[..., None] - 1)
    modcomp_failures = 0
    for pts, ords in zip(points, orders):
        out = modcomp_decompress(modcomp_compress(pts, ords))
        if not (np.array_equal(out.points, pts) and np.array_equal(out.orders, ords)):
            modcomp_failures += 1

    small = rng.integers(-256, 256, (2000, 24))
    bfp_exact = all(bfp_decompress(bfp_compress(_prb(x))) == _prb(x) for x in small)

    bound_violations = 0
    for x in rng.integers(-32768, 32768, (10_000, 24)):
        c = bfp_compress(_prb(x))
        if np.abs(bfp_decompress(c).components() - x).max() >= 2 ** c.shared_param:
            bound_violations += 1

    def idempotent(compress, decompress, cfg, blocks):
        for x in blocks:
            once = decompress(compress(_prb(x), cfg), cfg)
            if decompress(compress(once, cfg), cfg) != once:
                return False
        return True

    blocks = rng.integers(-32768, 32768, (3000, 24))
    checks = [
        (f"modcomp 1e5 roundtrips, {modcomp_failures} failures", modcomp_failures == 0),
        ("BFP e=0 exact", bfp_exact),
        (f"BFP |x - x^| < 2^e on 1e4 PRBs, {bound_violations} violations", bound_violations == 0),
        ("block scaling idempotent",
         idempotent(block_scaling_compress, block_scaling_decompress, BlockScalingConfig(), blocks)),
        ("mu-law idempotent", idempotent(mulaw_compress, mulaw_decompress, MuLawConfig(), blocks)),
    ]
    assert report(4, "lossless modcomp, BFP bound, idempotent lossy codecs", checks)


# --- 5 and 6 --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def sweep():
    base = ScenarioConfig()
    return {
        (cap, load, mu): run(base.replace(mod_cap=cap, offered_load_per_ue=load, numerology=mu))
        for mu, load, cap in product(NUMEROLOGIES, LOADS, CAPS)
    }


def qpsk_cell_capacity_oracle():
    """Peak cell rate with every PRB at the top QPSK entry (mu=1, 13 data symbols)."""
    top = max((e for e in MCS_TABLE2 if int(e.mod_order) == 2), key=lambda e: e.code_rate)
    return 266 * 12 * 13 * 2 * Fraction(602, 1024) * 2000, top


def test_criterion_5_simulator_trends(sweep, report):
    thr = {k: r.mean_e2e_throughput for k, r in sweep.items()}
    ratio = {k: r.delivered_ratio for k, r in sweep.items()}
    delay = {k: r.median_e2e_delay for k, r in sweep.items()}
    checks = []

    a = [(l, m) for l in LOADS for m in NUMEROLOGIES
         if not thr[("64QAM", l, m)] >= 0.95 * thr[("256QAM", l, m)]]
    checks.append((f"(a) 64QAM >= 0.95 x 256QAM throughput, violations {a}", not a))

    b = [(c, m, round(ratio[(c, 10e6, m)], 4)) for c in CAPS for m in NUMEROLOGIES
         if ratio[(c, 10e6, m)] < (0.95 if c == "QPSK" else 0.99)]
    checks.append((f"(b) delivery at 10 Mbps/UE, violations {b}", not b))

    oracle, top = qpsk_cell_capacity_oracle()
    checks.append(("(c) oracle: QPSK cell capacity < 120 Mbps offered",
                   top.code_rate_x1024 == 602 and oracle < 4 * 30e6))
    c = [m for m in NUMEROLOGIES if not ratio[("QPSK", 30e6, m)] < 0.95]
    checks.append((f"(c) QPSK at 30 Mbps/UE saturated, violations mu={c}", not c))

    d = [(l, m) for l in LOADS for m in NUMEROLOGIES
         if any(thr[(lo, l, m)] > thr[(hi, l, m)] for lo, hi in zip(CAPS, CAPS[1:]))]
    checks.append((f"(d) throughput non-decreasing in cap, violations {d}", not d))

    e = []
    for cap, load in product(CAPS, LOADS):
        keys = [(cap, load, m) for m in NUMEROLOGIES]
        if any(ratio[k] < 0.95 for k in keys):
            continue
        if any(delay[k1] < delay[k2] for k1, k2 in zip(keys, keys[1:])):
            e.append((cap, load))
    checks.append((f"(e) median delay non-increasing in mu, violations {e}", not e))
    assert report(5, "simulator trends over the 36-point sweep", checks)


def test_criterion_6_capacity_simulator_consistency(sweep, report):
    checks = []
    for (cap, load, mu), r in sweep.items():
        w = {"QPSK": 2, "16QAM": 4, "64QAM": 6, "256QAM": 8}[cap]
        if r.fronthaul_requirement != 21 * modcomp_capacity(100e6, mu, 0.04, 1, w):
            checks.append((f"{cap} mu={mu} static requirement", False))
        if r.fronthaul_requirement_uncompressed != 21 * modcomp_capacity(100e6, mu, 0.04, 1, 32):
            checks.append((f"{cap} mu={mu} uncompressed requirement", False))
    r64 = sweep[("64QAM", 10e6, 1)]
    checks.append(("W=6 is exactly 6/32 of W=32",
                   Fraction(r64.fronthaul_requirement, r64.fronthaul_requirement_uncompressed) == Fraction(6, 32)))
    checks.append(("mu=1 W=32 total 60,060,672,000 bps", r64.fronthaul_requirement_uncompressed == 60_060_672_000))
    checks.append(("all 36 runs checked", len(sweep) == 36))
    assert report(6, "run() fronthaul requirement equals 21 x modcomp_capacity", checks)


# --- 7 -------------------------------------------------------------------------------


def test_criterion_7_cli_determinism(tmp_path, monkeypatch, report):
    monkeypatch.setenv("FHCOMP_OUT_DIR", str(tmp_path))
    (tmp_path / "scenario.toml").write_text("[scenario]\nsim_duration = 0.2\n")
    (tmp_path / "sweep.toml").write_text(
        'caps = ["QPSK", "64QAM", "256QAM"]\nloads = [10e6, 30e6]\nnumerologies = [0, 1, 2]\n')
    digests, codes = [], []
    for name in ("first.csv", "second.csv"):
        codes.append(cli_main(["sim", "--config", str(tmp_path / "scenario.toml"),
                               "--sweep", str(tmp_path / "sweep.toml"), "--seed", "11", "--out", name]))
        digests.append(hashlib.sha256((tmp_path / name).read_bytes()).hexdigest())
    checks = [
        ("both sweeps succeed", codes == [0, 0]),
        ("byte-identical CSV", digests[0] == digests[1]),
    ]
    assert report(7, "repeated CLI sweeps with one seed give identical CSV bytes", checks)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
