from fractions import Fraction

import pytest

from fhcomp.capacity import (
    TABLE1_EXAMPLE,
    Direction,
    MissingParameterError,
    SplitOption,
    SplitParams,
    latency_requirement,
    modcomp_capacity,
    plan_rows,
    reduction_percent,
    required_capacity,
    scenario_fronthaul_capacity,
    with_bitwidth,
)

DL, UL = TABLE1_EXAMPLE[Direction.DL], TABLE1_EXAMPLE[Direction.UL]


def test_opt1_downlink_example():
    p = SplitParams(peak_rate=150e6, bandwidth=100e6, reference_bandwidth=20e6, layers=8,
                    reference_layers=2, mod_order=8, reference_mod_order=6)
    assert required_capacity("1", p) == pytest.approx(4e9, rel=1e-12)


def test_opt6_uplink_example():
    # (50 + 44) Mbps scaled by 5 * 8 * 6/4
    assert required_capacity(SplitOption.OPT6, UL) == 94_000_000 * 5 * 8 * 6 // 4 == 5_640_000_000


def test_opt8_example():
    assert required_capacity("8", DL) == 30_720_000 * 32 * 32 * 5 == 157_286_400_000


@pytest.mark.parametrize("option,dl,ul", [
    ("1", 4.0e9, 3.0e9),
    ("2", 4.016e9, 3.024e9),
    ("4", 4.0e9, 3.0e9),
    ("6", 4.1333e9, 5.640e9),
    ("7-2x", 22.204e9, 21.624e9),
    ("8", 157.2864e9, 157.2864e9),
])
def test_example_column(option, dl, ul):
    assert required_capacity(option, DL) == pytest.approx(dl, rel=1e-4)
    assert required_capacity(option, UL) == pytest.approx(ul, rel=1e-4)


def test_opt7_3_downlink_and_missing_uplink():
    # ((150 + 5) * 5 * 4 * 4/3) * 3 + 800 Mbps
    assert required_capacity("7-3", DL) == 13_200_000_000
    assert required_capacity("7-3", UL) is None


def test_opt7_1_formula_values():
    assert required_capacity("7-1", DL) == 3000 * 28 * 32 * 32 * 1000 + 120_000_000 == 86_136_000_000
    # the uplink formula gives 86.096 Gbps with 80 Mbps of MAC information
    assert required_capacity("7-1", UL) == 86_096_000_000


def test_exact_rational_results():
    value = required_capacity("6", DL)
    assert value == pytest.approx(float(Fraction(155_000_000) * 5 * 4 * Fraction(8, 6)))


def test_missing_parameter_names_symbol():
    with pytest.raises(MissingParameterError) as info:
        required_capacity("8", SplitParams(sample_rate=1e6, bitwidth=32))
    assert info.value.name == "antenna_ports"


def test_invalid_parameters():
    with pytest.raises(ValueError):
        SplitParams(peak_rate=-1)
    with pytest.raises(ValueError):
        SplitParams(reference_bandwidth=0)
    with pytest.raises(ValueError):
        SplitParams(code_rate=1.5)
    with pytest.raises(ValueError):
        SplitOption.parse("9")


def test_split_option_parse():
    assert SplitOption.parse("Opt7-2x") is SplitOption.OPT7_2X
    assert SplitOption.parse("7-2") is SplitOption.OPT7_2X
    assert SplitOption.parse("opt1") is SplitOption.OPT1


def test_latency():
    assert latency_requirement("4") == (100e-6, 100e-6)
    assert latency_requirement("8") == (250e-6, 250e-6)
    bound = latency_requirement("2")
    assert bound == (1.5e-3, 10e-3) and bound.is_range
    assert latency_requirement("1").low == 10e-3


def test_modcomp_capacity_worked_example():
    assert modcomp_capacity(20e6, 1, 0.04, 1, 32) == 12 * 53 * 28 * 32 * 1000 == 569_856_000
    assert modcomp_capacity(20e6, 1, 0.04, 1, 6) == 106_848_000
    assert modcomp_capacity(20e6, 1, 0.04, 0, 32) == 0
    with pytest.raises(ValueError):
        modcomp_capacity(20e6, 1, 0.04, 1, 5)


def test_reduction_percent():
    assert reduction_percent(6, 32) == 81.25
    assert reduction_percent(2, 32) == 93.75
    assert reduction_percent(32, 32) == 0.0
    with pytest.raises(ValueError):
        reduction_percent(40, 32)


def test_scenario_capacity():
    per_ru = modcomp_capacity(100e6, 1, 0.04, 1, 32)
    assert per_ru == 12 * 266 * 28 * 32 * 1000
    assert scenario_fronthaul_capacity(21, per_ru) == 60_060_672_000
    assert scenario_fronthaul_capacity(1, per_ru) == per_ru
    w6 = scenario_fronthaul_capacity(21, modcomp_capacity(100e6, 1, 0.04, 1, 6))
    assert Fraction(w6, scenario_fronthaul_capacity(21, per_ru)) == Fraction(6, 32)
    with pytest.raises(ValueError):
        scenario_fronthaul_capacity(0, per_ru)


def test_plan_rows_with_modcomp_lines():
    rows = plan_rows(DL, UL, dict(bandwidth=20e6, numerology=1, overhead=0.04, layers=1, bitwidths=[32, 6, 2]))
    by_name = {r.option: r for r in rows}
    assert by_name["Opt7-2x W=32"].capacity_dl == 569_856_000
    assert by_name["Opt7-2x W=6"].capacity_dl == 106_848_000
    assert by_name["Opt7-2x W=6"].compression_ratio == 0.1875
    assert by_name["Opt7-2x W=2"].reduction_percent == 93.75
    assert by_name["Opt7-3"].capacity_ul is None


def test_with_bitwidth_scales_opt7_2x():
    # MAC info is additive, so only the IQ part scales
    iq32 = required_capacity("7-2x", DL) - 700_000_000
    iq6 = required_capacity("7-2x", with_bitwidth(DL, 6)) - 700_000_000
    assert Fraction(iq6, iq32) == Fraction(6, 32)
