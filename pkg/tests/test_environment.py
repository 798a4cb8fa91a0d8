import math

import pytest

from beamspace import (PathKind, ScenarioError, generate_random_scenario, load_scenario,
                       reference_config_text)
from beamspace.environment import sector_count

MINIMAL = """
snr_threshold_db: 10
mbs: {max_beams: 4, max_total_power_dbm: 10, max_beam_power_dbm: 3, tx_beamwidth_deg: 30}
channel:
  carrier_freq_ghz: 60
  sidelobe_gain: 0.01
  los: {attenuation_db: 32.5, exponent: 2.0}
  nlos: {attenuation_db: 45.5, exponent: 1.4}
noise: {bandwidth_hz: 1.5e+9, noise_figure_db: 6}
mues:
  - {id: 1, max_beams: 2, rx_beamwidth_deg: 30, sim_rx_beams: 2}
paths:
  - {mue: 1, tx_sector: 0, rx_sector: 3, kind: LOS, distance: 7}
"""


def test_table2_document(table2):
    assert table2.mbs.max_total_power_mw == pytest.approx(10.0)
    assert table2.mbs.max_beam_power_mw == pytest.approx(1.995, abs=1e-3)
    assert table2.mbs.max_beams == 10
    assert table2.mbs.sector_count == 36
    assert all(m.max_beams == 3 and m.sector_count == 24 for m in table2.mues)
    assert table2.snr_threshold_db == 10.0


def test_minimal_document():
    sc = load_scenario(MINIMAL)
    assert sc.mbs.sector_count == 12
    assert sc.paths[0].kind is PathKind.LOS


def test_empty_mue_list():
    sc = load_scenario(MINIMAL.replace(MINIMAL[MINIMAL.index("mues:"):], "mues: []\npaths: []\n"))
    assert sc.mues == ()


def test_unknown_mue_rejected():
    with pytest.raises(ScenarioError, match="unknown MUE|MUE 9"):
        load_scenario(MINIMAL.replace("mue: 1,", "mue: 9,"))


def test_all_problems_listed():
    bad = MINIMAL.replace("max_beams: 4", "max_beams: 0").replace("exponent: 2.0", "exponent: -1")
    with pytest.raises(ScenarioError) as info:
        load_scenario(bad)
    assert len(info.value.problems) >= 2


def test_parse_error_has_line():
    with pytest.raises(ScenarioError, match="line"):
        load_scenario("mbs: {max_beams: 4\nchannel: [")


def test_second_los_path_rejected():
    doc = MINIMAL + "  - {mue: 1, tx_sector: 1, rx_sector: 4, kind: LOS, distance: 9}\n"
    with pytest.raises(ScenarioError):
        load_scenario(doc)


@pytest.mark.parametrize("deg", [1.0, 7.0, 10.0, 15.0, 20.0, 30.0, 45.0, 100.0, 359.0])
def test_sector_count_covers_circle(deg):
    xi = math.radians(deg)
    s = sector_count(xi)
    assert s * xi >= 2 * math.pi - 1e-9
    assert (s - 1) * xi < 2 * math.pi


def test_generator_shape(table2):
    sc = generate_random_scenario(table2, 3, 3, 7)
    assert len(sc.mues) == 3
    for m in sc.mues:
        paths = sc.paths_of(m.id)
        assert len(paths) == 3
        kinds = sorted(p.kind.value for p in paths)
        assert kinds.count(PathKind.LOS.value) == 1
        assert len({p.tx_sector for p in paths}) == 3
        for p in paths:
            want = sc.los_distance if p.kind is PathKind.LOS else sc.nlos_distance
            assert p.distance == want


def test_generator_deterministic(table2):
    a = generate_random_scenario(table2, 4, 3, 11)
    b = generate_random_scenario(table2, 4, 3, 11)
    assert repr(a) == repr(b)
    assert a.paths != generate_random_scenario(table2, 4, 3, 12).paths


def test_generator_single_path(table2):
    sc = generate_random_scenario(table2, 1, 1, 0)
    assert len(sc.paths) == 1 and sc.paths[0].kind is PathKind.LOS


def test_generator_too_many_paths(table2):
    with pytest.raises(ValueError):
        generate_random_scenario(table2, 1, 40, 0)


def test_reference_text_ships():
    assert "mbs:" in reference_config_text()
