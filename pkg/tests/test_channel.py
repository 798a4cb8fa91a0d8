import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamspace import (AntennaPattern, DistanceUnit, Lobe, NoiseModel, PathLossParams,
                       db_to_linear, directivity_gain, link_sinr, noise_power_dbm, path_loss_db,
                       pencil_snr, shannon_rate, to_db)
from oracles import gain_main, loss_linear, noise_mw

LOS = PathLossParams(60.0, 32.5, 2.0)
NLOS = PathLossParams(60.0, 45.5, 1.4)
NOISE = NoiseModel(1.5e9, 6.0)
TWO_PI = 2 * math.pi


def test_noise_floor_table2():
    assert noise_power_dbm(NOISE) == pytest.approx(-76.239, abs=1e-3)


def test_path_loss_reference_values():
    assert path_loss_db(LOS, 7.0) == pytest.approx(84.965, abs=1e-3)
    assert path_loss_db(NLOS, 10.0) == pytest.approx(95.063, abs=1e-3)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss_db(LOS, 0.0)


def test_pencil_gain_is_two_pi_over_xi():
    pat = AntennaPattern.from_degrees(10.0)
    assert directivity_gain(pat, Lobe.MAIN) == pytest.approx(36.0)
    assert directivity_gain(pat, Lobe.SIDE) == 0.0


def test_side_lobe_reduces_main_gain():
    a = AntennaPattern.from_degrees(15.0, 0.0).main_gain
    b = AntennaPattern.from_degrees(15.0, 0.1).main_gain
    assert b < a


@pytest.mark.parametrize("xi, z", [(0.0, 0.0), (TWO_PI, 0.0), (0.1, 1.0), (0.1, -0.1)])
def test_pattern_validation(xi, z):
    with pytest.raises(ValueError):
        AntennaPattern(xi, z)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, TWO_PI - 1e-3), st.floats(0.0, 0.999))
def test_power_conservation(xi, z):
    g = directivity_gain(AntennaPattern(xi, z), Lobe.MAIN)
    assert xi * g + (TWO_PI - xi) * z == pytest.approx(TWO_PI, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 100.0), st.floats(0.5, 100.0))
def test_path_loss_monotone_in_distance(d1, d2):
    lo, hi = sorted((d1, d2))
    assert path_loss_db(NLOS, lo) <= path_loss_db(NLOS, hi)


def test_km_convention_shifts_loss():
    km = PathLossParams(60.0, 32.5, 2.0, DistanceUnit.KILOMETERS)
    # same formula, the caller passes 0.007 for 7 m
    assert path_loss_db(km, 0.007) == pytest.approx(path_loss_db(LOS, 7.0) - 60.0)


def test_link_sinr_matches_term_by_term():
    tx = AntennaPattern.from_degrees(10.0, 0.05)
    rx = AntennaPattern.from_degrees(15.0, 0.05)
    powers = {"a": 1.0, "b": 0.5, "c": 2.0}
    got = link_sinr("a", powers, ["b", "c"], tx, rx, LOS, 7.0, NOISE)
    gt, gr = gain_main(tx.beamwidth_rad, 0.05), gain_main(rx.beamwidth_rad, 0.05)
    L = loss_linear(LOS, 7.0)
    want = 1.0 * gt * gr / L / (noise_mw(NOISE) + 2.5 * 0.05 * gr / L)
    assert got == pytest.approx(want, rel=1e-12)


def test_link_sinr_no_interferers_equals_pencil_at_zero_z():
    tx = AntennaPattern.from_degrees(10.0)
    rx = AntennaPattern.from_degrees(15.0)
    a = link_sinr(1, {1: 1.1}, [], tx, rx, NLOS, 10.0, NOISE)
    b = pencil_snr(1.1, tx.beamwidth_rad, rx.beamwidth_rad, NLOS, 10.0, NOISE)
    assert a == b


def test_link_sinr_missing_power():
    tx = AntennaPattern.from_degrees(10.0)
    with pytest.raises(KeyError):
        link_sinr("a", {"a": 1.0}, ["b"], tx, tx, LOS, 7.0, NOISE)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 0.9), st.floats(0.0, 0.9))
def test_sinr_decreases_with_side_lobe_gain(z1, z2):
    lo, hi = sorted((z1, z2))
    powers = {0: 1.0, 1: 1.0}

    def sinr(z):
        return link_sinr(0, powers, [1], AntennaPattern.from_degrees(10.0, z),
                         AntennaPattern.from_degrees(15.0, z), LOS, 7.0, NOISE)
    assert sinr(hi) <= sinr(lo) * (1 + 1e-12)


def test_pencil_snr_at_equal_share():
    snr = pencil_snr(10 / 9, math.radians(10), math.radians(15), LOS, 7.0, NOISE)
    assert to_db(snr) == pytest.approx(21.097, abs=1e-3)


def test_shannon_rate():
    assert shannon_rate(1.5e9, 0.0) == 0.0
    assert shannon_rate(1.5e9, 1.0) == pytest.approx(1.5e9)
    with pytest.raises(ValueError):
        shannon_rate(1.5e9, -1.0)


def test_db_roundtrip():
    assert to_db(db_to_linear(3.0)) == pytest.approx(3.0)
    assert to_db(0.0) == -math.inf
