"""Link-level model: sectored antenna gains, path loss, noise, SINR and rate.

All power arithmetic is linear (mW, dimensionless gains); dB values only
appear at the edges (``path_loss_db``, ``noise_power_dbm``, ``to_db``).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping

TWO_PI = 2.0 * math.pi
THERMAL_NOISE_DBM_HZ = -174.0


class Lobe(enum.Enum):
    MAIN = "main"
    SIDE = "side"


class DistanceUnit(enum.Enum):
    METERS = "meters"
    KILOMETERS = "kilometers"

    @classmethod
    def parse(cls, value: "str | DistanceUnit") -> "DistanceUnit":
        if isinstance(value, cls):
            return value
        aliases = {"m": cls.METERS, "meters": cls.METERS, "km": cls.KILOMETERS,
                   "kilometers": cls.KILOMETERS}
        try:
            return aliases[str(value).strip().lower()]
        except KeyError:
            raise ValueError(f"unknown distance unit {value!r} (use m or km)") from None


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def to_db(linear: float) -> float:
    """Linear ratio to dB; zero maps to -inf."""
    if linear < 0:
        raise ValueError(f"cannot express negative ratio {linear} in dB")
    if linear == 0:
        return -math.inf
    return 10.0 * math.log10(linear)


@dataclass(frozen=True)
class AntennaPattern:
    """Ideal sectored pattern: flat main lobe of width ``beamwidth_rad``,
    flat side lobes at ``sidelobe_gain``."""

    beamwidth_rad: float
    sidelobe_gain: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.beamwidth_rad < TWO_PI:
            raise ValueError(f"beamwidth must lie in (0, 2*pi) rad, got {self.beamwidth_rad}")
        if not 0.0 <= self.sidelobe_gain < 1.0:
            raise ValueError(f"side-lobe gain must lie in [0, 1), got {self.sidelobe_gain}")

    @classmethod
    def from_degrees(cls, beamwidth_deg: float, sidelobe_gain: float = 0.0) -> "AntennaPattern":
        return cls(math.radians(beamwidth_deg), sidelobe_gain)

    @property
    def main_gain(self) -> float:
        return directivity_gain(self, Lobe.MAIN)


@dataclass(frozen=True)
class PathLossParams:
    carrier_freq_ghz: float
    attenuation: float
    exponent: float
    distance_unit: DistanceUnit = DistanceUnit.METERS

    def __post_init__(self):
        if not self.carrier_freq_ghz > 0:
            raise ValueError(f"carrier frequency must be positive, got {self.carrier_freq_ghz}")
        if not self.exponent > 0:
            raise ValueError(f"path-loss exponent must be positive, got {self.exponent}")


@dataclass(frozen=True)
class NoiseModel:
    bandwidth_hz: float
    noise_figure_db: float

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth_hz}")
        if not self.noise_figure_db >= 0:
            raise ValueError(f"noise figure must be non-negative, got {self.noise_figure_db}")

    @property
    def power_mw(self) -> float:
        return db_to_linear(noise_power_dbm(self))


def directivity_gain(pattern: AntennaPattern, lobe: Lobe) -> float:
    """Average linear gain of the main lobe or the side lobes.

    The main-lobe value is the one that keeps the radiated power equal to
    that of an isotropic antenna: ``xi * g_main + (2*pi - xi) * z == 2*pi``.
    """
    xi, z = pattern.beamwidth_rad, pattern.sidelobe_gain
    if not 0.0 < xi < TWO_PI or not 0.0 <= z < 1.0:
        raise ValueError(f"invalid antenna pattern {pattern}")
    if lobe is Lobe.SIDE:
        return z
    return (TWO_PI - (TWO_PI - xi) * z) / xi


def path_loss_db(params: PathLossParams, distance: float) -> float:
    """``A + 20 log10(f_c) + 10 n log10(R)``, R in the unit of ``params``."""
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance}")
    return (params.attenuation + 20.0 * math.log10(params.carrier_freq_ghz)
            + 10.0 * params.exponent * math.log10(distance))


def path_loss_linear(params: PathLossParams, distance: float) -> float:
    return db_to_linear(path_loss_db(params, distance))


def noise_power_dbm(noise: NoiseModel) -> float:
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(noise.bandwidth_hz) + noise.noise_figure_db


def _sinr(power_mw: float, g_tx: float, g_rx: float, loss: float, noise_mw: float,
          interference_mw: float) -> float:
    # Shared by link_sinr and pencil_snr so that z = 0 gives bit-identical results.
    return power_mw * g_tx * g_rx / loss / (noise_mw + interference_mw)


def link_sinr(victim: Hashable, powers: Mapping[Hashable, float], interferers: Iterable[Hashable],
              tx_pattern: AntennaPattern, rx_pattern: AntennaPattern,
              pathloss: PathLossParams, distance: float, noise: NoiseModel) -> float:
    """Linear SINR of ``victim`` under side-lobe interference.

    Each interferer ``j`` contributes ``P_j * z * g_rx / L`` where ``L`` is the
    victim's own path loss, as in the sectored-model SINR.  ``powers`` maps
    link keys to transmit power in mW.
    """
    if victim not in powers:
        raise KeyError(f"no transmit power given for victim link {victim!r}")
    g_tx = directivity_gain(tx_pattern, Lobe.MAIN)
    g_rx = directivity_gain(rx_pattern, Lobe.MAIN)
    z = tx_pattern.sidelobe_gain
    loss = path_loss_linear(pathloss, distance)
    interference = 0.0
    for j in interferers:
        if j == victim:
            raise ValueError("victim link cannot interfere with itself")
        try:
            p_j = powers[j]
        except KeyError:
            raise KeyError(f"no transmit power given for interfering link {j!r}") from None
        interference += p_j * z * g_rx / loss
    p = powers[victim]
    if p < 0:
        raise ValueError(f"negative transmit power {p}")
    return _sinr(p, g_tx, g_rx, loss, noise.power_mw, interference)


def pencil_snr(power_mw: float, tx_beamwidth_rad: float, rx_beamwidth_rad: float,
               pathloss: PathLossParams, distance: float, noise: NoiseModel) -> float:
    """Linear SNR with ideal pencil beams (gains ``2*pi/xi``, no side lobes)."""
    if power_mw < 0:
        raise ValueError(f"negative transmit power {power_mw}")
    g_tx = directivity_gain(AntennaPattern(tx_beamwidth_rad), Lobe.MAIN)
    g_rx = directivity_gain(AntennaPattern(rx_beamwidth_rad), Lobe.MAIN)
    return _sinr(power_mw, g_tx, g_rx, path_loss_linear(pathloss, distance), noise.power_mw, 0.0)


def shannon_rate(bandwidth_hz: float, sinr_linear: float) -> float:
    """``B log2(1 + SINR)`` in bit/s; the SINR must be linear, not dB."""
    if sinr_linear < 0:
        raise ValueError(f"SINR must be non-negative (linear scale), got {sinr_linear}")
    return bandwidth_hz * math.log2(1.0 + sinr_linear)
