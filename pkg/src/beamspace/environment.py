"""Scenario description: MBS/MUE capabilities, sectors and propagation paths."""
from __future__ import annotations

import dataclasses
import enum
import math
import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

import yaml

from .channel import (AntennaPattern, DistanceUnit, NoiseModel, PathLossParams, TWO_PI,
                      db_to_linear)


class ScenarioError(ValueError):
    """Raised for malformed or inconsistent scenario documents."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.problems))


class PathKind(enum.Enum):
    LOS = "LOS"
    NLOS = "NLOS"


def sector_count(beamwidth_rad: float) -> int:
    """Number of equal-width sectors of the given beamwidth covering 2*pi."""
    # rounding guards against 2*pi/radians(10) evaluating to 36.000000000000004
    return math.ceil(round(TWO_PI / beamwidth_rad, 9))


@dataclass(frozen=True)
class MbsSpec:
    max_beams: int
    max_total_power_mw: float
    max_beam_power_mw: float
    tx_beamwidth_rad: float

    @property
    def sector_count(self) -> int:
        return sector_count(self.tx_beamwidth_rad)

    def problems(self) -> list[str]:
        out = []
        if self.max_beams < 1:
            out.append(f"mbs.max_beams: must be >= 1, got {self.max_beams}")
        if not 0.0 < self.tx_beamwidth_rad < TWO_PI:
            out.append("mbs.tx_beamwidth: must lie in (0, 360) degrees")
        if not 0.0 < self.max_beam_power_mw <= self.max_total_power_mw:
            out.append("mbs: need 0 < max_beam_power <= max_total_power "
                       f"(got {self.max_beam_power_mw} mW, {self.max_total_power_mw} mW)")
        return out


@dataclass(frozen=True)
class MueSpec:
    id: int
    max_beams: int
    rx_beamwidth_rad: float
    sim_rx_beams: int

    @property
    def sector_count(self) -> int:
        return sector_count(self.rx_beamwidth_rad)

    def problems(self) -> list[str]:
        where = f"mues[id={self.id}]"
        if not 0.0 < self.rx_beamwidth_rad < TWO_PI:
            return [f"{where}.rx_beamwidth: must lie in (0, 360) degrees"]
        out = []
        if self.max_beams < 1:
            out.append(f"{where}.max_beams: must be >= 1, got {self.max_beams}")
        limit = min(self.max_beams, self.sector_count)
        if not 1 <= self.sim_rx_beams <= limit:
            out.append(f"{where}.sim_rx_beams: need 1 <= n_rx <= min(max_beams, sectors) = {limit}, "
                       f"got {self.sim_rx_beams}")
        return out


@dataclass(frozen=True, order=True)
class PhysicalPath:
    mue_id: int
    tx_sector: int
    rx_sector: int
    kind: PathKind = field(compare=False)
    distance: float = field(compare=False)


@dataclass(frozen=True)
class Scenario:
    mbs: MbsSpec
    mues: tuple[MueSpec, ...]
    paths: tuple[PhysicalPath, ...]
    los_pathloss: PathLossParams
    nlos_pathloss: PathLossParams
    noise: NoiseModel
    sidelobe_gain: float
    snr_threshold_db: float
    rng_seed: int = 0
    los_distance: float = 7.0
    nlos_distance: float = 10.0
    # training conventions
    quasi_omni_gain: float = 1.0
    detection_threshold_db: Optional[float] = None
    n_tx: Optional[int] = None
    # power-allocation conventions
    ppa_prune: bool = True

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ScenarioError(problems)

    def problems(self) -> list[str]:
        out = list(self.mbs.problems())
        ids = [m.id for m in self.mues]
        if len(set(ids)) != len(ids):
            out.append("mues: duplicate MUE ids")
        for m in self.mues:
            out.extend(m.problems())
            if m.max_beams > self.mbs.max_beams:
                out.append(f"mues[id={m.id}].max_beams: exceeds mbs.max_beams={self.mbs.max_beams}")
        if not 0.0 <= self.sidelobe_gain < 1.0:
            out.append(f"channel.sidelobe_gain: must lie in [0, 1), got {self.sidelobe_gain}")
        if not math.isfinite(self.snr_threshold_db):
            out.append("snr_threshold_db: must be finite")
        if not self.quasi_omni_gain > 0:
            out.append("training.quasi_omni_gain_db: gain must be positive")
        if self.n_tx is not None and not 1 <= self.n_tx <= min(self.mbs.max_beams,
                                                               self.mbs.sector_count):
            out.append(f"training.n_tx: need 1 <= n_tx <= min(b_max, S_MBS), got {self.n_tx}")
        known = {m.id: m for m in self.mues}
        seen_tx: set[tuple[int, int]] = set()
        seen_rx: set[tuple[int, int]] = set()
        los = set()
        for p in self.paths:
            where = f"paths[mue={p.mue_id}, tx={p.tx_sector}, rx={p.rx_sector}]"
            mue = known.get(p.mue_id)
            if mue is None:
                out.append(f"{where}: references unknown MUE {p.mue_id}")
                continue
            if not 0 <= p.tx_sector < self.mbs.sector_count:
                out.append(f"{where}.tx_sector: outside [0, {self.mbs.sector_count})")
            if not 0 <= p.rx_sector < mue.sector_count:
                out.append(f"{where}.rx_sector: outside [0, {mue.sector_count})")
            if not p.distance > 0:
                out.append(f"{where}.distance: must be positive")
            if (p.mue_id, p.tx_sector) in seen_tx:
                out.append(f"{where}: tx sector already used by another path of this MUE")
            if (p.mue_id, p.rx_sector) in seen_rx:
                out.append(f"{where}: rx sector already used by another path of this MUE")
            seen_tx.add((p.mue_id, p.tx_sector))
            seen_rx.add((p.mue_id, p.rx_sector))
            if p.kind is PathKind.LOS:
                if p.mue_id in los:
                    out.append(f"{where}: MUE {p.mue_id} already has a LOS path")
                los.add(p.mue_id)
        return out

    # convenience accessors

    def mue(self, mue_id: int) -> MueSpec:
        for m in self.mues:
            if m.id == mue_id:
                return m
        raise KeyError(f"unknown MUE {mue_id}")

    def paths_of(self, mue_id: int) -> tuple[PhysicalPath, ...]:
        return tuple(p for p in self.paths if p.mue_id == mue_id)

    def path_at(self, mue_id: int, tx_sector: int, rx_sector: int) -> Optional[PhysicalPath]:
        for p in self.paths:
            if (p.mue_id, p.tx_sector, p.rx_sector) == (mue_id, tx_sector, rx_sector):
                return p
        return None

    def pathloss_for(self, path: PhysicalPath) -> PathLossParams:
        return self.los_pathloss if path.kind is PathKind.LOS else self.nlos_pathloss

    def formula_distance(self, path: PhysicalPath) -> float:
        """Path length (stored in metres) in the unit the path-loss law expects."""
        if self.pathloss_for(path).distance_unit is DistanceUnit.KILOMETERS:
            return path.distance / 1000.0
        return path.distance

    @property
    def tx_pattern(self) -> AntennaPattern:
        return AntennaPattern(self.mbs.tx_beamwidth_rad, self.sidelobe_gain)

    def rx_pattern(self, mue_id: int) -> AntennaPattern:
        return AntennaPattern(self.mue(mue_id).rx_beamwidth_rad, self.sidelobe_gain)

    @property
    def eta_linear(self) -> float:
        return db_to_linear(self.snr_threshold_db)

    @property
    def distance_unit(self) -> DistanceUnit:
        return self.los_pathloss.distance_unit

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def with_distance_unit(self, unit: "DistanceUnit | str") -> "Scenario":
        """Same geometry with the path-loss law evaluated on distances in ``unit``."""
        unit = DistanceUnit.parse(unit)
        return self.replace(los_pathloss=dataclasses.replace(self.los_pathloss, distance_unit=unit),
                            nlos_pathloss=dataclasses.replace(self.nlos_pathloss, distance_unit=unit))


# ---------------------------------------------------------------------------
# configuration documents

REFERENCE_CONFIG = "table2.yaml"


def reference_config_text() -> str:
    return resources.files("beamspace").joinpath("data").joinpath(REFERENCE_CONFIG).read_text()


class _Fields:
    """Pulls typed values out of a mapping, collecting every problem found."""

    def __init__(self, problems: list[str]):
        self.problems = problems

    def section(self, doc: Any, name: str, required: bool = True) -> dict:
        value = doc.get(name) if isinstance(doc, dict) else None
        if value is None:
            if required:
                self.problems.append(f"{name}: missing section")
            return {}
        if not isinstance(value, dict):
            self.problems.append(f"{name}: expected a mapping")
            return {}
        return value

    def number(self, sec: dict, where: str, key: str, default=None, required=True):
        if key not in sec or sec[key] is None:
            if default is None and required:
                self.problems.append(f"{where}.{key}: missing")
            return default
        value = sec[key]
        # PyYAML reads 1.5e9 (no sign in the exponent) as a string
        try:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        except (TypeError, ValueError):
            self.problems.append(f"{where}.{key}: expected a number, got {value!r}")
            return default

    def integer(self, sec: dict, where: str, key: str, default=None, required=True):
        value = self.number(sec, where, key, default, required)
        if value is None:
            return None
        if value != int(value):
            self.problems.append(f"{where}.{key}: expected an integer, got {value}")
        return int(value)


def _one_of(fields: _Fields, sec: dict, where: str, keys: tuple[str, str], convert):
    """Accept e.g. ``max_total_power_dbm`` or ``max_total_power_mw``."""
    a, b = keys
    if a in sec:
        v = fields.number(sec, where, a)
        return None if v is None else convert(v)
    if b in sec:
        return fields.number(sec, where, b)
    fields.problems.append(f"{where}.{a}: missing")
    return None


def parse_scenario(doc: Any) -> Scenario:
    problems: list[str] = []
    f = _Fields(problems)
    if not isinstance(doc, dict):
        raise ScenarioError("document root must be a mapping")

    mbs_sec = f.section(doc, "mbs")
    ch_sec = f.section(doc, "channel")
    noise_sec = f.section(doc, "noise")
    training_sec = f.section(doc, "training", required=False)
    power_sec = f.section(doc, "power", required=False)

    mbs = None
    if mbs_sec:
        max_beams = f.integer(mbs_sec, "mbs", "max_beams")
        p_tot = _one_of(f, mbs_sec, "mbs", ("max_total_power_dbm", "max_total_power_mw"), db_to_linear)
        p_beam = _one_of(f, mbs_sec, "mbs", ("max_beam_power_dbm", "max_beam_power_mw"), db_to_linear)
        bw = f.number(mbs_sec, "mbs", "tx_beamwidth_deg")
        if None not in (max_beams, p_tot, p_beam, bw):
            mbs = MbsSpec(max_beams, p_tot, p_beam, math.radians(bw))
            problems.extend(mbs.problems())

    los_pl = nlos_pl = None
    los_d = nlos_d = None
    z = 0.0
    if ch_sec:
        fc = f.number(ch_sec, "channel", "carrier_freq_ghz")
        z = f.number(ch_sec, "channel", "sidelobe_gain", default=0.0, required=False)
        try:
            unit = DistanceUnit.parse(ch_sec.get("distance_unit", "meters"))
        except ValueError as exc:
            problems.append(f"channel.distance_unit: {exc}")
            unit = DistanceUnit.METERS
        built = {}
        for kind in ("los", "nlos"):
            sec = ch_sec.get(kind)
            where = f"channel.{kind}"
            if not isinstance(sec, dict):
                problems.append(f"{where}: missing section")
                continue
            a = f.number(sec, where, "attenuation_db")
            n = f.number(sec, where, "exponent")
            d = f.number(sec, where, "distance", default=7.0 if kind == "los" else 10.0)
            if fc is not None and a is not None and n is not None:
                try:
                    built[kind] = (PathLossParams(fc, a, n, unit), d)
                except ValueError as exc:
                    problems.append(f"{where}: {exc}")
        if "los" in built:
            los_pl, los_d = built["los"]
        if "nlos" in built:
            nlos_pl, nlos_d = built["nlos"]

    noise = None
    if noise_sec:
        bw_hz = f.number(noise_sec, "noise", "bandwidth_hz")
        nf = f.number(noise_sec, "noise", "noise_figure_db")
        if bw_hz is not None and nf is not None:
            try:
                noise = NoiseModel(bw_hz, nf)
            except ValueError as exc:
                problems.append(f"noise: {exc}")

    eta = f.number(doc, "root", "snr_threshold_db", default=0.0, required=False)
    seed = f.integer(doc, "root", "seed", default=0, required=False)
    qo_db = f.number(training_sec, "training", "quasi_omni_gain_db", default=0.0, required=False)
    det = f.number(training_sec, "training", "detection_threshold_db", required=False)
    n_tx = f.integer(training_sec, "training", "n_tx", required=False)
    prune = power_sec.get("ppa_prune", True)
    if not isinstance(prune, bool):
        problems.append(f"power.ppa_prune: expected true/false, got {prune!r}")
        prune = True

    mues = []
    raw_mues = doc.get("mues") or []
    if not isinstance(raw_mues, list):
        problems.append("mues: expected a list")
        raw_mues = []
    for k, m in enumerate(raw_mues):
        where = f"mues[{k}]"
        if not isinstance(m, dict):
            problems.append(f"{where}: expected a mapping")
            continue
        mid = f.integer(m, where, "id")
        mb = f.integer(m, where, "max_beams")
        bw = f.number(m, where, "rx_beamwidth_deg")
        nrx = f.integer(m, where, "sim_rx_beams", default=mb, required=False)
        if None not in (mid, mb, bw, nrx):
            mue = MueSpec(mid, mb, math.radians(bw), nrx)
            problems.extend(mue.problems())
            mues.append(mue)

    paths = []
    raw_paths = doc.get("paths") or []
    if not isinstance(raw_paths, list):
        problems.append("paths: expected a list")
        raw_paths = []
    for k, p in enumerate(raw_paths):
        where = f"paths[{k}]"
        if not isinstance(p, dict):
            problems.append(f"{where}: expected a mapping")
            continue
        try:
            kind = PathKind(str(p.get("kind", "")).upper())
        except ValueError:
            problems.append(f"{where}.kind: expected LOS or NLOS, got {p.get('kind')!r}")
            continue
        default_d = los_d if kind is PathKind.LOS else nlos_d
        mid = f.integer(p, where, "mue")
        tx = f.integer(p, where, "tx_sector")
        rx = f.integer(p, where, "rx_sector")
        d = f.number(p, where, "distance", default=default_d, required=True)
        if None not in (mid, tx, rx, d):
            paths.append(PhysicalPath(mid, tx, rx, kind, d))

    if problems or None in (mbs, los_pl, nlos_pl, noise):
        raise ScenarioError(problems or ["incomplete document"])
    return Scenario(
        mbs=mbs, mues=tuple(mues), paths=tuple(sorted(paths)),
        los_pathloss=los_pl, nlos_pathloss=nlos_pl, noise=noise,
        sidelobe_gain=z, snr_threshold_db=eta, rng_seed=seed,
        los_distance=los_d, nlos_distance=nlos_d,
        quasi_omni_gain=db_to_linear(qo_db), detection_threshold_db=det,
        n_tx=n_tx, ppa_prune=prune,
    )


def load_scenario(config_text: str) -> Scenario:
    """Parse and validate a YAML scenario document.

    Angles are given in degrees and powers in dBm (``*_mw`` keys are accepted
    as well); everything is converted to radians and mW.
    """
    try:
        doc = yaml.safe_load(config_text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        loc = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ScenarioError(f"parse error at {loc}: {exc.problem}") from exc
    except yaml.YAMLError as exc:
        raise ScenarioError(f"parse error: {exc}") from exc
    return parse_scenario(doc)


def generate_random_scenario(template: Scenario, n_mues: int, paths_per_mue: int,
                             seed: int) -> Scenario:
    """Populate ``template`` with ``n_mues`` MUEs, each with one LOS path and
    ``paths_per_mue - 1`` NLOS paths at the template's fixed distances.

    MUE capabilities are copied from the template's first MUE (or default to
    the MBS beam count capped at 3).  Sectors are drawn without replacement
    per MUE, so distinct MUEs may still collide on a transmit sector.
    """
    if paths_per_mue < 1:
        raise ValueError("paths_per_mue must be >= 1")
    if n_mues < 0:
        raise ValueError("n_mues must be non-negative")
    if template.mues:
        proto = template.mues[0]
    else:
        b = min(3, template.mbs.max_beams)
        proto = MueSpec(0, b, template.mbs.tx_beamwidth_rad, 1)
    if paths_per_mue > min(template.mbs.sector_count, proto.sector_count):
        raise ValueError(f"{paths_per_mue} paths per MUE do not fit into "
                         f"{min(template.mbs.sector_count, proto.sector_count)} sectors")
    rng = random.Random(seed)
    mues, paths = [], []
    for k in range(n_mues):
        mue = dataclasses.replace(proto, id=k + 1)
        mues.append(mue)
        txs = rng.sample(range(template.mbs.sector_count), paths_per_mue)
        rxs = rng.sample(range(mue.sector_count), paths_per_mue)
        for j, (tx, rx) in enumerate(zip(txs, rxs)):
            if j == 0:
                paths.append(PhysicalPath(mue.id, tx, rx, PathKind.LOS, template.los_distance))
            else:
                paths.append(PhysicalPath(mue.id, tx, rx, PathKind.NLOS, template.nlos_distance))
    return template.replace(mues=tuple(mues), paths=tuple(sorted(paths)), rng_seed=seed)


def scenario_to_dict(scenario: Scenario) -> dict:
    """Plain-data view (degrees/dBm are not restored; values stay in rad/mW)."""
    def conv(obj):
        if isinstance(obj, enum.Enum):
            return obj.value
        if dataclasses.is_dataclass(obj):
            return {f.name: conv(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if isinstance(obj, (list, tuple)):
            return [conv(x) for x in obj]
        return obj
    return conv(scenario)
