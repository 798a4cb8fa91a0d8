"""Canned experiments: scan counts of the training sweep and sum rate
versus the SNR threshold, plus the calibration table."""
from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .channel import DistanceUnit, to_db
from .environment import (Scenario, generate_random_scenario, load_scenario,
                          reference_config_text, sector_count)
from .grouping import GroupingResult, group_users
from .power import (POLICIES, InterferenceMode, PolicyInfeasibleError, PowerAllocation,
                    link_rates)
from .training import TrainingReport, scan_count, train

SCAN_SCHEMA = "beamspace-scan-count/v1"
RATE_SCHEMA = "beamspace-rate-vs-eta/v1"
CALIBRATION_SCHEMA = "beamspace-calibration/v1"

# published operating point used for calibration: eta = 10 dB, z = 0.01
PUBLISHED_RATES_GBPS = {"APA": 120.0, "PPA": 210.0, "MU-SISO": 49.0}
DEFAULT_POLICIES = ("MU-SISO", "APA", "PPA-fair", "PPA-unfair")


@dataclass
class ExperimentSpec:
    kind: str  # "fig3", "fig4" or "custom"
    config_path: Optional[Path] = None
    out_dir: Path = Path("results")
    seed: Optional[int] = None
    eta_db: tuple[float, float, float] = (0.0, 20.0, 1.0)
    z_values: Sequence[float] = (0.01, 0.1)
    n_tx_values: Sequence[int] = tuple(range(1, 11))
    beamwidths_deg: Sequence[float] = (10.0, 15.0, 20.0, 30.0)
    policies: Sequence[str] = DEFAULT_POLICIES
    distance_unit: Optional[str] = None
    dump_training: bool = False
    dump_grouping: bool = False
    dump_allocation: bool = False
    config_text: str = field(default="", repr=False)

    def __post_init__(self):
        start, stop, step = self.eta_db
        if not step > 0:
            raise ValueError(f"threshold sweep step must be positive, got {step}")
        if stop < start:
            raise ValueError(f"threshold sweep is empty: {start}..{stop}")
        if not self.z_values or not self.n_tx_values or not self.policies:
            raise ValueError("sweep lists must be non-empty")
        unknown = [p for p in self.policies if p not in POLICIES]
        if unknown:
            raise ValueError(f"unknown policies {unknown}; choose from {list(POLICIES)}")

    def eta_grid(self) -> list[float]:
        start, stop, step = self.eta_db
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 10) for k in range(n)]


def _csv(header_comment: str, columns: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {header_comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


def resolve_scenario(spec: ExperimentSpec) -> Scenario:
    """Load the configured scenario (reference document by default) and fill
    in generated paths when the document lists none."""
    if spec.config_path is not None:
        text = Path(spec.config_path).read_text()
    else:
        text = reference_config_text()
    spec.config_text = text
    scenario = load_scenario(text)
    if spec.seed is not None:
        scenario = scenario.replace(rng_seed=spec.seed)
    if spec.distance_unit is not None:
        scenario = scenario.with_distance_unit(spec.distance_unit)
    if not scenario.paths:
        n_mues = len(scenario.mues) or 3
        scenario = generate_random_scenario(scenario, n_mues, 3, scenario.rng_seed)
    return scenario


# --------------------------------------------------------------------------
# scan counts

def scan_count_rows(beamwidths_deg: Sequence[float], n_tx_values: Sequence[int],
                    max_beams: int) -> list[tuple]:
    rows = []
    for bw in beamwidths_deg:
        sectors = sector_count(math.radians(bw))
        for n in n_tx_values:
            if 1 <= n <= min(max_beams, sectors):
                rows.append((_num(bw), sectors, n, scan_count(sectors, n), sectors))
    return rows


def _num(x: float):
    return int(x) if float(x).is_integer() else x


def run_scan_count(spec: ExperimentSpec, scenario: Optional[Scenario] = None) -> str:
    if scenario is None:
        scenario = resolve_scenario(spec)
    rows = scan_count_rows(spec.beamwidths_deg, spec.n_tx_values, scenario.mbs.max_beams)
    return _csv(SCAN_SCHEMA, ["xi_t_deg", "s_mbs", "n_tx", "proposed_scans", "traditional_scans"],
                rows)


# --------------------------------------------------------------------------
# rate versus threshold

@dataclass
class RatePoint:
    eta_db: float
    z: float
    training: Optional[TrainingReport]
    grouping: Optional[GroupingResult]
    allocations: dict  # policy -> PowerAllocation or None
    rates: dict  # policy -> bit/s
    flags: dict  # policy -> diagnostic string


def evaluate_point(scenario: Scenario, eta_db: float, z: float,
                   policies: Sequence[str] = DEFAULT_POLICIES,
                   mode: InterferenceMode = InterferenceMode.SIDELOBE) -> RatePoint:
    """Training, grouping, allocation and rate evaluation at one sweep point."""
    sc = scenario.replace(snr_threshold_db=float(eta_db), sidelobe_gain=float(z))
    report = train(sc)
    grouping = group_users(sc, report)
    allocs, rates, flags = {}, {}, {}
    for name in policies:
        if not grouping.selected:
            allocs[name], rates[name], flags[name] = None, 0.0, "no-trainable-mue"
            continue
        try:
            alloc = POLICIES[name](sc, grouping)
        except PolicyInfeasibleError:
            allocs[name], rates[name], flags[name] = None, 0.0, "policy-infeasible"
            continue
        allocs[name] = alloc
        rates[name] = math.fsum(r for _, _, r in link_rates(sc, alloc, mode))
        flags[name] = "all-links-pruned" if alloc.infeasible else ""
    return RatePoint(eta_db, z, report, grouping, allocs, rates, flags)


def rate_sweep(scenario: Scenario, eta_grid: Sequence[float], z_values: Sequence[float],
               policies: Sequence[str] = DEFAULT_POLICIES) -> list[RatePoint]:
    return [evaluate_point(scenario, eta, z, policies) for z in z_values for eta in eta_grid]


RATE_COLUMNS = ["eta_db", "z", "policy", "total_rate_bps", "total_rate_gbps",
                "surviving_links", "served_mues", "flag"]


def rate_rows(points: Sequence[RatePoint], policies: Sequence[str]) -> list[tuple]:
    rows = []
    for pt in points:
        for name in policies:
            alloc = pt.allocations.get(name)
            live = alloc.surviving if alloc else ()
            rows.append((_num(pt.eta_db), _num(pt.z), name, _fmt(pt.rates[name]),
                         f"{pt.rates[name] / 1e9:.6f}", len(live),
                         len({l.mue_id for l in live}), pt.flags[name]))
    return rows


def run_rate_vs_eta(spec: ExperimentSpec, scenario: Optional[Scenario] = None):
    """Returns ``(csv_text, points, scenario)``."""
    if scenario is None:
        scenario = resolve_scenario(spec)
    points = rate_sweep(scenario, spec.eta_grid(), spec.z_values, spec.policies)
    return _csv(RATE_SCHEMA, RATE_COLUMNS, rate_rows(points, spec.policies)), points, scenario


# --------------------------------------------------------------------------
# dumps

def _pairs(pairs) -> str:
    return ";".join(f"{p.tx_sector}:{p.rx_sector}" for p in pairs)


def training_dump(points: Sequence[RatePoint]) -> str:
    rows = []
    for pt in points:
        rep = pt.training
        for u, t in sorted(rep.per_mue.items()):
            base = (_num(pt.eta_db), _num(pt.z), u)
            rows.append(base + ("tx_set", ";".join(map(str, sorted(t.tx_set))),
                                rep.tx_scan_count))
            rows.append(base + ("rx_set", ";".join(map(str, sorted(t.rx_set))), t.rx_scan_count))
            rows.append(base + ("best", _pairs(t.best_pairs), ""))
            for k, cand in enumerate(t.candidates):
                rows.append(base + (f"candidate{k}", _pairs(cand), ""))
    return _csv("beamspace-training-dump/v1",
                ["eta_db", "z", "mue", "set", "members", "scan_count"], rows)


def grouping_dump(points: Sequence[RatePoint]) -> str:
    rows = []
    for pt in points:
        g = pt.grouping
        for u, pairs in g.selected.items():
            status = "switched" if u in g.switched else "selected"
            rows.append((_num(pt.eta_db), _num(pt.z), u, status, _pairs(pairs),
                         g.carryover.get(u, 0)))
        for u in g.deferred:
            rows.append((_num(pt.eta_db), _num(pt.z), u, "deferred", "", g.carryover.get(u, 0)))
        for u in g.unserved:
            rows.append((_num(pt.eta_db), _num(pt.z), u, "untrainable", "", 0))
    return _csv("beamspace-grouping-dump/v1",
                ["eta_db", "z", "mue", "status", "operating_pairs", "carryover"], rows)


def allocation_dump(scenario: Scenario, points: Sequence[RatePoint]) -> str:
    rows = []
    for pt in points:
        sc = scenario.replace(snr_threshold_db=float(pt.eta_db), sidelobe_gain=float(pt.z))
        for name, alloc in pt.allocations.items():
            if alloc is None:
                continue
            sinr = {pair: (s, r) for pair, s, r in link_rates(sc, alloc)}
            for l in alloc.links:
                s, r = sinr.get(l.pair, (0.0, 0.0))
                rows.append((_num(pt.eta_db), _num(pt.z), name, l.mue_id, l.pair.tx_sector,
                             l.pair.rx_sector, l.pair.path.kind.value, _fmt(l.power_mw),
                             f"{to_db(l.snr):.6f}" if l.snr > 0 else "-inf",
                             f"{to_db(s):.6f}" if s > 0 else "-inf", _fmt(r)))
    return _csv("beamspace-allocation-dump/v1",
                ["eta_db", "z", "policy", "mue", "tx_sector", "rx_sector", "kind", "power_mw",
                 "pencil_snr_db", "sidelobe_sinr_db", "rate_bps"], rows)


# --------------------------------------------------------------------------
# calibration against the published operating point

def calibration_rows(scenario: Scenario, eta_db: float = 10.0, z: float = 0.01) -> list[tuple]:
    rows = []
    for unit in (DistanceUnit.METERS, DistanceUnit.KILOMETERS):
        sc = scenario.with_distance_unit(unit)
        for mode in (InterferenceMode.SIDELOBE, InterferenceMode.PENCIL):
            pt = evaluate_point(sc, eta_db, z, DEFAULT_POLICIES, mode)
            for name in DEFAULT_POLICIES:
                target = PUBLISHED_RATES_GBPS["PPA" if name.startswith("PPA") else name]
                got = pt.rates[name] / 1e9
                rows.append((unit.value, mode.value, name, f"{got:.3f}", f"{target:.1f}",
                             f"{got / target:.3f}"))
    return rows


def calibration_report(scenario: Scenario) -> str:
    return _csv(CALIBRATION_SCHEMA + " eta_db=10 z=0.01 shannon=linear-sinr",
                ["distance_unit", "interference", "policy", "rate_gbps", "published_gbps",
                 "ratio"], calibration_rows(scenario))


# --------------------------------------------------------------------------

def manifest(spec: ExperimentSpec, scenario: Scenario) -> str:
    det = scenario.detection_threshold_db
    lines = {
        "package_version": __version__,
        "experiment": spec.kind,
        "config_source": str(spec.config_path) if spec.config_path else "builtin:table2.yaml",
        "config_sha256": hashlib.sha256(spec.config_text.encode()).hexdigest(),
        "seed": scenario.rng_seed,
        "distance_unit": scenario.distance_unit.value,
        "shannon_sinr_scale": "linear",
        "rate_interference_mode": "sidelobe",
        "detection_threshold_db": "eta-referred-to-directional-link" if det is None else det,
        "quasi_omni_gain_db": f"{to_db(scenario.quasi_omni_gain):.6f}",
        "ppa_prune": str(scenario.ppa_prune).lower(),
        "n_tx": scenario.n_tx if scenario.n_tx is not None else "max",
        "grouping_trial_power": "min(p_max, P_max/b)",
        "eta_db_grid": ":".join(_fmt(x) for x in spec.eta_db),
        "z_values": ",".join(_fmt(z) for z in spec.z_values),
        "n_tx_values": ",".join(str(n) for n in spec.n_tx_values),
        "policies": ",".join(spec.policies),
    }
    return "".join(f"{k}={v}\n" for k, v in lines.items())


def run(spec: ExperimentSpec) -> dict[str, Path]:
    """Run the experiment named by ``spec.kind`` and write its files."""
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}

    def emit(name: str, text: str):
        path = out / name
        path.write_text(text)
        written[name] = path

    if spec.kind == "fig3":
        scenario = resolve_scenario(spec)
        emit("fig3_scan_count.csv", run_scan_count(spec, scenario))
    elif spec.kind in ("fig4", "custom"):
        text, points, scenario = run_rate_vs_eta(spec)
        emit(f"{spec.kind}_rate_vs_eta.csv", text)
        emit("calibration.csv", calibration_report(scenario))
        if spec.dump_training:
            emit("training.csv", training_dump(points))
        if spec.dump_grouping:
            emit("grouping.csv", grouping_dump(points))
        if spec.dump_allocation:
            emit("allocation.csv", allocation_dump(scenario, points))
    else:
        raise ValueError(f"unknown experiment {spec.kind!r}")
    emit("manifest", manifest(spec, scenario))
    return written
