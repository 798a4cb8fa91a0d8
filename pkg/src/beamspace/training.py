"""Multi-user beamforming training.

Phase (i): the MBS sweeps ``n_tx`` transmit sectors per round while every
MUE listens quasi-omni.  Phase (ii): every MUE sweeps ``n_rx`` receive
sectors per round while the MBS transmits quasi-omni.  Phase (iii): each MUE
pairs its detected transmit and receive sectors, keeps the pairs that clear
the threshold and picks its best pair set plus ranked alternates.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .channel import Lobe, directivity_gain, link_sinr, path_loss_linear
from .environment import PhysicalPath, Scenario


@dataclass(frozen=True, order=True)
class BeamPair:
    mue_id: int
    tx_sector: int
    rx_sector: int
    path: Optional[PhysicalPath] = field(default=None, compare=False)

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.mue_id, self.tx_sector, self.rx_sector)


@dataclass(frozen=True)
class MueTraining:
    mue_id: int
    tx_set: frozenset
    rx_set: frozenset
    qualifying: tuple[BeamPair, ...]
    best_pairs: tuple[BeamPair, ...]
    candidates: tuple[tuple[BeamPair, ...], ...]
    rx_scan_count: int

    @property
    def trainable(self) -> bool:
        return bool(self.best_pairs)


@dataclass(frozen=True)
class TrainingReport:
    per_mue: dict
    n_tx: int
    tx_scan_count: int
    rx_scan_count: int

    def best_pairs(self) -> dict[int, tuple[BeamPair, ...]]:
        return {u: t.best_pairs for u, t in self.per_mue.items()}


@dataclass(frozen=True)
class TransmitSweep:
    tx_sets: dict
    scan_count: int
    rounds: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ReceiveSweep:
    rx_sets: dict
    per_mue_scans: dict
    scan_count: int


def scan_count(sectors: int, beams: int) -> int:
    if sectors < 1 or beams < 1:
        raise ValueError(f"need sectors >= 1 and beams >= 1, got {sectors}, {beams}")
    return -(-sectors // beams)


def sweep_rounds(sectors: int, beams: int) -> tuple[tuple[int, ...], ...]:
    """Consecutive blocks of ``beams`` sector indices, one block per round."""
    scan_count(sectors, beams)
    return tuple(tuple(range(s, min(s + beams, sectors))) for s in range(0, sectors, beams))


def _detected(scenario: Scenario, snr: float, directional_gain_other: float) -> bool:
    if scenario.detection_threshold_db is not None:
        return snr >= 10.0 ** (scenario.detection_threshold_db / 10.0)
    # refer the quasi-omni measurement to the directional link it stands for
    return snr * directional_gain_other / scenario.quasi_omni_gain >= scenario.eta_linear


def transmit_training(scenario: Scenario, n_tx: int) -> TransmitSweep:
    mbs = scenario.mbs
    limit = min(mbs.max_beams, mbs.sector_count)
    if not 1 <= n_tx <= limit:
        raise ValueError(f"n_tx must satisfy 1 <= n_tx <= min(b_max, S_MBS) = {limit}, got {n_tx}")
    rounds = sweep_rounds(mbs.sector_count, n_tx)
    beam_power = min(mbs.max_beam_power_mw, mbs.max_total_power_mw / n_tx)
    g_tx = directivity_gain(scenario.tx_pattern, Lobe.MAIN)
    noise_mw = scenario.noise.power_mw
    by_sector: dict[int, list[PhysicalPath]] = {}
    for p in scenario.paths:
        by_sector.setdefault(p.tx_sector, []).append(p)

    tx_sets: dict[int, set[int]] = {m.id: set() for m in scenario.mues}
    for block in rounds:
        for sector in block:
            for p in by_sector.get(sector, ()):
                loss = path_loss_linear(scenario.pathloss_for(p), scenario.formula_distance(p))
                snr = beam_power * g_tx * scenario.quasi_omni_gain / loss / noise_mw
                g_rx = directivity_gain(scenario.rx_pattern(p.mue_id), Lobe.MAIN)
                if _detected(scenario, snr, g_rx):
                    tx_sets[p.mue_id].add(sector)
    return TransmitSweep({u: frozenset(s) for u, s in tx_sets.items()}, len(rounds), rounds)


def receive_training(scenario: Scenario) -> ReceiveSweep:
    mbs = scenario.mbs
    power = mbs.max_beam_power_mw
    g_tx = directivity_gain(scenario.tx_pattern, Lobe.MAIN)
    noise_mw = scenario.noise.power_mw
    rx_sets, scans = {}, {}
    for mue in scenario.mues:
        limit = min(mue.max_beams, mue.sector_count)
        if not 1 <= mue.sim_rx_beams <= limit:
            raise ValueError(f"MUE {mue.id}: n_rx must satisfy 1 <= n_rx <= {limit}, "
                             f"got {mue.sim_rx_beams}")
        g_rx = directivity_gain(scenario.rx_pattern(mue.id), Lobe.MAIN)
        by_sector = {p.rx_sector: p for p in scenario.paths_of(mue.id)}
        found = set()
        for block in sweep_rounds(mue.sector_count, mue.sim_rx_beams):
            for sector in block:
                p = by_sector.get(sector)
                if p is None:
                    continue
                loss = path_loss_linear(scenario.pathloss_for(p), scenario.formula_distance(p))
                snr = power * scenario.quasi_omni_gain * g_rx / loss / noise_mw
                if _detected(scenario, snr, g_tx):
                    found.add(sector)
        rx_sets[mue.id] = frozenset(found)
        scans[mue.id] = scan_count(mue.sector_count, mue.sim_rx_beams)
    # all MUEs sweep in parallel, so completion waits for the slowest one
    total = max(scans.values(), default=0)
    return ReceiveSweep(rx_sets, scans, total)


def trial_power(scenario: Scenario, n_links: int) -> float:
    """Equal per-link power when ``n_links`` beams share the MBS budget."""
    mbs = scenario.mbs
    return min(mbs.max_beam_power_mw, mbs.max_total_power_mw / max(n_links, 1))


def joint_sinrs(scenario: Scenario, pairs: Sequence[BeamPair]) -> list[float]:
    """Linear SINR of each pair when all of them transmit together at equal
    trial power (interference from the same MUE's other beams only)."""
    p = trial_power(scenario, len(pairs))
    powers = {pr.key: p for pr in pairs}
    out = []
    for pr in pairs:
        out.append(link_sinr(pr.key, powers, [q.key for q in pairs if q.key != pr.key],
                             scenario.tx_pattern, scenario.rx_pattern(pr.mue_id),
                             scenario.pathloss_for(pr.path), scenario.formula_distance(pr.path),
                             scenario.noise))
    return out


def _jointly_feasible(scenario: Scenario, pairs: Sequence[BeamPair]) -> bool:
    txs = {p.tx_sector for p in pairs}
    rxs = {p.rx_sector for p in pairs}
    if len(txs) != len(pairs) or len(rxs) != len(pairs):
        return False
    eta = scenario.eta_linear
    return all(s >= eta for s in joint_sinrs(scenario, pairs))


def pair_snr(scenario: Scenario, pair: BeamPair) -> float:
    """SNR of one directional pair transmitting alone at trial power."""
    return joint_sinrs(scenario, [pair])[0]


def qualifying_pairs(scenario: Scenario, mue_id: int, tx_set, rx_set) -> list[BeamPair]:
    """Detected (tx, rx) combinations that carry a real path with SNR >= eta,
    strongest first (ties by sector index)."""
    eta = scenario.eta_linear
    found = []
    for tx in sorted(tx_set):
        for rx in sorted(rx_set):
            path = scenario.path_at(mue_id, tx, rx)
            if path is None:
                continue
            pair = BeamPair(mue_id, tx, rx, path)
            snr = pair_snr(scenario, pair)
            if snr >= eta:
                found.append((snr, pair))
    found.sort(key=lambda sp: (-sp[0], sp[1].tx_sector, sp[1].rx_sector))
    return [p for _, p in found]


def beam_combining(scenario: Scenario, mue_id: int, tx_set, rx_set):
    """Return ``(best_pairs, candidates)`` for one MUE.

    Best set: walk the qualifying pairs by decreasing SNR and keep each one
    whose addition leaves every kept pair at SINR >= eta, up to the MUE's beam
    limit.  Candidates: every other jointly feasible beam-disjoint subset,
    ordered by aggregate SINR.
    """
    mue = scenario.mue(mue_id)
    ordered = qualifying_pairs(scenario, mue_id, tx_set, rx_set)

    best: list[BeamPair] = []
    for pair in ordered:
        if len(best) == mue.max_beams:
            break
        if _jointly_feasible(scenario, best + [pair]):
            best.append(pair)
    best_t = tuple(sorted(best))

    ranked = []
    by_index = sorted(ordered)
    for k in range(1, min(mue.max_beams, len(by_index)) + 1):
        for combo in itertools.combinations(by_index, k):
            if combo == best_t or not _jointly_feasible(scenario, combo):
                continue
            agg = math.fsum(joint_sinrs(scenario, combo))
            ranked.append((-agg, [(p.tx_sector, p.rx_sector) for p in combo], combo))
    ranked.sort(key=lambda r: (r[0], r[1]))
    return best_t, tuple(r[2] for r in ranked)


def train(scenario: Scenario, n_tx: Optional[int] = None) -> TrainingReport:
    """Run all three phases for every MUE of the scenario."""
    if n_tx is None:
        n_tx = scenario.n_tx or min(scenario.mbs.max_beams, scenario.mbs.sector_count)
    tx = transmit_training(scenario, n_tx)
    rx = receive_training(scenario)
    per_mue = {}
    for mue in scenario.mues:
        tx_set, rx_set = tx.tx_sets[mue.id], rx.rx_sets[mue.id]
        best, cands = beam_combining(scenario, mue.id, tx_set, rx_set)
        qualifying = tuple(sorted(qualifying_pairs(scenario, mue.id, tx_set, rx_set)))
        per_mue[mue.id] = MueTraining(mue.id, tx_set, rx_set, qualifying, best, cands,
                                      rx.per_mue_scans[mue.id])
    return TrainingReport(per_mue, n_tx, tx.scan_count, rx.scan_count)
