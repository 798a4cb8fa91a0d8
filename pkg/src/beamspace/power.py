"""Multi-user multi-beam power allocation.

Two low-complexity policies over the pencil-beam SNR model:

* APA splits the budget evenly and drops the weakest link while any link
  misses the threshold (restarting the split after every removal).
* PPA funds strong links first, either one best link per MUE (``fair``) or
  the globally strongest links (``unfair``).

Allocations are evaluated either with the pencil-beam SNR or with the full
side-lobe SINR.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Callable, Mapping

from .channel import link_sinr, pencil_snr, shannon_rate
from .environment import Scenario
from .grouping import GroupingResult
from .training import BeamPair


class InterferenceMode(enum.Enum):
    PENCIL = "pencil"
    SIDELOBE = "sidelobe"


class PolicyInfeasibleError(ValueError):
    pass


@dataclass(frozen=True)
class LinkAllocation:
    pair: BeamPair
    power_mw: float
    snr: float  # pencil-beam SNR at power_mw (linear)
    rate_bps: float

    @property
    def mue_id(self) -> int:
        return self.pair.mue_id


@dataclass(frozen=True)
class PowerAllocation:
    policy: str
    links: tuple[LinkAllocation, ...]  # every operating link, unpowered ones at 0 mW
    pruned: tuple[BeamPair, ...] = ()
    iterations: int = 0

    @property
    def surviving(self) -> tuple[LinkAllocation, ...]:
        return tuple(l for l in self.links if l.power_mw > 0)

    @property
    def total_power_mw(self) -> float:
        return math.fsum(l.power_mw for l in self.links)

    @property
    def total_rate(self) -> float:
        return math.fsum(l.rate_bps for l in self.surviving)

    @property
    def mues(self) -> dict[int, tuple[BeamPair, ...]]:
        out: dict[int, list[BeamPair]] = {}
        for l in self.surviving:
            out.setdefault(l.mue_id, []).append(l.pair)
        return {u: tuple(v) for u, v in sorted(out.items())}

    @property
    def infeasible(self) -> bool:
        return not self.surviving


def link_snr(scenario: Scenario, pair: BeamPair, power_mw: float) -> float:
    """Pencil-beam SNR of one link at the minimum beamwidths."""
    return pencil_snr(power_mw, scenario.mbs.tx_beamwidth_rad,
                      scenario.mue(pair.mue_id).rx_beamwidth_rad,
                      scenario.pathloss_for(pair.path), scenario.formula_distance(pair.path),
                      scenario.noise)


def link_quality(scenario: Scenario, pair: BeamPair) -> float:
    """Ranking metric for PPA: pencil SNR at the per-beam cap."""
    return link_snr(scenario, pair, scenario.mbs.max_beam_power_mw)


def _finish(scenario: Scenario, policy: str, powers: Mapping[BeamPair, float],
            pruned, iterations: int) -> PowerAllocation:
    bw = scenario.noise.bandwidth_hz
    links = []
    for pair in sorted(powers):
        p = powers[pair]
        snr = link_snr(scenario, pair, p)
        links.append(LinkAllocation(pair, p, snr, shannon_rate(bw, snr) if p > 0 else 0.0))
    return PowerAllocation(policy, tuple(links), tuple(pruned), iterations)


def _weakest(snrs: Mapping[BeamPair, float]) -> BeamPair:
    return min(snrs, key=lambda pair: (snrs[pair], pair))


def _require_links(grouping: GroupingResult) -> list[BeamPair]:
    links = grouping.links
    if not links:
        raise ValueError("power allocation needs a non-empty grouping")
    return links


def apa(scenario: Scenario, grouping: GroupingResult) -> PowerAllocation:
    """Equal split with weakest-link pruning until every link meets eta."""
    links = _require_links(grouping)
    mbs = scenario.mbs
    eta = scenario.eta_linear
    active = list(links)
    pruned = []
    share = 0.0
    while active:
        share = min(mbs.max_total_power_mw / len(active), mbs.max_beam_power_mw)
        snrs = {pair: link_snr(scenario, pair, share) for pair in active}
        worst = _weakest(snrs)
        if snrs[worst] >= eta:
            break
        active.remove(worst)
        pruned.append(worst)
    powers = {pair: share for pair in active}
    powers.update({pair: 0.0 for pair in pruned})
    return _finish(scenario, "APA", powers, pruned, len(pruned))


def ppa_fair(scenario: Scenario, grouping: GroupingResult, prune: bool | None = None) -> PowerAllocation:
    """Each MUE's best link at ``p_max``; the rest share what is left evenly.

    With pruning on (the scenario default), links missing eta are removed one
    at a time, weakest first, and the split is recomputed over the survivors.
    """
    links = _require_links(grouping)
    prune = scenario.ppa_prune if prune is None else prune
    mbs = scenario.mbs
    eta = scenario.eta_linear
    n_mues = len({p.mue_id for p in links})
    if mbs.max_total_power_mw < n_mues * mbs.max_beam_power_mw:
        deficit = n_mues * mbs.max_beam_power_mw - mbs.max_total_power_mw
        raise PolicyInfeasibleError(
            f"fair PPA needs U*p_max = {n_mues * mbs.max_beam_power_mw:.4f} mW but the MBS "
            f"budget is {mbs.max_total_power_mw:.4f} mW (short by {deficit:.4f} mW)")

    quality = {pair: link_quality(scenario, pair) for pair in links}
    active = list(links)
    pruned = []
    while True:
        by_mue: dict[int, list[BeamPair]] = {}
        for pair in active:
            by_mue.setdefault(pair.mue_id, []).append(pair)
        best = {u: min(ps, key=lambda q: (-quality[q], q)) for u, ps in by_mue.items()}
        rest = len(active) - len(best)
        share = 0.0
        if rest:
            share = (mbs.max_total_power_mw - len(best) * mbs.max_beam_power_mw) / rest
            share = min(max(share, 0.0), mbs.max_beam_power_mw)
        powers = {pair: (mbs.max_beam_power_mw if best[pair.mue_id] == pair else share)
                  for pair in active}
        if not prune or not active:
            break
        snrs = {pair: link_snr(scenario, pair, powers[pair]) for pair in active}
        worst = _weakest(snrs)
        if snrs[worst] >= eta:
            break
        active.remove(worst)
        pruned.append(worst)
    powers.update({pair: 0.0 for pair in pruned})
    return _finish(scenario, "PPA-fair", powers, pruned, len(pruned))


def ppa_unfair(scenario: Scenario, grouping: GroupingResult) -> PowerAllocation:
    """Fund the strongest ``floor(P_max / p_max)`` links at ``p_max``.

    Links that miss eta even at ``p_max`` are never funded.  The leftover
    budget goes to the next link only if it lifts that link to eta.
    """
    links = _require_links(grouping)
    mbs = scenario.mbs
    eta = scenario.eta_linear
    quality = {pair: link_quality(scenario, pair) for pair in links}
    ranked = sorted(links, key=lambda q: (-quality[q], q))
    eligible = [q for q in ranked if quality[q] >= eta]
    # small slack so that e.g. P_max = 2 * p_max is not floored to 1 by rounding
    full = math.floor(mbs.max_total_power_mw / mbs.max_beam_power_mw + 1e-9)
    powers = {pair: 0.0 for pair in links}
    funded = eligible[:full]
    for pair in funded:
        powers[pair] = mbs.max_beam_power_mw
    residual = mbs.max_total_power_mw - len(funded) * mbs.max_beam_power_mw
    if len(eligible) > len(funded) and residual > 1e-12:
        nxt = eligible[len(funded)]
        if link_snr(scenario, nxt, residual) >= eta:
            powers[nxt] = residual
    pruned = [pair for pair in ranked if powers[pair] == 0.0]
    return _finish(scenario, "PPA-unfair", powers, pruned, 0)


def single_beam(scenario: Scenario, grouping: GroupingResult) -> GroupingResult:
    """Restrict every served MUE to its strongest link (MU-SISO operation)."""
    selected = {}
    for u, pairs in grouping.selected.items():
        if pairs:
            selected[u] = (min(pairs, key=lambda q: (-link_quality(scenario, q), q)),)
    return dataclasses.replace(grouping, selected=selected)


def mu_siso(scenario: Scenario, grouping: GroupingResult) -> PowerAllocation:
    alloc = apa(scenario, single_beam(scenario, grouping))
    return dataclasses.replace(alloc, policy="MU-SISO")


POLICIES: dict[str, Callable[[Scenario, GroupingResult], PowerAllocation]] = {
    "MU-SISO": mu_siso,
    "APA": apa,
    "PPA-fair": ppa_fair,
    "PPA-unfair": ppa_unfair,
}


def link_rates(scenario: Scenario, allocation: PowerAllocation,
               mode: InterferenceMode = InterferenceMode.SIDELOBE) -> list[tuple[BeamPair, float, float]]:
    """``(pair, linear SINR, rate)`` for every powered link."""
    bw = scenario.noise.bandwidth_hz
    live = allocation.surviving
    out = []
    if mode is InterferenceMode.PENCIL:
        for l in live:
            snr = link_snr(scenario, l.pair, l.power_mw)
            out.append((l.pair, snr, shannon_rate(bw, snr)))
        return out
    powers = {l.pair.key: l.power_mw for l in live}
    keys = [l.pair.key for l in live]
    for l in live:
        sinr = link_sinr(l.pair.key, powers, [k for k in keys if k != l.pair.key],
                         scenario.tx_pattern, scenario.rx_pattern(l.mue_id),
                         scenario.pathloss_for(l.pair.path),
                         scenario.formula_distance(l.pair.path), scenario.noise)
        out.append((l.pair, sinr, shannon_rate(bw, sinr)))
    return out


def evaluate_rate(scenario: Scenario, allocation: PowerAllocation,
                  mode: InterferenceMode = InterferenceMode.SIDELOBE) -> float:
    """Sum rate over all served links, in bit/s."""
    return math.fsum(r for _, _, r in link_rates(scenario, allocation, mode))
