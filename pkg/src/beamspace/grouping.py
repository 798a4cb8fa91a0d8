"""Selection of the simultaneously served MUE set.

MUEs whose best pair sets claim the same transmit sector are in conflict,
since one beam serves one MUE at a time.  Conflicts are settled in favour of
the MUE with the strongest link on the contested beam; losers switch to an
alternate pair set when a suitable one exists and are deferred otherwise.
Deferred MUEs outrank everybody else in later cycles, oldest first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .channel import link_sinr
from .environment import Scenario
from .training import BeamPair, TrainingReport, trial_power


@dataclass(frozen=True)
class ConflictSet:
    tx_sector: int
    mue_ids: frozenset


@dataclass(frozen=True)
class GroupingResult:
    selected: dict  # mue id -> operating pair set, in admission rank order
    deferred: tuple[int, ...]
    carryover: dict = field(default_factory=dict)  # mue id -> cycles deferred in a row
    switched: frozenset = frozenset()
    unserved: tuple[int, ...] = ()
    conflicts: tuple[ConflictSet, ...] = ()

    @property
    def total_beams(self) -> int:
        return sum(len(v) for v in self.selected.values())

    @property
    def pair_count(self) -> int:
        return self.total_beams

    @property
    def links(self) -> list[BeamPair]:
        return sorted(p for pairs in self.selected.values() for p in pairs)

    def beams(self, mue_id: int) -> int:
        return len(self.selected.get(mue_id, ()))


def detect_conflicts(best_pairs: Mapping[int, Sequence[BeamPair]]) -> list[ConflictSet]:
    claims: dict[int, set[int]] = {}
    for u, pairs in best_pairs.items():
        for p in pairs:
            claims.setdefault(p.tx_sector, set()).add(u)
    return [ConflictSet(m, frozenset(us)) for m, us in sorted(claims.items()) if len(us) >= 2]


class _Quality:
    """Link SINRs under the grouping trial: every pool link (all best pairs
    of trainable MUEs) transmits at ``min(p_max, P_max / b)``."""

    def __init__(self, scenario: Scenario, best: Mapping[int, Sequence[BeamPair]]):
        self.scenario = scenario
        self.best = best
        pool = [p for pairs in best.values() for p in pairs]
        self.power = trial_power(scenario, len(pool))
        self.pool = pool
        self._cache: dict = {}

    def sinrs(self, mue_id: int, links: Sequence[BeamPair]) -> dict[BeamPair, float]:
        """SINR of ``links`` if ``mue_id`` operated on them instead of its best set."""
        key = (mue_id, tuple(links))
        if key in self._cache:
            return self._cache[key]
        sc = self.scenario
        active = [p for p in self.pool if p.mue_id != mue_id] + list(links)
        powers = {p.key: self.power for p in active}
        out = {}
        for p in links:
            out[p] = link_sinr(p.key, powers, [q.key for q in active if q.key != p.key],
                               sc.tx_pattern, sc.rx_pattern(mue_id), sc.pathloss_for(p.path),
                               sc.formula_distance(p.path), sc.noise)
        self._cache[key] = out
        return out

    def average(self, mue_id: int, links: Sequence[BeamPair]) -> float:
        s = self.sinrs(mue_id, links)
        return sum(s.values()) / len(links)


def _prefix(order: list[int], sizes: Mapping[int, int], capacity: int) -> list[int]:
    out, used = [], 0
    for u in order:
        if used + sizes[u] > capacity:
            break
        out.append(u)
        used += sizes[u]
    return out


def _admit(scenario: Scenario, training: TrainingReport, quality: _Quality, members: list[int],
           occupied: set[int], capacity: int):
    """One pass of the grouping procedure over ``members`` (equal priority).

    Sectors in ``occupied`` belong to higher-priority MUEs admitted earlier;
    touching one counts as losing a conflict.  Returns the admitted MUEs as
    ``(id, operating set, switched)`` in rank order.
    """
    best = {u: training.per_mue[u].best_pairs for u in members}
    eta = scenario.eta_linear

    def rank(u, links=None):
        return (-quality.average(u, links or best[u]), u)

    conflicts = detect_conflicts(best)
    in_conflict = {u for c in conflicts for u in c.mue_ids}
    lost = {u: {p.tx_sector for p in best[u]} & occupied for u in members}
    blocked = {u for u in members if lost[u]}
    q1 = [u for u in members if u not in in_conflict and u not in blocked]
    operating = {u: best[u] for u in members}
    switched = set()

    total = sum(len(best[u]) for u in q1)
    if set(q1) == set(members) or total > capacity:
        order = sorted(q1, key=rank)
    else:
        eliminated = set(blocked)
        winners: list[int] = []
        for c in conflicts:
            contenders = [u for u in c.mue_ids if u not in eliminated]
            if not contenders:
                continue

            def on_beam(u, m=c.tx_sector):
                link = next(p for p in best[u] if p.tx_sector == m)
                return (-quality.sinrs(u, best[u])[link], u)

            contenders.sort(key=on_beam)
            for u in contenders[1:]:
                eliminated.add(u)
                lost[u].add(c.tx_sector)
                if u in winners:
                    winners.remove(u)
            if contenders[0] not in winners:
                winners.append(contenders[0])
        q1 = q1 + winners
        taken = set(occupied)
        for u in q1:
            taken.update(p.tx_sector for p in best[u])
        for u in sorted((u for u in members if u not in q1), key=rank):
            s = quality.sinrs(u, best[u])
            top = max(s.values())
            if any(s[p] == top for p in best[u] if p.tx_sector in lost[u]):
                continue  # its strongest link is the contested one: no switching
            for cand in training.per_mue[u].candidates:
                if {p.tx_sector for p in cand} & taken:
                    continue
                if all(v >= eta for v in quality.sinrs(u, cand).values()):
                    operating[u] = cand
                    switched.add(u)
                    taken.update(p.tx_sector for p in cand)
                    q1.append(u)
                    break
        order = sorted(q1, key=lambda u: rank(u, operating[u]))

    sizes = {u: len(operating[u]) for u in order}
    chosen = _prefix(order, sizes, capacity)
    return [(u, operating[u], u in switched) for u in chosen]


def _run(scenario: Scenario, training: TrainingReport, ages: Mapping[int, int]) -> GroupingResult:
    trainable = sorted(u for u, t in training.per_mue.items() if t.trainable)
    unserved = tuple(sorted(u for u, t in training.per_mue.items() if not t.trainable))
    if not trainable:
        return GroupingResult({}, (), {}, frozenset(), unserved, ())
    best = {u: training.per_mue[u].best_pairs for u in trainable}
    quality = _Quality(scenario, best)

    selected: dict[int, tuple[BeamPair, ...]] = {}
    switched = set()
    occupied: set[int] = set()
    capacity = scenario.mbs.max_beams
    for age in sorted({ages.get(u, 0) for u in trainable}, reverse=True):
        tier = [u for u in trainable if ages.get(u, 0) == age]
        for u, links, sw in _admit(scenario, training, quality, tier, occupied, capacity):
            selected[u] = links
            if sw:
                switched.add(u)
            occupied.update(p.tx_sector for p in links)
            capacity -= len(links)

    carry = {u: 0 if u in selected else ages.get(u, 0) + 1 for u in trainable}
    deferred = sorted((u for u in trainable if u not in selected),
                      key=lambda u: (-carry[u], -quality.average(u, best[u]), u))
    return GroupingResult(selected, tuple(deferred), carry, frozenset(switched), unserved,
                          tuple(detect_conflicts(best)))


def group_users(scenario: Scenario, training: TrainingReport) -> GroupingResult:
    """Pick the simultaneous MUE set for one transmission cycle."""
    return _run(scenario, training, {})


def next_cycle(scenario: Scenario, previous: GroupingResult,
               training: TrainingReport) -> GroupingResult:
    """Group for the following cycle, serving previously deferred MUEs first.

    MUEs are processed in priority tiers by how many cycles in a row they
    have been deferred; each tier runs the same procedure as
    :func:`group_users` on the beams and capacity left by the tiers above it.
    """
    return _run(scenario, training, previous.carryover)
