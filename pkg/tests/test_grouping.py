import random

import pytest

from beamspace import detect_conflicts, group_users, next_cycle, train
from beamspace.training import BeamPair
from oracles import algorithm1, build, sidelobe_sinr, random_small_scenario


def pairs(*spec):
    return tuple(BeamPair(u, tx, rx) for u, tx, rx in spec)


def test_no_conflicts():
    assert detect_conflicts({1: pairs((1, 0, 0)), 2: pairs((2, 1, 1))}) == []


def test_one_conflict_on_sector_7():
    sets = detect_conflicts({1: pairs((1, 7, 0), (1, 2, 1)), 2: pairs((2, 7, 3))})
    assert len(sets) == 1
    assert sets[0].tx_sector == 7 and sets[0].mue_ids == {1, 2}


def test_two_conflict_sets():
    best = {1: pairs((1, 4, 0)), 2: pairs((2, 4, 0), (2, 9, 1)), 3: pairs((3, 4, 2), (3, 9, 3))}
    sets = detect_conflicts(best)
    assert [(c.tx_sector, len(c.mue_ids)) for c in sets] == [(4, 3), (9, 2)]


def test_conflict_free_all_served(fig4_scenario):
    sc = fig4_scenario.replace(snr_threshold_db=0.0)
    g = group_users(sc, train(sc))
    assert sorted(g.selected) == [1, 2, 3]
    assert g.deferred == () and g.total_beams == 9


def test_loser_without_candidate_is_deferred():
    sc = build([(1, 1), (2, 1)], [(1, 7, 0, 5.0), (2, 7, 3, 9.0)], eta=5.0)
    report = train(sc)
    g = group_users(sc, report)
    assert list(g.selected) == [1]
    assert g.deferred == (2,)
    assert g.carryover[2] == 1
    # the admitted MUE has the larger SINR on the contested beam
    pool = [p for t in report.per_mue.values() for p in t.best_pairs]
    power = min(sc.mbs.max_beam_power_mw, sc.mbs.max_total_power_mw / len(pool))
    s = {p.mue_id: sidelobe_sinr(sc, p, pool, power) for p in pool}
    assert s[1] > s[2]


def test_loser_switches_to_disjoint_candidate():
    sc = build([(1, 1), (2, 2)],
               [(1, 7, 0, 5.0), (2, 12, 2, 7.0), (2, 7, 3, 10.0)], eta=5.0)
    report = train(sc)
    assert {p.tx_sector for p in report.per_mue[2].best_pairs} == {7, 12}
    g = group_users(sc, report)
    assert sorted(g.selected) == [1, 2]
    assert 2 in g.switched
    assert [p.tx_sector for p in g.selected[2]] == [12]


def test_loser_whose_best_link_was_lost_does_not_switch():
    sc = build([(1, 1), (2, 2)],
               [(1, 7, 0, 5.0), (2, 7, 3, 6.0), (2, 12, 2, 14.0)], eta=5.0)
    report = train(sc)
    g = group_users(sc, report)
    assert list(g.selected) == [1] and g.deferred == (2,)


def test_capacity_top_three_by_average():
    dists = [5.0, 9.0, 6.0, 8.0, 7.0]
    mues = [(u, 3) for u in range(1, 6)]
    paths = []
    for u, d in zip(range(1, 6), dists):
        base = 6 * (u - 1)
        paths += [(u, base, 0, d), (u, base + 1, 5, 10.0), (u, base + 2, 10, 10.0)]
    sc = build(mues, paths, eta=0.0)
    report = train(sc)
    assert all(len(t.best_pairs) == 3 for t in report.per_mue.values())
    g = group_users(sc, report)
    assert sorted(g.selected) == [1, 3, 5]
    assert g.total_beams == 9
    assert g.selected == algorithm1(sc, report)


def test_empty_mue_set(table2):
    g = group_users(table2, train(table2))
    assert g.selected == {} and g.deferred == ()


def test_untrainable_mue_reported():
    sc = build([(1, 1), (2, 1)], [(1, 0, 0, 7.0), (2, 5, 5, 500.0)], eta=5.0)
    g = group_users(sc, train(sc))
    assert list(g.selected) == [1] and g.unserved == (2,)


def _check_invariants(sc, g):
    sectors = [p.tx_sector for ps in g.selected.values() for p in ps]
    assert len(sectors) == len(set(sectors))
    assert g.total_beams <= sc.mbs.max_beams


def test_matches_step_by_step_executor():
    rng = random.Random(99)
    conflicted = 0
    for _ in range(400):
        sc = random_small_scenario(rng)
        report = train(sc, 1)
        g = group_users(sc, report)
        _check_invariants(sc, g)
        assert g.selected == algorithm1(sc, report)
        conflicted += bool(g.conflicts)
    assert conflicted > 100


def test_next_cycle_all_fit_is_identity(fig4_scenario):
    sc = fig4_scenario.replace(snr_threshold_db=0.0)
    report = train(sc)
    first = group_users(sc, report)
    assert next_cycle(sc, first, report) == first


def test_alternation_under_persistent_conflict():
    sc = build([(1, 1), (2, 1)], [(1, 7, 0, 5.0), (2, 7, 3, 9.0)], eta=5.0)
    report = train(sc)
    g = group_users(sc, report)
    served = [list(g.selected)]
    for _ in range(5):
        g = next_cycle(sc, g, report)
        served.append(list(g.selected))
    assert served == [[1], [2], [1], [2], [1], [2]]


def test_deferred_then_admitted_next_cycle():
    # capacity for two single-beam MUEs; the weakest waits one cycle
    sc = build([(1, 1), (2, 1), (3, 1)],
               [(1, 7, 0, 5.0), (2, 9, 3, 9.0), (3, 20, 1, 7.0)], eta=5.0, max_beams=2)
    report = train(sc)
    g1 = group_users(sc, report)
    assert sorted(g1.selected) == [1, 3] and g1.deferred == (2,)
    g2 = next_cycle(sc, g1, report)
    assert 2 in g2.selected and list(g2.selected)[0] == 2
    _check_invariants(sc, g2)


def test_starvation_freedom():
    rng = random.Random(7)
    for _ in range(300):
        sc = random_small_scenario(rng)
        report = train(sc, 1)
        want = {u for u, t in report.per_mue.items() if t.trainable}
        g = group_users(sc, report)
        seen = set(g.selected)
        for _ in range(len(sc.mues) - 1):
            g = next_cycle(sc, g, report)
            _check_invariants(sc, g)
            seen |= set(g.selected)
        assert want <= seen
