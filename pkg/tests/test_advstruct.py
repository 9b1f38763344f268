"""Feasibility checkers against brute-force enumeration over all monotone
structures on up to four players."""

import itertools

import pytest

from qtriad.advstruct import (AdversaryStructure, PlayerSet,
                              classical_feasible, complaints_in,
                              post_termination_structure, quantum_feasible,
                              verdict_structure)
from qtriad.commitment import Behaviors, BobBehavior, commit
from qtriad.context import RunContext
from qtriad.core import ALICE, BOB, HELEN, ConfigError

THREE = PlayerSet.of(ALICE, BOB, HELEN)
SINGLETONS = AdversaryStructure([{ALICE}, {BOB}, {HELEN}])


def all_antichains(players: tuple):
    """Every antichain of nonempty subsets (maximal-set representations)."""
    subsets = []
    for r in range(1, len(players) + 1):
        subsets.extend(frozenset(c) for c in itertools.combinations(players, r))
    for mask in range(1 << len(subsets)):
        family = [s for i, s in enumerate(subsets) if mask >> i & 1]
        if all(not (a < b or b < a) for a, b in itertools.combinations(family, 2)):
            yield family


def brute_classical(players: tuple, structure: AdversaryStructure) -> bool:
    if len(players) == 2:
        return True
    closure = structure.closure(PlayerSet(players))
    everyone = frozenset(players)
    for lone in players:
        rest = everyone - {lone}
        for a1 in closure:
            for a2 in closure:
                if rest <= (a1 | a2):
                    return False
    return True


def brute_quantum(players: tuple, structure: AdversaryStructure) -> bool:
    closure = structure.closure(PlayerSet(players))
    everyone = frozenset(players)
    return not any((a1 | a2) >= everyone
                   for a1 in closure for a2 in closure)


def test_three_party_singletons_split_the_two_worlds():
    classical, witness = classical_feasible(THREE, SINGLETONS)
    assert classical is False
    assert witness["player"] in (ALICE, BOB, HELEN)
    quantum, _ = quantum_feasible(THREE, SINGLETONS)
    assert quantum is True


def test_two_players_always_classically_feasible():
    two = PlayerSet.of("p1", "p2")
    anything = AdversaryStructure([{"p1"}, {"p2"}])
    assert classical_feasible(two, anything)[0] is True


def test_four_singletons_classically_feasible():
    four = PlayerSet.of("p1", "p2", "p3", "p4")
    structure = AdversaryStructure([{p} for p in four.players])
    assert classical_feasible(four, structure)[0] is True
    assert quantum_feasible(four, structure)[0] is True


def test_pair_plus_singleton_covers_quantumly():
    structure = AdversaryStructure([{ALICE, BOB}, {HELEN}])
    feasible, witness = quantum_feasible(THREE, structure)
    assert feasible is False
    assert sorted(map(sorted, witness["pair"])) == [["Alice", "Bob"], ["Helen"]]


@pytest.mark.parametrize("n_players", [2, 3, 4])
def test_checkers_match_brute_force_everywhere(n_players):
    players = tuple(f"p{i}" for i in range(n_players))
    pset = PlayerSet(players)
    count = 0
    for family in all_antichains(players):
        structure = AdversaryStructure(family)
        assert classical_feasible(pset, structure)[0] == \
            brute_classical(players, structure)
        assert quantum_feasible(pset, structure)[0] == \
            brute_quantum(players, structure)
        count += 1
    assert count >= {2: 4, 3: 19, 4: 165}[n_players]


def test_removing_a_maximal_set_never_breaks_feasibility():
    players = tuple(f"p{i}" for i in range(4))
    pset = PlayerSet(players)
    for family in all_antichains(players):
        if len(family) < 2:
            continue
        structure = AdversaryStructure(family)
        for drop in range(len(family)):
            smaller = AdversaryStructure(family[:drop] + family[drop + 1:])
            for checker in (classical_feasible, quantum_feasible):
                if checker(pset, structure)[0]:
                    assert checker(pset, smaller)[0]


def test_post_termination_extension_three_party():
    extended = post_termination_structure(THREE, SINGLETONS, HELEN)
    assert frozenset({ALICE, BOB}) in extended.maximal
    assert frozenset({HELEN}) in extended.maximal
    assert len(extended.maximal) == 2  # singletons absorbed into the pair


def test_post_termination_any_trusted_player():
    extended = post_termination_structure(THREE, SINGLETONS, ALICE)
    assert frozenset({BOB, HELEN}) in extended.maximal


def test_post_termination_stays_an_antichain():
    for trusted in (ALICE, BOB, HELEN):
        extended = post_termination_structure(THREE, SINGLETONS, trusted)
        for a, b in itertools.combinations(extended.maximal, 2):
            assert not (a <= b or b <= a)


def test_post_termination_rejects_unknown_trusted():
    with pytest.raises(ConfigError):
        post_termination_structure(THREE, SINGLETONS, "Mallory")


def test_verdict_structure_no_complaints_emits_all_three():
    ctx = RunContext("vs-clean")
    commit(ctx, 0)
    structures = verdict_structure(ctx.transcript)
    assert len(structures) == 3
    pairs = {s for st in structures for s in st.maximal if len(s) == 2}
    assert pairs == {frozenset({ALICE, BOB}), frozenset({ALICE, HELEN}),
                     frozenset({BOB, HELEN})}


def test_verdict_structure_excludes_complained_about_players():
    ctx = RunContext("vs-bob")
    commit(ctx, 0, behaviors=Behaviors(bob=BobBehavior.BASELESS_COMPLAINT))
    assert BOB in complaints_in(ctx.transcript)
    structures = verdict_structure(ctx.transcript)
    # Bob was identified, so the run collapses to the remaining pair.
    assert structures == [AdversaryStructure([{ALICE}, {HELEN}])]


def test_verdict_structure_complaint_without_identification():
    from qtriad.commitment import HelenBehavior
    for seed in range(10):
        ctx = RunContext(f"vs-ir{seed}")
        _, verdict, _ = commit(ctx, 1,
                               behaviors=Behaviors(helen=HelenBehavior.INTERCEPT_RESEND))
        if verdict.cheater is None and verdict.detected:
            structures = verdict_structure(ctx.transcript)
            # Alice complained about the stream, nobody was identified: every
            # extension with an uncomplained excluded player remains.
            assert len(structures) == 3
            return
    pytest.fail("expected at least one rejected-but-unidentified run")
