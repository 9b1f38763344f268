"""Monotone adversary structures and protocol-feasibility decision rules.

An adversary structure over a player set is a monotone family of subsets
(any one of which may collude), stored here as its antichain of maximal
sets.  Classical protocols with pairwise oblivious transfer and broadcast
exist for all functions iff no two member sets cover the complement of any
single player (or there are only two players); quantum three-party-style
protocols exist iff no two member sets cover the whole player set.  After a
clean termination the structure may be extended with complements of sets
containing a trusted player.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .core import ConfigError

MAX_PLAYERS = 16


def _antichain(sets: Iterable[frozenset]) -> tuple[frozenset, ...]:
    """Drop duplicates and any set contained in another."""
    unique = set(sets)
    maximal = [s for s in unique
               if not any(s < other for other in unique)]
    return tuple(sorted(maximal, key=lambda s: (len(s), sorted(s))))


@dataclass(frozen=True)
class PlayerSet:
    players: tuple

    def __post_init__(self):
        if not self.players:
            raise ConfigError("player set is empty")
        if len(set(self.players)) != len(self.players):
            raise ConfigError("duplicate player ids")
        if len(self.players) > MAX_PLAYERS:
            raise ConfigError(f"at most {MAX_PLAYERS} players supported")

    @staticmethod
    def of(*players) -> "PlayerSet":
        return PlayerSet(tuple(players))

    def as_set(self) -> frozenset:
        return frozenset(self.players)


class AdversaryStructure:
    """Monotone family represented by its maximal sets."""

    def __init__(self, maximal_sets: Iterable[Iterable]):
        self.maximal = _antichain(frozenset(s) for s in maximal_sets)

    def __eq__(self, other):
        return isinstance(other, AdversaryStructure) and self.maximal == other.maximal

    def __hash__(self):
        return hash(self.maximal)

    def __repr__(self):
        inner = "; ".join("{" + ",".join(sorted(map(str, s))) + "}"
                          for s in self.maximal)
        return f"AdversaryStructure({inner})"

    def contains(self, subset: Iterable) -> bool:
        """Membership in the monotone closure."""
        s = frozenset(subset)
        return any(s <= m for m in self.maximal)

    def closure(self, players: PlayerSet) -> set[frozenset]:
        """All member sets (exponential; fine at checker scale)."""
        out: set[frozenset] = set()
        for m in self.maximal:
            members = sorted(m)
            for mask in range(1 << len(members)):
                out.add(frozenset(p for i, p in enumerate(members)
                                  if mask >> i & 1))
        return out

    def to_json(self) -> list[list]:
        return [sorted(map(str, s)) for s in self.maximal]


def classical_feasible(players: PlayerSet, structure: AdversaryStructure):
    """All-function feasibility over pairwise OT plus broadcast.

    Returns ``(feasible, witness)``; the witness of infeasibility is a pair
    of member sets covering everyone but some single player.
    """
    everyone = players.as_set()
    if len(everyone) == 2:
        return True, None
    for lone in sorted(everyone):
        rest = everyone - {lone}
        for a1 in structure.maximal:
            for a2 in structure.maximal:
                if rest <= (a1 | a2):
                    return False, {"player": lone, "pair": [sorted(a1), sorted(a2)]}
    return True, None


def quantum_feasible(players: PlayerSet, structure: AdversaryStructure):
    """All-function feasibility over quantum channels plus broadcast.

    Returns ``(feasible, witness)``; the witness is a pair of member sets
    covering the whole player set.
    """
    everyone = players.as_set()
    for a1 in structure.maximal:
        for a2 in structure.maximal:
            if (a1 | a2) >= everyone:
                return False, {"pair": [sorted(a1), sorted(a2)]}
    return True, None


def post_termination_structure(players: PlayerSet, structure: AdversaryStructure,
                               trusted) -> AdversaryStructure:
    """Extend a quantum-feasible structure with the complements of member
    sets that contain the trusted player (the complements therefore exclude
    the trusted player).

    Adding the complement of the singleton dominates the complement of every
    larger member containing the trusted player, so the extension reduces to
    at most one new maximal set.
    """
    everyone = players.as_set()
    if trusted not in everyone:
        raise ConfigError(f"trusted player {trusted!r} not in the player set")
    feasible, _ = quantum_feasible(players, structure)
    if not feasible:
        raise ConfigError("structure is not quantum-feasible to begin with")
    additions = []
    if structure.contains({trusted}):
        additions.append(everyone - {trusted})
    extended = AdversaryStructure(list(structure.maximal) + additions)
    covered = any((a1 | a2) >= everyone - {trusted}
                  for a1 in structure.maximal for a2 in structure.maximal)
    if covered and structure.contains({trusted}):
        # The interesting case: the rest of the players could be covered by
        # two collusions, and trusting this one player must buy the
        # complement guarantee.
        assert extended.contains(everyone - {trusted}), \
            "covering structures must gain the complement guarantee"
    return extended


def complaints_in(transcript) -> dict:
    """Players complained about, per the transcript's complaint broadcasts."""
    accused = {}
    for event in transcript.events:
        if event.tag == "complaint" and isinstance(event.payload, dict):
            about = event.payload.get("about")
            if about in ("Alice", "Bob", "Helen"):
                accused.setdefault(about, []).append(event.payload.get("class"))
    return accused


def verdict_structure(transcript, players: Optional[PlayerSet] = None):
    """Post-run security structures a finished three-party transcript
    supports.

    With a cheater identified, the remaining pair runs two-party style and
    the structure collapses to their singletons.  Otherwise every pair
    collusion whose excluded player was never complained about yields the
    base singleton structure extended by that pair.
    """
    players = players or PlayerSet.of("Alice", "Bob", "Helen")
    base = AdversaryStructure([{p} for p in players.players])
    verdict = transcript.verdict
    if verdict is not None and verdict.cheater:
        rest = [p for p in players.players if p != verdict.cheater]
        return [AdversaryStructure([{p} for p in rest])]
    accused = set(complaints_in(transcript))
    out = []
    for excluded in players.players:
        if excluded in accused:
            continue
        pair = players.as_set() - {excluded}
        out.append(AdversaryStructure(list(base.maximal) + [pair]))
    return out
