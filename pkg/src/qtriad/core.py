"""Shared plumbing: player names, verdicts, errors, and seeded randomness.

Every run draws randomness exclusively through named streams owned by a
:class:`RngBank`, so a (scenario, seed) pair fully determines all behavior.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Any, Optional

ALICE = "Alice"
BOB = "Bob"
HELEN = "Helen"
PLAYERS = (ALICE, BOB, HELEN)

#: pseudo-party for shared/public coins (cut-and-choose challenges, schedulers)
ENV = "env"

#: broadcast receiver marker
BROADCAST = "*"


class SimulationIntegrityError(RuntimeError):
    """The simulation itself was driven incorrectly (for example a qubit was
    measured twice, or a forwarding plan does not match its inputs).

    This always means a bug in the harness or a strategy, never a protocol
    outcome; runs halt instead of producing a verdict.
    """


class MalformedMessageError(ValueError):
    """A message or transcript violates a structural rule (qubits on the
    broadcast channel, mismatched string lengths, bad indices)."""


class ConfigError(ValueError):
    """Protocol parameters outside their declared bounds."""


class StateError(RuntimeError):
    """An operation was invoked in the wrong protocol state."""


class ResourceError(RuntimeError):
    """Not enough live commitment rows left for a requested proof."""


class StatisticsError(ValueError):
    """Batch too small for the requested statistical estimate."""


class NonTerminationError(RuntimeError):
    """The scheduler exceeded its step cap; surfaced as an aborted verdict."""


class Outcome(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    CHEATER_IDENTIFIED = "cheater-identified"
    ABORTED = "aborted"


@dataclass(frozen=True)
class Verdict:
    """Result of a protocol run.

    ``evidence`` maps check-class names to mismatch summaries; a
    cheater-identified verdict always carries at least one entry.
    """

    outcome: Outcome
    cheater: Optional[str] = None
    reason: str = ""
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome is Outcome.CHEATER_IDENTIFIED:
            if not self.cheater:
                raise ValueError("cheater-identified verdict needs a cheater")
            if not self.evidence:
                raise ValueError("cheater-identified verdict needs evidence")

    @property
    def accepted(self) -> bool:
        return self.outcome is Outcome.ACCEPTED

    @property
    def detected(self) -> bool:
        """True for any non-accepting, non-aborting verdict."""
        return self.outcome in (Outcome.REJECTED, Outcome.CHEATER_IDENTIFIED)

    @classmethod
    def ok(cls, evidence: dict | None = None) -> "Verdict":
        return cls(Outcome.ACCEPTED, evidence=evidence or {})

    @classmethod
    def rejected(cls, reason: str, evidence: dict | None = None) -> "Verdict":
        return cls(Outcome.REJECTED, reason=reason, evidence=evidence or {})

    @classmethod
    def identified(cls, cheater: str, reason: str, evidence: dict) -> "Verdict":
        return cls(Outcome.CHEATER_IDENTIFIED, cheater=cheater, reason=reason,
                   evidence=evidence)

    @classmethod
    def aborted(cls, reason: str) -> "Verdict":
        return cls(Outcome.ABORTED, reason=reason)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"outcome": self.outcome.value}
        if self.cheater:
            out["cheater"] = self.cheater
        if self.reason:
            out["reason"] = self.reason
        if self.evidence:
            out["evidence"] = self.evidence
        return out


class RngBank:
    """Named, seeded random streams.

    Each party (plus the environment) draws from its own stream, seeded from
    the run seed and the stream name, so interleaving draws of one party never
    perturbs another's.  String seeding goes through ``random.seed``'s stable
    hashing, which is identical across processes and platforms.
    """

    def __init__(self, seed: int | str):
        self.seed = seed
        self._streams: dict[str, random.Random] = {}

    def stream(self, name: str) -> random.Random:
        rng = self._streams.get(name)
        if rng is None:
            rng = random.Random(f"{self.seed}:{name}")
            self._streams[name] = rng
        return rng

    def child(self, label: str) -> "RngBank":
        """Derived bank for nested sub-protocol runs."""
        return RngBank(f"{self.seed}/{label}")


def bit(rng: random.Random) -> int:
    return rng.getrandbits(1)


def xor_fold(bits) -> int:
    acc = 0
    for b in bits:
        acc ^= b
    return acc
