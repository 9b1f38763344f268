"""Deterministic message fabric for three-party runs.

Provides private pairwise channels, an authenticated broadcast (a single
payload fans out to everyone, so equivocation is impossible by construction),
an anonymizing relay through Helen, and an append-only transcript from which
every party's view is derived.

Views enforce privacy structurally: a party's view contains exactly the
envelopes addressed to it plus broadcasts.  Anonymity of forwarded quantum
data is likewise structural, since qubits carry no origin metadata.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .core import (BROADCAST, ENV, NonTerminationError, PLAYERS,
                   MalformedMessageError, SimulationIntegrityError, Verdict)
from .qsim import Basis, MeasurementRecord, Qubit

DEFAULT_MAX_STEPS = 10 ** 6


@dataclass(frozen=True)
class Envelope:
    round: int
    sender: str
    receiver: str          # a player name, or "*" for broadcast
    tag: str
    payload: Any
    private: bool = True


def jsonify(value: Any) -> Any:
    """Canonical JSON-compatible form of a payload (qubits included)."""
    if isinstance(value, Qubit):
        return {"bit": value.bit, "basis": value.basis.value,
                "disturbed": value.disturbed}
    if isinstance(value, Basis):
        return value.value
    if isinstance(value, MeasurementRecord):
        return {"index": value.index, "basis": value.basis.value,
                "outcome": value.outcome}
    if isinstance(value, dict):
        return {str(k): jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonify(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return [jsonify(v) for v in sorted(value)]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    raise MalformedMessageError(f"unserializable payload element: {value!r}")


def payload_digest(value: Any) -> str:
    blob = json.dumps(jsonify(value), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _contains_qubits(value: Any, depth: int = 3) -> bool:
    # Structural guard, not a search: qubit payloads are homogeneous shallow
    # lists, so probing the first few elements at bounded depth suffices and
    # keeps every broadcast cheap.
    if isinstance(value, Qubit):
        return True
    if depth == 0:
        return False
    if isinstance(value, dict):
        return any(_contains_qubits(v, depth - 1)
                   for v in itertools.islice(value.values(), 4))
    if isinstance(value, (list, tuple)):
        return any(_contains_qubits(v, depth - 1) for v in value[:4])
    return False


class Transcript:
    """Append-only, replayable event log of one protocol run."""

    def __init__(self, run_id: str = "run", scenario: str = "", seed: Any = None):
        self.run_id = run_id
        self.scenario = scenario
        self.seed = seed
        self.events: list[Envelope] = []
        self.verdict: Optional[Verdict] = None

    def append(self, envelope: Envelope) -> None:
        self.events.append(envelope)

    def set_verdict(self, verdict: Verdict) -> None:
        self.verdict = verdict

    def view_of(self, party: str) -> list[Envelope]:
        """Envelopes visible to one party: addressed to it, or broadcast."""
        return [e for e in self.events if e.receiver in (party, BROADCAST)]

    def serialize_view(self, party: str) -> str:
        """Canonical serialization of a party's view, payloads included."""
        rows = [{"round": e.round, "sender": e.sender, "tag": e.tag,
                 "payload": jsonify(e.payload)} for e in self.view_of(party)]
        return json.dumps(rows, sort_keys=True, separators=(",", ":"))

    def to_json(self, reveal_private: bool = False) -> dict:
        events = []
        for e in self.events:
            row: dict[str, Any] = {
                "round": e.round,
                "sender": e.sender,
                "receiver": e.receiver,
                "tag": e.tag,
                "payload_digest": payload_digest(e.payload),
            }
            if reveal_private or not e.private:
                row["payload"] = jsonify(e.payload)
            events.append(row)
        return {
            "run_id": self.run_id,
            "scenario": self.scenario,
            "seed": self.seed,
            "events": events,
            "verdict": self.verdict.to_json() if self.verdict else None,
        }


class Scheduler:
    """Round-robin activation Alice -> Bob -> Helen -> environment.

    Purely deterministic; the step cap turns runaway runs into an abort
    verdict instead of hanging the harness.
    """

    ORDER = PLAYERS + (ENV,)

    def __init__(self, max_steps: int = DEFAULT_MAX_STEPS):
        self.max_steps = max_steps
        self.steps = 0
        self._cursor = 0

    def step(self) -> str:
        if self.steps >= self.max_steps:
            raise NonTerminationError(f"step cap {self.max_steps} exceeded")
        active = self.ORDER[self._cursor]
        self._cursor = (self._cursor + 1) % len(self.ORDER)
        self.steps += 1
        return active

    def step_to(self, party: str) -> str:
        """Advance until the given party (or env) is the active one."""
        active = self.step()
        while active != party:
            active = self.step()
        return active


class Network:
    """Private channels plus authenticated broadcast over one transcript."""

    def __init__(self, transcript: Transcript | None = None,
                 max_steps: int = DEFAULT_MAX_STEPS):
        self.transcript = transcript if transcript is not None else Transcript()
        self.scheduler = Scheduler(max_steps=max_steps)
        self._round = 0
        self._masks: dict[str, str] = {}

    def _next_round(self, sender: str) -> int:
        self.scheduler.step_to(sender if sender in Scheduler.ORDER else ENV)
        self._round += 1
        return self._round

    @contextmanager
    def sender_mask(self, origin: str, front: str):
        """While active, everything ``origin`` sends appears to come from
        ``front``.  This is how one player plays a whole sub-protocol through
        another without the counterparty being able to attribute it."""
        self._masks[origin] = front
        try:
            yield
        finally:
            del self._masks[origin]

    def send_private(self, sender: str, receiver: str, payload: Any, tag: str) -> Envelope:
        sender = self._masks.get(sender, sender)
        env = Envelope(self._next_round(sender), sender, receiver, tag, payload,
                       private=True)
        self.transcript.append(env)
        return env

    def broadcast(self, sender: str, payload: Any, tag: str,
                  classical: bool = False) -> Envelope:
        """``classical=True`` asserts the caller built a qubit-free payload
        (internal hot paths); everything else gets probed."""
        if not classical and _contains_qubits(payload):
            raise MalformedMessageError("broadcast channel is classical only")
        sender = self._masks.get(sender, sender)
        env = Envelope(self._next_round(sender), sender, BROADCAST, tag, payload,
                       private=False)
        self.transcript.append(env)
        return env

    def note(self, party: str, payload: Any, tag: str) -> Envelope:
        """Private bookkeeping event (sender == receiver); makes later
        verification and curiosity audits replayable from the transcript."""
        return self.send_private(party, party, payload, tag)

    def relay_masked(self, origin: str, via: str, receiver: str, payload: Any,
                     tag: str) -> Envelope:
        """Deliver ``payload`` to ``receiver`` so that it appears to come from
        ``via``.  The receiving view carries no trace of the true origin; the
        hand-off leg stays in the transcript for auditing."""
        if origin != via:
            self.send_private(origin, via, payload, tag + ".handoff")
        return self.send_private(via, receiver, payload, tag)

    def broadcasts(self, tag_prefix: str = "") -> list[Envelope]:
        return [e for e in self.transcript.events
                if e.receiver == BROADCAST and e.tag.startswith(tag_prefix)]


@dataclass(frozen=True)
class ForwardingPlan:
    """Helen's secret interleaving of forwarded qubits with her own decoys.

    ``source_positions`` are the indices of the origin string that get
    forwarded (in increasing order); ``decoy_positions`` are the slots of the
    merged stream filled with Helen's decoys.  The remaining merged slots
    receive the forwarded qubits in order, so the two disclosures determine
    the full mapping for Alice while Bob's copy carries nothing.
    """

    source_positions: tuple[int, ...]
    decoy_positions: tuple[int, ...]

    @property
    def merged_size(self) -> int:
        return len(self.source_positions) + len(self.decoy_positions)

    def layout(self) -> list[tuple[str, int]]:
        """Per merged slot: ("decoy", j-th decoy) or ("source", origin index)."""
        decoys = set(self.decoy_positions)
        out: list[tuple[str, int]] = []
        decoy_i = 0
        source_iter = iter(self.source_positions)
        for slot in range(self.merged_size):
            if slot in decoys:
                out.append(("decoy", decoy_i))
                decoy_i += 1
            else:
                out.append(("source", next(source_iter)))
        return out

    def source_slots(self) -> dict[int, int]:
        """merged slot -> origin index, for forwarded positions only."""
        return {slot: idx for slot, (kind, idx) in enumerate(self.layout())
                if kind == "source"}

    def validate(self, n_source: int, n_decoys: int) -> None:
        if len(self.decoy_positions) != n_decoys:
            raise SimulationIntegrityError("plan decoy count mismatch")
        if any(i < 0 or i >= n_source for i in self.source_positions):
            raise SimulationIntegrityError("plan forwards out-of-range index")
        if len(set(self.source_positions)) != len(self.source_positions):
            raise SimulationIntegrityError("plan forwards an index twice")
        if sorted(self.decoy_positions) != list(self.decoy_positions) or (
                self.decoy_positions and self.decoy_positions[-1] >= self.merged_size):
            raise SimulationIntegrityError("decoy slots must be sorted and in range")

    @staticmethod
    def random(rng: random.Random, n_source: int, forward_count: int,
               decoy_count: int) -> "ForwardingPlan":
        forwarded = tuple(sorted(rng.sample(range(n_source), forward_count)))
        merged = forward_count + decoy_count
        decoy_slots = tuple(sorted(rng.sample(range(merged), decoy_count)))
        return ForwardingPlan(forwarded, decoy_slots)


def anonymized_forward(net: Network, plan: ForwardingPlan,
                       source_qubits: list[Qubit], decoy_qubits: list[Qubit],
                       sender: str, receiver: str, disclose_to: str,
                       tag: str = "forward") -> list[Qubit]:
    """Send a merged, origin-free stream to ``receiver`` and disclose the
    split (forwarded index set plus decoy slots) to ``disclose_to`` only."""
    plan.validate(len(source_qubits), len(decoy_qubits))
    merged: list[Qubit] = []
    for kind, idx in plan.layout():
        merged.append(decoy_qubits[idx] if kind == "decoy" else source_qubits[idx])
    net.send_private(sender, receiver, merged, tag)
    net.send_private(sender, disclose_to,
                     {"forwarded": list(plan.source_positions),
                      "decoy_slots": list(plan.decoy_positions)},
                     tag + ".disclosure")
    return merged
