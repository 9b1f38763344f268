"""Anonymized three-party bit commitment.

Alice commits a bit toward Bob and Helen even while Alice and Bob are in
conflict.  Per round, Alice hands Helen a string of qubits in random bases;
Helen forwards half of them to Bob interleaved with her own decoys (Bob
cannot attribute origins); Bob measures everything immediately in fresh
random bases and, with probability 1/2, publishes all his results; Alice
then opens her bases to Helen.  After the last round Alice is bound to the
XOR of the parities of the rounds Bob did *not* publish, and announces
whether that parity equals her bit.

Detection works by sifting: only positions where the measurement basis
matched the preparation basis are checkable, and honest ideal qubits give
exactly zero mismatches there, so any per-round mismatch fraction above the
threshold is evidence.  Complaint attribution follows the conflict
structure: Helen's decoys vouch for the channel, so Bob complaining without
cause necessarily accuses her decoys and convicts himself, while published
mismatches confined to Alice's data with Helen silent reject the run.

At unveil time Alice opens all choices; Helen checks her retained half
(measured in fresh random bases as an anchor) and Bob checks his own records
against the claimed openings.  Each altered claimed bit survives with
probability 1/2 per check position, so a parity flip attempt dies
geometrically in the number of altered positions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .core import (ALICE, BOB, HELEN, ConfigError, StateError, Outcome,
                   Verdict, xor_fold)
from .netsim import ForwardingPlan, Transcript, anonymized_forward
from .qsim import Basis, MeasurementRecord, intercept_resend, measure, prepare


def parity(bits) -> int:
    """XOR fold of a nonempty bit string."""
    bits = list(bits)
    if not bits:
        raise ConfigError("parity of empty string")
    return xor_fold(bits)


@dataclass
class CommitParams:
    rounds: int = 16                 # commitment rounds
    qubits_per_round: int = 32       # length of each round's qubit string
    mismatch_threshold: float = 0.05 # tolerated mismatch fraction per check class

    #: Bob's per-round publication probability; fixed by the protocol.
    PUBLISH_PROBABILITY = 0.5

    def validate(self) -> None:
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.qubits_per_round < 8:
            raise ConfigError("qubits_per_round must be >= 8")
        if not (0 < self.mismatch_threshold < 0.25):
            raise ConfigError("mismatch_threshold must be in (0, 0.25)")


class AliceBehavior(enum.Enum):
    HONEST = "honest"
    BINDING_FLIP = "binding-flip"        # tries to unveil the opposite bit


class HelenBehavior(enum.Enum):
    HONEST = "honest"
    CURIOUS = "curious"                  # protocol-honest, measures retained
                                         # qubits in the opened bases
    INTERCEPT_RESEND = "intercept-resend"  # attacks forwarded qubits


class BobBehavior(enum.Enum):
    HONEST = "honest"
    BASELESS_COMPLAINT = "baseless-complaint"


@dataclass
class Behaviors:
    alice: AliceBehavior = AliceBehavior.HONEST
    helen: HelenBehavior = HelenBehavior.HONEST
    bob: BobBehavior = BobBehavior.HONEST


@dataclass
class RoundState:
    """Everything one round produced, across all three private states."""

    bits: list[int]                     # Alice's random bits
    bases: list[Basis]                  # Alice's random bases
    plan: ForwardingPlan                # Helen's secret interleave
    decoy_bits: list[int]
    decoy_bases: list[Basis]
    bob_records: list[MeasurementRecord]
    published: bool = False
    opened_bases: bool = False
    # Helen's anchor measurements of the retained half: index -> (basis, outcome)
    retained_records: dict = field(default_factory=dict)


@dataclass
class CommitmentHandle:
    """Alice's side of an accepted commitment plus the public binding data."""

    committed_bit: int
    contributing_rounds: tuple[int, ...]
    round_parities: dict
    announcement: int                   # public flag: parity XOR committed bit
    _run: "CommitRun" = field(repr=False, default=None)


@dataclass
class CommitRun:
    """Internal full state of a commit execution, kept for unveil and audits."""

    ctx: object
    params: CommitParams
    behaviors: Behaviors
    rounds: list[RoundState] = field(default_factory=list)
    verdict: Optional[Verdict] = None
    handle: Optional[CommitmentHandle] = None
    unveiled: bool = False
    secret_bit: int = 0


def _complain(net, sender: str, about: str, cls: str, round_index: int,
              mismatches: int, checked: int) -> None:
    net.broadcast(sender, {
        "about": about, "class": cls, "round": round_index,
        "mismatches": mismatches, "checked": checked,
    }, "complaint")


def _check_positions(records, positions, expected_bits, expected_bases):
    """Count sifted mismatches: (mismatches, checked) over matched bases."""
    mismatches = checked = 0
    for slot, ref in positions:
        rec = records[slot]
        if rec.basis is expected_bases[ref]:
            checked += 1
            if rec.outcome != expected_bits[ref]:
                mismatches += 1
    return mismatches, checked


def _exceeds(mismatches: int, checked: int, threshold: float) -> bool:
    return checked > 0 and mismatches / checked > threshold


def commit(ctx, secret_bit: int, params: CommitParams | None = None,
           behaviors: Behaviors | None = None):
    """Run the commit phase.

    Returns ``(handle, verdict, transcript)``.  The handle is ``None`` unless
    the verdict is accepting.
    """
    params = params or CommitParams()
    params.validate()
    behaviors = behaviors or Behaviors()
    if secret_bit not in (0, 1):
        raise ConfigError("committed bit must be 0 or 1")

    net = ctx.net
    alice_rng = ctx.rng("alice")
    bob_rng = ctx.rng("bob")
    helen_rng = ctx.rng("helen")
    n = params.qubits_per_round
    forward_count = n // 2
    run = CommitRun(ctx=ctx, params=params, behaviors=behaviors,
                    secret_bit=secret_bit)

    net.note(ALICE, {"bit": secret_bit}, "commit.intent")

    for round_index in range(params.rounds):
        # Alice prepares a random string in random bases and hands it to Helen.
        bits = [alice_rng.getrandbits(1) for _ in range(n)]
        bases = [Basis.random(alice_rng) for _ in range(n)]
        qubits = [prepare(b, s) for b, s in zip(bits, bases)]
        net.note(ALICE, {"round": round_index, "bits": bits, "bases": bases},
                 "commit.alice-prep")
        net.send_private(ALICE, HELEN, qubits, "commit.qubits")

        # Helen interleaves a forwarded half with her own decoys.
        plan = ForwardingPlan.random(helen_rng, n, forward_count,
                                     n - forward_count)
        decoy_bits = [helen_rng.getrandbits(1) for _ in range(n - forward_count)]
        decoy_bases = [Basis.random(helen_rng) for _ in range(n - forward_count)]
        decoys = [prepare(b, s) for b, s in zip(decoy_bits, decoy_bases)]
        source = list(qubits)
        if behaviors.helen is HelenBehavior.INTERCEPT_RESEND:
            for idx in plan.source_positions:
                source[idx] = intercept_resend(source[idx],
                                               Basis.random(helen_rng), helen_rng)
        merged = anonymized_forward(net, plan, source, decoys,
                                    sender=HELEN, receiver=BOB,
                                    disclose_to=ALICE, tag="commit.forward")
        net.note(HELEN, {"round": round_index,
                         "forwarded": list(plan.source_positions),
                         "decoy_slots": list(plan.decoy_positions),
                         "decoy_bits": decoy_bits,
                         "decoy_bases": decoy_bases}, "commit.plan")
        retained = {idx: qubits[idx] for idx in range(n)
                    if idx not in plan.source_positions}

        # Bob measures everything at once in fresh random bases.
        records = []
        for slot, q in enumerate(merged):
            basis = Basis.random(bob_rng)
            records.append(MeasurementRecord(slot, basis, measure(q, basis, bob_rng)))
        net.broadcast(BOB, {"round": round_index}, "commit.received")
        net.note(BOB, {"round": round_index,
                       "records": records}, "commit.bob-records")

        state = RoundState(bits=bits, bases=bases, plan=plan,
                           decoy_bits=decoy_bits, decoy_bases=decoy_bases,
                           bob_records=records)
        run.rounds.append(state)

        if behaviors.bob is BobBehavior.BASELESS_COMPLAINT and round_index == 0:
            # A complaint about the merged stream cannot avoid Helen's decoys,
            # since Bob has no way to tell the origins apart.
            net.broadcast(BOB, {"about": "stream", "class": "received-stream",
                                "round": round_index,
                                "slots": list(range(len(merged)))}, "complaint")
            accused_decoys = len(plan.decoy_positions)
            _complain(net, HELEN, BOB, "baseless-complaint", round_index,
                      mismatches=accused_decoys, checked=accused_decoys)

        state.published = bob_rng.random() < CommitParams.PUBLISH_PROBABILITY
        if state.published:
            net.broadcast(BOB, {"round": round_index, "records": records},
                          "commit.publish")
            # Helen checks her decoys against the published results.
            decoy_positions = [(slot, idx) for slot, (kind, idx)
                               in enumerate(plan.layout()) if kind == "decoy"]
            mism, checked = _check_positions(records, decoy_positions,
                                             decoy_bits, decoy_bases)
            if _exceeds(mism, checked, params.mismatch_threshold):
                _complain(net, HELEN, BOB, "decoy", round_index, mism, checked)
            # Alice checks her forwarded positions (she knows the mapping).
            source_positions = sorted(plan.source_slots().items())
            mism, checked = _check_positions(records, source_positions,
                                             bits, bases)
            if _exceeds(mism, checked, params.mismatch_threshold):
                _complain(net, ALICE, "stream", "alice-forwarded", round_index,
                          mism, checked)
        else:
            net.broadcast(BOB, {"round": round_index}, "commit.hold")

        # Alice opens her bases to Helen; Helen measures her retained half as
        # an anchor for the unveil-time consistency check.
        net.send_private(ALICE, HELEN, {"round": round_index, "bases": bases},
                         "commit.open-bases")
        state.opened_bases = True
        for idx in sorted(retained):
            if behaviors.helen is HelenBehavior.CURIOUS:
                anchor_basis = bases[idx]
            else:
                anchor_basis = Basis.random(helen_rng)
            outcome = measure(retained[idx], anchor_basis, helen_rng)
            state.retained_records[idx] = (anchor_basis, outcome)
        net.note(HELEN, {"round": round_index,
                         "retained": {str(i): (b.value, o) for i, (b, o)
                                      in sorted(state.retained_records.items())}},
                 "commit.retained-measurements")

    contributing = tuple(i for i, st in enumerate(run.rounds) if not st.published)
    if not contributing:
        verdict = Verdict.aborted("no contributing rounds")
        net.transcript.set_verdict(verdict)
        run.verdict = verdict
        return None, verdict, net.transcript

    round_parities = {i: parity(run.rounds[i].bits) for i in contributing}
    bound_parity = xor_fold(round_parities.values())
    announcement = bound_parity ^ secret_bit
    net.broadcast(ALICE, {"flag": announcement,
                          "contributing": list(contributing)}, "commit.announce")

    verdict = _commit_verdict(net.transcript, params)
    net.transcript.set_verdict(verdict)
    run.verdict = verdict
    handle = None
    if verdict.accepted:
        handle = CommitmentHandle(committed_bit=secret_bit,
                                  contributing_rounds=contributing,
                                  round_parities=round_parities,
                                  announcement=announcement,
                                  _run=run)
        run.handle = handle
    return handle, verdict, net.transcript


def _gather_complaints(transcript: Transcript) -> list[dict]:
    return [e.payload for e in transcript.events
            if e.tag == "complaint" and e.receiver == "*"]


def _evidence(complaints: list[dict], classes: tuple[str, ...]) -> dict:
    out: dict = {}
    for c in complaints:
        if c.get("class") in classes:
            entry = out.setdefault(c["class"], {"mismatches": 0, "checked": 0,
                                                "rounds": []})
            entry["mismatches"] += c["mismatches"]
            entry["checked"] += c["checked"]
            entry["rounds"].append(c["round"])
    return out


def _commit_verdict(transcript: Transcript, params: CommitParams) -> Verdict:
    complaints = _gather_complaints(transcript)
    against_bob = _evidence(complaints, ("decoy", "baseless-complaint"))
    if against_bob:
        return Verdict.identified(BOB, "complaints implicate the receiver",
                                  against_bob)
    alice_side = _evidence(complaints, ("alice-forwarded",))
    if alice_side:
        # Mismatches on forwarded data with Helen silent cannot be pinned on a
        # single player without assuming a (disallowed) collusion; flag and
        # reject.
        alice_side["collusion_flag"] = True
        return Verdict.rejected("published results inconsistent with forwarded data",
                                alice_side)
    clean = {"decoy": {"mismatches": 0, "checked": 0},
             "alice-forwarded": {"mismatches": 0, "checked": 0}}
    return Verdict.ok(clean)


def unveil(handle: CommitmentHandle):
    """Open an accepted commitment.  Returns ``(bit, verdict)``."""
    if handle is None or handle._run is None:
        raise StateError("unveil before a successful commit")
    run = handle._run
    if run.verdict is None or not run.verdict.accepted:
        raise StateError("unveil of a never-accepted handle")
    if run.unveiled:
        raise StateError("commitment already unveiled")
    run.unveiled = True

    ctx, params, behaviors = run.ctx, run.params, run.behaviors
    net = ctx.net
    n = params.qubits_per_round
    alice_rng = ctx.rng("alice")

    claimed = [list(st.bits) for st in run.rounds]
    if behaviors.alice is AliceBehavior.BINDING_FLIP:
        target = handle.contributing_rounds[0]
        st = run.rounds[target]
        retained = [i for i in range(n) if i not in st.plan.source_positions]
        flips = max(1, n // 4)
        if flips % 2 == 0:
            flips -= 1
        flips = min(flips, len(retained))
        if flips % 2 == 0:
            flips -= 1
        for idx in alice_rng.sample(retained, flips):
            claimed[target][idx] ^= 1

    net.broadcast(ALICE, {"rounds": [
        {"bits": claimed[i], "bases": [b.value for b in st.bases]}
        for i, st in enumerate(run.rounds)]}, "unveil.open")
    net.broadcast(HELEN, {"rounds": [
        {"forwarded": list(st.plan.source_positions),
         "decoy_slots": list(st.plan.decoy_positions),
         "retained": {str(i): (b.value, o) for i, (b, o)
                      in sorted(st.retained_records.items())}}
        for st in run.rounds]}, "unveil.helen")
    net.broadcast(BOB, {"rounds": [{"records": st.bob_records}
                                   for st in run.rounds]}, "unveil.bob")

    for i, st in enumerate(run.rounds):
        mism = checked = 0
        for idx, (basis, outcome) in sorted(st.retained_records.items()):
            if basis is st.bases[idx]:
                checked += 1
                if outcome != claimed[i][idx]:
                    mism += 1
        if _exceeds(mism, checked, params.mismatch_threshold):
            _complain(net, HELEN, ALICE, "retained", i, mism, checked)

        mism, checked = _check_positions(st.bob_records,
                                         sorted(st.plan.source_slots().items()),
                                         claimed[i], st.bases)
        if _exceeds(mism, checked, params.mismatch_threshold):
            _complain(net, BOB, ALICE, "bob-open", i, mism, checked)

    complaints = [c for c in _gather_complaints(net.transcript)
                  if c.get("class") in ("retained", "bob-open")]
    retained_ev = _evidence(complaints, ("retained",))
    if retained_ev:
        verdict = Verdict.identified(ALICE, "openings contradict retained checks",
                                     retained_ev)
        net.transcript.set_verdict(verdict)
        return None, verdict
    bob_ev = _evidence(complaints, ("bob-open",))
    if bob_ev:
        verdict = Verdict.rejected("openings contradict receiver records", bob_ev)
        net.transcript.set_verdict(verdict)
        return None, verdict

    revealed = xor_fold(parity(claimed[i]) for i in handle.contributing_rounds)
    bit = revealed ^ handle.announcement
    verdict = Verdict.ok({"retained": {"mismatches": 0, "checked": 0},
                          "bob-open": {"mismatches": 0, "checked": 0}})
    net.transcript.set_verdict(verdict)
    return bit, verdict


def verify_transcript(transcript: Transcript, params: CommitParams | None = None) -> Verdict:
    """Recompute the verdict of a commit (and optional unveil) from its
    transcript alone; replaying the same transcript reproduces the verdict."""
    params = params or CommitParams()
    complaints = _gather_complaints(transcript)
    unveiled = any(e.tag == "unveil.open" for e in transcript.events)
    if unveiled:
        retained_ev = _evidence(complaints, ("retained",))
        if retained_ev:
            return Verdict.identified(ALICE, "openings contradict retained checks",
                                      retained_ev)
        bob_ev = _evidence(complaints, ("bob-open",))
        if bob_ev:
            return Verdict.rejected("openings contradict receiver records", bob_ev)
        return Verdict.ok({"retained": {"mismatches": 0, "checked": 0},
                           "bob-open": {"mismatches": 0, "checked": 0}})
    announced = any(e.tag == "commit.announce" for e in transcript.events)
    if not announced:
        return Verdict.aborted("no contributing rounds")
    return _commit_verdict(transcript, params)
