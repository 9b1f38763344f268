"""Committed oblivious transfer on globally tied commitments.

The conflict-sensitive core ("sub" protocol, steps 2-7) transfers one
codeword of an agreed linear code.  The sender commits bitwise to two random
distinct nonzero codewords and proves the parity-check relations; the
receiver picks two disjoint test sets and flips its per-index choice bit on
the first, fetches every position through a forced-measurement oblivious
transfer, has both codewords opened on the union of the test sets, and
checks it received the unchosen lane on the flipped set and the chosen lane
on the other.  It then substitutes the opened chosen-lane values on the
flipped set, corrects the word with the code's decoder, commits to it
bitwise and proves it is a codeword.  A public extra test set (disjoint from
the union) is opened on both lanes; the receiver proves its word matches at
the positions where the lanes agree (where they differ the claim is vacuous
and proving it would only leak the choice bit).

Completion (steps 8-9): the sender announces a parity-subset privacy
amplification map h with h(c0) = a0 and h(c1) = a1 and proves both relations
on the commitments; the receiver commits to a = h(w) and proves it, ending
up committed to the payload bit selected by its committed choice.

Trial wrapper: the real sender plays the whole core anonymously through
Helen, and after a failure Helen starts interleaving pretended instances
with her own fresh inputs that the receiver cannot tell apart from real
ones.  If no real instance succeeds within the trial budget, the complaint
pattern convicts exactly one player: complaints confined to the real
sender's data convict the sender; complaints touching pretended data convict
the receiver.
"""

from __future__ import annotations

import enum
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Optional

from .bcx import (GbcxCommitment, LinearRelationClaim, bcx_commit_batch,
                  gbcx_commit, open_bcx, prove_linear)
from .codes import LinearCode, default_code
from .core import (ALICE, BOB, HELEN, ConfigError, Outcome,
                   SimulationIntegrityError, Verdict, xor_fold)
from .ot import OtParams, ot_transfer


@dataclass
class GcotParams:
    code: LinearCode = field(default_factory=default_code)
    trials: int = 8                  # trial budget for the anonymized loop
    ot: OtParams = field(default_factory=lambda: OtParams(qubits=16))
    proof_rows: int = 4              # rows spent per inner linear proof
    codeword_rows: int = 64          # rows per codeword-bit commitment
    w_rows: int = 64                 # rows per received-word bit commitment
    output_rows: int = 16            # rows for choice/output commitments
    amplification_resamples: int = 64

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        self.ot.validate()
        m = self.code.length
        if 3 * self.code.test_count >= m:
            raise ConfigError("test sets would not fit the code length")


class SenderBehavior(enum.Enum):
    HONEST = "honest"
    COMPLEMENT_ANSWERS = "complement-answers"   # every OT reply contradicts
                                                # the commitments
    CORRUPT_POSITIONS = "corrupt-positions"     # a chosen-size random subset


class ReceiverBehavior(enum.Enum):
    HONEST = "honest"
    COMPLAIN_ALWAYS = "complain-always"         # disputes every instance
    SUBSTITUTE_WORD = "substitute-word"         # commits the complemented word


@dataclass
class GcotBehaviors:
    sender: SenderBehavior = SenderBehavior.HONEST
    receiver: ReceiverBehavior = ReceiverBehavior.HONEST
    corrupt_count: int = 4


@dataclass
class GcotSession:
    origin: str                      # "alice" (real) or "helen" (pretended)
    instance: str
    c0: tuple = ()
    c1: tuple = ()
    choice: int = 0
    choice_flags: list = field(default_factory=list)
    set_flip: list = field(default_factory=list)      # indices with flipped flag
    set_keep: list = field(default_factory=list)
    public_set: list = field(default_factory=list)
    opened: dict = field(default_factory=dict)        # index -> (c0, c1)
    received: list = field(default_factory=list)
    word: list = field(default_factory=list)          # corrected word
    c0_comms: list = field(default_factory=list)
    c1_comms: list = field(default_factory=list)
    w_comms: list = field(default_factory=list)
    choice_comm: Optional[GbcxCommitment] = None
    amplification_set: tuple = ()
    output: Optional[int] = None
    output_comm: Optional[GbcxCommitment] = None
    complaints: list = field(default_factory=list)
    hard_verdict: Optional[Verdict] = None
    corrupted: tuple = ()            # positions where a cheating sender lied

    def invariants_ok(self, sigma_count: int) -> bool:
        flip, keep, pub = set(self.set_flip), set(self.set_keep), set(self.public_set)
        sizes = len(flip) == len(keep) == len(pub) == sigma_count
        disjoint = not (flip & keep) and not (pub & (flip | keep))
        flags = all(self.choice_flags[i] == (1 - self.choice if i in flip
                                             else self.choice)
                    for i in range(len(self.choice_flags)))
        return sizes and disjoint and flags


@dataclass
class TrialLog:
    entries: list = field(default_factory=list)   # (index, origin, outcome)

    def record(self, index: int, origin: str, outcome: str) -> None:
        self.entries.append((index, origin, outcome))

    def complained_origins(self) -> set:
        return {origin for _, origin, outcome in self.entries
                if outcome.startswith("complaint")}


def _proof_side(gbcx: GbcxCommitment, party: str):
    return gbcx.toward(party)


#: rows for commitment sides that only ever carry equality proofs
AUX_ROWS = 16


def _gbcx_bitwise(ctx, owner: str, word, counterparties, main_rows: int,
                  proof_rows: int, label: str):
    """Commit a whole bit string toward two counterparties: the first side
    (where later proofs run) gets the full row budget, the other the slim
    one, and a per-bit equality proof ties them.

    Returns ``(list of per-bit commitments, Verdict)``.
    """
    main, aux = counterparties
    main_sides = bcx_commit_batch(ctx, owner, list(word), m_rows=main_rows,
                                  label=f"{label}.p0")
    aux_sides = bcx_commit_batch(ctx, owner, list(word), m_rows=AUX_ROWS,
                                 label=f"{label}.p1")
    out = []
    for i, (a, b) in enumerate(zip(main_sides, aux_sides)):
        proof = prove_linear(ctx, LinearRelationClaim((a, b), 0),
                             rows_to_spend=proof_rows)
        if not proof.passed:
            verdict = Verdict.identified(
                owner, "equality proof between counterparty commitments failed",
                {"gbcx-equality": {"label": label, "bit": i}})
            return out, verdict
        out.append(GbcxCommitment(owner=owner, per_party={main: a, aux: b},
                                  proofs=[proof]))
    return out, Verdict.ok({"gbcx-equality": {"label": label,
                                              "bits": len(out)}})


def _complain(ctx, session: GcotSession, cls: str, detail: str) -> None:
    session.complaints.append((cls, detail))
    ctx.net.broadcast(BOB, {"instance": session.instance, "class": cls,
                            "detail": detail}, "complaint")


def subgcot(ctx, origin: str, choice: int, params: GcotParams,
            behaviors: GcotBehaviors, instance: str) -> GcotSession:
    """One core instance (steps 2-7).  The sender is Alice (playing through
    Helen) for ``origin == "alice"`` or Helen herself for a pretended one."""
    code = params.code.code
    m = code.length
    sigma_count = params.code.test_count
    sender = ALICE if origin == "alice" else HELEN
    aux = HELEN if origin == "alice" else ALICE
    sender_rng = ctx.rng(sender.lower())
    bob_rng = ctx.rng("bob")
    env_rng = ctx.rng("env")
    session = GcotSession(origin=origin, instance=instance, choice=choice)

    mask = (ctx.net.sender_mask(ALICE, HELEN) if origin == "alice"
            else nullcontext())
    with mask:
        ctx.net.note(HELEN, {"instance": instance, "origin": origin},
                     "subgcot.origin")

        # The receiver's choice bit is committed up front, toward both others.
        gb, verdict = gbcx_commit(ctx, BOB, choice, (HELEN, ALICE),
                                  m_rows=params.output_rows,
                                  rows_to_spend=params.proof_rows,
                                  label=f"{instance}.choice")
        session.choice_comm = gb
        if not verdict.accepted:
            session.hard_verdict = verdict
            return session

        # Step 2: two random distinct nonzero codewords, committed bitwise,
        # with the parity-check relations proven on the commitments.
        nonzero = [w for w in code.codewords() if any(w)]
        c0 = sender_rng.choice(nonzero)
        c1 = sender_rng.choice([w for w in nonzero if w != c0])
        session.c0, session.c1 = c0, c1
        for lane, word in (("c0", c0), ("c1", c1)):
            comms, verdict = _gbcx_bitwise(ctx, sender, word, (BOB, aux),
                                           params.codeword_rows,
                                           params.proof_rows,
                                           f"{instance}.{lane}")
            if not verdict.accepted:
                session.hard_verdict = verdict
                return session
            (session.c0_comms if lane == "c0" else session.c1_comms).extend(comms)
        for word, comms in ((c0, session.c0_comms), (c1, session.c1_comms)):
            for check in code.parity_checks():
                support = [i for i in range(m) if check[i]]
                claim = LinearRelationClaim(
                    tuple(_proof_side(comms[i], BOB) for i in support), 0)
                proof = prove_linear(ctx, claim, rows_to_spend=params.proof_rows)
                if not proof.passed:
                    _complain(ctx, session, "sender-proof", "codeword membership")
                    return session

        # Step 3: disjoint test sets; the choice flag flips on the first.
        set_flip = sorted(bob_rng.sample(range(m), sigma_count))
        rest = [i for i in range(m) if i not in set(set_flip)]
        set_keep = sorted(bob_rng.sample(rest, sigma_count))
        session.set_flip, session.set_keep = set_flip, set_keep
        flags = [(1 - choice) if i in set(set_flip) else choice
                 for i in range(m)]
        session.choice_flags = flags

        # Step 4: one forced-measurement transfer per index.
        corrupt: set = set()
        if behaviors.sender is SenderBehavior.COMPLEMENT_ANSWERS:
            corrupt = set(range(m))
        elif behaviors.sender is SenderBehavior.CORRUPT_POSITIONS:
            corrupt = set(sender_rng.sample(range(m), behaviors.corrupt_count))
        session.corrupted = tuple(sorted(corrupt))
        received = []
        for i in range(m):
            in0, in1 = c0[i], c1[i]
            if i in corrupt:
                in0, in1 = 1 - in0, 1 - in1
            out, verdict, _ = ot_transfer(ctx, sender, BOB, in0, in1, flags[i],
                                          params.ot, route="direct")
            if verdict.outcome is Outcome.CHEATER_IDENTIFIED:
                session.hard_verdict = verdict
                return session
            if out is None:
                session.hard_verdict = Verdict.aborted("transfer aborted")
                return session
            received.append(out)
        session.received = received

        # The union of the test sets is revealed; both lanes open there.
        union = sorted(set(set_flip) | set(set_keep))
        ctx.net.send_private(BOB, sender, {"positions": union}, "subgcot.tested")
        for i in union:
            v0 = open_bcx(ctx, _proof_side(session.c0_comms[i], BOB))
            v1 = open_bcx(ctx, _proof_side(session.c1_comms[i], BOB))
            session.opened[i] = (v0, v1)

        # Step 5: lane checks, substitution, decoding.
        if behaviors.receiver is ReceiverBehavior.COMPLAIN_ALWAYS:
            _complain(ctx, session, "receiver-check", "disputed transfer data")
            return session
        mismatches = []
        for i in set_flip:
            expected = session.opened[i][1 - choice]
            if received[i] != expected:
                mismatches.append(i)
        for i in set_keep:
            expected = session.opened[i][choice]
            if received[i] != expected:
                mismatches.append(i)
        if mismatches:
            _complain(ctx, session, "receiver-check",
                      f"lane check failed at {len(mismatches)} positions")
            return session
        word = list(received)
        for i in set_flip:
            word[i] = session.opened[i][choice]
        decoded = code.decode(word)
        if decoded is None:
            _complain(ctx, session, "receiver-check", "decoding failed")
            return session
        _, codeword = decoded
        word = [int(v) for v in codeword]
        session.word = word

        committed_word = word
        if behaviors.receiver is ReceiverBehavior.SUBSTITUTE_WORD:
            committed_word = [1 - v for v in word]

        # Step 5 continued: the receiver commits to the corrected word and
        # proves it is a codeword.
        w_comms, verdict = _gbcx_bitwise(ctx, BOB, committed_word,
                                         (HELEN, ALICE), params.w_rows,
                                         params.proof_rows, f"{instance}.w")
        if not verdict.accepted:
            session.hard_verdict = verdict
            return session
        session.w_comms.extend(w_comms)
        for check in code.parity_checks():
            support = [i for i in range(m) if check[i]]
            claim = LinearRelationClaim(
                tuple(_proof_side(session.w_comms[i], HELEN) for i in support), 0)
            proof = prove_linear(ctx, claim, rows_to_spend=params.proof_rows)
            if not proof.passed:
                session.hard_verdict = Verdict.identified(
                    BOB, "received-word membership proof failed",
                    {"instance": {"label": instance, "stage": "w-membership"}})
                return session

        # Step 6: a public extra test set, disjoint from the union.
        outside = [i for i in range(m) if i not in set(union)]
        public_set = sorted(env_rng.sample(outside, sigma_count))
        session.public_set = public_set
        ctx.net.broadcast("env", {"instance": instance,
                                  "positions": public_set}, "subgcot.public-set")
        for i in public_set:
            v0 = open_bcx(ctx, _proof_side(session.c0_comms[i], BOB))
            v1 = open_bcx(ctx, _proof_side(session.c1_comms[i], BOB))
            session.opened[i] = (v0, v1)

        # Step 7: prove agreement where the lanes coincide.  Where they
        # differ, "my word matches my lane" is vacuously satisfiable and a
        # lane-specific proof would leak the choice bit.
        for i in public_set:
            v0, v1 = session.opened[i]
            if v0 != v1:
                continue
            claim = LinearRelationClaim(
                (_proof_side(session.w_comms[i], HELEN),), v0)
            proof = prove_linear(ctx, claim, rows_to_spend=params.proof_rows)
            if not proof.passed:
                session.hard_verdict = Verdict.identified(
                    BOB, "public-set agreement proof failed",
                    {"instance": {"label": instance, "stage": "public-set",
                                  "position": i}})
                return session

    return session


def _live_subset_claim(comms, side: str, subset, opened: dict, lane: int,
                       target: int):
    """Claim over the still-live commitments of ``subset``; opened positions
    fold their public values into the target."""
    live = []
    adjusted = target
    for i in subset:
        if i in opened:
            adjusted ^= opened[i][lane]
        else:
            live.append(_proof_side(comms[i], side))
    return LinearRelationClaim(tuple(live), adjusted)


def gcot_complete(ctx, session: GcotSession, a0: int, a1: int,
                  params: GcotParams):
    """Steps 8-9: privacy amplification and the output commitment.

    Returns ``(verdict, session)`` with ``session.output`` committed.
    """
    code = params.code.code
    m = code.length
    sender = ALICE if session.origin == "alice" else HELEN
    sender_rng = ctx.rng(sender.lower())

    mask = (ctx.net.sender_mask(ALICE, HELEN) if session.origin == "alice"
            else nullcontext())
    with mask:
        subset = None
        for _ in range(params.amplification_resamples):
            candidate = [i for i in range(m) if sender_rng.getrandbits(1)]
            h0 = xor_fold(session.c0[i] for i in candidate)
            h1 = xor_fold(session.c1[i] for i in candidate)
            if h0 == a0 and h1 == a1:
                subset = candidate
                break
        if subset is None:
            raise SimulationIntegrityError(
                "no amplification subset found; codewords must be distinct")
        session.amplification_set = tuple(subset)
        ctx.net.broadcast(sender, {"instance": session.instance,
                                   "subset": subset,
                                   "targets": [a0, a1]}, "gcot.amplification")

        for lane, comms, target in ((0, session.c0_comms, a0),
                                    (1, session.c1_comms, a1)):
            claim = _live_subset_claim(comms, BOB, subset, session.opened,
                                       lane, target)
            if not claim.commitments:
                # Every touched position is already public; the relation is
                # checked directly instead of proven.
                passed = claim.target == 0
            else:
                passed = prove_linear(ctx, claim,
                                      rows_to_spend=params.proof_rows).passed
            if not passed:
                verdict = Verdict.identified(
                    sender, "amplification relation proof failed",
                    {"instance": {"label": session.instance, "lane": lane}})
                return verdict, session

        output = xor_fold(session.word[i] for i in subset)
        session.output = output
        gb, verdict = gbcx_commit(ctx, BOB, output, (HELEN, ALICE),
                                  m_rows=params.output_rows,
                                  rows_to_spend=params.proof_rows,
                                  label=f"{session.instance}.out")
        if not verdict.accepted:
            return verdict, session
        session.output_comm = gb
        members = [_proof_side(gb, HELEN)]
        members.extend(_proof_side(session.w_comms[i], HELEN) for i in subset)
        proof = prove_linear(ctx, LinearRelationClaim(tuple(members), 0),
                             rows_to_spend=params.proof_rows)
        if not proof.passed:
            verdict = Verdict.identified(
                BOB, "output relation proof failed",
                {"instance": {"label": session.instance, "stage": "output"}})
            return verdict, session

    return Verdict.ok({"instance": {"label": session.instance,
                                    "output-committed": True}}), session


def run_trials(ctx, a0: int, a1: int, choice: int,
               params: GcotParams | None = None,
               behaviors: GcotBehaviors | None = None):
    """The anonymized trial loop around the core instances.

    Returns ``(verdict, session_or_None, trial_log)``.  The first trial is
    always real; pretended instances are interleaved only once a failure has
    occurred, at least half the budget when failures persist.
    """
    params = params or GcotParams()
    params.validate()
    behaviors = behaviors or GcotBehaviors()
    if a0 not in (0, 1) or a1 not in (0, 1) or choice not in (0, 1):
        raise ConfigError("payload and choice must be bits")

    log = TrialLog()
    origin_by_note = {}
    for trial in range(params.trials):
        origin = "alice" if trial % 2 == 0 else "helen"
        instance = f"t{trial}"
        origin_by_note[instance] = origin
        trial_behaviors = behaviors
        if origin == "helen":
            # Pretended instances use Helen's own fresh inputs; any scripted
            # sender cheating belongs to the real sender only.
            trial_behaviors = GcotBehaviors(sender=SenderBehavior.HONEST,
                                            receiver=behaviors.receiver,
                                            corrupt_count=behaviors.corrupt_count)
        session = subgcot(ctx, origin, choice, params, trial_behaviors, instance)
        if session.hard_verdict is not None:
            ctx.transcript.set_verdict(session.hard_verdict)
            return session.hard_verdict, session, log
        if not session.complaints:
            log.record(trial, origin, "success")
            if origin == "alice":
                verdict, session = gcot_complete(ctx, session, a0, a1, params)
                ctx.transcript.set_verdict(verdict)
                return verdict, session, log
            continue
        log.record(trial, origin, "complaint:" + session.complaints[0][0])

    origins = log.complained_origins()
    if origins and origins <= {"alice"}:
        verdict = Verdict.identified(
            ALICE, "every complaint targeted the real sender's data",
            {"trials": {"log": list(log.entries)}})
    else:
        verdict = Verdict.identified(
            BOB, "complaints targeted pretended data as well",
            {"trials": {"log": list(log.entries)}})
    ctx.transcript.set_verdict(verdict)
    return verdict, None, log
