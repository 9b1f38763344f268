"""Oblivious transfer by forcing honest measurements with bit commitment.

The sender transmits random conjugate-coded qubits; the receiver must
measure every one immediately and commit (share-row commitments) to each
(basis, outcome) pair.  A cut-and-choose opening of a random check set makes
storing qubits unmeasured a losing strategy: each checked position where the
claimed basis matches the sender's catches a fabricated outcome with
probability 1/2.  After the checks the sender reveals the remaining bases;
the receiver splits the rest into a matched set (whose bits it knows) and a
mismatched set (about which it knows nothing) and announces the two equally
sized mask sets keyed by its choice bit.  The sender returns both payload
bits masked by the XOR of its qubit bits over the respective sets, so the
receiver recovers exactly the chosen one.

The commitments only have to bind until the checks are over ("shortly
binding"): once honest measurements happened they are irreversible, so even
a receiver later pooling views with a third party learns nothing new.  A
collusion that breaks the binding *before* the checks can defer measurement,
pass the checks, and then read both payloads; that breach is what
:func:`pooled_breach` flags.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .bcx import BcxCommitment, bcx_commit_batch, open_bcx
from .core import ALICE, BOB, HELEN, ConfigError, Verdict, xor_fold
from .qsim import Basis, measure, prepare

_BASIS_BIT = {Basis.PLUS: 0, Basis.CROSS: 1}
_BIT_BASIS = {0: Basis.PLUS, 1: Basis.CROSS}


@dataclass
class OtParams:
    qubits: int = 64              # transmitted qubit count
    check_fraction: float = 0.25  # fraction opened at the check stage
    mismatch_threshold: float = 0.05
    bcx_rows: int = 8             # rows per position commitment
    max_restarts: int = 16        # lopsided-partition restarts before giving up

    def validate(self) -> None:
        if self.qubits < 8 or self.qubits % 2:
            raise ConfigError("qubit count must be even and >= 8")
        if not (0 < self.check_fraction <= 0.5):
            raise ConfigError("check_fraction must be in (0, 1/2]")
        if int(self.qubits * self.check_fraction) < 1:
            raise ConfigError("check set would be empty")

    @property
    def check_count(self) -> int:
        return int(self.qubits * self.check_fraction)

    @property
    def min_partition(self) -> int:
        return max(1, self.qubits // 8)


class ReceiverBehavior(enum.Enum):
    HONEST = "honest"
    LAZY = "lazy"                  # measures nothing, fabricates commitments
    REFUSE_OPEN = "refuse-open"
    DEFER = "defer"                # stores qubits; only works with the
                                   # binding broken before the checks


@dataclass
class OtSession:
    sender: str
    receiver: str
    route: str
    payload_bits: tuple            # sender-private (b0, b1)
    choice: int                    # receiver-private
    params: OtParams
    sent_bits: list = field(default_factory=list)
    sent_bases: list = field(default_factory=list)
    claimed_bases: list = field(default_factory=list)
    outcomes: dict = field(default_factory=dict)
    check_set: list = field(default_factory=list)
    good: list = field(default_factory=list)
    bad: list = field(default_factory=list)
    mask_sets: tuple = ()
    masked: tuple = ()
    output: Optional[int] = None
    receiver_known: set = field(default_factory=set)
    restarts: int = 0
    deferred: bool = False
    binding_released_early: bool = False


def _send(ctx, route: str, sender: str, receiver: str, payload, tag: str):
    """Direct private send, or an origin-masking relay through Helen."""
    if route == "direct" or HELEN in (sender, receiver):
        ctx.net.send_private(sender, receiver, payload, tag)
    else:
        ctx.net.relay_masked(sender, HELEN, receiver, payload, tag)


def ot_transfer(ctx, sender: str, receiver: str, b0: int, b1: int, choice: int,
                params: OtParams | None = None, route: str = "direct",
                receiver_behavior: ReceiverBehavior = ReceiverBehavior.HONEST,
                break_binding_before_checks: bool = False):
    """Run one transfer.  Returns ``(output_bit, verdict, session)``."""
    params = params or OtParams()
    params.validate()
    if route not in ("direct", "via-helen"):
        raise ConfigError(f"unknown route {route!r}")
    if choice not in (0, 1) or b0 not in (0, 1) or b1 not in (0, 1):
        raise ConfigError("payload and choice must be bits")

    sender_rng = ctx.rng(sender.lower())
    receiver_rng = ctx.rng(receiver.lower())
    session = OtSession(sender=sender, receiver=receiver, route=route,
                        payload_bits=(b0, b1), choice=choice, params=params)
    k = params.qubits

    for attempt in range(params.max_restarts):
        session.restarts = attempt
        sid = ctx.fresh_label("ot")
        sent_bits = [sender_rng.getrandbits(1) for _ in range(k)]
        sent_bases = [Basis.random(sender_rng) for _ in range(k)]
        qubits = [prepare(b, s) for b, s in zip(sent_bits, sent_bases)]
        session.sent_bits, session.sent_bases = sent_bits, sent_bases
        _send(ctx, route, sender, receiver, qubits, "ot-qubits")

        # The receiver measures at once (honest) or stalls (cheats), then
        # commits to every claimed (basis, outcome) pair.
        behavior = receiver_behavior
        outcomes: dict[int, int] = {}
        claimed_bases: list[Basis] = []
        if behavior in (ReceiverBehavior.HONEST, ReceiverBehavior.REFUSE_OPEN):
            for i, q in enumerate(qubits):
                basis = Basis.random(receiver_rng)
                claimed_bases.append(basis)
                outcomes[i] = measure(q, basis, receiver_rng)
        elif behavior is ReceiverBehavior.LAZY:
            claimed_bases = [Basis.random(receiver_rng) for _ in range(k)]
            outcomes = {i: receiver_rng.getrandbits(1) for i in range(k)}
        else:  # DEFER: commit placeholders, keep the qubits
            claimed_bases = [Basis.PLUS] * k
            outcomes = {i: 0 for i in range(k)}
        session.claimed_bases = claimed_bases
        session.outcomes = dict(outcomes)

        basis_comms = bcx_commit_batch(
            ctx, receiver, [_BASIS_BIT[b] for b in claimed_bases],
            m_rows=params.bcx_rows, label=f"{sid}.basis")
        outcome_comms = bcx_commit_batch(
            ctx, receiver, [outcomes[i] for i in range(k)],
            m_rows=params.bcx_rows, label=f"{sid}.out")
        ctx.net.broadcast(receiver, {"session": sid, "positions": k,
                                     "rows": params.bcx_rows},
                          "ot-commitments")

        check_set = sorted(sender_rng.sample(range(k), params.check_count))
        session.check_set = check_set
        _send(ctx, route, sender, receiver, {"check": check_set}, "ot-check-set")

        if behavior is ReceiverBehavior.REFUSE_OPEN:
            verdict = Verdict.identified(receiver, "refused to open check positions",
                                         {"check": {"opened": 0,
                                                    "required": len(check_set)}})
            ctx.transcript.set_verdict(verdict)
            return None, verdict, session

        if break_binding_before_checks:
            # Models a collusion violating the (short) binding window before
            # the checks: the stored-value enforcement is switched off.
            session.binding_released_early = True
            for c in basis_comms + outcome_comms:
                c.scheme.release(c.left_block)
                c.scheme.release(c.right_block)

        claim_bits: dict[int, tuple[int, int]] = {}
        if behavior is ReceiverBehavior.DEFER:
            session.deferred = True
            # Measure only the checked qubits now, in fresh bases; with the
            # binding gone the commitments can be opened to match.
            for i in check_set:
                basis = Basis.random(receiver_rng)
                out = measure(qubits[i], basis, receiver_rng)
                outcomes[i] = out
                claimed_bases[i] = basis
                claim_bits[i] = (_BASIS_BIT[basis], out)
            session.outcomes = dict(outcomes)

        opened = {}
        for i in check_set:
            basis_claim, out_claim = claim_bits.get(i, (None, None))
            shown_basis = open_bcx(ctx, basis_comms[i], basis_claim)
            shown_out = open_bcx(ctx, outcome_comms[i], out_claim)
            opened[i] = (shown_basis, shown_out)
        ctx.net.broadcast(receiver, {"session": sid,
                                     "opened": {str(i): list(v)
                                                for i, v in sorted(opened.items())}},
                          "ot-open")

        mismatches = checked = 0
        for i in check_set:
            shown_basis, shown_out = opened[i]
            if _BIT_BASIS[shown_basis] is sent_bases[i]:
                checked += 1
                if shown_out != sent_bits[i]:
                    mismatches += 1
        if checked and mismatches / checked > params.mismatch_threshold:
            verdict = Verdict.identified(
                receiver, "check-stage openings inconsistent with sent qubits",
                {"check": {"mismatches": mismatches, "checked": checked}})
            ctx.transcript.set_verdict(verdict)
            return None, verdict, session

        # Binding horizon: the commitments only needed to hold through the
        # checks; the honest measurements are already irreversible.
        for c in basis_comms + outcome_comms:
            c.scheme.release(c.left_block)
            c.scheme.release(c.right_block)

        remaining = [i for i in range(k) if i not in set(check_set)]
        _send(ctx, route, sender, receiver,
              {"bases": {str(i): sent_bases[i].value for i in remaining}},
              "ot-bases")

        if behavior is ReceiverBehavior.DEFER:
            # The stored qubits are now measured in the announced bases,
            # which reads out every remaining bit exactly.  The partition the
            # receiver announces is faked to look honestly half-and-half.
            for i in remaining:
                outcomes[i] = measure(qubits[i], sent_bases[i], receiver_rng)
                claimed_bases[i] = Basis.random(receiver_rng)
            session.outcomes = dict(outcomes)
            session.receiver_known = set(remaining)

        good = [i for i in remaining if claimed_bases[i] is sent_bases[i]]
        bad = [i for i in remaining if claimed_bases[i] is not sent_bases[i]]
        session.good, session.bad = good, bad
        if behavior is ReceiverBehavior.HONEST:
            session.receiver_known = set(good)

        size = min(len(good), len(bad))
        if size < params.min_partition:
            ctx.net.broadcast(receiver, {"session": sid, "good": len(good),
                                         "bad": len(bad)}, "ot-restart")
            continue

        chosen_set = sorted(receiver_rng.sample(good, size))
        other_set = sorted(receiver_rng.sample(bad, size))
        mask0, mask1 = ((chosen_set, other_set) if choice == 0
                        else (other_set, chosen_set))
        session.mask_sets = (mask0, mask1)
        _send(ctx, route, receiver, sender, {"set0": mask0, "set1": mask1},
              "ot-mask-sets")

        m0 = b0 ^ xor_fold(sent_bits[i] for i in mask0)
        m1 = b1 ^ xor_fold(sent_bits[i] for i in mask1)
        session.masked = (m0, m1)
        _send(ctx, route, sender, receiver, {"m0": m0, "m1": m1}, "ot-masked")

        chosen_mask = m0 if choice == 0 else m1
        session.output = chosen_mask ^ xor_fold(outcomes[i] for i in chosen_set)
        verdict = Verdict.ok({"check": {"mismatches": mismatches,
                                        "checked": checked},
                              "restarts": attempt})
        ctx.transcript.set_verdict(verdict)
        return session.output, verdict, session

    verdict = Verdict.aborted("partition stayed lopsided after max restarts")
    ctx.transcript.set_verdict(verdict)
    return None, verdict, session


def pooled_breach(session: OtSession, post_collusion=(ALICE, BOB)) -> bool:
    """Whether a post-run pooling of the given parties' views can recover the
    unchosen payload bit of a terminated session.

    True only when the receiver managed to defer measurements past the basis
    announcement (possible only while the binding was broken); honest
    sessions leave the mismatched mask set information-free forever.
    """
    if session.sender in post_collusion:
        return True  # trivial: the sender knows both payloads
    if not session.mask_sets:
        return False
    unchosen = session.mask_sets[1 - session.choice]
    return set(unchosen) <= session.receiver_known
