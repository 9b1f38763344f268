"""Bit commitment with XOR (share rows), linear proofs, and copies.

A row-pair commitment to a bit ``b`` is a list of m share pairs
``(left_i, right_i)`` with ``left_i XOR right_i = b`` for every live row,
each share individually committed.  XOR-linear relations among several such
commitments are proven by cut-and-choose: per spent row the prover announces
the XOR of the left shares across the claimed commitments and the verifier's
public coin decides whether all left or all right shares of that row are
opened.  A false claim survives each spent row with probability 1/2; spent
rows die and are never reused, which is why commitments can be copied (a
fresh commitment plus an equality proof).

Share commitments come from a pluggable backend.  The default is the
simulator-enforced record-and-reveal ledger, which keeps batch runs fast;
a backend running the full anonymized quantum commitment per share exists
for exercising the three-party stack end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import commitment as qbc
from .core import ConfigError, ResourceError, Verdict, xor_fold
from .ledger import CommitmentLedger, LedgerHandle


class LedgerShareScheme:
    """Share blocks recorded in the run ledger (binding enforced by the sim)."""

    name = "ledger"

    def __init__(self, ledger: CommitmentLedger):
        self.ledger = ledger

    def commit_block(self, owner: str, values: Sequence[int], label: str):
        return self.ledger.commit_bits(owner, values, label)

    def open(self, handle: LedgerHandle, index: int, claimed=None) -> int:
        claim = None if claimed is None else [claimed]
        return self.ledger.open_bits(handle, [index], claim)[0]

    def open_many(self, handle: LedgerHandle, indices, claimed=None) -> list:
        return self.ledger.open_bits(handle, indices, claimed)

    def release(self, handle: LedgerHandle) -> None:
        self.ledger.release(handle)


class QuantumShareScheme:
    """Each share bit is committed through a full anonymized quantum
    commitment run (small parameters), executed in an isolated child context.

    Heavy; intended for demonstrating the stack, not for batch statistics.
    """

    name = "quantum"

    def __init__(self, ctx, params: qbc.CommitParams | None = None):
        self.ctx = ctx
        self.params = params or qbc.CommitParams(rounds=2, qubits_per_round=8)

    def commit_block(self, owner: str, values: Sequence[int], label: str):
        handles = []
        for i, value in enumerate(values):
            handle = None
            for attempt in range(16):
                child = self.ctx.child(f"share/{label}/{i}/a{attempt}")
                handle, verdict, _ = qbc.commit(child, int(value) & 1, self.params)
                if verdict.accepted:
                    break
            if handle is None:
                raise ResourceError("quantum share commitment kept aborting")
            handles.append(handle)
        self.ctx.net.note(owner, {"label": label, "bits": len(values)},
                          "bcx.quantum-shares")
        return handles

    def open(self, handles, index: int, claimed=None) -> int:
        bit, verdict = qbc.unveil(handles[index])
        if not verdict.accepted:
            raise ResourceError("quantum share unveil rejected")
        return bit

    def open_many(self, handles, indices, claimed=None) -> list:
        return [self.open(handles, i) for i in indices]

    def release(self, handles) -> None:
        pass  # quantum binding has no horizon to release here


@dataclass
class BcxCommitment:
    owner: str
    label: str
    bit: int                      # owner-private
    lefts: list[int]              # owner-private share values
    rights: list[int]
    left_block: object
    right_block: object
    live: list[bool]
    scheme: object
    row_base: int = 0             # offset into a shared share block

    @property
    def m_rows(self) -> int:
        return len(self.live)

    @property
    def live_count(self) -> int:
        return sum(self.live)

    def live_rows(self) -> list[int]:
        return [i for i, alive in enumerate(self.live) if alive]

    def next_live(self) -> int:
        for i, alive in enumerate(self.live):
            if alive:
                return i
        raise ResourceError(f"no live rows left on {self.label}")


@dataclass(frozen=True)
class LinearRelationClaim:
    """XOR of the committed bits of the selected commitments equals target."""

    commitments: tuple
    target: int

    def describe(self) -> dict:
        return {"commitments": [c.label for c in self.commitments],
                "target": self.target}


@dataclass
class ProofRecord:
    claim: dict
    rows_spent: dict
    challenges: list[int]
    openings: list[list[int]]
    passed: bool
    violation: str = ""


def _default_scheme(ctx, scheme):
    return scheme if scheme is not None else LedgerShareScheme(ctx.ledger)


def bcx_commit(ctx, owner: str, secret_bit: int, m_rows: int = 20,
               scheme=None, label: str = "", announce: bool = True) -> BcxCommitment:
    """Commit to a bit as m independent share rows.

    ``announce=False`` skips the per-commitment broadcast for callers that
    announce whole batches at once.
    """
    if m_rows < 8:
        raise ConfigError("m_rows must be >= 8")
    if secret_bit not in (0, 1):
        raise ConfigError("committed bit must be 0 or 1")
    scheme = _default_scheme(ctx, scheme)
    rng = ctx.rng(owner.lower())
    packed = rng.getrandbits(m_rows)
    lefts = [(packed >> i) & 1 for i in range(m_rows)]
    rights = [secret_bit ^ l for l in lefts]
    label = label or ctx.fresh_label("bcx")
    left_block = scheme.commit_block(owner, lefts, label + ".L")
    right_block = scheme.commit_block(owner, rights, label + ".R")
    if announce:
        ctx.net.broadcast(owner, {"label": label, "rows": m_rows},
                          "bcx.commit", classical=True)
    return BcxCommitment(owner=owner, label=label, bit=secret_bit,
                         lefts=lefts, rights=rights,
                         left_block=left_block, right_block=right_block,
                         live=[True] * m_rows, scheme=scheme)


def bcx_commit_batch(ctx, owner: str, bits: Sequence[int], m_rows: int = 8,
                     scheme=None, label: str = "") -> list[BcxCommitment]:
    """Commit to many bits at once, packing all share rows into one block
    pair.  Semantically identical to a loop of single commits; used where a
    protocol commits to a whole string position by position."""
    if m_rows < 8:
        raise ConfigError("m_rows must be >= 8")
    scheme = _default_scheme(ctx, scheme)
    rng = ctx.rng(owner.lower())
    label = label or ctx.fresh_label("bcxb")
    count = len(bits)
    packed = rng.getrandbits(m_rows * count)
    all_lefts = [(packed >> i) & 1 for i in range(m_rows * count)]
    all_rights = []
    for j in range(count):
        bit = bits[j] & 1
        base = j * m_rows
        all_rights.extend(bit ^ all_lefts[base + i] for i in range(m_rows))
    left_block = scheme.commit_block(owner, all_lefts, label + ".L")
    right_block = scheme.commit_block(owner, all_rights, label + ".R")
    ctx.net.broadcast(owner, {"label": label, "bits": count, "rows": m_rows},
                      "bcx.commit-batch", classical=True)
    out = []
    for j in range(count):
        base = j * m_rows
        out.append(BcxCommitment(
            owner=owner, label=f"{label}[{j}]", bit=bits[j] & 1,
            lefts=all_lefts[base:base + m_rows],
            rights=all_rights[base:base + m_rows],
            left_block=left_block, right_block=right_block,
            live=[True] * m_rows, scheme=scheme, row_base=base))
    return out


def default_rows_to_spend(commitments) -> int:
    """Half the live rows, but never fewer than 8."""
    min_live = min(c.live_count for c in commitments)
    return max(8, min_live // 2)


def prove_linear(ctx, claim: LinearRelationClaim,
                 rows_to_spend: Optional[int] = None,
                 reuse_dead_row: bool = False) -> ProofRecord:
    """Interactive cut-and-choose proof of an XOR-linear claim.

    ``reuse_dead_row`` is a cheat hook: the prover tries to recycle an
    already-spent row, which the verifier spots from the public spend record
    and converts into a protocol violation.
    """
    comms = claim.commitments
    if not comms:
        raise ConfigError("empty claim")
    owner = comms[0].owner
    if any(c.owner != owner for c in comms):
        raise ConfigError("claims span a single prover's commitments")
    spend = rows_to_spend if rows_to_spend is not None else default_rows_to_spend(comms)
    if spend < 1:
        raise ConfigError("rows_to_spend must be >= 1")
    for c in comms:
        if c.live_count < spend:
            raise ResourceError(
                f"{c.label}: {c.live_count} live rows < {spend} required")

    claim_id = ctx.fresh_label("proof")
    env_rng = ctx.rng("env")

    # All rounds run in parallel: the prover picks rows and announces every
    # left-share XOR before any public coin is drawn, so per-round soundness
    # multiplies exactly as in the sequential form.
    row_plan: list[list[int]] = []
    announcements: list[int] = []
    violation = ""
    taken: dict[int, int] = {}
    for trial in range(spend):
        rows = []
        for ci, c in enumerate(comms):
            if reuse_dead_row and trial == 0 and any(not a for a in c.live):
                row = c.live.index(False)
            else:
                start = taken.get(ci, 0)
                row = next(i for i in range(start, c.m_rows) if c.live[i])
                taken[ci] = row + 1
            rows.append(row)
            if not c.live[row]:
                violation = "dead-row-reuse"
        row_plan.append(rows)
        announcements.append(xor_fold(c.lefts[row]
                                      for c, row in zip(comms, rows)))
    ctx.net.broadcast(owner, {"claim": claim_id, "relation": claim.describe(),
                              "rows": row_plan, "announced": announcements},
                      "bcx-proof", classical=True)

    challenges = [env_rng.getrandbits(1) for _ in range(spend)]
    ctx.net.broadcast("env", {"claim": claim_id,
                              "challenges": "".join("R" if c else "L"
                                                    for c in challenges)},
                      "bcx-proof.challenge", classical=True)

    openings: list[list[int]] = []
    passed = not violation
    rows_spent: dict = {c.label: [] for c in comms}
    for trial, (rows, challenge) in enumerate(zip(row_plan, challenges)):
        if challenge == 0:
            opened = [c.scheme.open(c.left_block, c.row_base + row)
                      for c, row in zip(comms, rows)]
            expected = announcements[trial]
        else:
            opened = [c.scheme.open(c.right_block, c.row_base + row)
                      for c, row in zip(comms, rows)]
            expected = announcements[trial] ^ claim.target
        openings.append(opened)
        for c, row in zip(comms, rows):
            rows_spent[c.label].append(row)
            c.live[row] = False
        if xor_fold(opened) != expected:
            passed = False
    ctx.net.broadcast(owner, {"claim": claim_id, "opened": openings,
                              "passed": passed, "violation": violation},
                      "bcx-proof.open", classical=True)

    return ProofRecord(claim=claim.describe(), rows_spent=rows_spent,
                       challenges=challenges, openings=openings,
                       passed=passed, violation=violation)


def open_bcx(ctx, commitment: BcxCommitment, claim_bit: Optional[int] = None) -> Optional[int]:
    """Publicly open a commitment: reveal every live row's share pair.

    ``claim_bit`` lets the owner try to show a chosen bit; this only takes
    effect once the share backend's binding has been released, otherwise the
    recorded shares are what comes out.  Returns the opened bit, or ``None``
    if the revealed rows are inconsistent.  All rows die.
    """
    rows = commitment.live_rows()
    if not rows:
        raise ResourceError(f"{commitment.label}: nothing live to open")
    absolute = [commitment.row_base + r for r in rows]
    lefts = commitment.scheme.open_many(commitment.left_block, absolute)
    right_claims = None if claim_bit is None else [claim_bit ^ l for l in lefts]
    rights = commitment.scheme.open_many(commitment.right_block, absolute,
                                         right_claims)
    for row in rows:
        commitment.live[row] = False
    ctx.net.broadcast(commitment.owner,
                      {"label": commitment.label, "rows": rows,
                       "lefts": lefts, "rights": rights}, "bcx.open",
                      classical=True)
    bits = {l ^ r for l, r in zip(lefts, rights)}
    if len(bits) != 1:
        return None
    return bits.pop()


def bcx_copy(ctx, src: BcxCommitment, rows_to_spend: int = 8,
             m_rows: Optional[int] = None, scheme=None):
    """Fresh commitment to the same bit, tied to the source by an equality
    proof (which consumes rows on both sides)."""
    m_rows = m_rows if m_rows is not None else src.m_rows
    if src.live_count < rows_to_spend:
        raise ResourceError(
            f"{src.label}: {src.live_count} live rows, copy needs {rows_to_spend}")
    dup = bcx_commit(ctx, src.owner, src.bit, m_rows=m_rows,
                     scheme=scheme if scheme is not None else src.scheme,
                     label=src.label + ".copy")
    proof = prove_linear(ctx, LinearRelationClaim((src, dup), 0),
                         rows_to_spend=rows_to_spend)
    return dup, proof


@dataclass
class GbcxCommitment:
    """One row-pair commitment per counterparty, tied by equality proofs."""

    owner: str
    per_party: dict
    proofs: list = field(default_factory=list)

    def toward(self, party: str) -> BcxCommitment:
        return self.per_party[party]


def gbcx_commit(ctx, owner: str, secret_bit: int, counterparties: Sequence[str],
                m_rows: int = 20, rows_to_spend: int = 8, scheme=None,
                label: str = "", bits_per_party: Optional[dict] = None):
    """Commit the same bit toward every counterparty.

    ``bits_per_party`` is a cheat hook committing different bits to different
    parties; the equality proofs then fail with overwhelming probability.
    Returns ``(GbcxCommitment, Verdict)``.
    """
    if len(counterparties) < 2:
        raise ConfigError("a global commitment needs at least 2 counterparties")
    label = label or ctx.fresh_label("gbcx")
    per_party = {}
    # Role-indexed labels: the wire never names the counterparties, so runs
    # that anonymize who is playing stay indistinguishable.
    for i, party in enumerate(counterparties):
        bit = (bits_per_party or {}).get(party, secret_bit)
        per_party[party] = bcx_commit(ctx, owner, bit, m_rows=m_rows,
                                      scheme=scheme,
                                      label=f"{label}.p{i}")
    gbcx = GbcxCommitment(owner=owner, per_party=per_party)
    ordered = list(counterparties)
    for a, b in zip(ordered, ordered[1:]):
        proof = prove_linear(ctx, LinearRelationClaim(
            (per_party[a], per_party[b]), 0), rows_to_spend=rows_to_spend)
        gbcx.proofs.append(proof)
        if not proof.passed:
            verdict = Verdict.identified(
                owner, "equality proof between counterparty commitments failed",
                {"gbcx-equality": {"label": label, "pair": [a, b]}})
            return gbcx, verdict
    return gbcx, Verdict.ok({"gbcx-equality": {"label": label, "proofs": len(gbcx.proofs)}})


def gbcx_copy(ctx, src: GbcxCommitment, rows_to_spend: int = 8):
    """Copy a global commitment by copying each constituent."""
    copies = {}
    proofs = []
    for party, c in src.per_party.items():
        dup, proof = bcx_copy(ctx, c, rows_to_spend=rows_to_spend)
        copies[party] = dup
        proofs.append(proof)
    return GbcxCommitment(owner=src.owner, per_party=copies, proofs=proofs), proofs
