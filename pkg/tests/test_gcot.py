"""Committed transfer: end-to-end correctness, invariants, identification."""

import itertools
import math

import pytest

from qtriad.bcx import open_bcx
from qtriad.codes import ReedMullerCode
from qtriad.context import RunContext
from qtriad.core import ALICE, BOB, HELEN, Outcome, xor_fold
from qtriad.gcot import (GcotBehaviors, GcotParams, ReceiverBehavior,
                         SenderBehavior, gcot_complete, run_trials, subgcot)


def test_honest_exhaustive_over_inputs():
    for a0, a1, choice in itertools.product((0, 1), repeat=3):
        for seed in range(3):
            ctx = RunContext(f"g{a0}{a1}{choice}:{seed}")
            verdict, session, log = run_trials(ctx, a0, a1, choice)
            assert verdict.accepted
            assert log.entries[0] == (0, "alice", "success")
            unveiled = open_bcx(ctx, session.output_comm.toward(HELEN))
            assert unveiled == (a1 if choice else a0)
            assert unveiled == session.output


def test_equal_payloads_degenerate_case():
    for bit in (0, 1):
        ctx = RunContext(f"deg{bit}")
        verdict, session, _ = run_trials(ctx, bit, bit, 1)
        assert verdict.accepted and session.output == bit


def test_session_invariants_hold():
    params = GcotParams()
    for seed in range(10):
        ctx = RunContext(f"inv{seed}")
        session = subgcot(ctx, "alice", seed % 2, params, GcotBehaviors(),
                          "t0")
        assert not session.complaints and session.hard_verdict is None
        assert session.invariants_ok(params.code.test_count)
        assert session.word == list(session.c1 if seed % 2 else session.c0)


def test_codeword_sampling_avoids_zero_and_repeats():
    for seed in range(20):
        ctx = RunContext(f"cw{seed}")
        session = subgcot(ctx, "alice", 0, GcotParams(), GcotBehaviors(), "t0")
        assert any(session.c0) and any(session.c1)
        assert session.c0 != session.c1


def test_amplification_map_is_linear():
    import random
    rng = random.Random("h-linear")
    for _ in range(100):
        subset = [i for i in range(16) if rng.getrandbits(1)]
        x = [rng.getrandbits(1) for _ in range(16)]
        y = [rng.getrandbits(1) for _ in range(16)]
        hx = xor_fold(x[i] for i in subset)
        hy = xor_fold(y[i] for i in subset)
        hxy = xor_fold((x[i] ^ y[i]) for i in subset)
        assert hxy == hx ^ hy


def test_disruptive_receiver_identified_with_pretended_evidence():
    for seed in range(8):
        ctx = RunContext(f"db{seed}")
        behaviors = GcotBehaviors(receiver=ReceiverBehavior.COMPLAIN_ALWAYS)
        verdict, _, log = run_trials(ctx, 0, 1, 1, behaviors=behaviors)
        assert verdict.outcome is Outcome.CHEATER_IDENTIFIED
        assert verdict.cheater == BOB
        assert "helen" in log.complained_origins()
        pretended = [e for e in log.entries if e[1] == "helen"]
        assert len(pretended) >= math.ceil(len(log.entries) / 2) - 1


def test_complementing_sender_identified_alone():
    for seed in range(8):
        ctx = RunContext(f"ca{seed}")
        behaviors = GcotBehaviors(sender=SenderBehavior.COMPLEMENT_ANSWERS)
        verdict, _, log = run_trials(ctx, 1, 0, 0, behaviors=behaviors)
        assert verdict.outcome is Outcome.CHEATER_IDENTIFIED
        assert verdict.cheater == ALICE
        assert log.complained_origins() == {"alice"}
        # Helen's pretended instances sailed through against an honest Bob.
        assert all(outcome == "success" for _, origin, outcome in log.entries
                   if origin == "helen")


def test_identification_names_exactly_one_player():
    cases = [GcotBehaviors(receiver=ReceiverBehavior.COMPLAIN_ALWAYS),
             GcotBehaviors(sender=SenderBehavior.COMPLEMENT_ANSWERS)]
    for i, behaviors in enumerate(cases):
        for seed in range(5):
            ctx = RunContext(f"tot{i}:{seed}")
            verdict, _, _ = run_trials(ctx, 0, 0, 1, behaviors=behaviors)
            assert verdict.outcome is Outcome.CHEATER_IDENTIFIED
            assert verdict.cheater in (ALICE, BOB)


def corruption_detection_oracle(corrupt_count: int) -> float:
    """Closed form + enumeration: a corrupted position is caught either by
    landing in the opened test union (hypergeometric) or by making the
    decoder fail; patterns the decoder silently repairs go unnoticed."""
    code = ReedMullerCode(1, 4)
    m = code.length
    union = 4
    silent = 0
    patterns = list(itertools.combinations(range(m), corrupt_count))
    for pattern in patterns:
        word = [0] * m
        for i in pattern:
            word[i] = 1
        decoded = code.decode(word)
        if decoded is not None and not decoded[1].any():
            silent += 1
    p_silent_fix = silent / len(patterns)
    p_no_overlap = (math.comb(m - corrupt_count, union)
                    / math.comb(m, union))
    return 1 - p_no_overlap * p_silent_fix


def test_corrupting_positions_detected_at_hypergeometric_rate():
    runs = 300
    detected = 0
    behaviors = GcotBehaviors(sender=SenderBehavior.CORRUPT_POSITIONS,
                              corrupt_count=4)
    params = GcotParams()
    for seed in range(runs):
        ctx = RunContext(f"hg{seed}")
        session = subgcot(ctx, "alice", seed % 2, params, behaviors, "t0")
        assert session.hard_verdict is None
        detected += bool(session.complaints)
    oracle = corruption_detection_oracle(4)
    assert abs(detected / runs - oracle) < 0.05


def test_substituted_word_is_caught_or_harmless():
    caught = harmless = 0
    behaviors = GcotBehaviors(receiver=ReceiverBehavior.SUBSTITUTE_WORD)
    for seed in range(40):
        ctx = RunContext(f"sub{seed}")
        verdict, session, _ = run_trials(ctx, 0, 1, 1, behaviors=behaviors)
        if verdict.outcome is Outcome.CHEATER_IDENTIFIED:
            assert verdict.cheater == BOB
            caught += 1
        elif verdict.accepted:
            # The substitution slipped past the agreement proofs, but the
            # output commitment still had to match the true word.
            unveiled = open_bcx(ctx, session.output_comm.toward(HELEN))
            assert unveiled == 1
            harmless += 1
    assert caught >= 25
    assert caught + harmless == 40


def test_receiver_view_never_names_the_real_sender():
    for origin in ("alice", "helen"):
        ctx = RunContext("anon")
        subgcot(ctx, origin, 1, GcotParams(), GcotBehaviors(), "t0")
        senders = {e.sender for e in ctx.transcript.view_of(BOB)}
        assert ALICE not in senders


def test_trial_origins_stay_private_to_helen():
    ctx = RunContext("origin-privacy")
    behaviors = GcotBehaviors(receiver=ReceiverBehavior.COMPLAIN_ALWAYS)
    run_trials(ctx, 0, 1, 1, behaviors=behaviors)
    bob_tags = {e.tag for e in ctx.transcript.view_of(BOB)}
    assert "subgcot.origin" not in bob_tags
    helen_tags = {e.tag for e in ctx.transcript.view_of(HELEN)}
    assert "subgcot.origin" in helen_tags
