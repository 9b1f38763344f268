"""Commit/unveil protocol: completeness, binding, detection, replay."""

import pytest

from qtriad.commitment import (AliceBehavior, Behaviors, BobBehavior,
                               CommitParams, HelenBehavior, commit, parity,
                               unveil, verify_transcript)
from qtriad.context import RunContext
from qtriad.core import ALICE, BOB, ConfigError, Outcome, StateError


def test_parity_is_xor_fold():
    assert parity([0, 1, 1, 0]) == 0
    assert parity([1]) == 1
    with pytest.raises(ConfigError):
        parity([])


def test_parity_splits_across_concatenation():
    import random
    rng = random.Random(11)
    for _ in range(50):
        x = [rng.getrandbits(1) for _ in range(rng.randrange(1, 10))]
        y = [rng.getrandbits(1) for _ in range(rng.randrange(1, 10))]
        assert parity(x + y) == parity(x) ^ parity(y)


def test_param_validation():
    with pytest.raises(ConfigError):
        CommitParams(rounds=0).validate()
    with pytest.raises(ConfigError):
        CommitParams(qubits_per_round=4).validate()
    with pytest.raises(ConfigError):
        CommitParams(mismatch_threshold=0.3).validate()


def test_honest_commit_unveil_returns_committed_bit():
    for bit in (0, 1):
        handle, verdict, transcript = commit(RunContext(f"h{bit}"), bit)
        assert verdict.accepted
        assert handle.contributing_rounds  # at least one unpublished round
        opened, uv = unveil(handle)
        assert uv.accepted and opened == bit


def test_honest_batch_small():
    params = CommitParams(rounds=6, qubits_per_round=16)
    for seed in range(20):
        bit = seed % 2
        handle, verdict, _ = commit(RunContext(f"batch{seed}"), bit, params)
        if verdict.outcome is Outcome.ABORTED:
            continue
        opened, uv = unveil(handle)
        assert uv.accepted and opened == bit


def test_unveil_requires_accepted_commit():
    with pytest.raises(StateError):
        unveil(None)


def test_double_unveil_is_a_state_error():
    handle, verdict, _ = commit(RunContext("dbl"), 0)
    unveil(handle)
    with pytest.raises(StateError):
        unveil(handle)


def test_all_published_rounds_abort():
    # With one round, the publish coin aborts about half of all seeds.
    outcomes = set()
    for seed in range(30):
        _, verdict, _ = commit(RunContext(f"ab{seed}"), 0,
                               CommitParams(rounds=1, qubits_per_round=8))
        outcomes.add(verdict.outcome)
        if verdict.outcome is Outcome.ABORTED:
            assert verdict.reason == "no contributing rounds"
    assert Outcome.ABORTED in outcomes and Outcome.ACCEPTED in outcomes


def test_intercept_resend_helen_is_rejected():
    detected = 0
    runs = 80
    for seed in range(runs):
        behaviors = Behaviors(helen=HelenBehavior.INTERCEPT_RESEND)
        _, verdict, _ = commit(RunContext(f"ir{seed}"), seed % 2,
                               behaviors=behaviors)
        detected += verdict.detected
    assert detected / runs >= 0.95


def test_intercept_resend_evidence_exceeds_threshold():
    behaviors = Behaviors(helen=HelenBehavior.INTERCEPT_RESEND)
    for seed in range(20):
        _, verdict, _ = commit(RunContext(f"ev{seed}"), 1, behaviors=behaviors)
        if not verdict.detected:
            continue
        entry = verdict.evidence["alice-forwarded"]
        assert entry["mismatches"] / entry["checked"] > 0.05
        assert verdict.evidence.get("collusion_flag") is True
        return
    pytest.fail("no detection in 20 seeded runs")


def test_baseless_bob_identified_every_time():
    for seed in range(25):
        behaviors = Behaviors(bob=BobBehavior.BASELESS_COMPLAINT)
        _, verdict, _ = commit(RunContext(f"bb{seed}"), seed % 2,
                               behaviors=behaviors)
        assert verdict.outcome is Outcome.CHEATER_IDENTIFIED
        assert verdict.cheater == BOB
        assert verdict.evidence


def binding_flip_success_rate(qubits_per_round: int, runs: int) -> float:
    params = CommitParams(rounds=8, qubits_per_round=qubits_per_round)
    behaviors = Behaviors(alice=AliceBehavior.BINDING_FLIP)
    successes = 0
    for seed in range(runs):
        ctx = RunContext(f"flip{qubits_per_round}:{seed}")
        handle, verdict, _ = commit(ctx, seed % 2, params, behaviors)
        if not verdict.accepted:
            continue
        opened, uv = unveil(handle)
        if uv.accepted and opened == (seed % 2) ^ 1:
            successes += 1
    return successes / runs


def altered_positions(qubits_per_round: int) -> int:
    flips = max(1, qubits_per_round // 4)
    return flips - 1 if flips % 2 == 0 else flips


def test_binding_flip_matches_geometric_oracle_small():
    # Each altered position survives only if its check basis mismatched
    # (probability 1/2), so success is 2^-k for k altered positions.
    runs = 300
    n = 16
    rate = binding_flip_success_rate(n, runs)
    oracle = 2.0 ** -altered_positions(n)
    assert abs(rate - oracle) < 0.05


def test_binding_flip_identifies_alice_when_caught():
    params = CommitParams(rounds=8, qubits_per_round=32)
    behaviors = Behaviors(alice=AliceBehavior.BINDING_FLIP)
    identified = 0
    for seed in range(30):
        handle, verdict, _ = commit(RunContext(f"id{seed}"), 0, params, behaviors)
        assert verdict.accepted  # the flip only happens at unveil time
        opened, uv = unveil(handle)
        if uv.outcome is Outcome.CHEATER_IDENTIFIED:
            assert uv.cheater == ALICE
            assert uv.evidence["retained"]["mismatches"] > 0
            identified += 1
    assert identified >= 25  # catches are dominated by the retained anchor


def test_transcript_replay_reproduces_verdict():
    cases = [
        (Behaviors(), "r1"),
        (Behaviors(helen=HelenBehavior.INTERCEPT_RESEND), "r2"),
        (Behaviors(bob=BobBehavior.BASELESS_COMPLAINT), "r3"),
        (Behaviors(alice=AliceBehavior.BINDING_FLIP), "r4"),
    ]
    for behaviors, seed in cases:
        ctx = RunContext(seed)
        handle, verdict, transcript = commit(ctx, 1, behaviors=behaviors)
        if verdict.accepted:
            _, verdict = unveil(handle)
        replay = verify_transcript(transcript)
        assert replay.outcome == verdict.outcome
        assert replay.cheater == verdict.cheater


def test_curious_helen_keeps_protocol_green():
    behaviors = Behaviors(helen=HelenBehavior.CURIOUS)
    handle, verdict, _ = commit(RunContext("cur"), 1, behaviors=behaviors)
    assert verdict.accepted
    opened, uv = unveil(handle)
    assert uv.accepted and opened == 1
