"""Forced-measurement transfer: correctness, cheating detection, collusions."""

import itertools

import pytest

from qtriad.context import RunContext
from qtriad.core import ALICE, BOB, HELEN, ConfigError, Outcome
from qtriad.ot import (OtParams, ReceiverBehavior, ot_transfer, pooled_breach)


def test_param_validation():
    with pytest.raises(ConfigError):
        OtParams(qubits=7).validate()
    with pytest.raises(ConfigError):
        OtParams(check_fraction=0.6).validate()
    OtParams().validate()


def test_honest_transfer_all_input_combinations():
    for b0, b1, choice in itertools.product((0, 1), repeat=3):
        for seed in range(5):
            ctx = RunContext(f"ot{b0}{b1}{choice}:{seed}")
            out, verdict, _ = ot_transfer(ctx, HELEN, BOB, b0, b1, choice)
            assert verdict.accepted
            assert out == (b1 if choice else b0)


def test_anonymized_route_delivers_and_hides_origin():
    ctx = RunContext("route")
    out, verdict, _ = ot_transfer(ctx, ALICE, BOB, 1, 0, 0, route="via-helen")
    assert verdict.accepted and out == 1
    senders_to_bob = {e.sender for e in ctx.transcript.view_of(BOB)}
    assert ALICE not in senders_to_bob


def test_lazy_receiver_detection_matches_cut_and_choose_bound():
    params = OtParams()
    caught = 0
    runs = 400
    for seed in range(runs):
        ctx = RunContext(f"lazy{seed}")
        _, verdict, _ = ot_transfer(ctx, HELEN, BOB, 0, 1, 1, params,
                                    receiver_behavior=ReceiverBehavior.LAZY)
        caught += (verdict.outcome is Outcome.CHEATER_IDENTIFIED
                   and verdict.cheater == BOB)
    oracle = 1 - 0.75 ** params.check_count
    assert caught / runs >= oracle - 0.05
    assert abs(caught / runs - oracle) < 0.05


def test_refusing_to_open_identifies_receiver():
    ctx = RunContext("refuse")
    _, verdict, _ = ot_transfer(ctx, HELEN, BOB, 0, 0, 0,
                                receiver_behavior=ReceiverBehavior.REFUSE_OPEN)
    assert verdict.outcome is Outcome.CHEATER_IDENTIFIED
    assert verdict.cheater == BOB


def test_honest_receiver_learns_nothing_about_unchosen_bit():
    # The unchosen mask set lies inside the mismatched partition, where the
    # receiver's outcomes are independent coins.
    for seed in range(50):
        ctx = RunContext(f"priv{seed}")
        out, verdict, session = ot_transfer(ctx, HELEN, BOB, 1, 1, 0)
        assert verdict.accepted
        unchosen = session.mask_sets[1]
        assert not (set(unchosen) & session.receiver_known)


def test_post_termination_pooling_gains_nothing():
    for seed in range(30):
        ctx = RunContext(f"pool{seed}")
        _, verdict, session = ot_transfer(ctx, HELEN, BOB, 0, 1, 1)
        assert verdict.accepted
        assert pooled_breach(session, (ALICE, BOB)) is False


def test_binding_broken_before_checks_enables_breach():
    for seed in range(20):
        ctx = RunContext(f"breach{seed}")
        out, verdict, session = ot_transfer(
            ctx, HELEN, BOB, 0, 1, 1,
            receiver_behavior=ReceiverBehavior.DEFER,
            break_binding_before_checks=True)
        assert verdict.accepted       # the deferral is never caught
        assert out == 1               # and still yields the chosen bit
        assert pooled_breach(session, (ALICE, BOB)) is True


def test_deferring_without_broken_binding_is_caught():
    caught = 0
    for seed in range(40):
        ctx = RunContext(f"defer{seed}")
        _, verdict, _ = ot_transfer(ctx, HELEN, BOB, 0, 1, 1,
                                    receiver_behavior=ReceiverBehavior.DEFER)
        caught += verdict.outcome is Outcome.CHEATER_IDENTIFIED
    assert caught == 40  # placeholder commitments mismatch half the checks


def test_mask_sets_are_equal_sized_and_disjoint():
    for seed in range(30):
        ctx = RunContext(f"mask{seed}")
        _, verdict, session = ot_transfer(ctx, HELEN, BOB, 0, 1, 0)
        assert verdict.accepted
        m0, m1 = session.mask_sets
        assert len(m0) == len(m1) >= session.params.min_partition
        assert not (set(m0) & set(m1))
