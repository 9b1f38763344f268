"""Message fabric: privacy of views, anonymity of forwarding, determinism."""

import json
import random

import pytest

from qtriad.core import (ALICE, BOB, HELEN, MalformedMessageError,
                         NonTerminationError, SimulationIntegrityError)
from qtriad.netsim import (Envelope, ForwardingPlan, Network, Scheduler,
                           Transcript, anonymized_forward, payload_digest)
from qtriad.qsim import Basis, prepare


def test_private_send_hidden_from_third_party():
    net = Network()
    net.send_private(ALICE, HELEN, {"bits": [0, 1]}, "x")
    assert [e.tag for e in net.transcript.view_of(HELEN)] == ["x"]
    assert net.transcript.view_of(BOB) == []


def test_broadcast_reaches_everyone_identically():
    net = Network()
    net.broadcast(BOB, {"records": [1, 2, 3]}, "pub")
    views = [net.transcript.view_of(p) for p in (ALICE, BOB, HELEN)]
    assert all(len(v) == 1 and v[0].payload == {"records": [1, 2, 3]}
               for v in views)


def test_broadcast_rejects_qubit_payloads():
    net = Network()
    with pytest.raises(MalformedMessageError):
        net.broadcast(ALICE, [prepare(0, Basis.PLUS)], "bad")


def test_rounds_strictly_increase():
    net = Network()
    net.send_private(ALICE, BOB, 1, "a")
    net.broadcast(BOB, 2, "b")
    net.send_private(HELEN, ALICE, 3, "c")
    rounds = [e.round for e in net.transcript.events]
    assert rounds == sorted(rounds) and len(set(rounds)) == len(rounds)


def test_scheduler_round_robin_and_cap():
    sched = Scheduler(max_steps=9)
    order = [sched.step() for _ in range(8)]
    assert order == ["Alice", "Bob", "Helen", "env"] * 2
    sched.step()
    with pytest.raises(NonTerminationError):
        sched.step()


def test_forwarding_plan_layout_partitions_merged_stream():
    plan = ForwardingPlan(source_positions=(1, 3), decoy_positions=(0, 2))
    assert plan.layout() == [("decoy", 0), ("source", 1), ("decoy", 1),
                             ("source", 3)]
    assert plan.source_slots() == {1: 1, 3: 3}


def test_forwarding_plan_validation():
    plan = ForwardingPlan(source_positions=(0, 9), decoy_positions=(0,))
    with pytest.raises(SimulationIntegrityError):
        plan.validate(n_source=4, n_decoys=1)


def test_anonymized_forward_discloses_split_to_alice_only():
    net = Network()
    plan = ForwardingPlan(source_positions=(0, 2), decoy_positions=(1, 3))
    alice_qubits = [prepare(b, Basis.PLUS) for b in (0, 1, 0, 1)]
    decoys = [prepare(1, Basis.CROSS), prepare(0, Basis.CROSS)]
    merged = anonymized_forward(net, plan, alice_qubits, decoys,
                                sender=HELEN, receiver=BOB, disclose_to=ALICE)
    assert len(merged) == 4
    (bob_env,) = net.transcript.view_of(BOB)
    assert bob_env.tag == "forward"
    (alice_env,) = net.transcript.view_of(ALICE)
    assert alice_env.payload == {"forwarded": [0, 2], "decoy_slots": [1, 3]}


def test_bob_view_invariant_under_origin_permutation():
    """Two plans that swap which slots are decoys, with identical merged
    (bit, basis) values, give byte-identical receiver views."""
    def run(plan, alice_bits, decoy_bits):
        net = Network()
        alice_qubits = [prepare(b, Basis.PLUS) for b in alice_bits]
        decoys = [prepare(b, Basis.PLUS) for b in decoy_bits]
        anonymized_forward(net, plan, alice_qubits, decoys,
                           sender=HELEN, receiver=BOB, disclose_to=ALICE)
        return net.transcript.serialize_view(BOB)

    # Merged stream is (1, 0, 1, 0) in both runs, with origins permuted.
    first = run(ForwardingPlan((0, 1), (1, 3)), [1, 1], [0, 0])
    second = run(ForwardingPlan((0, 1), (0, 2)), [0, 0], [1, 1])
    assert first == second


def test_sender_mask_rewrites_origin():
    net = Network()
    with net.sender_mask(ALICE, HELEN):
        net.broadcast(ALICE, {"x": 1}, "masked")
        net.send_private(ALICE, BOB, {"y": 2}, "masked-private")
    net.broadcast(ALICE, {"x": 2}, "open")
    senders = [e.sender for e in net.transcript.events]
    assert senders == [HELEN, HELEN, ALICE]


def test_transcript_json_hides_private_payloads_by_default():
    t = Transcript(run_id="r", scenario="s", seed=1)
    net = Network(t)
    net.send_private(ALICE, HELEN, {"secret": 1}, "private")
    net.broadcast(BOB, {"open": 2}, "public")
    blob = t.to_json()
    assert "payload" not in blob["events"][0]
    assert blob["events"][0]["payload_digest"] == payload_digest({"secret": 1})
    assert blob["events"][1]["payload"] == {"open": 2}
    revealed = t.to_json(reveal_private=True)
    assert revealed["events"][0]["payload"] == {"secret": 1}


def test_transcript_replay_order_is_deterministic():
    def build(seed):
        rng = random.Random(seed)
        net = Network(Transcript(run_id="d", scenario="det", seed=seed))
        for _ in range(20):
            if rng.getrandbits(1):
                net.broadcast(BOB, rng.getrandbits(8), "pub")
            else:
                net.send_private(ALICE, HELEN, rng.getrandbits(8), "priv")
        return json.dumps(net.transcript.to_json(True), sort_keys=True)

    assert build(5) == build(5)
    assert build(5) != build(6)
