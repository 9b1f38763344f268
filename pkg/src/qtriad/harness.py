"""Scenario catalog, batch runner, statistics, and curiosity audits.

Every scenario is deterministic in (scenario, seed, runs): run i derives its
own seed string, so batches are reproducible byte for byte and individual
runs can be replayed in isolation.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import commitment
from .codes import LinearCode
from .context import RunContext
from .core import (ALICE, BOB, HELEN, Outcome, StatisticsError, Verdict)
from .gcot import (GcotBehaviors, GcotParams, ReceiverBehavior as GcotReceiver,
                   SenderBehavior as GcotSender, run_trials)
from .bcx import open_bcx
from .ot import OtParams, ReceiverBehavior as OtReceiver, ot_transfer, pooled_breach


def wilson_interval(successes: int, n: int, z: float = 1.96):
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 0.0, 1.0
    phat = successes / n
    denom = 1 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return phat, max(0.0, center - half), min(1.0, center + half)


@dataclass
class RunResult:
    verdict: Verdict
    transcript: object
    extras: dict = field(default_factory=dict)


@dataclass
class BatchStats:
    scenario: str
    seed: int
    runs: int
    verdict_counts: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)   # name -> (value, lo, hi)
    expectation_met: bool = True

    def csv_rows(self) -> list[list]:
        rows = []
        for verdict, count in sorted(self.verdict_counts.items()):
            rows.append([self.scenario, self.seed, self.runs, verdict, count,
                         "", "", "", ""])
        for name, (value, lo, hi) in sorted(self.metrics.items()):
            rows.append([self.scenario, self.seed, self.runs, "", "",
                         name, f"{value:.6f}", f"{lo:.6f}", f"{hi:.6f}"])
        return rows


CSV_HEADER = ["scenario", "seed", "runs", "verdict", "count",
              "metric", "value", "ci_low", "ci_high"]


@dataclass
class ScenarioConfig:
    scenario: str
    seed: int = 0
    runs: int = 1
    params: dict = field(default_factory=dict)
    reveal_private: bool = False
    out: Optional[str] = None

    @staticmethod
    def from_json(blob: dict) -> "ScenarioConfig":
        return ScenarioConfig(
            scenario=blob["scenario"],
            seed=int(blob.get("seed", 0)),
            runs=int(blob.get("runs", 1)),
            params=blob.get("params", {}),
            reveal_private=bool(blob.get("reveal_private", False)),
            out=blob.get("out"),
        )


def _section(params: dict, name: str) -> dict:
    return dict(params.get(name, {}))


def build_commit_params(params: dict) -> commitment.CommitParams:
    sec = _section(params, "commit")
    sec.pop("bit", None)
    return commitment.CommitParams(
        rounds=int(sec.get("rounds", 16)),
        qubits_per_round=int(sec.get("qubits_per_round", 32)),
        mismatch_threshold=float(sec.get("mismatch_threshold", 0.05)),
    )


def build_ot_params(params: dict) -> OtParams:
    sec = _section(params, "ot")
    sec.pop("break_binding", None)
    return OtParams(
        qubits=int(sec.get("qubits", 64)),
        check_fraction=float(sec.get("check_fraction", 0.25)),
        mismatch_threshold=float(sec.get("mismatch_threshold", 0.05)),
        bcx_rows=int(sec.get("bcx_rows", 8)),
    )


def build_code(params: dict) -> LinearCode:
    sec = _section(params, "code")
    return LinearCode.from_config(family=sec.get("family", "rm1"),
                                  length=int(sec.get("m", 16)),
                                  sigma=float(sec.get("sigma", 0.125)))


def build_gcot_params(params: dict) -> GcotParams:
    sec = _section(params, "gcot")
    ot_sec = _section(params, "ot")
    return GcotParams(
        code=build_code(params),
        trials=int(sec.get("trials", 8)),
        ot=OtParams(qubits=int(ot_sec.get("qubits", 16)),
                    check_fraction=float(ot_sec.get("check_fraction", 0.25)),
                    bcx_rows=int(ot_sec.get("bcx_rows", 8))),
        proof_rows=int(sec.get("proof_rows", 4)),
    )


# ---------------------------------------------------------------------------
# scenario runners

def _pick_bit(params: dict, section: str, key: str, ctx: RunContext) -> int:
    sec = params.get(section, {})
    if key in sec:
        return int(sec[key]) & 1
    return ctx.rng("env").getrandbits(1)


def _run_commit_honest(ctx: RunContext, params: dict) -> RunResult:
    secret = _pick_bit(params, "commit", "bit", ctx)
    cp = build_commit_params(params)
    behaviors = commitment.Behaviors()
    handle, verdict, transcript = commitment.commit(ctx, secret, cp, behaviors)
    extras = {"bit": secret, "handle": handle}
    if verdict.accepted:
        opened, verdict = commitment.unveil(handle)
        extras["unveiled"] = opened
        extras["correct"] = opened == secret
    return RunResult(verdict, transcript, extras)


def _run_commit_audit(ctx: RunContext, params: dict) -> RunResult:
    """Honest-looking run with a maximally curious Helen, no unveil."""
    secret = _pick_bit(params, "commit", "bit", ctx)
    cp = build_commit_params(params)
    behaviors = commitment.Behaviors(helen=commitment.HelenBehavior.CURIOUS)
    handle, verdict, transcript = commitment.commit(ctx, secret, cp, behaviors)
    return RunResult(verdict, transcript, {"bit": secret, "handle": handle})


def _run_commit_helen_ir(ctx: RunContext, params: dict) -> RunResult:
    secret = _pick_bit(params, "commit", "bit", ctx)
    cp = build_commit_params(params)
    behaviors = commitment.Behaviors(helen=commitment.HelenBehavior.INTERCEPT_RESEND)
    handle, verdict, transcript = commitment.commit(ctx, secret, cp, behaviors)
    tested = _count_tested_forward_positions(handle, transcript)
    return RunResult(verdict, transcript,
                     {"bit": secret, "detected": verdict.detected,
                      "tested_positions": tested})


def _count_tested_forward_positions(handle, transcript) -> int:
    """Forwarded positions that landed in a published round with matching
    bases (each would expose an attack with probability 1/4)."""
    tested = 0
    plans = {}
    preps = {}
    for e in transcript.events:
        if e.tag == "commit.plan":
            plans[e.payload["round"]] = e.payload
        elif e.tag == "commit.alice-prep":
            preps[e.payload["round"]] = e.payload
        elif e.tag == "commit.publish":
            rnd = e.payload["round"]
            plan = plans[rnd]
            bases = preps[rnd]["bases"]
            decoy_slots = set(plan["decoy_slots"])
            forwarded = plan["forwarded"]
            source_slots = [s for s in range(len(e.payload["records"]))
                            if s not in decoy_slots]
            for slot, origin in zip(source_slots, forwarded):
                if e.payload["records"][slot].basis is bases[origin]:
                    tested += 1
    return tested


def _run_commit_alice_flip(ctx: RunContext, params: dict) -> RunResult:
    secret = _pick_bit(params, "commit", "bit", ctx)
    cp = build_commit_params(params)
    behaviors = commitment.Behaviors(alice=commitment.AliceBehavior.BINDING_FLIP)
    handle, verdict, transcript = commitment.commit(ctx, secret, cp, behaviors)
    extras = {"bit": secret}
    if verdict.accepted:
        opened, verdict = commitment.unveil(handle)
        extras["flip_success"] = bool(verdict.accepted and opened is not None
                                      and opened != secret)
    else:
        extras["flip_success"] = False
    return RunResult(verdict, transcript, extras)


def _run_commit_bob_baseless(ctx: RunContext, params: dict) -> RunResult:
    secret = _pick_bit(params, "commit", "bit", ctx)
    cp = build_commit_params(params)
    behaviors = commitment.Behaviors(bob=commitment.BobBehavior.BASELESS_COMPLAINT)
    handle, verdict, transcript = commitment.commit(ctx, secret, cp, behaviors)
    return RunResult(verdict, transcript, {"bit": secret})


def _ot_inputs(ctx: RunContext, params: dict):
    sec = params.get("ot", {})
    env = ctx.rng("env")
    b0 = int(sec["b0"]) & 1 if "b0" in sec else env.getrandbits(1)
    b1 = int(sec["b1"]) & 1 if "b1" in sec else env.getrandbits(1)
    choice = int(sec["choice"]) & 1 if "choice" in sec else env.getrandbits(1)
    return b0, b1, choice


def _run_ot_honest(ctx: RunContext, params: dict) -> RunResult:
    b0, b1, choice = _ot_inputs(ctx, params)
    op = build_ot_params(params)
    route = params.get("ot", {}).get("route", "direct")
    sender = ALICE if route == "via-helen" else HELEN
    out, verdict, session = ot_transfer(ctx, sender, BOB, b0, b1, choice, op,
                                        route=route)
    return RunResult(verdict, ctx.transcript,
                     {"inputs": (b0, b1, choice), "output": out,
                      "correct": out == (b1 if choice else b0),
                      "session": session})


def _run_ot_lazy(ctx: RunContext, params: dict) -> RunResult:
    b0, b1, choice = _ot_inputs(ctx, params)
    op = build_ot_params(params)
    out, verdict, session = ot_transfer(ctx, HELEN, BOB, b0, b1, choice, op,
                                        receiver_behavior=OtReceiver.LAZY)
    caught = (verdict.outcome is Outcome.CHEATER_IDENTIFIED
              and verdict.cheater == BOB)
    return RunResult(verdict, ctx.transcript,
                     {"caught": caught, "session": session,
                      "checked": op.check_count})


def _run_ot_post_collusion(ctx: RunContext, params: dict) -> RunResult:
    b0, b1, choice = _ot_inputs(ctx, params)
    op = build_ot_params(params)
    break_binding = bool(params.get("ot", {}).get("break_binding", False))
    behavior = OtReceiver.DEFER if break_binding else OtReceiver.HONEST
    out, verdict, session = ot_transfer(
        ctx, HELEN, BOB, b0, b1, choice, op,
        receiver_behavior=behavior,
        break_binding_before_checks=break_binding)
    breach = pooled_breach(session, (ALICE, BOB))
    return RunResult(verdict, ctx.transcript,
                     {"inputs": (b0, b1, choice), "output": out,
                      "breach": breach, "session": session})


def _gcot_inputs(ctx: RunContext, params: dict):
    sec = params.get("gcot", {})
    env = ctx.rng("env")
    a0 = int(sec["a0"]) & 1 if "a0" in sec else env.getrandbits(1)
    a1 = int(sec["a1"]) & 1 if "a1" in sec else env.getrandbits(1)
    choice = int(sec["choice"]) & 1 if "choice" in sec else env.getrandbits(1)
    return a0, a1, choice


def _run_gcot_honest(ctx: RunContext, params: dict) -> RunResult:
    a0, a1, choice = _gcot_inputs(ctx, params)
    gp = build_gcot_params(params)
    verdict, session, log = run_trials(ctx, a0, a1, choice, gp)
    extras = {"inputs": (a0, a1, choice), "log": log}
    if verdict.accepted and session is not None:
        unveiled = open_bcx(ctx, session.output_comm.toward(HELEN))
        extras["output"] = session.output
        extras["unveiled"] = unveiled
        extras["correct"] = unveiled == (a1 if choice else a0)
        extras["session"] = session
    else:
        extras["correct"] = False
    return RunResult(verdict, ctx.transcript, extras)


def _run_gcot_disruptive_bob(ctx: RunContext, params: dict) -> RunResult:
    a0, a1, choice = _gcot_inputs(ctx, params)
    gp = build_gcot_params(params)
    behaviors = GcotBehaviors(receiver=GcotReceiver.COMPLAIN_ALWAYS)
    verdict, session, log = run_trials(ctx, a0, a1, choice, gp, behaviors)
    return RunResult(verdict, ctx.transcript, {"log": log})


def _run_gcot_cheating_alice(ctx: RunContext, params: dict) -> RunResult:
    a0, a1, choice = _gcot_inputs(ctx, params)
    gp = build_gcot_params(params)
    behaviors = GcotBehaviors(sender=GcotSender.COMPLEMENT_ANSWERS)
    verdict, session, log = run_trials(ctx, a0, a1, choice, gp, behaviors)
    return RunResult(verdict, ctx.transcript, {"log": log})


@dataclass(frozen=True)
class Scenario:
    name: str
    runner: Callable
    description: str
    expectation: Callable  # RunResult -> bool, per-run


SCENARIOS: dict[str, Scenario] = {}


def _register(name, runner, description, expectation):
    SCENARIOS[name] = Scenario(name, runner, description, expectation)


_register("commit-honest", _run_commit_honest,
          "honest commit followed by unveil",
          lambda r: bool(r.extras.get("correct")))
_register("commit-audit", _run_commit_audit,
          "honest commit with a maximally curious Helen (no unveil)",
          lambda r: r.verdict.accepted)
_register("commit-helen-ir", _run_commit_helen_ir,
          "Helen intercept-resends the qubits she forwards",
          lambda r: True)
_register("commit-alice-flip", _run_commit_alice_flip,
          "Alice tries to unveil the opposite bit",
          lambda r: True)
_register("commit-bob-baseless", _run_commit_bob_baseless,
          "Bob complains about the merged stream without cause",
          lambda r: r.verdict.outcome is Outcome.CHEATER_IDENTIFIED
          and r.verdict.cheater == BOB)
_register("ot-honest", _run_ot_honest,
          "honest forced-measurement oblivious transfer",
          lambda r: bool(r.extras.get("correct")))
_register("ot-lazy-receiver", _run_ot_lazy,
          "receiver fabricates commitments instead of measuring",
          lambda r: True)
_register("ot-post-collusion", _run_ot_post_collusion,
          "terminated transfer, then the receiver pools views with Alice",
          lambda r: not r.extras.get("breach"))
_register("gcot-honest", _run_gcot_honest,
          "honest committed oblivious transfer, output unveiled",
          lambda r: bool(r.extras.get("correct")))
_register("gcot-disruptive-bob", _run_gcot_disruptive_bob,
          "receiver disputes every instance, pretended ones included",
          lambda r: r.verdict.outcome is Outcome.CHEATER_IDENTIFIED
          and r.verdict.cheater == BOB)
_register("gcot-cheating-alice", _run_gcot_cheating_alice,
          "sender answers every transfer against her commitments",
          lambda r: r.verdict.outcome is Outcome.CHEATER_IDENTIFIED
          and r.verdict.cheater == ALICE)


def _verdict_key(verdict: Verdict) -> str:
    if verdict.outcome is Outcome.CHEATER_IDENTIFIED:
        return f"cheater-identified:{verdict.cheater}"
    return verdict.outcome.value


_METRIC_FLAGS = {
    "commit-honest": ("correct_rate", "correct"),
    "commit-audit": (None, None),
    "commit-helen-ir": ("detection_rate", "detected"),
    "commit-alice-flip": ("flip_success_rate", "flip_success"),
    "commit-bob-baseless": (None, None),
    "ot-honest": ("correct_rate", "correct"),
    "ot-lazy-receiver": ("detection_rate", "caught"),
    "ot-post-collusion": ("breach_rate", "breach"),
    "gcot-honest": ("correct_rate", "correct"),
    "gcot-disruptive-bob": (None, None),
    "gcot-cheating-alice": (None, None),
}


def run_scenario(config: ScenarioConfig):
    """Run a batch.  Returns ``(BatchStats, list[RunResult])``."""
    if config.scenario not in SCENARIOS:
        raise KeyError(f"unknown scenario {config.scenario!r}")
    scenario = SCENARIOS[config.scenario]
    results: list[RunResult] = []
    rerun_budget = 4  # aborted runs (no contributing rounds) redraw a seed
    for i in range(config.runs):
        result = None
        for attempt in range(rerun_budget):
            run_seed = f"{config.seed}:{i}" if attempt == 0 else \
                f"{config.seed}:{i}:retry{attempt}"
            ctx = RunContext(run_seed, scenario=config.scenario,
                             run_id=f"{config.scenario}-{config.seed}-{i}")
            result = scenario.runner(ctx, config.params)
            if result.verdict.outcome is not Outcome.ABORTED:
                break
        results.append(result)

    stats = BatchStats(scenario=config.scenario, seed=config.seed,
                       runs=config.runs)
    for r in results:
        key = _verdict_key(r.verdict)
        stats.verdict_counts[key] = stats.verdict_counts.get(key, 0) + 1
    metric_name, flag = _METRIC_FLAGS.get(config.scenario, (None, None))
    if metric_name:
        hits = sum(1 for r in results if r.extras.get(flag))
        stats.metrics[metric_name] = wilson_interval(hits, len(results))
    stats.expectation_met = all(scenario.expectation(r) for r in results)
    if config.out:
        write_outputs(config, stats, results)
    return stats, results


def stats_csv(stats: BatchStats) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(stats.csv_rows())
    return buf.getvalue()


def write_outputs(config: ScenarioConfig, stats: BatchStats,
                  results: list[RunResult]) -> None:
    out = config.out
    os.makedirs(os.path.join(out, "transcripts"), exist_ok=True)
    for r in results:
        path = os.path.join(out, "transcripts", f"{r.transcript.run_id}.json")
        with open(path, "w") as fh:
            json.dump(r.transcript.to_json(config.reveal_private), fh,
                      sort_keys=True, indent=2)
            fh.write("\n")
    with open(os.path.join(out, "stats.csv"), "w") as fh:
        fh.write(stats_csv(stats))


# ---------------------------------------------------------------------------
# curiosity audits: what can honest-but-curious parties infer?

def _helen_commit_guess(transcript, rng: random.Random) -> int:
    """Maximum-likelihood guess of the committed bit from Helen's view.

    Helen reconstructs every bit she can (retained positions whose anchor
    basis matched the opened basis); any contributing round with an unknown
    position leaves the round parity, and therefore the bit, uniform.
    """
    bases_by_round = {}
    retained_by_round = {}
    announce = None
    for e in transcript.view_of(HELEN):
        if e.tag == "commit.open-bases":
            bases_by_round[e.payload["round"]] = e.payload["bases"]
        elif e.tag == "commit.retained-measurements":
            retained_by_round[e.payload["round"]] = e.payload["retained"]
        elif e.tag == "commit.announce":
            announce = e.payload
    if announce is None:
        return rng.getrandbits(1)
    total_parity = 0
    for rnd in announce["contributing"]:
        bases = bases_by_round[rnd]
        known = {}
        for idx_str, (basis_value, outcome) in retained_by_round.get(rnd, {}).items():
            idx = int(idx_str)
            if bases[idx].value == basis_value:
                known[idx] = outcome
        if len(known) < len(bases):
            return rng.getrandbits(1)
        total_parity ^= sum(known.values()) & 1
    return total_parity ^ announce["flag"]


def _bob_commit_guess(transcript, rng: random.Random) -> int:
    """Bob never sees the preparation bases during commit, so none of his
    outcomes can be sifted; the maximum-likelihood rule is a coin."""
    return rng.getrandbits(1)


def curiosity_audit(results: list[RunResult], seed=0, min_runs: int = 500) -> dict:
    """Per-party guess accuracy of the committed bit over a batch of commit
    runs with a uniform secret."""
    if len(results) < min_runs:
        raise StatisticsError(
            f"curiosity audit needs >= {min_runs} runs, got {len(results)}")
    rng = random.Random(f"audit:{seed}")
    hits = {ALICE: 0, BOB: 0, HELEN: 0}
    for r in results:
        truth = r.extras["bit"]
        hits[ALICE] += 1  # the committer knows her own bit
        hits[HELEN] += _helen_commit_guess(r.transcript, rng) == truth
        hits[BOB] += _bob_commit_guess(r.transcript, rng) == truth
    out = {}
    for party, count in hits.items():
        acc, lo, hi = wilson_interval(count, len(results))
        out[party] = {"accuracy": acc, "ci_low": lo, "ci_high": hi,
                      "runs": len(results)}
    return out


def ot_privacy_audit(results: list[RunResult], seed=0) -> dict:
    """Receiver's guess of the unchosen payload bit and sender's guess of the
    choice bit, over honest transfer sessions.

    Both maximum-likelihood rules degenerate to coins: the unchosen mask set
    is XORed over positions the receiver never learned, and the two announced
    mask sets are exchangeable from the sender's side.
    """
    rng = random.Random(f"ot-audit:{seed}")
    unchosen_hits = 0
    choice_hits = 0
    for r in results:
        session = r.extras["session"]
        b0, b1, choice = r.extras["inputs"]
        unchosen_truth = b1 if choice == 0 else b0
        mask = session.masked[1 - choice]
        unknown = [i for i in session.mask_sets[1 - choice]
                   if i not in session.receiver_known]
        estimate = mask
        for i in session.mask_sets[1 - choice]:
            if i in session.receiver_known:
                estimate ^= session.outcomes[i]
        if unknown:
            estimate = rng.getrandbits(1)
        unchosen_hits += estimate == unchosen_truth
        choice_hits += rng.getrandbits(1) == choice
    n = len(results)
    return {
        "receiver_unchosen": wilson_interval(unchosen_hits, n),
        "sender_choice": wilson_interval(choice_hits, n),
    }
