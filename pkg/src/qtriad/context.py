"""Per-run wiring: one seed, one transcript, one network, one ledger."""

from __future__ import annotations

import itertools
import random

from .core import RngBank
from .ledger import CommitmentLedger
from .netsim import DEFAULT_MAX_STEPS, Network, Transcript


class RunContext:
    """Everything one protocol run needs, derived from a single seed."""

    def __init__(self, seed, scenario: str = "", run_id: str = "run",
                 max_steps: int = DEFAULT_MAX_STEPS):
        self.seed = seed
        self.bank = RngBank(seed)
        self.transcript = Transcript(run_id=run_id, scenario=scenario, seed=seed)
        self.net = Network(self.transcript, max_steps=max_steps)
        self.ledger = CommitmentLedger()
        self._labels = itertools.count()

    def rng(self, name: str) -> random.Random:
        return self.bank.stream(name)

    def fresh_label(self, prefix: str) -> str:
        """Run-local unique label; keeps transcripts seed-reproducible."""
        return f"{prefix}{next(self._labels)}"

    def child(self, label: str) -> "RunContext":
        """Isolated context for a nested sub-protocol run."""
        return RunContext(f"{self.seed}/{label}",
                          scenario=self.transcript.scenario,
                          run_id=f"{self.transcript.run_id}/{label}")
