"""Record-and-reveal commitments enforced by the simulator.

A committed value is stored in the run's ledger at commit time.  While a
handle is *binding*, openings always return the stored values: the simulator
simply makes it impossible to open anything else.  Releasing the binding
models commitments that only need to hold for a bounded window (binding
horizon); after release the owner may open arbitrary claimed values, and it
is up to the protocol checks to catch that.

Concealing is structural: ledger contents never appear in any party's view
until an explicit open event is sent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .core import SimulationIntegrityError


@dataclass(frozen=True)
class LedgerHandle:
    ledger_id: int
    owner: str
    size: int
    label: str = ""


class CommitmentLedger:
    def __init__(self):
        self._values: list[list[int]] = []
        self._binding: list[bool] = []
        self._owners: list[str] = []

    def commit_bits(self, owner: str, values: Sequence[int], label: str = "") -> LedgerHandle:
        stored = [v & 1 for v in values]
        self._values.append(stored)
        self._binding.append(True)
        self._owners.append(owner)
        return LedgerHandle(len(self._values) - 1, owner, len(stored), label)

    def value(self, handle: LedgerHandle, index: int) -> int:
        """Owner-side read of a committed bit."""
        return self._values[handle.ledger_id][index]

    def is_binding(self, handle: LedgerHandle) -> bool:
        return self._binding[handle.ledger_id]

    def release(self, handle: LedgerHandle) -> None:
        """End the binding horizon: later opens are no longer forced."""
        self._binding[handle.ledger_id] = False

    def open_bits(self, handle: LedgerHandle, indices: Sequence[int],
                  claimed: Optional[Sequence[int]] = None) -> list[int]:
        """Open committed bits.

        While binding, the stored values are returned regardless of any claim;
        after release, a claim (if given) is what the opening shows.
        """
        stored = self._values[handle.ledger_id]
        if indices and (min(indices) < 0 or max(indices) >= len(stored)):
            raise SimulationIntegrityError("open index out of range")
        if self._binding[handle.ledger_id] or claimed is None:
            return [stored[i] for i in indices]
        if len(claimed) != len(indices):
            raise SimulationIntegrityError("claim length mismatch")
        return [v & 1 for v in claimed]
