"""Classical simulation of single conjugate-coded (BB84) qubits.

A qubit here is the classical triple (bit, basis, disturbed).  Measuring in
the preparation basis of an undisturbed qubit reproduces the prepared bit;
any other measurement yields a fresh unbiased coin.  That is the entire
statistical content the protocols rely on, so no amplitudes are tracked.

Qubits are linear resources: a second measurement of the same qubit is a
simulator-integrity fault, never a protocol outcome.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Sequence

from .core import MalformedMessageError, SimulationIntegrityError


class Basis(enum.Enum):
    """The two conjugate encoding bases: rectilinear (+) and diagonal (x)."""

    PLUS = "+"
    CROSS = "x"

    @staticmethod
    def random(rng: random.Random) -> "Basis":
        return Basis.CROSS if rng.getrandbits(1) else Basis.PLUS


@dataclass
class Qubit:
    bit: int
    basis: Basis
    disturbed: bool = False
    consumed: bool = field(default=False, repr=False, compare=False)


@dataclass(frozen=True)
class MeasurementRecord:
    index: int
    basis: Basis
    outcome: int


def prepare(bit: int, basis: Basis) -> Qubit:
    """Encode a classical bit in the given basis."""
    if bit not in (0, 1):
        raise MalformedMessageError(f"bit must be 0 or 1, got {bit!r}")
    return Qubit(bit=bit, basis=basis)


def measure(q: Qubit, basis: Basis, rng: random.Random) -> int:
    """Measure and consume a qubit.

    Deterministic exactly when the measurement basis matches the preparation
    basis and the qubit was never disturbed; otherwise the outcome is an
    unbiased coin from ``rng``.
    """
    if q.consumed:
        raise SimulationIntegrityError("qubit measured twice")
    q.consumed = True
    if basis is q.basis and not q.disturbed:
        return q.bit
    return rng.getrandbits(1)


def intercept_resend(q: Qubit, basis: Basis, rng: random.Random) -> Qubit:
    """Measure a qubit in ``basis`` and re-prepare the observed outcome.

    The original qubit is consumed.  The replacement carries a disturbed flag
    whenever the attack basis differed from the qubit's current basis (or the
    qubit was already disturbed), which is what a later matching-basis
    measurement can expose with probability 1/2.
    """
    was_disturbed = q.disturbed
    original_basis = q.basis
    outcome = measure(q, basis, rng)
    fresh = prepare(outcome, basis)
    fresh.disturbed = was_disturbed or (basis is not original_basis)
    return fresh


def measure_string(qubits: Sequence[Qubit], rng: random.Random) -> list[MeasurementRecord]:
    """Measure every qubit in a fresh uniformly random basis."""
    records = []
    for i, q in enumerate(qubits):
        basis = Basis.random(rng)
        records.append(MeasurementRecord(index=i, basis=basis, outcome=measure(q, basis, rng)))
    return records


def sift(sent: Sequence[tuple[int, Basis]], received: Sequence[MeasurementRecord]) -> list[int]:
    """Positions where the bases matched but the outcomes disagree.

    Positions measured in the wrong basis carry no information and are
    excluded from checking.
    """
    if len(sent) != len(received):
        raise MalformedMessageError(
            f"length mismatch: sent {len(sent)}, received {len(received)}")
    bad = []
    for pos, (record, (sent_bit, sent_basis)) in enumerate(zip(received, sent)):
        if record.index != pos:
            raise MalformedMessageError(f"record {record.index} out of order at {pos}")
        if record.basis is sent_basis and record.outcome != sent_bit:
            bad.append(pos)
    return bad
