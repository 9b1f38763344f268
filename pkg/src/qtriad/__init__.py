"""Deterministic simulator for three-party quantum cryptographic protocols.

Alice, Bob, and Helen, with Alice and Bob in conflict: anonymized bit
commitment through Helen, oblivious transfer from forced measurements,
committed oblivious transfer on share-row commitments with cut-and-choose
linear proofs, and adversary-structure feasibility checkers.
"""

from .advstruct import (AdversaryStructure, PlayerSet, classical_feasible,
                        post_termination_structure, quantum_feasible,
                        verdict_structure)
from .bcx import (BcxCommitment, GbcxCommitment, LinearRelationClaim,
                  bcx_commit, bcx_copy, gbcx_commit, gbcx_copy, open_bcx,
                  prove_linear)
from .codes import LinearCode, ReedMullerCode, default_code
from .commitment import (CommitParams, CommitmentHandle, commit, parity,
                         unveil, verify_transcript)
from .context import RunContext
from .core import ALICE, BOB, HELEN, Outcome, Verdict
from .gcot import GcotParams, gcot_complete, run_trials, subgcot
from .harness import ScenarioConfig, curiosity_audit, run_scenario
from .ot import OtParams, ot_transfer, pooled_breach
from .qsim import Basis, MeasurementRecord, Qubit, intercept_resend, measure, prepare, sift

__version__ = "0.1.0"
