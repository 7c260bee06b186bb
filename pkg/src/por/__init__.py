"""Proof-of-Reputation mining toolkit.

A small protocol library, toy chain state machine, and attack analyzer for
reputation-weighted proof of work: decaying per-miner difficulty bonuses,
per-miner tailored targets, signed-header (certified) mining, and closed-form
plus Monte Carlo analysis of the 51%-attack race.
"""

from por.reputation import (
    SCALE,
    BonusTable,
    ReputationLedger,
    ReputationParams,
    bonus_at_depth,
    lambda0_for_target,
    total_bonus_closed_form,
)
from por.consensus import (
    BlockHeader,
    ChainState,
    TargetPair,
    TransitionSchedule,
    ValidationError,
    Verdict,
    block_hash,
    effective_total_bonus,
    tailored_difficulty,
    tailored_target,
    validate_block,
)
from por.certmine import (
    HeaderTemplate,
    MinerKeypair,
    MiningJob,
    MiningResult,
    mine_certified,
    sign_header,
    verify_header,
)
from por.attacksim import (
    AttackScenario,
    RaceEstimate,
    RaceOutcome,
    apparent_hashrate,
    attack_success_probability,
    critical_fraction,
    race_outcome,
    simulate_race,
    sweep,
)

__version__ = "0.1.0"
