"""Event-driven chain simulation with reputation-dependent block rates.

Blocks are not actually hashed here: each miner's time-to-block is an
exponential clock with rate ``hashrate / (difficulty * (1 - bonus))``, the
winner is the fastest clock, and the winner's reputation grows by the
depth-0 bonus while everyone else's decays by ``exp(-chi)``.  This is the
analysis-lane counterpart of the consensus state machine and uses plain
floats throughout.

A miner can be pinned at a fixed "steady state" bonus instead of accumulating
one dynamically, which is how long-run energy accounting is measured without
simulating the burn-in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from por.reputation import ReputationParams


@dataclass(frozen=True)
class MinerSpec:
    name: str
    hashrate: float
    use_bonus: bool = True
    # None: accumulate reputation dynamically from blocks actually won.
    # A float pins the miner's bonus at that value for the whole run.
    steady_state_bonus: Optional[float] = None

    def __post_init__(self) -> None:
        if self.hashrate <= 0:
            raise ValueError(f"hashrate must be > 0, got {self.hashrate}")
        if self.steady_state_bonus is not None and not (
            0 <= self.steady_state_bonus < 1
        ):
            raise ValueError(
                f"steady_state_bonus out of range: {self.steady_state_bonus}"
            )


@dataclass
class MinerReport:
    name: str
    hashrate: float
    blocks_won: int
    final_bonus: float
    win_share: float


@dataclass
class ChainSimReport:
    blocks: int
    difficulty: float
    seed: int
    total_time: float
    # Sum over blocks of E[hashes per block] given the bonuses in force.
    expected_hashes: float
    # Total hashrate integrated over the realized inter-block times.
    realized_hashes: float
    miners: List[MinerReport]
    winners: List[int] = field(repr=False, default_factory=list)
    intervals: List[float] = field(repr=False, default_factory=list)


def simulate_chain(
    params: ReputationParams,
    miners: List[MinerSpec],
    blocks: int,
    difficulty: float,
    seed: int,
) -> ChainSimReport:
    """Run the exponential-race chain for ``blocks`` blocks.

    Deterministic given the seed.  Reputation used for block k is the state
    after block k-1 (a block never discounts itself).
    """
    if not miners:
        raise ValueError("miner roster is empty")
    if blocks < 1:
        raise ValueError("blocks must be >= 1")
    if difficulty <= 0:
        raise ValueError("difficulty must be > 0")

    rng = np.random.Generator(np.random.PCG64(seed))
    n = len(miners)
    hashrates = np.array([m.hashrate for m in miners], dtype=float)
    total_hashrate = float(hashrates.sum())
    decay = math.exp(-params.chi)

    dynamic = np.zeros(n)  # accumulated bonus per miner
    pinned = np.array(
        [
            m.steady_state_bonus if m.steady_state_bonus is not None else np.nan
            for m in miners
        ]
    )
    use = np.array([m.use_bonus for m in miners])

    winners: List[int] = []
    intervals: List[float] = []
    expected_hashes = 0.0
    total_time = 0.0
    won = np.zeros(n, dtype=int)

    for _ in range(blocks):
        bonus = np.where(np.isnan(pinned), dynamic, pinned)
        bonus = np.where(use, bonus, 0.0)
        rates = hashrates / (difficulty * (1.0 - bonus))
        total_rate = float(rates.sum())
        interval = rng.exponential(1.0 / total_rate)
        winner = int(rng.choice(n, p=rates / total_rate))

        winners.append(winner)
        intervals.append(interval)
        total_time += interval
        expected_hashes += total_hashrate / total_rate
        won[winner] += 1

        # Shift reputation one block deeper; the winner earns the depth-0 bonus.
        dynamic *= decay
        dynamic[winner] += params.lambda0

    realized_hashes = total_hashrate * total_time
    reports = [
        MinerReport(
            name=m.name,
            hashrate=m.hashrate,
            blocks_won=int(won[i]),
            final_bonus=float(dynamic[i] if np.isnan(pinned[i]) else pinned[i]),
            win_share=float(won[i]) / blocks,
        )
        for i, m in enumerate(miners)
    ]
    return ChainSimReport(
        blocks=blocks,
        difficulty=difficulty,
        seed=seed,
        total_time=total_time,
        expected_hashes=expected_hashes,
        realized_hashes=realized_hashes,
        miners=reports,
        winners=winners,
        intervals=intervals,
    )
