"""51%-attack analysis for reputation-weighted proof of work.

Closed forms for the single-block race between an attacker holding hashrate
share ``q`` at steady-state reputation ``q * total_bonus`` and the rest of the
network, plus an independent Monte Carlo simulator of the same race.

Block times are exponential, so the race reduces to comparing two exponential
clocks: the attacker wins with probability alpha' / (alpha' + alpha).  When
only the attacker uses their bonus this gives q / (1 - q*L*(1-q)) for network
bonus L, and the break-even share drops from 1/2 to the in-(0,1) root of
L*q^2 - (L+2)*q + 1.

Floating point is fine here: this module is analysis, not consensus.  All
randomness goes through numpy's PCG64 with explicit seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List

import numpy as np


@dataclass(frozen=True)
class AttackScenario:
    """A two-party hashrate race.

    ``others_use_bonus`` selects the symmetric case where the rest of the
    network applies its reputation discount too; per the mean-field argument
    both sides then carry the same discount factor and the attacker's
    apparent share stays q.
    """

    q: float
    total_bonus: float
    honest_hashrate: float
    attacker_hashrate: float
    others_use_bonus: bool = False
    difficulty: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.q < 1:
            raise ValueError(f"q must be in (0, 1), got {self.q}")
        if not 0 <= self.total_bonus < 1:
            raise ValueError(
                f"total_bonus must be in [0, 1), got {self.total_bonus}"
            )
        if self.honest_hashrate <= 0 or self.attacker_hashrate <= 0:
            raise ValueError("hashrates must be > 0")
        if self.difficulty <= 0:
            raise ValueError("difficulty must be > 0")
        total = self.honest_hashrate + self.attacker_hashrate
        if abs(self.q - self.attacker_hashrate / total) > 1e-12 * self.q:
            raise ValueError(
                "q inconsistent with hashrates: "
                f"{self.q} vs {self.attacker_hashrate / total}"
            )

    @classmethod
    def from_share(
        cls,
        q: float,
        total_bonus: float,
        total_hashrate: float = 1.0,
        others_use_bonus: bool = False,
        difficulty: float = 1.0,
    ) -> "AttackScenario":
        return cls(
            q=q,
            total_bonus=total_bonus,
            honest_hashrate=(1.0 - q) * total_hashrate,
            attacker_hashrate=q * total_hashrate,
            others_use_bonus=others_use_bonus,
            difficulty=difficulty,
        )


@dataclass(frozen=True)
class RaceOutcome:
    """Exponential rates of the two clocks and the attacker's win chance."""

    attacker_rate: float
    honest_rate: float
    win_probability: float


def apparent_hashrate(scenario: AttackScenario) -> float:
    """Effective hashrate of the lone bonus user: h' / (1 - q * total_bonus).

    Assumes the attacker sits at steady-state bonus q * total_bonus and no
    one else uses theirs.
    """
    if scenario.others_use_bonus:
        raise ValueError("apparent_hashrate assumes only the attacker uses a bonus")
    discount = 1.0 - scenario.q * scenario.total_bonus
    if discount <= 0:
        raise ValueError("q * total_bonus must be < 1")
    return scenario.attacker_hashrate / discount


def race_outcome(scenario: AttackScenario) -> RaceOutcome:
    """Exponential-clock rates for the scenario and the closed-form win odds."""
    d = scenario.difficulty
    attacker_discount = 1.0 - scenario.q * scenario.total_bonus
    if attacker_discount <= 0:
        raise ValueError("q * total_bonus must be < 1")
    attacker_rate = scenario.attacker_hashrate / (d * attacker_discount)
    if scenario.others_use_bonus:
        honest_rate = scenario.honest_hashrate / (d * attacker_discount)
    else:
        honest_rate = scenario.honest_hashrate / d
    return RaceOutcome(
        attacker_rate=attacker_rate,
        honest_rate=honest_rate,
        win_probability=attacker_rate / (attacker_rate + honest_rate),
    )


def attack_success_probability(q: float, total_bonus: float) -> float:
    """P[attacker mines first] = q / (1 - q * total_bonus * (1 - q)).

    The lone-bonus-user race; strictly increasing in both arguments.
    """
    if not 0 < q < 1:
        raise ValueError(f"q must be in (0, 1), got {q}")
    if not 0 <= total_bonus < 1:
        raise ValueError(f"total_bonus must be in [0, 1), got {total_bonus}")
    return q / (1.0 - q * total_bonus * (1.0 - q))


def critical_fraction(total_bonus: float) -> float:
    """Break-even hashrate share: 1/2 - (sqrt(4 + L^2) - 2) / (2 L).

    The in-(0,1) root of L*q^2 - (L+2)*q + 1; exactly 1/2 in the L -> 0
    limit.
    """
    if not 0 <= total_bonus < 1:
        raise ValueError(f"total_bonus must be in [0, 1), got {total_bonus}")
    if total_bonus == 0.0:
        return 0.5
    L = total_bonus
    return 0.5 - (math.sqrt(4.0 + L * L) - 2.0) / (2.0 * L)


@dataclass(frozen=True)
class RaceEstimate:
    probability: float
    half_width: float  # 3-sigma binomial half width
    trials: int
    seed: int


def simulate_race(scenario: AttackScenario, trials: int, seed: int) -> RaceEstimate:
    """Monte Carlo race: draw both exponential clocks, count attacker wins.

    Deterministic given the seed; the 3-sigma binomial half width comes with
    the estimate.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    outcome = race_outcome(scenario)
    rng = np.random.Generator(np.random.PCG64(seed))
    t_attacker = rng.exponential(scale=1.0 / outcome.attacker_rate, size=trials)
    t_honest = rng.exponential(scale=1.0 / outcome.honest_rate, size=trials)
    wins = int(np.count_nonzero(t_attacker < t_honest))
    p_hat = wins / trials
    half_width = 3.0 * math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / trials) / trials)
    return RaceEstimate(
        probability=p_hat, half_width=half_width, trials=trials, seed=seed
    )


def sweep(
    scenarios: Iterable[AttackScenario], trials: int, seed: int
) -> List[dict]:
    """Closed form plus Monte Carlo for each grid point.

    Each point gets an independent child seed spawned from ``seed`` so rows
    do not share randomness.  Output rows are sorted by (total_bonus, q).
    """
    ordered = sorted(scenarios, key=lambda s: (s.total_bonus, s.q))
    root = np.random.SeedSequence(seed)
    children = root.spawn(len(ordered))
    rows = []
    for scenario, child in zip(ordered, children):
        point_seed = int(child.generate_state(1, dtype=np.uint64)[0])
        estimate = simulate_race(scenario, trials, point_seed)
        rows.append(
            {
                "lambda": scenario.total_bonus,
                "q": scenario.q,
                "closed_form": race_outcome(scenario).win_probability,
                "empirical": estimate.probability,
                "half_width": estimate.half_width,
                "trials": trials,
                "seed": point_seed,
            }
        )
    return rows
