"""Reputation bonus sequence and the per-miner reputation ledger.

A miner earns a bonus for every block it mined in the recent past.  The bonus
for the block ``n`` deep below the chain tip is ``lambda0 * exp(-chi * n)``,
truncated to zero beyond a configurable window.  The sum of the whole sequence
is the total network bonus ``total_bonus``, the aggregate difficulty discount
the protocol hands out.

Everything that feeds consensus validation is kept in fixed point
(parts per 10**12) so results are bit-identical across platforms.  The
fixed-point table entries are computed with 50-digit decimal arithmetic and
rounded half-to-even, which avoids the drift of repeated multiplication by
``exp(-chi)``.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from typing import Deque, Dict, Iterable, List, Tuple

# Fixed-point scale for all consensus-facing bonus values.
SCALE = 10**12

# Decimal precision used when building the fixed-point table.
_DEC_PREC = 50

MinerId = bytes


def total_bonus_closed_form(lambda0: float, chi: float) -> float:
    """Sum of the geometric bonus series: lambda0 / (1 - exp(-chi))."""
    if lambda0 <= 0:
        raise ValueError(f"lambda0 must be > 0, got {lambda0}")
    if chi <= 0:
        raise ValueError(f"chi must be > 0, got {chi}")
    return lambda0 / -math.expm1(-chi)


def lambda0_for_target(total_bonus: float, chi: float) -> float:
    """Depth-0 bonus that makes the series sum to ``total_bonus``.

    Inverse of :func:`total_bonus_closed_form`.
    """
    if not 0 < total_bonus < 1:
        raise ValueError(f"total_bonus must be in (0, 1), got {total_bonus}")
    if chi <= 0:
        raise ValueError(f"chi must be > 0, got {chi}")
    return total_bonus * -math.expm1(-chi)


def default_window_blocks(chi: float) -> int:
    """Truncation depth: 20 half-lives, leaving tail mass < 1e-6 of the total."""
    return math.ceil(20.0 * math.log(2.0) / chi)


@dataclass(frozen=True)
class ReputationParams:
    """Parameters of the exponentially decaying bonus sequence."""

    lambda0: float
    chi: float
    total_bonus: float
    window_blocks: int

    def __post_init__(self) -> None:
        if not 0 < self.lambda0 < 1:
            raise ValueError(f"lambda0 must be in (0, 1), got {self.lambda0}")
        if self.chi <= 0:
            raise ValueError(f"chi must be > 0, got {self.chi}")
        if not 0 < self.total_bonus < 1:
            raise ValueError(
                f"total_bonus must be in (0, 1), got {self.total_bonus}"
            )
        closed = total_bonus_closed_form(self.lambda0, self.chi)
        if abs(closed - self.total_bonus) > 1e-12 * self.total_bonus:
            raise ValueError(
                "total_bonus inconsistent with lambda0/(1-exp(-chi)): "
                f"{self.total_bonus} vs {closed}"
            )
        if self.window_blocks < 1:
            raise ValueError("window_blocks must be >= 1")
        # Tail mass past the window must be negligible.
        tail = self.total_bonus * math.exp(-self.chi * self.window_blocks)
        if tail >= 1e-6 * self.total_bonus:
            raise ValueError(
                f"window_blocks={self.window_blocks} too small: tail mass "
                f"{tail:.3e} >= 1e-6 * total_bonus"
            )

    @classmethod
    def from_rates(
        cls, lambda0: float, chi: float, window_blocks: int | None = None
    ) -> "ReputationParams":
        return cls(
            lambda0=lambda0,
            chi=chi,
            total_bonus=total_bonus_closed_form(lambda0, chi),
            window_blocks=window_blocks
            if window_blocks is not None
            else default_window_blocks(chi),
        )

    @classmethod
    def from_target(
        cls, total_bonus: float, chi: float, window_blocks: int | None = None
    ) -> "ReputationParams":
        return cls(
            lambda0=lambda0_for_target(total_bonus, chi),
            chi=chi,
            total_bonus=total_bonus,
            window_blocks=window_blocks
            if window_blocks is not None
            else default_window_blocks(chi),
        )

    # -- JSON round trip (decimal strings, no binary-float ambiguity) --------

    def to_json_dict(self) -> dict:
        return {
            "lambda0": repr(self.lambda0),
            "chi": repr(self.chi),
            "total_bonus": repr(self.total_bonus),
            "window_blocks": self.window_blocks,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ReputationParams":
        return cls(
            lambda0=float(doc["lambda0"]),
            chi=float(doc["chi"]),
            total_bonus=float(doc["total_bonus"]),
            window_blocks=int(doc["window_blocks"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "ReputationParams":
        return cls.from_json_dict(json.loads(text))


def bonus_at_depth(params: ReputationParams, n: int) -> float:
    """Bonus earned for the block ``n`` deep below the tip (float view)."""
    if n < 0:
        raise ValueError(f"depth must be >= 0, got {n}")
    if n >= params.window_blocks:
        return 0.0
    return params.lambda0 * math.exp(-params.chi * n)


def to_fixed(fraction: float) -> int:
    """Round a fraction to fixed point (parts per 10**12), half to even."""
    with localcontext() as ctx:
        ctx.prec = _DEC_PREC
        return int(
            (Decimal(fraction) * SCALE).to_integral_value(rounding=ROUND_HALF_EVEN)
        )


def from_fixed(value: int) -> float:
    return value / SCALE


class BonusTable:
    """Fixed-point bonus-by-depth table for one parameter set.

    Entries are evaluated lazily via high-precision decimal exponentiation and
    memoized; the table is the single source of truth for every consensus-path
    bonus value.
    """

    def __init__(self, params: ReputationParams):
        self.params = params
        self._cache: Dict[int, int] = {}
        with localcontext() as ctx:
            ctx.prec = _DEC_PREC
            self._lambda0 = Decimal(params.lambda0)
            self._chi = Decimal(params.chi)

    def at(self, n: int) -> int:
        """Fixed-point bonus at depth ``n``; exactly 0 outside the window."""
        if n < 0:
            raise ValueError(f"depth must be >= 0, got {n}")
        if n >= self.params.window_blocks:
            return 0
        value = self._cache.get(n)
        if value is None:
            with localcontext() as ctx:
                ctx.prec = _DEC_PREC
                raw = self._lambda0 * (-self._chi * n).exp() * SCALE
                value = int(raw.to_integral_value(rounding=ROUND_HALF_EVEN))
            self._cache[n] = value
        return value

    def prefix_sum(self, count: int) -> int:
        """Fixed-point sum of the first ``count`` depths (0 .. count-1)."""
        return sum(self.at(n) for n in range(min(count, self.params.window_blocks)))

    @property
    def total_bonus_fixed(self) -> int:
        return to_fixed(self.params.total_bonus)


class ReputationLedger:
    """Per-miner mined-height records and bonuses at the current chain tip.

    Single-writer: call :meth:`advance` once per accepted block.  Bonuses are
    derived exactly from the recorded heights through the fixed-point table,
    so the incrementally maintained ledger agrees with a full chain rescan by
    construction.
    """

    def __init__(self, params: ReputationParams, table: BonusTable | None = None):
        self.params = params
        self.table = table if table is not None else BonusTable(params)
        self.tip_height = -1
        self.mined_heights: Dict[MinerId, Deque[int]] = {}
        self._expiry: Deque[Tuple[int, MinerId]] = deque()
        self._bonus_cache: Dict[MinerId, int] = {}

    def advance(self, miner: MinerId) -> None:
        """Record that ``miner`` mined the next block and move the tip up."""
        self.tip_height += 1
        heights = self.mined_heights.setdefault(miner, deque())
        heights.append(self.tip_height)
        self._expiry.append((self.tip_height, miner))
        # Drop records that fell out of the truncation window.
        horizon = self.tip_height - self.params.window_blocks
        while self._expiry and self._expiry[0][0] <= horizon:
            height, owner = self._expiry.popleft()
            owned = self.mined_heights[owner]
            if owned and owned[0] == height:
                owned.popleft()
            if not owned:
                del self.mined_heights[owner]
        self._bonus_cache.clear()

    def miner_bonus(self, miner: MinerId) -> int:
        """Fixed-point total bonus of ``miner`` at the current tip.

        Unknown miners score 0.
        """
        cached = self._bonus_cache.get(miner)
        if cached is not None:
            return cached
        heights = self.mined_heights.get(miner)
        if not heights:
            return 0
        at = self.table.at
        tip = self.tip_height
        bonus = sum(at(tip - h) for h in heights)
        self._bonus_cache[miner] = bonus
        return bonus

    @property
    def cached_bonus(self) -> Dict[MinerId, int]:
        """Bonuses of every miner with a block in the window."""
        return {m: self.miner_bonus(m) for m in self.mined_heights}

    def network_bonus(self) -> int:
        """Fixed-point sum of all miners' bonuses at the tip."""
        return sum(self.cached_bonus.values())

    def snapshot_miners(self) -> List[MinerId]:
        return list(self.mined_heights)


def rescan_bonus(
    miners_by_height: Iterable[Tuple[int, MinerId]],
    table: BonusTable,
    tip_height: int,
    miner: MinerId,
) -> int:
    """Recompute one miner's bonus from scratch out of a (height, miner) list.

    Independent of the ledger's bookkeeping; used as a test oracle and for
    chain-file verification.
    """
    bonus = 0
    for height, owner in miners_by_height:
        if owner != miner:
            continue
        depth = tip_height - height
        if 0 <= depth < table.params.window_blocks:
            bonus += table.at(depth)
    return bonus
