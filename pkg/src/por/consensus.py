"""Block headers, 256-bit target arithmetic, and chain validation.

The header wire format is fixed-width and canonical:

    offset  size  field
    0       8     height            (big-endian u64)
    8       32    parent_hash
    40      32    payload_commitment
    72      8     timestamp         (big-endian u64, seconds)
    80      8     nonce             (big-endian u64)
    88      32    coinbase_address  (raw Ed25519 public key)
    120     64    header_signature  (over bytes 0..120)

The proof-of-work digest is double SHA-256 of the full 184 bytes (preimage
followed by signature), interpreted as a big-endian 256-bit integer and
compared against the miner's tailored target.  Signing first and hashing the
signed header means forging a reputed miner's work requires their secret key
for every nonce tried.

All target arithmetic is exact integer arithmetic; difficulty as a number is
only materialized as :class:`fractions.Fraction` outside validation paths.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional

from por.reputation import (
    SCALE,
    MinerId,
    ReputationLedger,
    ReputationParams,
    to_fixed,
)

U256_MAX = 2**256 - 1
HASH_LEN = 32
ADDRESS_LEN = 32
SIGNATURE_LEN = 64
PREIMAGE_LEN = 8 + HASH_LEN + HASH_LEN + 8 + 8 + ADDRESS_LEN  # 120
HEADER_LEN = PREIMAGE_LEN + SIGNATURE_LEN  # 184

GENESIS_PARENT = b"\x00" * HASH_LEN


class ValidationError(Exception):
    """Raised by chain_append when a candidate block is rejected."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def double_sha256(data: bytes) -> bytes:
    return hashlib.sha256(hashlib.sha256(data).digest()).digest()


@dataclass(frozen=True)
class BlockHeader:
    height: int
    parent_hash: bytes
    payload_commitment: bytes
    timestamp: int
    nonce: int
    coinbase_address: MinerId
    header_signature: bytes

    def __post_init__(self) -> None:
        if not 0 <= self.height < 2**64:
            raise ValueError(f"height out of range: {self.height}")
        if len(self.parent_hash) != HASH_LEN:
            raise ValueError("parent_hash must be 32 bytes")
        if len(self.payload_commitment) != HASH_LEN:
            raise ValueError("payload_commitment must be 32 bytes")
        if not 0 <= self.timestamp < 2**64:
            raise ValueError(f"timestamp out of range: {self.timestamp}")
        if not 0 <= self.nonce < 2**64:
            raise ValueError(f"nonce out of range: {self.nonce}")
        if len(self.coinbase_address) != ADDRESS_LEN:
            raise ValueError("coinbase_address must be 32 bytes")
        if len(self.header_signature) != SIGNATURE_LEN:
            raise ValueError("header_signature must be 64 bytes")

    def preimage(self) -> bytes:
        """Canonical serialization of everything the signature covers."""
        return (
            struct.pack(">Q", self.height)
            + self.parent_hash
            + self.payload_commitment
            + struct.pack(">Q", self.timestamp)
            + struct.pack(">Q", self.nonce)
            + self.coinbase_address
        )

    def serialize(self) -> bytes:
        return self.preimage() + self.header_signature

    @classmethod
    def deserialize(cls, data: bytes) -> "BlockHeader":
        if len(data) != HEADER_LEN:
            raise ValueError(f"header must be {HEADER_LEN} bytes, got {len(data)}")
        height, = struct.unpack(">Q", data[0:8])
        timestamp, = struct.unpack(">Q", data[72:80])
        nonce, = struct.unpack(">Q", data[80:88])
        return cls(
            height=height,
            parent_hash=data[8:40],
            payload_commitment=data[40:72],
            timestamp=timestamp,
            nonce=nonce,
            coinbase_address=data[88:120],
            header_signature=data[120:184],
        )

    def to_json_dict(self) -> dict:
        return {
            "height": self.height,
            "parent_hash": self.parent_hash.hex(),
            "payload_commitment": self.payload_commitment.hex(),
            "timestamp": self.timestamp,
            "nonce": self.nonce,
            "coinbase_address": self.coinbase_address.hex(),
            "header_signature": self.header_signature.hex(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "BlockHeader":
        return cls(
            height=int(doc["height"]),
            parent_hash=bytes.fromhex(doc["parent_hash"]),
            payload_commitment=bytes.fromhex(doc["payload_commitment"]),
            timestamp=int(doc["timestamp"]),
            nonce=int(doc["nonce"]),
            coinbase_address=bytes.fromhex(doc["coinbase_address"]),
            header_signature=bytes.fromhex(doc["header_signature"]),
        )


def block_hash(header: BlockHeader) -> bytes:
    """Double SHA-256 of the signed header; also the PoW digest."""
    return double_sha256(header.serialize())


def pow_value(header: BlockHeader) -> int:
    return int.from_bytes(block_hash(header), "big")


# -- Target / difficulty arithmetic -----------------------------------------


@dataclass(frozen=True)
class TargetPair:
    """Base network target with its difficulty as an exact rational."""

    base_target: int

    def __post_init__(self) -> None:
        if not 1 <= self.base_target <= U256_MAX:
            raise ValueError(f"base_target out of range: {self.base_target:#x}")

    @property
    def difficulty(self) -> Fraction:
        return Fraction(2**256, self.base_target)


def tailored_target(base_target: int, miner_bonus: int) -> int:
    """Per-miner target D / (1 - bonus), in exact fixed-point integer math.

    ``miner_bonus`` is fixed point (parts per 10**12).  Saturates at the
    256-bit maximum.
    """
    if not 1 <= base_target <= U256_MAX:
        raise ValueError(f"base_target out of range: {base_target:#x}")
    if miner_bonus < 0:
        raise ValueError(f"miner_bonus must be >= 0, got {miner_bonus}")
    if miner_bonus >= SCALE:
        raise ValueError("miner_bonus must be < 1")
    return min(U256_MAX, (base_target * SCALE) // (SCALE - miner_bonus))


def tailored_difficulty(difficulty: Fraction, miner_bonus: int) -> Fraction:
    """Per-miner difficulty d * (1 - bonus); the energy the miner pays."""
    if miner_bonus < 0 or miner_bonus >= SCALE:
        raise ValueError(f"miner_bonus out of range: {miner_bonus}")
    return difficulty * Fraction(SCALE - miner_bonus, SCALE)


# -- Transition schedule -----------------------------------------------------


@dataclass(frozen=True)
class TransitionSchedule:
    """Linear ramp of the network bonus from 0 up to its final value."""

    start_height: int
    end_height: int
    final_total_bonus: float

    def __post_init__(self) -> None:
        if self.end_height < self.start_height:
            raise ValueError("end_height must be >= start_height")
        if not 0 < self.final_total_bonus < 1:
            raise ValueError(
                f"final_total_bonus must be in (0, 1), got {self.final_total_bonus}"
            )

    @classmethod
    def immediate(cls, final_total_bonus: float) -> "TransitionSchedule":
        """No ramp: the full bonus from the first block on."""
        return cls(0, 0, final_total_bonus)

    def to_json_dict(self) -> dict:
        return {
            "start_height": self.start_height,
            "end_height": self.end_height,
            "final_total_bonus": repr(self.final_total_bonus),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TransitionSchedule":
        return cls(
            start_height=int(doc["start_height"]),
            end_height=int(doc["end_height"]),
            final_total_bonus=float(doc["final_total_bonus"]),
        )


def effective_total_bonus(schedule: TransitionSchedule, height: int) -> int:
    """Network bonus in force at ``height``, fixed point.

    0 before the ramp starts, the final value after it ends, linear in
    between (integer interpolation, floor).
    """
    final_fixed = to_fixed(schedule.final_total_bonus)
    if height < schedule.start_height:
        return 0
    if height >= schedule.end_height:
        return final_fixed
    span = schedule.end_height - schedule.start_height
    return final_fixed * (height - schedule.start_height) // span


def scheduled_bonus(
    miner_bonus: int, params: ReputationParams, schedule: TransitionSchedule, height: int
) -> int:
    """Scale a ledger bonus by the ramp fraction in force at ``height``."""
    full = to_fixed(params.total_bonus)
    eff = effective_total_bonus(schedule, height)
    if eff >= full:
        return miner_bonus
    return miner_bonus * eff // full


# -- Chain state and validation ----------------------------------------------


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: Optional[str] = None

    ACCEPT_REASONS = ("bad-link", "bad-height", "bad-signature", "insufficient-work")


ACCEPT = Verdict(True)


def make_genesis(timestamp: int = 0) -> BlockHeader:
    """Deterministic genesis header, accepted by fiat (zeroed fields)."""
    return BlockHeader(
        height=0,
        parent_hash=GENESIS_PARENT,
        payload_commitment=b"\x00" * HASH_LEN,
        timestamp=timestamp,
        nonce=0,
        coinbase_address=b"\x00" * ADDRESS_LEN,
        header_signature=b"\x00" * SIGNATURE_LEN,
    )


class ChainState:
    """Append-only header chain plus the reputation ledger at its tip.

    Single-writer; validation of candidates against a snapshot is read-only.
    """

    def __init__(
        self,
        params: ReputationParams,
        schedule: TransitionSchedule,
        base_target: int,
        genesis: BlockHeader | None = None,
    ):
        self.params = params
        self.schedule = schedule
        self.target = TargetPair(base_target)
        self.headers: List[BlockHeader] = []
        self.ledger = ReputationLedger(params)
        gen = genesis if genesis is not None else make_genesis()
        if gen.height != 0 or gen.parent_hash != GENESIS_PARENT:
            raise ValueError("genesis must have height 0 and zero parent hash")
        self.headers.append(gen)
        self.ledger.advance(gen.coinbase_address)

    @property
    def tip_height(self) -> int:
        return self.headers[-1].height

    @property
    def tip(self) -> BlockHeader:
        return self.headers[-1]

    def tip_hash(self) -> bytes:
        return block_hash(self.tip)

    def target_for(self, miner: MinerId, height: int) -> int:
        """Tailored target a block at ``height`` from ``miner`` must beat.

        Reputation is taken at the current (parent) tip; a block never counts
        itself.  The transition schedule is evaluated at the block's height.
        """
        bonus = self.ledger.miner_bonus(miner)
        bonus = scheduled_bonus(bonus, self.params, self.schedule, height)
        return tailored_target(self.target.base_target, bonus)


def validate_block(state: ChainState, block: BlockHeader) -> Verdict:
    """PoR validity check against the chain tip.

    Checks, in order: hash link, height, header signature, and proof of work
    against the miner's tailored target.  Pure function of (state, block).
    """
    # Import here keeps consensus importable without pulling the signature
    # backend for target-arithmetic-only users.
    from por.certmine import verify_header

    if block.parent_hash != block_hash(state.tip):
        return Verdict(False, "bad-link")
    if block.height != state.tip_height + 1:
        return Verdict(False, "bad-height")
    if not verify_header(
        block.coinbase_address, block.preimage(), block.header_signature
    ):
        return Verdict(False, "bad-signature")
    target = state.target_for(block.coinbase_address, block.height)
    if pow_value(block) >= target:
        return Verdict(False, "insufficient-work")
    return ACCEPT


def chain_append(state: ChainState, block: BlockHeader) -> None:
    """Validate and append; raises ValidationError and leaves state untouched
    on reject."""
    verdict = validate_block(state, block)
    if not verdict.ok:
        raise ValidationError(verdict.reason or "rejected")
    state.headers.append(block)
    state.ledger.advance(block.coinbase_address)


# -- Chain import/export (newline-delimited JSON) ----------------------------


def export_chain(headers: Iterable[BlockHeader]) -> str:
    """One JSON object per line, hex-encoded byte fields, sorted keys."""
    lines = [
        json.dumps(h.to_json_dict(), sort_keys=True, separators=(",", ":"))
        for h in headers
    ]
    return "\n".join(lines) + "\n"


def import_chain(text: str) -> List[BlockHeader]:
    headers = []
    for line in text.splitlines():
        line = line.strip()
        if line:
            headers.append(BlockHeader.from_json_dict(json.loads(line)))
    return headers


def replay_chain(
    params: ReputationParams,
    schedule: TransitionSchedule,
    base_target: int,
    headers: List[BlockHeader],
) -> ChainState:
    """Rebuild and fully re-validate a chain from an imported header list."""
    if not headers:
        raise ValidationError("empty-chain")
    state = ChainState(params, schedule, base_target, genesis=headers[0])
    for block in headers[1:]:
        chain_append(state, block)
    return state
