"""Certified mining: every nonce attempt is signed with the coinbase key.

The mining loop signs the header preimage for each nonce before hashing the
signed header, so the bulk of the work is signatures and only the holder of
the coinbase secret key can produce it.  Reputation earned under an address
therefore cannot be rented out to a pool.

Ed25519 is used because its signatures are deterministic: the same key and
preimage always give the same bytes, which makes mining traces reproducible.
The scheme is isolated behind sign_header/verify_header so another
deterministic scheme could be swapped in.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from typing import Optional

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from por.consensus import (
    ADDRESS_LEN,
    PREIMAGE_LEN,
    SIGNATURE_LEN,
    U256_MAX,
    BlockHeader,
    double_sha256,
)
from por.reputation import MinerId

_NONCE_MASK = 2**64 - 1
_NONCE_DOMAIN = b"por-nonce-start-v1"


@dataclass(frozen=True)
class MinerKeypair:
    """Ed25519 signing key with the raw public key as the miner identity."""

    secret_key: bytes
    public_address: MinerId

    def __post_init__(self) -> None:
        if len(self.secret_key) != 32:
            raise ValueError("secret_key must be 32 bytes")
        derived = (
            Ed25519PrivateKey.from_private_bytes(self.secret_key)
            .public_key()
            .public_bytes_raw()
        )
        if derived != self.public_address:
            raise ValueError("public_address does not match secret_key")

    @classmethod
    def from_secret(cls, secret_key: bytes) -> "MinerKeypair":
        address = (
            Ed25519PrivateKey.from_private_bytes(secret_key)
            .public_key()
            .public_bytes_raw()
        )
        return cls(secret_key=secret_key, public_address=address)

    @classmethod
    def generate(cls) -> "MinerKeypair":
        return cls.from_secret(os.urandom(32))

    @classmethod
    def from_seed_int(cls, seed: int) -> "MinerKeypair":
        """Deterministic keypair for tests and reproducible fixtures."""
        secret = hashlib.sha256(b"por-key-v1" + seed.to_bytes(8, "big")).digest()
        return cls.from_secret(secret)

    def to_json_dict(self) -> dict:
        return {
            "secret_key_hex": self.secret_key.hex(),
            "public_address_hex": self.public_address.hex(),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "MinerKeypair":
        kp = cls.from_secret(bytes.fromhex(doc["secret_key_hex"]))
        want = doc.get("public_address_hex")
        if want is not None and bytes.fromhex(want) != kp.public_address:
            raise ValueError("key file public_address_hex mismatch")
        return kp

    def save(self, path: str) -> None:
        # Key files should be chmod 600; advisory only, not enforced.
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "MinerKeypair":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def sign_header(keypair: MinerKeypair, header_preimage: bytes) -> bytes:
    """Deterministic signature over the canonical header preimage."""
    if len(header_preimage) != PREIMAGE_LEN:
        raise ValueError(
            f"preimage must be {PREIMAGE_LEN} bytes, got {len(header_preimage)}"
        )
    sk = Ed25519PrivateKey.from_private_bytes(keypair.secret_key)
    return sk.sign(header_preimage)


def verify_header(address: MinerId, header_preimage: bytes, signature: bytes) -> bool:
    """True iff ``signature`` is valid for (address, preimage).

    Malformed inputs verify as False rather than raising.
    """
    if len(address) != ADDRESS_LEN or len(signature) != SIGNATURE_LEN:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(address).verify(
            signature, header_preimage
        )
    except (InvalidSignature, ValueError):
        return False
    return True


@dataclass(frozen=True)
class HeaderTemplate:
    """Everything in a header except the nonce and the signature."""

    height: int
    parent_hash: bytes
    payload_commitment: bytes
    timestamp: int
    coinbase_address: MinerId

    def preimage(self, nonce: int) -> bytes:
        import struct

        return (
            struct.pack(">Q", self.height)
            + self.parent_hash
            + self.payload_commitment
            + struct.pack(">Q", self.timestamp)
            + struct.pack(">Q", nonce)
            + self.coinbase_address
        )

    def with_signature(self, nonce: int, signature: bytes) -> BlockHeader:
        return BlockHeader(
            height=self.height,
            parent_hash=self.parent_hash,
            payload_commitment=self.payload_commitment,
            timestamp=self.timestamp,
            nonce=nonce,
            coinbase_address=self.coinbase_address,
            header_signature=signature,
        )


@dataclass(frozen=True)
class MiningJob:
    header_template: HeaderTemplate
    target: int
    max_iterations: int

    def __post_init__(self) -> None:
        if not 1 <= self.target <= U256_MAX:
            raise ValueError(f"target out of range: {self.target:#x}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class MiningResult:
    found: bool
    header: Optional[BlockHeader]
    iterations: int
    signatures: int
    hashes: int


def nonce_start(seed: int) -> int:
    """Seed-derived starting nonce; sequential from here, wrapping at 2**64."""
    digest = hashlib.sha256(_NONCE_DOMAIN + seed.to_bytes(8, "big")).digest()
    return int.from_bytes(digest[:8], "big")


def mine_certified(keypair: MinerKeypair, job: MiningJob, seed: int) -> MiningResult:
    """Sign-then-hash mining loop: one signature and one double hash per nonce.

    Deterministic given (keypair, job, seed).  Returns the first header whose
    PoW digest is below the target, or an exhausted result after
    ``max_iterations`` attempts.
    """
    template = job.header_template
    if template.coinbase_address != keypair.public_address:
        raise ValueError("job coinbase_address does not match keypair")
    sk = Ed25519PrivateKey.from_private_bytes(keypair.secret_key)
    start = nonce_start(seed)
    for i in range(job.max_iterations):
        nonce = (start + i) & _NONCE_MASK
        preimage = template.preimage(nonce)
        signature = sk.sign(preimage)
        digest = double_sha256(preimage + signature)
        if int.from_bytes(digest, "big") < job.target:
            header = template.with_signature(nonce, signature)
            return MiningResult(
                found=True,
                header=header,
                iterations=i + 1,
                signatures=i + 1,
                hashes=i + 1,
            )
    return MiningResult(
        found=False,
        header=None,
        iterations=job.max_iterations,
        signatures=job.max_iterations,
        hashes=job.max_iterations,
    )
