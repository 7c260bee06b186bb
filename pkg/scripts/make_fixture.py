"""Regenerate the reference chain fixture under tests/data/.

The fixture pins the canonical serialization and validation rules: any
implementation change that alters header bytes, PoW digests, or ledger
arithmetic will show up as a diff here.
"""

import json
import pathlib

from por.certmine import HeaderTemplate, MinerKeypair, MiningJob, mine_certified
from por.cli import chain_config_dict
from por.consensus import (
    ChainState,
    TransitionSchedule,
    block_hash,
    chain_append,
    export_chain,
)
from por.reputation import ReputationParams

DATA = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"

BASE_TARGET = 2**252  # difficulty 16: a few dozen signatures per block
BLOCKS = 6


def build_chain():
    params = ReputationParams.from_target(0.3, 0.1)
    schedule = TransitionSchedule.immediate(params.total_bonus)
    state = ChainState(params, schedule, BASE_TARGET)
    keys = [MinerKeypair.from_seed_int(1), MinerKeypair.from_seed_int(2)]
    for i in range(BLOCKS):
        kp = keys[i % 2]
        height = state.tip_height + 1
        template = HeaderTemplate(
            height=height,
            parent_hash=block_hash(state.tip),
            payload_commitment=b"\x00" * 32,
            timestamp=height * 600,
            coinbase_address=kp.public_address,
        )
        target = state.target_for(kp.public_address, height)
        job = MiningJob(header_template=template, target=target, max_iterations=100_000)
        result = mine_certified(kp, job, seed=height)
        assert result.found
        chain_append(state, result.header)
    return state


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    state = build_chain()
    (DATA / "reference_chain.jsonl").write_text(export_chain(state.headers))
    config = chain_config_dict(BASE_TARGET, state.params, state.schedule)
    (DATA / "reference_config.json").write_text(
        json.dumps(config, indent=2, sort_keys=True) + "\n"
    )
    (DATA / "reference_tip_hash.txt").write_text(state.tip_hash().hex() + "\n")
    print("tip:", state.tip_hash().hex())
    print("blocks:", len(state.headers))


if __name__ == "__main__":
    main()
