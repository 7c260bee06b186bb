import math

import pytest

from por.chainsim import MinerSpec, simulate_chain
from por.reputation import ReputationParams


def fast_params(chi=0.1, total=0.3):
    return ReputationParams.from_target(total, chi)


class TestRoster:
    def test_empty_roster_rejected(self):
        with pytest.raises(ValueError):
            simulate_chain(fast_params(), [], blocks=10, difficulty=100.0, seed=0)

    def test_bad_hashrate_rejected(self):
        with pytest.raises(ValueError):
            MinerSpec(name="m", hashrate=0.0)

    def test_bad_pin_rejected(self):
        with pytest.raises(ValueError):
            MinerSpec(name="m", hashrate=1.0, steady_state_bonus=1.0)


class TestSingleMiner:
    def test_wins_every_block(self):
        report = simulate_chain(
            fast_params(),
            [MinerSpec("solo", 10.0)],
            blocks=200,
            difficulty=100.0,
            seed=1,
        )
        assert report.miners[0].blocks_won == 200
        assert report.miners[0].win_share == 1.0

    def test_bonus_converges_to_network_total(self):
        # 10 half-lives of blocks: the geometric sum reaches the total
        # network bonus to within 2**-10 ~ 0.1%.
        params = fast_params(chi=0.1)
        half_life = math.log(2.0) / params.chi
        blocks = int(10 * half_life) + 1
        report = simulate_chain(
            params, [MinerSpec("solo", 1.0)], blocks=blocks, difficulty=10.0, seed=2
        )
        assert report.miners[0].final_bonus == pytest.approx(
            params.total_bonus, rel=0.01
        )


class TestSymmetry:
    def test_two_equal_miners_split_evenly(self):
        params = fast_params()
        blocks = 10_000
        report = simulate_chain(
            params,
            [
                MinerSpec("a", 5.0, use_bonus=False),
                MinerSpec("b", 5.0, use_bonus=False),
            ],
            blocks=blocks,
            difficulty=100.0,
            seed=3,
        )
        share = report.miners[0].win_share
        sigma = math.sqrt(0.25 / blocks)
        assert abs(share - 0.5) < 3 * sigma

    def test_disabled_bonus_changes_nothing_for_rates(self):
        params = fast_params()
        off = simulate_chain(
            params,
            [MinerSpec("a", 1.0, use_bonus=False)],
            blocks=500,
            difficulty=50.0,
            seed=4,
        )
        # All blocks from a bonus-less miner cost the full difficulty.
        assert off.expected_hashes == pytest.approx(500 * 50.0)


class TestEnergyAccounting:
    def test_pinned_steady_state_saves_total_bonus(self):
        params = fast_params()
        roster = lambda pin: [
            MinerSpec(f"m{i}", 2.0, steady_state_bonus=pin) for i in range(5)
        ]
        blocks = 2000
        base = simulate_chain(
            params, roster(0.0), blocks=blocks, difficulty=100.0, seed=5
        )
        saved = simulate_chain(
            params, roster(0.3), blocks=blocks, difficulty=100.0, seed=5
        )
        ratio = saved.expected_hashes / base.expected_hashes
        assert ratio == pytest.approx(0.7, abs=1e-12)

    def test_realized_hashes_track_expected(self):
        params = fast_params()
        report = simulate_chain(
            params,
            [MinerSpec("m", 1.0, steady_state_bonus=0.3)],
            blocks=10_000,
            difficulty=100.0,
            seed=6,
        )
        # Realized totals fluctuate around the expected totals.
        rel_sigma = 1.0 / math.sqrt(report.blocks)
        assert report.realized_hashes == pytest.approx(
            report.expected_hashes, rel=4 * rel_sigma
        )


class TestDeterminism:
    def test_same_seed_same_run(self):
        params = fast_params()
        roster = [MinerSpec("a", 3.0), MinerSpec("b", 7.0)]
        r1 = simulate_chain(params, roster, blocks=300, difficulty=20.0, seed=9)
        r2 = simulate_chain(params, roster, blocks=300, difficulty=20.0, seed=9)
        assert r1.winners == r2.winners
        assert r1.intervals == r2.intervals
        assert r1.expected_hashes == r2.expected_hashes
