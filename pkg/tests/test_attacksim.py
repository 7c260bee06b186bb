import math

import numpy as np
import pytest

from por.attacksim import (
    AttackScenario,
    apparent_hashrate,
    attack_success_probability,
    critical_fraction,
    race_outcome,
    simulate_race,
    sweep,
)


def bisect_quadratic_root(L: float) -> float:
    """Independent oracle: bisection on L*q^2 - (L+2)*q + 1 over (0, 1)."""
    f = lambda q: L * q * q - (L + 2.0) * q + 1.0
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = (lo + hi) / 2.0
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


class TestScenario:
    def test_from_share_consistency(self):
        s = AttackScenario.from_share(0.3, 0.2, total_hashrate=50.0)
        assert s.attacker_hashrate == pytest.approx(15.0)
        assert s.honest_hashrate == pytest.approx(35.0)

    def test_inconsistent_q_rejected(self):
        with pytest.raises(ValueError):
            AttackScenario(
                q=0.3, total_bonus=0.2, honest_hashrate=1.0, attacker_hashrate=1.0
            )

    def test_out_of_range_rejected(self):
        for q in (0.0, 1.0, -0.1):
            with pytest.raises(ValueError):
                AttackScenario.from_share(q, 0.2)
        with pytest.raises(ValueError):
            AttackScenario.from_share(0.3, 1.0)


class TestApparentHashrate:
    def test_no_bonus_is_raw_hashrate(self):
        s = AttackScenario.from_share(0.5, 0.0, total_hashrate=100.0)
        assert apparent_hashrate(s) == pytest.approx(50.0)

    def test_half_share_bonus_030(self):
        s = AttackScenario.from_share(0.5, 0.3, total_hashrate=100.0)
        # 50 / (1 - 0.5 * 0.3) = 50 / 0.85
        assert apparent_hashrate(s) == pytest.approx(50.0 / 0.85)
        assert apparent_hashrate(s) == pytest.approx(58.8235, abs=1e-4)

    def test_mean_block_interval_matches(self):
        s = AttackScenario.from_share(
            0.5, 0.3, total_hashrate=100.0, difficulty=500.0
        )
        rate = race_outcome(s).attacker_rate
        rng = np.random.Generator(np.random.PCG64(77))
        samples = rng.exponential(1.0 / rate, size=100_000)
        expected = s.difficulty / apparent_hashrate(s)
        sigma = expected / math.sqrt(samples.size)
        assert abs(samples.mean() - expected) < 3 * sigma

    def test_symmetric_case_rejected(self):
        s = AttackScenario.from_share(0.5, 0.3, others_use_bonus=True)
        with pytest.raises(ValueError):
            apparent_hashrate(s)


class TestClosedForm:
    def test_pure_pow_race(self):
        for q in (0.1, 0.3, 0.49, 0.8):
            assert attack_success_probability(q, 0.0) == pytest.approx(q)

    def test_break_even_point(self):
        assert attack_success_probability(0.4627, 0.3) == pytest.approx(
            0.5, abs=5e-4
        )

    def test_strictly_increasing(self):
        qs = np.linspace(0.05, 0.95, 19)
        ps = [attack_success_probability(q, 0.3) for q in qs]
        assert all(a < b for a, b in zip(ps, ps[1:]))
        ls = np.linspace(0.0, 0.9, 10)
        ps = [attack_success_probability(0.3, L) for L in ls]
        assert all(a < b for a, b in zip(ps, ps[1:]))

    def test_matches_race_outcome(self):
        for q, L in [(0.2, 0.1), (0.4, 0.3), (0.45, 0.05)]:
            s = AttackScenario.from_share(q, L)
            assert race_outcome(s).win_probability == pytest.approx(
                attack_success_probability(q, L), rel=1e-12
            )

    def test_symmetric_usage_restores_share(self):
        for q, L in [(0.2, 0.3), (0.4, 0.3), (0.3, 0.6)]:
            s = AttackScenario.from_share(q, L, others_use_bonus=True)
            assert race_outcome(s).win_probability == pytest.approx(q, rel=1e-12)


class TestCriticalFraction:
    def test_paper_value(self):
        assert critical_fraction(0.3) == pytest.approx(0.4627, abs=1e-4)

    def test_small_bonus_limit(self):
        for L in (1e-6, 1e-4, 1e-2):
            assert abs(critical_fraction(L) - 0.5) < L / 4

    def test_zero_is_half(self):
        assert critical_fraction(0.0) == 0.5

    def test_bisection_oracle(self):
        for L in (0.1, 0.3, 0.6, 0.9):
            assert critical_fraction(L) == pytest.approx(
                bisect_quadratic_root(L), abs=1e-10
            )

    def test_quadratic_root_identity(self):
        for i in range(1, 96):
            L = i / 100.0
            q0 = critical_fraction(L)
            assert abs(L * q0 * q0 - (L + 2.0) * q0 + 1.0) < 1e-10

    def test_break_even_probability_is_half(self):
        for L in (0.05, 0.3, 0.7):
            q0 = critical_fraction(L)
            assert attack_success_probability(q0, L) == pytest.approx(
                0.5, abs=1e-10
            )

    def test_security_floor(self):
        qs = [critical_fraction(i / 1000.0) for i in range(1, 1000)]
        assert all(0.38 < q < 0.5 for q in qs)
        assert all(a > b for a, b in zip(qs, qs[1:]))  # decreasing in bonus


class TestSimulateRace:
    def test_symmetric_race(self):
        s = AttackScenario.from_share(0.5, 0.0)
        est = simulate_race(s, trials=1_000_000, seed=11)
        assert abs(est.probability - 0.5) < est.half_width
        assert est.half_width == pytest.approx(0.0015, rel=0.05)

    def test_break_even_race(self):
        s = AttackScenario.from_share(0.4627, 0.3)
        est = simulate_race(s, trials=1_000_000, seed=12)
        assert abs(est.probability - 0.5) < est.half_width

    def test_deterministic_given_seed(self):
        s = AttackScenario.from_share(0.3, 0.3)
        assert simulate_race(s, 10_000, seed=5) == simulate_race(s, 10_000, seed=5)

    def test_statistical_self_consistency(self):
        """At least 99% of seeded replications land inside 3 sigma."""
        s = AttackScenario.from_share(0.3, 0.3)
        p = attack_success_probability(0.3, 0.3)
        hits = sum(
            abs(simulate_race(s, 20_000, seed=k).probability - p)
            < simulate_race(s, 20_000, seed=k).half_width
            for k in range(100)
        )
        assert hits >= 99

    def test_trials_validation(self):
        s = AttackScenario.from_share(0.3, 0.3)
        with pytest.raises(ValueError):
            simulate_race(s, 0, seed=1)


class TestSweep:
    def test_single_point_matches_single_call(self):
        s = AttackScenario.from_share(0.3, 0.2)
        rows = sweep([s], trials=50_000, seed=4)
        assert len(rows) == 1
        row = rows[0]
        assert row["closed_form"] == pytest.approx(
            attack_success_probability(0.3, 0.2)
        )
        repeat = simulate_race(s, 50_000, row["seed"])
        assert row["empirical"] == repeat.probability

    def test_break_even_rows_straddle_half(self):
        lams = [0.1, 0.3, 0.5]
        scenarios = []
        for L in lams:
            q0 = critical_fraction(L)
            scenarios.append(AttackScenario.from_share(q0 - 0.02, L))
            scenarios.append(AttackScenario.from_share(q0 + 0.02, L))
        rows = sweep(scenarios, trials=200_000, seed=8)
        for i in range(0, len(rows), 2):
            below, above = rows[i], rows[i + 1]
            assert below["empirical"] < 0.5 < above["empirical"]

    def test_empty_grid(self):
        assert sweep([], trials=100, seed=0) == []

    def test_sorted_by_bonus_then_q(self):
        scenarios = [
            AttackScenario.from_share(q, L)
            for q in (0.4, 0.1)
            for L in (0.3, 0.0)
        ]
        rows = sweep(scenarios, trials=100, seed=0)
        keys = [(r["lambda"], r["q"]) for r in rows]
        assert keys == sorted(keys)

    def test_deterministic(self):
        scenarios = [AttackScenario.from_share(0.2, 0.1)]
        assert sweep(scenarios, 10_000, 3) == sweep(scenarios, 10_000, 3)
