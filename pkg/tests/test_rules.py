import math

import numpy as np
import pytest

from distvote.profiles import (
    build_profile,
    majority_distance_matrix,
    majority_relation,
    mcgarvey,
    support_matrix,
    tallies,
)
from distvote.rules import (
    CRWW_CONSTANTS,
    Lottery,
    beta_radius_rule,
    beta_uncovered_set,
    c1_maximal_lottery,
    c2_maximal_lottery,
    crww,
    crww_intervals,
    plurality_veto_winners,
    plurality_veto_winners_brute,
    random_dictatorship,
    randomized_plurality_veto,
)

from conftest import random_profile, theorem_tournament

UNANIMOUS = [["a", "b", "c"]] * 4
SINGLE = [["a"]]


def assert_valid(lottery: Lottery):
    assert lottery.probabilities.min() >= 0.0
    assert lottery.probabilities.sum() == pytest.approx(1.0, abs=1e-9)


class TestLottery:
    def test_clamps_tiny_negatives(self):
        lot = Lottery(np.array([1.0 + 5e-13, -5e-13]))
        assert lot.probabilities[1] == 0.0

    def test_rejects_real_negatives(self):
        with pytest.raises(ValueError):
            Lottery(np.array([1.1, -0.1]))

    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            Lottery(np.array([0.5, 0.4]))

    def test_support(self):
        assert list(Lottery(np.array([0.5, 0.0, 0.5])).support()) == [0, 2]


class TestRandomDictatorship:
    def test_p1(self, p1):
        assert random_dictatorship(p1).probabilities == pytest.approx([2 / 3, 1 / 3, 0.0])

    def test_p3_uniform(self, p3):
        assert random_dictatorship(p3).probabilities == pytest.approx(np.full(3, 1 / 3))

    def test_unanimous_degenerate(self):
        lot = random_dictatorship(build_profile(UNANIMOUS))
        assert lot.probabilities == pytest.approx([1.0, 0.0, 0.0])


class TestPluralityVeto:
    def test_p3_all_winners(self, p3):
        t = tallies(p3)
        assert (t.top == t.bottom).all() and (t.top > 0).all()
        assert plurality_veto_winners(p3) == frozenset({"a", "b", "c"})

    def test_p1_only_winner(self, p1):
        assert plurality_veto_winners(p1) == frozenset({"a"})
        assert plurality_veto_winners_brute(p1) == frozenset({"a"})

    def test_unanimous(self):
        assert plurality_veto_winners(build_profile(UNANIMOUS)) == frozenset({"a"})

    def test_matches_enumeration_on_random_profiles(self):
        rng = np.random.default_rng(23)
        for _ in range(60):
            profile = random_profile(rng, int(rng.integers(2, 5)), int(rng.integers(1, 7)))
            assert plurality_veto_winners(profile) == plurality_veto_winners_brute(profile)

    def test_randomized_rule(self, p1, p3):
        assert randomized_plurality_veto(p3).probabilities == pytest.approx(np.full(3, 1 / 3))
        assert randomized_plurality_veto(p1).probabilities == pytest.approx([1.0, 0, 0])
        assert randomized_plurality_veto(build_profile(SINGLE)).probabilities == pytest.approx([1.0])


class TestMaximalLotteries:
    def test_c2_cycle_uniform(self, p2):
        assert c2_maximal_lottery(p2).probabilities == pytest.approx(np.full(3, 1 / 3), abs=1e-9)

    def test_c2_condorcet_degenerate(self, p1):
        lot = c2_maximal_lottery(p1)
        assert lot.probabilities == pytest.approx([1.0, 0.0, 0.0], abs=1e-9)
        margin = support_matrix(p1).margin()
        assert (lot.probabilities @ margin).min() >= -1e-8

    def test_c2_all_ties_uniform(self, p3):
        assert c2_maximal_lottery(p3).probabilities == pytest.approx(np.full(3, 1 / 3), abs=1e-9)

    def test_c1_cycle_uniform(self, p2):
        assert c1_maximal_lottery(p2).probabilities == pytest.approx(np.full(3, 1 / 3), abs=1e-9)

    def test_c1_theorem_tournament_m5(self):
        profile = mcgarvey(theorem_tournament(5))
        lot = c1_maximal_lottery(profile)
        assert lot.probabilities == pytest.approx([1 / 3, 1 / 3, 1 / 9, 1 / 9, 1 / 9], abs=1e-9)

    def test_c1_remark_membership(self, p4):
        lot = c1_maximal_lottery(p4)
        assert lot.probabilities == pytest.approx([0.5, 0.0, 0.5], abs=1e-9)
        sign = majority_relation(p4).sign
        assert (lot.probabilities @ sign).min() >= -1e-8

    def test_maximin_on_random_profiles(self):
        rng = np.random.default_rng(31)
        for _ in range(500):
            profile = random_profile(rng, int(rng.integers(1, 7)), int(rng.integers(1, 12)))
            margin = support_matrix(profile).margin()
            sign = majority_relation(profile).sign
            p2l = c2_maximal_lottery(profile).probabilities
            p1l = c1_maximal_lottery(profile).probabilities
            assert (p2l @ margin).min() >= -1e-8
            assert (p1l @ sign).min() >= -1e-8

    def test_c1_support_within_two_steps_and_tail_bound(self):
        rng = np.random.default_rng(37)
        for _ in range(120):
            profile = random_profile(rng, int(rng.integers(2, 8)), int(rng.integers(1, 10)))
            lot = c1_maximal_lottery(profile)
            rel = majority_relation(profile)
            dist = majority_distance_matrix(rel)
            assert (dist[lot.support()] <= 2).all()
            strict = rel.sign > 0
            for z in range(profile.m):
                assert lot.probabilities[strict[z]].sum() <= 0.5 + 1e-8

    def test_c1_majoritarian(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            profile = random_profile(rng, int(rng.integers(3, 6)), int(rng.integers(1, 8)))
            rel = majority_relation(profile)
            direct = c1_maximal_lottery(profile)
            realized = c1_maximal_lottery(mcgarvey(rel))
            assert direct.probabilities.tobytes() == realized.probabilities.tobytes()

    def test_condorcet_consistency(self):
        rng = np.random.default_rng(43)
        for _ in range(40):
            m = int(rng.integers(2, 6))
            # plant a unanimous-top alternative to force a Condorcet winner
            winner = int(rng.integers(m))
            rankings = []
            for _ in range(int(rng.integers(1, 8))):
                rest = [x for x in rng.permutation(m) if x != winner]
                rankings.append([f"x{winner}"] + [f"x{x}" for x in rest])
            profile = build_profile(rankings)
            expect = np.zeros(m)
            expect[profile.index_of(f"x{winner}")] = 1.0
            assert c1_maximal_lottery(profile).probabilities == pytest.approx(expect, abs=1e-9)
            assert c2_maximal_lottery(profile).probabilities == pytest.approx(expect, abs=1e-9)


class TestBetaMachinery:
    def test_p3_nothing_covered(self, p3):
        assert beta_uncovered_set(p3, 0.6) == frozenset({"a", "b", "c"})

    def test_p1_low_threshold(self, p1):
        assert beta_uncovered_set(p1, 0.6) == frozenset({"a"})

    def test_p1_high_threshold(self, p1):
        assert beta_uncovered_set(p1, 0.7) == frozenset({"a", "b"})

    def test_radius_rule_p3(self, p3):
        assert beta_radius_rule(p3, 0.6).probabilities == pytest.approx(np.full(3, 1 / 3))

    def test_radius_rule_p1_low(self, p1):
        assert beta_radius_rule(p1, 0.6).probabilities == pytest.approx([1.0, 0.0, 0.0])

    def test_radius_rule_p1_high(self, p1):
        # restriction to {a, b}: the b > a > c voter now top-ranks b
        assert beta_radius_rule(p1, 0.7).probabilities == pytest.approx([2 / 3, 1 / 3, 0.0])


class TestCrww:
    def test_constants(self):
        c = CRWW_CONSTANTS
        assert c.p_mix == pytest.approx(0.552327, abs=1e-6)
        # density normalization in closed form
        mass = c.p_mix / (1 - c.p_mix) * (math.atanh(c.B) - math.atanh(0.5))
        assert mass == pytest.approx(1.0, abs=1e-9)
        assert c.density(0.5) == 0.0 and c.density(c.B + 0.01) == 0.0
        assert c.density(0.6) > 0.0

    def test_interval_weights_sum(self, p1, p2, p4):
        for profile in (p1, p2, p4):
            weights = [w for _, _, w, _ in crww_intervals(profile)]
            assert sum(weights) == pytest.approx(1 - CRWW_CONSTANTS.p_mix, abs=1e-9)

    def test_p3_uniform(self, p3):
        assert crww(p3).probabilities == pytest.approx(np.full(3, 1 / 3), abs=1e-9)

    def test_p1_mostly_top(self, p1):
        lot = crww(p1)
        assert lot.probabilities[0] >= CRWW_CONSTANTS.p_mix - 1e-12

    def test_single_alternative(self):
        assert crww(build_profile(SINGLE)).probabilities == pytest.approx([1.0])


class TestAllRulesReturnValidLotteries:
    def test_random_profiles(self):
        rng = np.random.default_rng(53)
        rules = (random_dictatorship, randomized_plurality_veto,
                 c1_maximal_lottery, c2_maximal_lottery, crww)
        for _ in range(1000):
            profile = random_profile(rng, int(rng.integers(1, 7)), int(rng.integers(1, 12)))
            for rule in rules:
                assert_valid(rule(profile))
