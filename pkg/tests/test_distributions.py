import io
import math
import random
from collections import Counter
from fractions import Fraction

import pytest

from chainlab import (
    BalancedString,
    InvalidParameterError,
    ResourceLimitError,
    bias_grid,
    enumerate_balanced,
    enumerate_support,
    pmf_biased_index,
    sample_biased_direct,
    sample_biased_structured,
    sample_chain,
    validate_instance,
)

from util import chi2_quantile, chi2_stat


class TestBiasGrid:
    def test_n4(self):
        expected = sorted(
            {Fraction(0), Fraction(1, 6), Fraction(1, 2), Fraction(-1, 6), Fraction(-1, 2)}
        )
        assert bias_grid(4) == expected

    def test_n2(self):
        assert bias_grid(2) == [Fraction(-1, 2), Fraction(0), Fraction(1, 2)]

    @pytest.mark.parametrize("n", [2, 4, 6, 8, 12])
    def test_all_within_half(self, n):
        assert all(abs(t) <= Fraction(1, 2) for t in bias_grid(n))

    def test_grid_matches_integer_pool_sizes(self):
        # every grid value corresponds to an integer pool size in [n/2, n]
        for n in (4, 6, 8):
            for theta in bias_grid(n):
                b = Fraction(n) / (1 + 2 * abs(theta))
                assert b.denominator == 1
                assert n // 2 <= b <= n


class TestPmf:
    def test_unbiased_n2(self):
        assert pmf_biased_index(2, 0, BalancedString("10"), 1) == Fraction(1, 4)

    def test_impossible_cell_at_full_bias(self):
        assert pmf_biased_index(4, Fraction(1, 2), BalancedString("0011"), 1) == 0

    def test_quarter_bias_cell(self):
        value = pmf_biased_index(4, Fraction(1, 4), BalancedString("0011"), 3)
        assert value == Fraction(1, 16)

    def test_sums_to_one(self):
        total = sum(
            pmf_biased_index(4, Fraction(1, 4), y, rho)
            for y in enumerate_balanced(4)
            for rho in range(1, 5)
        )
        assert total == 1

    def test_unbalanced_rejected(self):
        from chainlab import BitString

        with pytest.raises(InvalidParameterError):
            pmf_biased_index(4, 0, BitString("1110"), 1)


class TestSampleChain:
    def test_every_output_validates(self):
        rng = random.Random(11)
        for _ in range(200):
            inst = sample_chain(6, 3, rng)
            assert validate_instance(inst)

    def test_odd_n_rejected(self):
        with pytest.raises(InvalidParameterError):
            sample_chain(3, 1, random.Random(0))

    def test_point_probability_n2(self):
        # Pr[(z=1, X=10, sigma=1)] = 1/4
        rng = random.Random(5)
        trials = 40000
        hits = 0
        for _ in range(trials):
            inst = sample_chain(2, 1, rng)
            hits += inst.answer == 1 and inst.strings[0].text == "10" and inst.indices[0] == 1
        se = math.sqrt(0.25 * 0.75 / trials)
        assert abs(hits / trials - 0.25) <= 5 * se

    def test_marginal_uniform_n4(self):
        # marginalizing the answer bit leaves every (string, index) pair at 1/24
        rng = random.Random(6)
        trials = 120000
        counts = Counter()
        for _ in range(trials):
            inst = sample_chain(4, 1, rng)
            counts[(inst.strings[0].text, inst.indices[0])] += 1
        assert len(counts) == 24
        p = 1 / 24
        se = math.sqrt(p * (1 - p) / trials)
        for pair in counts:
            assert abs(counts[pair] / trials - p) <= 5 * se

    def test_pairs_independent_given_answer(self):
        # conditioned on the answer, the two (string, index) pairs are independent
        rng = random.Random(7)
        trials = 80000
        joint = {0: Counter(), 1: Counter()}
        marg1 = {0: Counter(), 1: Counter()}
        marg2 = {0: Counter(), 1: Counter()}
        totals = Counter()
        for _ in range(trials):
            inst = sample_chain(2, 2, rng)
            z = inst.answer
            a = (inst.strings[0].text, inst.indices[0])
            b = (inst.strings[1].text, inst.indices[1])
            joint[z][(a, b)] += 1
            marg1[z][a] += 1
            marg2[z][b] += 1
            totals[z] += 1
        for z in (0, 1):
            n_z = totals[z]
            expected = {
                (a, b): (marg1[z][a] / n_z) * (marg2[z][b] / n_z)
                for a in marg1[z]
                for b in marg2[z]
            }
            stat = chi2_stat(joint[z], expected, n_z)
            df = (len(marg1[z]) - 1) * (len(marg2[z]) - 1)
            assert stat <= chi2_quantile(df)


class TestSampleBiasedDirect:
    def test_full_bias_always_one(self):
        rng = random.Random(1)
        for _ in range(100):
            s = sample_biased_direct(4, Fraction(1, 2), rng)
            assert s.answer == 1
            assert s.string.bit(s.index) == 1
            assert s.pool is None and s.chosen is None

    def test_full_negative_bias_always_zero(self):
        rng = random.Random(2)
        assert all(
            sample_biased_direct(4, Fraction(-1, 2), rng).answer == 0 for _ in range(100)
        )

    def test_unbiased_n2_uniform(self):
        rng = random.Random(3)
        trials = 40000
        counts = Counter()
        for _ in range(trials):
            s = sample_biased_direct(2, 0, rng)
            counts[(s.string.text, s.index)] += 1
        assert len(counts) == 4
        se = math.sqrt(0.25 * 0.75 / trials)
        for pair in counts:
            assert abs(counts[pair] / trials - 0.25) <= 5 * se

    def test_bias_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            sample_biased_direct(4, Fraction(2, 3), random.Random(0))


class TestSampleBiasedStructured:
    def test_off_grid_error_names_neighbors(self):
        with pytest.raises(InvalidParameterError) as err:
            sample_biased_structured(4, Fraction(1, 3), random.Random(0))
        message = str(err.value)
        assert "1/6" in message and "1/2" in message

    def test_sample_shape_invariants(self):
        rng = random.Random(4)
        for theta in (Fraction(1, 6), Fraction(-1, 6), Fraction(1, 2), 0):
            b = int(Fraction(4) / (1 + 2 * abs(Fraction(theta))))
            for _ in range(50):
                s = sample_biased_structured(4, theta, rng)
                assert len(s.pool) == b
                assert len(s.chosen) == 2
                assert s.chosen <= s.pool
                assert s.index in s.pool
                assert s.answer == s.string.bit(s.index)

    def test_unbiased_collapses_to_uniform_index(self):
        rng = random.Random(5)
        for _ in range(50):
            s = sample_biased_structured(4, 0, rng)
            assert s.pool == frozenset(range(1, 5))

    def test_frequencies_match_exact_table(self):
        theta = Fraction(1, 6)
        exact = enumerate_support(4, theta, "structured").as_dict()
        rng = random.Random(8)
        trials = 100000
        counts = Counter()
        for _ in range(trials):
            s = sample_biased_structured(4, theta, rng)
            counts[(s.string, s.index)] += 1
        for key, p in exact.items():
            pf = float(p)
            se = math.sqrt(pf * (1 - pf) / trials)
            assert abs(counts[key] / trials - pf) <= 5 * se

    def test_independence_given_fixed_pool(self):
        # within any fixed pool, (string, index) must factorize
        theta = Fraction(1, 6)
        rng = random.Random(9)
        trials = 100000
        by_pool: dict = {}
        for _ in range(trials):
            s = sample_biased_structured(4, theta, rng)
            by_pool.setdefault(s.pool, []).append((s.string.text, s.index))
        for pool, draws in by_pool.items():
            n_pool = len(draws)
            joint = Counter(draws)
            ys = Counter(y for y, _ in draws)
            rhos = Counter(r for _, r in draws)
            expected = {
                (y, r): (ys[y] / n_pool) * (rhos[r] / n_pool) for y in ys for r in rhos
            }
            df = (len(ys) - 1) * (len(rhos) - 1)
            assert chi2_stat(joint, expected, n_pool) <= chi2_quantile(df)


class TestEnumerateSupport:
    def test_direct_unbiased_n2(self):
        table = enumerate_support(2, 0, "direct")
        assert len(table.entries) == 4
        assert all(p == Fraction(1, 4) for _, p in table.entries)

    def test_structured_full_bias_n4(self):
        table = enumerate_support(4, Fraction(1, 2), "structured")
        assert len(table.entries) == 12
        assert all(p == Fraction(1, 12) for _, p in table.entries)
        assert all(y.bit(rho) == 1 for (y, rho), _ in table.entries)

    @pytest.mark.parametrize("variant", ["direct", "structured"])
    def test_total_is_one(self, variant):
        for theta in bias_grid(4):
            table = enumerate_support(4, theta, variant)
            assert table.total == 1

    def test_direct_matches_pmf(self):
        for theta in bias_grid(6):
            table = enumerate_support(6, theta, "direct").as_dict()
            for y in enumerate_balanced(6):
                for rho in range(1, 7):
                    assert table.get((y, rho), Fraction(0)) == pmf_biased_index(6, theta, y, rho)

    def test_identity_spot_negative_theta(self):
        direct = enumerate_support(6, Fraction(-1, 4), "direct")
        structured = enumerate_support(6, Fraction(-1, 4), "structured")
        assert direct.tv_distance(structured) == 0

    def test_budget_error_reports_requirement(self):
        with pytest.raises(ResourceLimitError) as err:
            enumerate_support(8, 0, "direct", budget=10)
        assert err.value.required == math.comb(8, 4) * 8
        assert err.value.budget == 10

    def test_bad_variant(self):
        with pytest.raises(InvalidParameterError):
            enumerate_support(4, 0, "other")

    def test_csv_export(self):
        table = enumerate_support(2, 0, "direct")
        buffer = io.StringIO()
        table.write_csv(buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == "outcome_Y,outcome_rho,prob_num,prob_den"
        assert lines[1] == "01,1,1,4"
        assert len(lines) == 5
