"""
Unit tests for B2, its Fourier expansion, the distribution relation and the Fejer-type bound
"""
import random
from fractions import Fraction

import pytest

from backend.errors import PreconditionError, TheoremCheckFailed
from backend.state import RationalGridSet
from backend.tools.deterministic.bernoulli_tool import bernoulli_tool


def _random_rational(rng) -> Fraction:
    return Fraction(rng.randint(-500, 500), rng.randint(1, 60))


class TestB2:
    """Test exact values of B2"""

    @pytest.mark.parametrize("x, expected", [
        (Fraction(0), Fraction(1, 6)),
        (Fraction(1, 2), Fraction(-1, 12)),
        (Fraction(7, 3), Fraction(-1, 18)),
        (Fraction(1, 4), Fraction(-1, 48)),
    ])
    def test_examples(self, x, expected):
        assert bernoulli_tool.b2(x) == expected

    def test_periodic_and_even(self):
        rng = random.Random(1)
        for _ in range(1000):
            x = _random_rational(rng)
            assert bernoulli_tool.b2(x + rng.randint(-5, 5)) == bernoulli_tool.b2(x)
            assert bernoulli_tool.b2(-x) == bernoulli_tool.b2(x)


class TestFourierPartial:
    """Test the Fourier expansion of B2"""

    def test_origin(self):
        assert bernoulli_tool.b2_fourier_partial(Fraction(0), 100000) == pytest.approx(1 / 6, abs=1e-5)

    @pytest.mark.parametrize("x", [Fraction(1, 2), Fraction(1, 4)])
    def test_converges(self, x):
        assert bernoulli_tool.b2_fourier_partial(x, 1000) == pytest.approx(float(bernoulli_tool.b2(x)), abs=1e-6)

    def test_rejects_zero_terms(self):
        with pytest.raises(PreconditionError):
            bernoulli_tool.b2_fourier_partial(Fraction(0), 0)


class TestDistribution:
    """Test (1/N) sum B2(x + j/N) = B2(N x) / N^2"""

    @pytest.mark.parametrize("x, N, value", [
        (Fraction(0), 2, Fraction(1, 24)),
        (Fraction(0), 1, Fraction(1, 6)),
        (Fraction(1, 3), 3, Fraction(1, 54)),
    ])
    def test_examples(self, x, N, value):
        check = bernoulli_tool.b2_distribution(x, N)
        assert check.lhs == check.rhs == value
        assert check.equal

    def test_random(self):
        rng = random.Random(2)
        for _ in range(100):
            x = _random_rational(rng)
            for N in range(1, 25):
                assert bernoulli_tool.b2_distribution(x, N).equal

    def test_rejects_zero(self):
        with pytest.raises(PreconditionError):
            bernoulli_tool.b2_distribution(Fraction(0), 0)


class TestFejerBound:
    """Test the pair-average lower bound"""

    def test_two_points(self):
        check = bernoulli_tool.fejer_lower_bound(RationalGridSet(R=2, elements=[0, Fraction(1, 2)]))
        assert check.lhs == Fraction(-1, 12)
        assert check.rhs == Fraction(-1, 8)
        assert check.holds

    def test_full_subgroup(self):
        check = bernoulli_tool.fejer_lower_bound(
            RationalGridSet(R=3, elements=[0, Fraction(1, 3), Fraction(2, 3)])
        )
        assert check.lhs == Fraction(-1, 18)
        assert check.rhs == Fraction(-7, 108)
        assert check.holds

    def test_rejects_single_point(self):
        with pytest.raises(PreconditionError):
            bernoulli_tool.fejer_lower_bound(RationalGridSet(R=1, elements=[0]))

    def test_grid_set_invariants(self):
        with pytest.raises(ValueError):
            RationalGridSet(R=4, elements=[Fraction(1, 3)])
        with pytest.raises(ValueError):
            RationalGridSet(R=4, elements=[Fraction(1, 4), Fraction(5, 4)])

    def test_random_sets(self):
        rng = random.Random(3)
        for _ in range(500):
            assert bernoulli_tool.fejer_lower_bound(bernoulli_tool.random_grid_set(rng, 40)).holds

    def test_strict_failure_raises(self, monkeypatch):
        monkeypatch.setattr(bernoulli_tool, "pair_average", lambda values: Fraction(-10))
        with pytest.raises(TheoremCheckFailed):
            bernoulli_tool.fejer_lower_bound(RationalGridSet(R=2, elements=[0, Fraction(1, 2)]))

    def test_multiset_pair_average(self):
        assert bernoulli_tool.pair_average([Fraction(1, 3)] * 4) == Fraction(1, 6)


class TestCharacterSum:
    """Test the Fourier side of the pair average"""

    def test_matches_pair_average(self):
        rng = random.Random(4)
        for _ in range(5):
            T = bernoulli_tool.random_grid_set(rng, 12).elements
            exact = float(bernoulli_tool.pair_average(T))
            assert bernoulli_tool.character_sum_average(T, 20000) == pytest.approx(exact, abs=1e-4)
