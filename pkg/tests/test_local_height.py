"""
Unit tests for local heights: lifts, the closed-form d-average and the two local lower bounds
"""
import random
from fractions import Fraction

import pytest

from backend.errors import PreconditionError
from backend.state import AverageMethod, IntegerLift, LocalPointSet, NormalizedTriple, QuadTriple, TorusPoint
from backend.tools.deterministic.local_height_tool import local_height_tool, zero_mode
from backend.tools.deterministic.periodic_form_tool import periodic_form_tool
from backend.tools.deterministic.quadform_tool import quadform_tool


def _place(a, b, c) -> NormalizedTriple:
    return NormalizedTriple(triple=QuadTriple(a=a, b=b, c=c))


def _lifts(pairs):
    return [IntegerLift(u=u, v=v) for u, v in pairs]


class TestLiftToTorus:
    """Test torus coordinates of integer lifts"""

    @pytest.mark.parametrize("triple, lift, expected", [
        ((1, 0, 1), (1, 1), (0, 0)),
        ((2, 0, 2), (1, 0), (Fraction(-1, 2), 0)),
        ((2, 1, 5), (1, 0), (Fraction(-4, 9), Fraction(-1, 9))),
    ])
    def test_examples(self, triple, lift, expected):
        p = local_height_tool.lift_to_torus(triple, IntegerLift(u=lift[0], v=lift[1]))
        assert (p.x, p.y) == expected

    def test_unreduced_coordinates(self):
        assert local_height_tool.lift_coordinates((2, 1, 5), IntegerLift(u=1, v=0)) == (Fraction(5, 9), Fraction(-1, 9))

    def test_identities(self):
        rng = random.Random(1)
        for _ in range(1000):
            t = quadform_tool.random_triple(rng, 30)
            lift = IntegerLift(u=rng.randint(-100, 100), v=rng.randint(-100, 100))
            assert all(local_height_tool.lift_identities(t, lift).values())

    def test_difference_compatibility(self):
        rng = random.Random(2)
        for _ in range(200):
            t = quadform_tool.random_normalized(rng, 20).triple
            P = IntegerLift(u=rng.randint(-50, 50), v=rng.randint(-50, 50))
            Q = IntegerLift(u=rng.randint(-50, 50), v=rng.randint(-50, 50))
            diff = IntegerLift(u=P.u - Q.u, v=P.v - Q.v)
            expected = local_height_tool.lift_to_torus(t, P) - local_height_tool.lift_to_torus(t, Q)
            assert local_height_tool.lift_to_torus(t, diff) == expected

    def test_point_set_rejects_repeats(self):
        with pytest.raises(ValueError):
            LocalPointSet(place=_place(1, 0, 1), points=_lifts([(0, 0), (1, 0)]))


class TestBernoulliLocalHeight:
    """Test lambda^B = L/4 - L^(0,0)/4"""

    @pytest.mark.parametrize("triple, x, y, height", [
        ((1, 0, 1), 0, 0, Fraction(-1, 24)),
        ((2, 0, 2), Fraction(1, 2), 0, Fraction(1, 24)),
        ((1, 0, 1), Fraction(1, 2), Fraction(1, 2), Fraction(1, 12)),
    ])
    def test_examples(self, triple, x, y, height):
        value = local_height_tool.bernoulli_local_height(triple, TorusPoint(x=x, y=y))
        assert value.height == height
        assert value.height == value.quarter_l - value.normalization

    def test_zero_mode(self):
        assert zero_mode(QuadTriple(a=1, b=0, c=1)) == Fraction(1, 6)
        assert zero_mode(QuadTriple(a=2, b=0, c=2)) == Fraction(1, 3)
        assert zero_mode(QuadTriple(a=2, b=1, c=2)) == Fraction(5, 18)
        assert zero_mode(QuadTriple(a=2, b=1, c=5)) == Fraction(29, 54)

    @pytest.mark.parametrize("a,b,c", [(2, 1, 2), (2, 1, 5), (3, 1, 7), (4, 2, 5)])
    def test_zero_mode_is_torsion_mean_minus_bernoulli(self, a, b, c):
        t = QuadTriple(a=a, b=b, c=c)
        d = 2 * quadform_tool.delta(t)
        direct = periodic_form_tool.avg_d_direct(t, TorusPoint(x=0, y=0), d)
        bernoulli = local_height_tool.bernoulli_combination(t, Fraction(0), Fraction(0), d)
        assert zero_mode(t) == direct - bernoulli

    def test_torsion_normalization_scaling(self):
        # on valid d the torsion mean is exactly xi / (24 d^2)
        for triple, ds in (((1, 0, 1), [2, 4, 8, 16]), ((2, 1, 2), [6, 12, 24])):
            expected = quadform_tool.xi(triple) / 24
            for _, mean, scaled in local_height_tool.torsion_normalization(triple, ds):
                assert mean > 0
                assert scaled == expected


class TestAvgDClosedForm:
    """Test the closed-form d-average against direct enumeration"""

    @pytest.mark.parametrize("triple, x, y, d, expected", [
        ((1, 0, 1), 0, 0, 2, Fraction(1, 4)),
        ((1, 0, 1), Fraction(1, 4), 0, 2, Fraction(3, 16)),
        ((1, 0, 1), Fraction(1, 3), 0, 2, Fraction(7, 36)),
    ])
    def test_examples(self, triple, x, y, d, expected):
        comparison = local_height_tool.compare_avg_d(triple, TorusPoint(x=x, y=y), d)
        assert comparison.closed_form == comparison.direct == expected
        assert comparison.equal

    def test_hexagonal_form(self):
        assert local_height_tool.compare_avg_d((2, 1, 2), TorusPoint(x=0, y=0), 6).equal

    def test_master_identity(self):
        rng = random.Random(3)
        for _ in range(20):
            t = quadform_tool.random_normalized(rng, 12).triple
            modulus = 2 * quadform_tool.delta(t)
            for d in range(modulus, 25, modulus):
                for _ in range(5):
                    q = rng.randint(1, 30)
                    p = TorusPoint(x=Fraction(rng.randint(0, q), q), y=Fraction(rng.randint(0, q), q))
                    assert local_height_tool.compare_avg_d(t, p, d).equal

    def test_rejects_bad_d(self):
        with pytest.raises(PreconditionError):
            local_height_tool.avg_d_closed_form((2, 1, 2), TorusPoint(x=0, y=0), 4)
        with pytest.raises(PreconditionError):
            local_height_tool.require_valid_d((1, 0, 1), 3)


class TestPairAverages:
    """Test the vectorized pair average against its scalar form"""

    def test_matches_pairwise_sum(self):
        rng = random.Random(4)
        for _ in range(20):
            t = quadform_tool.random_normalized(rng, 15).triple
            d = 2 * quadform_tool.delta(t)
            lifts = _lifts((rng.randrange(t.D), rng.randrange(t.D)) for _ in range(6))
            total = sum(
                (local_height_tool.pair_height_average(t, P.u - Q.u, P.v - Q.v, d)
                 for i, P in enumerate(lifts) for j, Q in enumerate(lifts) if i != j),
                Fraction(0),
            )
            assert local_height_tool.pair_double_average(t, lifts, d) == total / 30

    def test_matches_direct_torsion_average(self):
        t = quadform_tool.as_triple((2, 1, 5))
        d = 18
        P, Q = IntegerLift(u=1, v=2), IntegerLift(u=4, v=0)
        diff = local_height_tool.lift_to_torus(t, IntegerLift(u=P.u - Q.u, v=P.v - Q.v))
        direct = (periodic_form_tool.avg_d_direct(t, diff, d) - zero_mode(t)) / 4
        assert local_height_tool.pair_height_average(t, P.u - Q.u, P.v - Q.v, d) == direct


class TestFourierAvgLowerBound:
    """Test the averaged lower bound at one place"""

    def test_two_point_example(self):
        S = LocalPointSet(place=_place(2, 0, 2), points=_lifts([(0, 0), (1, 0)]))
        direct = local_height_tool.fourier_avg_lower_bound(S, 2, method=AverageMethod.DIRECT)
        closed = local_height_tool.fourier_avg_lower_bound(S, 2, method=AverageMethod.CLOSED_FORM)
        assert direct.lhs == closed.lhs == Fraction(1, 24)
        assert direct.rhs == Fraction(-1, 32)
        assert direct.holds

    def test_full_torus(self):
        rng = random.Random(5)
        S = local_height_tool.random_point_set((2, 1, 5), 9, rng)
        assert local_height_tool.fourier_avg_lower_bound(S, 18).holds

    @pytest.mark.parametrize("a,b,c,N", [(2, 1, 2, 3), (2, 1, 5, 9), (4, 2, 5, 6)])
    def test_methods_agree_with_cross_term(self, a, b, c, N):
        S = local_height_tool.random_point_set(_place(a, b, c), N, random.Random(N))
        d = 2 * quadform_tool.delta((a, b, c))
        direct = local_height_tool.fourier_avg_lower_bound(S, d, method=AverageMethod.DIRECT)
        closed = local_height_tool.fourier_avg_lower_bound(S, d, method=AverageMethod.CLOSED_FORM)
        assert direct.lhs == closed.lhs
        assert direct.holds and closed.holds

    def test_random_suite(self):
        rng = random.Random(6)
        for _ in range(100):
            place = quadform_tool.random_normalized(rng, 12)
            if place.triple.D < 2:
                continue
            N = rng.randint(2, min(place.triple.D, 10))
            S = local_height_tool.random_point_set(place, N, rng)
            d = 2 * quadform_tool.delta(place.triple)
            assert local_height_tool.fourier_avg_lower_bound(S, d, method=AverageMethod.CLOSED_FORM).holds

    def test_rejects_single_point(self):
        S = LocalPointSet(place=_place(2, 1, 5), points=_lifts([(0, 0)]))
        with pytest.raises(PreconditionError):
            local_height_tool.fourier_avg_lower_bound(S, 18)

    def test_rejects_too_many_points(self):
        with pytest.raises(PreconditionError):
            local_height_tool.random_point_set((2, 1, 5), 10, random.Random(0))


class TestPigeonhole:
    """Test the 6^3 cube partition and its pair bound"""

    def test_single_point(self):
        S = LocalPointSet(place=_place(2, 1, 5), points=_lifts([(3, 1)]))
        result = local_height_tool.pigeonhole_subset(S, 18)
        assert result.subset.N == 1
        assert result.min_pair_average is None
        assert result.holds

    def test_identity_form_many_lifts(self):
        rng = random.Random(7)
        lifts = _lifts((rng.randint(-50, 50), rng.randint(-50, 50)) for _ in range(300))
        cell, members = local_height_tool.largest_cell((1, 0, 1), lifts, 2)
        assert len(members) >= 2
        bound = quadform_tool.xi((1, 0, 1)) / (144 * 4)
        assert bound == Fraction(1, 288)
        for i in members[:20]:
            for j in members[:20]:
                if i != j:
                    du, dv = lifts[i].u - lifts[j].u, lifts[i].v - lifts[j].v
                    assert local_height_tool.pair_height_average((1, 0, 1), du, dv, 2) >= bound

    def test_hexagonal_form_many_lifts(self):
        rng = random.Random(8)
        lifts = _lifts((rng.randint(-60, 60), rng.randint(-60, 60)) for _ in range(500))
        _, members = local_height_tool.largest_cell((2, 1, 2), lifts, 6)
        assert 216 * len(members) >= 500
        bound = quadform_tool.xi((2, 1, 2)) / (144 * 36)
        assert bound == Fraction(1, 5184)
        for i in members[:15]:
            for j in members[:15]:
                if i != j:
                    du, dv = lifts[i].u - lifts[j].u, lifts[i].v - lifts[j].v
                    assert local_height_tool.pair_height_average((2, 1, 2), du, dv, 6) >= bound

    def test_random_suite(self):
        rng = random.Random(9)
        for _ in range(100):
            place = quadform_tool.random_normalized(rng, 12)
            N = rng.randint(1, min(place.triple.D, 12))
            S = local_height_tool.random_point_set(place, N, rng)
            d = 2 * quadform_tool.delta(place.triple) * rng.randint(1, 2)
            result = local_height_tool.pigeonhole_subset(S, d)
            assert result.holds
            assert 216 * result.subset.N >= S.N

    def test_cell_ties_go_to_smallest_key(self):
        lifts = _lifts([(0, 0), (0, 1)])
        # with d = 1 the two lifts land in different cells
        cell, members = local_height_tool.largest_cell((2, 0, 2), lifts, 1)
        assert members == [0]
        assert cell == (0, 0, 0)
