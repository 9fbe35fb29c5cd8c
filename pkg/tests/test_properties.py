"""
Property-based checks of the exact identities
"""
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings as hypothesis_settings, strategies as st

from backend.state import QuadTriple, RationalGridSet, TorusPoint, ValuationVector
from backend.tools.deterministic.bernoulli_tool import bernoulli_tool
from backend.tools.deterministic.local_height_tool import local_height_tool, zero_mode
from backend.tools.deterministic.periodic_form_tool import periodic_form_tool
from backend.tools.deterministic.quadform_tool import quadform_tool
from backend.tools.deterministic.theta_tool import theta_tool
from backend.tools.numeric.quadrature_tool import quadrature_tool

small_fractions = st.fractions(min_value=-3, max_value=3, max_denominator=12)


@st.composite
def triples(draw, bound=30):
    a = draw(st.integers(1, bound))
    c = draw(st.integers(1, bound))
    b = draw(st.integers(-bound, bound))
    assume(a * c - b * b > 0)
    return (a, b, c)


@st.composite
def grid_sets(draw):
    R = draw(st.integers(2, 24))
    residues = draw(st.sets(st.integers(0, R - 1), min_size=2, max_size=R))
    return RationalGridSet(R=R, elements=[Fraction(r, R) for r in sorted(residues)])


@st.composite
def cross_term_triples(draw):
    # normalized with b >= 2: 0 <= 2b <= a <= c
    b = draw(st.integers(2, 3))
    a = draw(st.integers(2 * b, 2 * b + 2))
    c = draw(st.integers(a, a + 3))
    return (a, b, c)


class TestQuadformProperties:
    """Test identities of the linear forms and normalization"""

    @given(triples(), st.integers(-50, 50), st.integers(-50, 50))
    def test_linear_form_identities(self, t, m, n):
        for name, lhs, rhs in quadform_tool.linear_form_identities(t, m, n):
            assert lhs == rhs, name

    @given(triples())
    def test_normalize_idempotent(self, t):
        once = quadform_tool.normalize(t)
        assert once.triple.is_normalized
        assert once.triple.D == quadform_tool.as_triple(t).D
        again = quadform_tool.normalize(once.triple)
        assert again.triple == once.triple
        assert again.transform == ((1, 0), (0, 1))


class TestBernoulliProperties:
    """Test periodicity and distribution of B2"""

    @given(small_fractions, st.integers(-5, 5))
    def test_b2_periodic_and_even(self, x, k):
        assert bernoulli_tool.b2(x + k) == bernoulli_tool.b2(x)
        assert bernoulli_tool.b2(-x) == bernoulli_tool.b2(x)

    @given(small_fractions, st.integers(1, 12))
    def test_distribution(self, x, N):
        assert bernoulli_tool.b2_distribution(x, N).equal

    @given(grid_sets())
    def test_fejer_bound(self, T):
        assert bernoulli_tool.fejer_lower_bound(T).holds


class TestLocalHeightProperties:
    """Test the closed-form torsion average"""

    @hypothesis_settings(max_examples=25, deadline=None)
    @given(triples(bound=6), st.fractions(min_value=-1, max_value=1, max_denominator=7),
           st.fractions(min_value=-1, max_value=1, max_denominator=7))
    def test_avg_d_identity(self, t, x, y):
        place = quadform_tool.normalize(t).triple
        d = 2 * quadform_tool.delta(place)
        assert local_height_tool.compare_avg_d(place, TorusPoint(x=x, y=y), d).equal

    @hypothesis_settings(deadline=None)
    @given(triples(bound=8), small_fractions, small_fractions)
    def test_l_matches_brute_force(self, t, x, y):
        place = quadform_tool.normalize(t).triple
        p = TorusPoint(x=x, y=y)
        assert periodic_form_tool.eval_l(place, p).value == periodic_form_tool.brute_force_l(place, p).value

    @hypothesis_settings(max_examples=25, deadline=None)
    @given(st.one_of(triples(bound=6), cross_term_triples()))
    def test_zero_mode_is_torsion_mean_minus_bernoulli(self, t):
        place = quadform_tool.normalize(t).triple
        d = 2 * quadform_tool.delta(place)
        direct = periodic_form_tool.avg_d_direct(place, TorusPoint(x=0, y=0), d)
        bernoulli = local_height_tool.bernoulli_combination(place, Fraction(0), Fraction(0), d)
        assert zero_mode(place) == direct - bernoulli

    @hypothesis_settings(max_examples=10, deadline=None)
    @given(cross_term_triples())
    def test_zero_mode_matches_quadrature(self, t):
        mean = zero_mode(QuadTriple(a=t[0], b=t[1], c=t[2]))
        assert quadrature_tool.quadrature_oracle(t, 0, 0, 9).value == pytest.approx(float(mean), abs=1e-3)


class TestThetaProperties:
    """Test the tropical theta translation identities"""

    @hypothesis_settings(deadline=None)
    @given(triples(bound=6), small_fractions, small_fractions, st.integers(-2, 2), st.integers(-2, 2))
    def test_transform_and_invariance(self, t, w1, w2, n1, n2):
        Q = theta_tool.from_triple(*t)
        w = ValuationVector(w=[w1, w2])
        assert theta_tool.check_theta_transform(Q, w, [n1, n2]).equal
        assert theta_tool.check_lambda_invariance(Q, w, [n1, n2]).zero
