"""
Unit tests for the global model: d, scaled places, the double average, the estimate chain,
the Holder-type inequality and greedy conflict avoidance
"""
import math
import random
from fractions import Fraction

import pytest

from backend.errors import OracleViolationError, PreconditionError, TheoremCheckFailed
from backend.state import ExtensionProfile, GlobalPointSet, IntegerLift, LiftModel, ProfileKind
from backend.tools.deterministic.global_model_tool import global_model_tool
from backend.tools.deterministic.local_height_tool import local_height_tool
from backend.tools.deterministic.quadform_tool import quadform_tool

THREE_PLACES = {"v1": (1, 0, 1), "v2": (2, 1, 2), "v3": (2, 1, 5)}


def _lifts(pairs):
    return [IntegerLift(u=u, v=v) for u, v in pairs]


class TestPlaces:
    """Test d and scaled places"""

    @pytest.mark.parametrize("triples, d", [
        ({"v": (1, 0, 1)}, 2),
        ({"v": (2, 1, 2)}, 6),
        (THREE_PLACES, 18),
    ])
    def test_compute_d(self, triples, d):
        places = global_model_tool.make_places(triples)
        assert global_model_tool.compute_d(places) == d
        for place in places:
            local_height_tool.require_valid_d(place.triple, d)

    def test_compute_d_rejects_empty(self):
        with pytest.raises(PreconditionError):
            global_model_tool.compute_d([])

    def test_make_places_normalizes(self):
        [place] = global_model_tool.make_places({"v": (5, 4, 5)})
        assert place.triple.triple.as_tuple() == (2, 1, 5)

    def test_scaled_place(self):
        [identity] = global_model_tool.make_places({"v": (1, 0, 1)})
        scaled = global_model_tool.scaled_place(identity, 3).triple
        assert scaled.as_tuple() == (3, 0, 3)
        assert scaled.D == 9
        [form] = global_model_tool.make_places({"v": (2, 1, 5)})
        doubled = global_model_tool.scaled_place(form, 2).triple
        assert doubled.as_tuple() == (4, 2, 10)
        assert quadform_tool.xi(doubled) == 2 * quadform_tool.xi(form.triple.triple)
        assert quadform_tool.delta(doubled) == quadform_tool.delta(form.triple.triple)
        assert global_model_tool.scaled_place(form, 1).triple == form.triple.triple

    def test_scaled_place_rejects_zero(self):
        [place] = global_model_tool.make_places({"v": (1, 0, 1)})
        with pytest.raises(PreconditionError):
            global_model_tool.scaled_place(place, 0)


class TestProfiles:
    """Test ramification profiles"""

    def test_random_partitions_sum_to_n(self):
        places = global_model_tool.make_places(THREE_PLACES)
        rng = random.Random(1)
        for n in (1, 2, 7, 30):
            profile = global_model_tool.random_profile(places, n, ProfileKind.RANDOM_PARTITION, rng)
            for indices in profile.per_place.values():
                assert sum(indices) == n
                assert len(indices) <= 6

    def test_single_branch(self):
        places = global_model_tool.make_places(THREE_PLACES)
        profile = global_model_tool.random_profile(places, 9, ProfileKind.SINGLE_BRANCH, random.Random(0))
        assert all(indices == [9] for indices in profile.per_place.values())

    def test_fixed_profile(self):
        places = global_model_tool.make_places({"v": (1, 0, 1)})
        profile = global_model_tool.random_profile(
            places, 4, ProfileKind.FIXED, random.Random(0), fixed={"v": [1, 3]}
        )
        assert profile.per_place == {"v": [1, 3]}
        assert global_model_tool.heaviest_branch(profile, "v") == 1

    def test_profile_sum_invariant(self):
        with pytest.raises(ValueError):
            ExtensionProfile(n=4, per_place={"v": [1, 2]})

    def test_point_sets_align(self):
        with pytest.raises(ValueError):
            GlobalPointSet(lifts={"a": _lifts([(0, 0)]), "b": _lifts([(0, 0), (1, 1)])})


class TestDoubleAverage:
    """Test the global double average"""

    def test_single_place_single_branch(self):
        places = global_model_tool.make_places({"v": (2, 1, 5)})
        lifts = _lifts([(0, 0), (1, 0), (2, 3)])
        profile = ExtensionProfile(n=1, per_place={"v": [1]})
        average = global_model_tool.global_double_average(places, profile, GlobalPointSet(lifts={"v": lifts}), 18)
        assert average.total == local_height_tool.pair_double_average(places[0].triple, lifts, 18)

    def test_ramified_branch_halves_scaled_height(self):
        places = global_model_tool.make_places({"v": (1, 0, 1)})
        lifts = _lifts([(0, 0), (1, 0), (0, 1)])
        profile = ExtensionProfile(n=2, per_place={"v": [2]})
        average = global_model_tool.global_double_average(places, profile, GlobalPointSet(lifts={"v": lifts}), 2)
        scaled = global_model_tool.scaled_place(places[0], 2)
        expected = local_height_tool.pair_double_average(scaled, _lifts([(0, 0), (2, 0), (0, 2)]), 2) / 2
        assert average.total == expected

    def test_places_add(self):
        places = global_model_tool.make_places({"a": (1, 0, 1), "b": (2, 1, 2)})
        lifts = {"a": _lifts([(0, 0), (1, 2), (3, 1)]), "b": _lifts([(0, 0), (1, 0), (0, 1)])}
        profile = ExtensionProfile(n=3, per_place={"a": [1, 2], "b": [3]})
        average = global_model_tool.global_double_average(places, profile, GlobalPointSet(lifts=lifts), 6)
        assert average.total == sum(sum(row) for row in average.contributions.values())
        assert len(average.contributions["a"]) == 2

    def test_rejects_missing_place(self):
        places = global_model_tool.make_places({"a": (1, 0, 1), "b": (2, 1, 2)})
        profile = ExtensionProfile(n=1, per_place={"a": [1]})
        points = GlobalPointSet(lifts={"a": _lifts([(0, 0), (1, 0)]), "b": _lifts([(0, 0), (1, 0)])})
        with pytest.raises(PreconditionError):
            global_model_tool.global_double_average(places, profile, points, 6)

    def test_rejects_invalid_d(self):
        places = global_model_tool.make_places({"v": (2, 1, 2)})
        profile = ExtensionProfile(n=1, per_place={"v": [1]})
        points = GlobalPointSet(lifts={"v": _lifts([(0, 0), (1, 0)])})
        with pytest.raises(PreconditionError):
            global_model_tool.global_double_average(places, profile, points, 2)


class TestTheoremEstimates:
    """Test the three per-place estimates"""

    def test_single_place_constants(self):
        places = global_model_tool.make_places({"v": (1, 0, 1)})
        rng = random.Random(2)
        lifts = _lifts((rng.randint(0, 9), rng.randint(0, 9)) for _ in range(10))
        profile = ExtensionProfile(n=1, per_place={"v": [1]})
        report = global_model_tool.theorem_estimates(places, profile, GlobalPointSet(lifts={"v": lifts}), 2, "v")
        assert report.est1 == Fraction(1, 288)
        assert report.est2 == -report.C3 / 9
        assert report.est3 == 0
        assert report.C2 / report.C1 == 6
        assert report.holder_floor is None
        assert report.holds

    def test_three_places(self):
        places = global_model_tool.make_places(THREE_PLACES)
        d = global_model_tool.compute_d(places)
        rng = random.Random(3)
        for _ in range(50):
            n = rng.randint(1, 12)
            profile = global_model_tool.random_profile(places, n, ProfileKind.RANDOM_PARTITION, rng)
            points = global_model_tool.random_point_set(places, rng.randint(2, 8), rng, profile=profile)
            report = global_model_tool.theorem_estimates(places, profile, points, d, "v1")
            assert report.holds
            assert report.part1 + report.part2 + report.part3 >= report.combined
            if n >= 3:
                assert report.holder_floor is not None

    def test_per_branch_lifts(self):
        places = global_model_tool.make_places({"v": (1, 0, 1), "w": (2, 1, 2)})
        d = global_model_tool.compute_d(places)
        rng = random.Random(4)
        for _ in range(20):
            profile = global_model_tool.random_profile(places, 6, ProfileKind.RANDOM_PARTITION, rng)
            points = global_model_tool.random_point_set(places, 5, rng, profile=profile, lift_model=LiftModel.PER_BRANCH)
            average = global_model_tool.global_double_average(places, profile, points, d)
            expected = sum(
                local_height_tool.pair_double_average(
                    global_model_tool.scaled_place(place, e), points.branch_lifts[place.id][w], d
                )
                for place in places
                for w, e in enumerate(profile.per_place[place.id])
            ) / 6
            assert average.total == expected

    def test_rejects_unknown_place(self):
        places = global_model_tool.make_places({"v": (1, 0, 1)})
        profile = ExtensionProfile(n=1, per_place={"v": [1]})
        points = GlobalPointSet(lifts={"v": _lifts([(0, 0), (1, 0)])})
        with pytest.raises(PreconditionError):
            global_model_tool.theorem_estimates(places, profile, points, 2, "nowhere")

    def test_rejects_light_branch(self):
        places = global_model_tool.make_places({"v": (1, 0, 1)})
        profile = ExtensionProfile(n=3, per_place={"v": [2, 1]})
        points = GlobalPointSet(lifts={"v": _lifts([(0, 0), (1, 0)])})
        with pytest.raises(PreconditionError):
            global_model_tool.theorem_estimates(places, profile, points, 2, "v", w0=1)

    def test_rejects_points_in_several_cells(self):
        places = global_model_tool.make_places({"v": (1, 0, 1)})
        profile = ExtensionProfile(n=4, per_place={"v": [4]})
        points = GlobalPointSet(
            lifts={"v": _lifts([(0, 0), (0, 0)])},
            branch_lifts={"v": [_lifts([(0, 0), (0, 1)])]},
        )
        with pytest.raises(PreconditionError):
            global_model_tool.theorem_estimates(places, profile, points, 2, "v")

    def test_per_branch_model_needs_profile(self):
        places = global_model_tool.make_places({"v": (1, 0, 1)})
        with pytest.raises(PreconditionError):
            global_model_tool.random_point_set(places, 3, random.Random(0), lift_model=LiftModel.PER_BRANCH)


class TestHolderBound:
    """Test the Holder-type inequality"""

    def test_equality_case(self):
        report = global_model_tool.holder_bound(1.0, 1.0, [1.0])
        assert report.lhs == pytest.approx(1.0)
        assert report.rhs == pytest.approx(1.0)
        assert report.holds

    def test_three_branches(self):
        report = global_model_tool.holder_bound(1.0, 1.0, [2.0, 1.0, 1.0])
        assert report.lhs == pytest.approx(4.0)
        assert report.rhs == pytest.approx(4 ** (1 / 3))
        assert report.holds

    def test_boundary_of_precondition(self):
        report = global_model_tool.holder_bound(1.0, 4.0, [1.0, 1.0])
        assert report.lhs == pytest.approx(5.0)
        assert report.intermediate == pytest.approx(5.0)
        assert report.rhs == pytest.approx(2.0)
        assert report.sharper == pytest.approx(2.0)
        assert report.holds

    def test_profile_function(self):
        assert global_model_tool.holder_profile(1.0) == pytest.approx(1.0, abs=1e-12)
        values = [global_model_tool.holder_profile(w) for w in (0.25, 0.5, 1.0, 2.0)]
        assert values == sorted(values, reverse=True)
        assert global_model_tool.holder_profile(0.0) == pytest.approx(3 / 2 ** (2 / 3))

    @pytest.mark.parametrize("alpha, beta, e", [
        (1.0, 1.0, [1.0, 2.0]),
        (0.0, 1.0, [1.0]),
        (1.0, 100.0, [1.0]),
        (1.0, 1.0, []),
    ])
    def test_rejects_bad_input(self, alpha, beta, e):
        with pytest.raises(PreconditionError):
            global_model_tool.holder_bound(alpha, beta, e)

    def test_random_suite(self):
        rng = random.Random(5)
        checked = 0
        while checked < 500:
            alpha, beta = rng.uniform(0.01, 5.0), rng.uniform(0.01, 5.0)
            e = sorted((rng.uniform(0.1, 10.0) for _ in range(rng.randint(1, 8))), reverse=True)
            if sum(e) ** 2 < beta / alpha:
                continue
            report = global_model_tool.holder_bound(alpha, beta, e)
            assert report.lhs >= report.rhs * (1 - 1e-12)
            checked += 1


class TestGreedy:
    """Test greedy conflict avoidance"""

    def test_no_conflicts(self):
        selection = global_model_tool.greedy_torsion_avoid(10, lambda i, j: False, 2)
        assert selection.indices == list(range(10))
        assert selection.size_bound == 3

    def test_chain_oracle(self):
        hits, pairs = global_model_tool.build_conflict_oracle(100, 2)
        selection = global_model_tool.greedy_torsion_avoid(100, hits, 2)
        assert len(selection.indices) >= 25
        kept = selection.indices
        assert not any((i, j) in pairs for i in kept for j in kept if i < j)
        assert sorted(kept + selection.discarded) == list(range(100))

    def test_random_oracles(self):
        rng = random.Random(6)
        for _ in range(50):
            hits, _ = global_model_tool.build_conflict_oracle(60, 3, rng)
            selection = global_model_tool.greedy_torsion_avoid(60, hits, 3)
            assert len(selection.indices) >= math.ceil(60 / 6)

    def test_oracle_violation(self):
        with pytest.raises(OracleViolationError):
            global_model_tool.greedy_torsion_avoid(10, lambda i, j: True, 2)

    def test_rejects_small_nu(self):
        with pytest.raises(PreconditionError):
            global_model_tool.greedy_torsion_avoid(10, lambda i, j: False, 1)

    def test_conflict_free_check_raises(self):
        calls = {"count": 0}

        def flaky(i, j):
            # silent during selection, conflicting during verification
            calls["count"] += 1
            return calls["count"] > 45 and (i, j) == (0, 1)

        with pytest.raises(TheoremCheckFailed):
            global_model_tool.greedy_torsion_avoid(10, flaky, 2)

