"""
Global Model Tool - synthetic function-field setting for the global Bernoulli height
Places, ramification profiles, the double average, the three per-place estimates,
the Holder-type inequality and greedy conflict avoidance
"""
import logging
import math
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from scipy.optimize import brentq

from backend.config import settings
from backend.errors import OracleViolationError, PreconditionError
from backend.state import (
    EstimateReport,
    ExtensionProfile,
    GlobalAverage,
    GlobalPointSet,
    GreedySelection,
    HolderReport,
    IntegerLift,
    LiftModel,
    NormalizedTriple,
    PlaceModel,
    ProfileKind,
)
from backend.tools.deterministic.local_height_tool import local_height_tool
from backend.tools.deterministic.quadform_tool import quadform_tool
from backend.utils.helpers import lcm_all
from backend.utils.run_logger import check_logger

logger = logging.getLogger(__name__)

ConflictOracle = Callable[[int, int], bool]


class GlobalModelTool:
    """
    Sums of per-place pair averages over the branches above each place.

    Branch w above v carries the scaled triple e_w * Q_v. With the shared lift
    model the branch lift of (u, v) is (e_w u, e_w v), which is the same torus point.
    """

    # ------------------------------------------------------------------
    # Places and profiles
    # ------------------------------------------------------------------

    def compute_d(self, places: Sequence[PlaceModel]) -> int:
        """
        d = 2 lcm(Delta_v)

        Raises:
            PreconditionError: empty place list
        """
        if not places:
            raise PreconditionError("at least one place is required")
        return 2 * lcm_all(quadform_tool.delta(p.triple) for p in places)

    def scaled_place(self, place: PlaceModel, e: int) -> NormalizedTriple:
        """(e a, e b, e c); D scales by e^2, xi by e, Delta is unchanged"""
        if e < 1:
            raise PreconditionError(f"ramification index must be positive, got {e}")
        return NormalizedTriple(triple=quadform_tool.scaled(place.triple, e), transform=place.triple.transform)

    def make_places(self, triples: Dict[str, Sequence[int]]) -> List[PlaceModel]:
        """Places from raw triples; non-normalized input is reduced first"""
        return [PlaceModel(id=place_id, triple=quadform_tool.normalize(t)) for place_id, t in triples.items()]

    def check_profile(self, places: Sequence[PlaceModel], profile: ExtensionProfile) -> None:
        missing = {p.id for p in places} - set(profile.per_place)
        if missing:
            raise PreconditionError(f"profile has no ramification indices for {sorted(missing)}")

    def random_profile(
        self,
        places: Sequence[PlaceModel],
        n: int,
        kind: ProfileKind,
        rng,
        fixed: Optional[Dict[str, List[int]]] = None,
        max_branches: int = 6,
    ) -> ExtensionProfile:
        """
        Ramification indices summing to n at every place

        Args:
            places: Places of the scenario
            n: Extension degree
            kind: fixed (use `fixed`), random-partition or single-branch
            rng: random.Random-compatible generator
            fixed: Indices per place for the fixed kind
            max_branches: Upper bound on branches for random partitions

        Returns:
            ExtensionProfile
        """
        if kind == ProfileKind.FIXED:
            if not fixed:
                raise PreconditionError("fixed profile needs indices for every place")
            return ExtensionProfile(n=n, per_place={p.id: list(fixed[p.id]) for p in places})
        per_place = {}
        for place in places:
            if kind == ProfileKind.SINGLE_BRANCH:
                per_place[place.id] = [n]
                continue
            parts = rng.randint(1, min(n, max_branches))
            cuts = sorted(rng.sample(range(1, n), parts - 1)) if parts > 1 else []
            bounds = [0] + cuts + [n]
            per_place[place.id] = [hi - lo for lo, hi in zip(bounds, bounds[1:])]
        return ExtensionProfile(n=n, per_place=per_place)

    def heaviest_branch(self, profile: ExtensionProfile, place_id: str) -> int:
        """Index w0 of the largest e_w above the place (first one on ties)"""
        indices = profile.per_place[place_id]
        return indices.index(max(indices))

    # ------------------------------------------------------------------
    # Points
    # ------------------------------------------------------------------

    def random_point_set(
        self,
        places: Sequence[PlaceModel],
        N: int,
        rng,
        profile: Optional[ExtensionProfile] = None,
        lift_model: LiftModel = LiftModel.SHARED,
    ) -> GlobalPointSet:
        """
        N lifts per place drawn uniformly from [0, D_v)^2 (repeats allowed)

        With the per-branch model every branch gets its own lifts from [0, e^2 D_v)^2.
        """
        lifts = {}
        for place in places:
            D = place.triple.triple.D
            lifts[place.id] = [IntegerLift(u=rng.randrange(D), v=rng.randrange(D)) for _ in range(N)]
        branch_lifts = None
        if lift_model == LiftModel.PER_BRANCH:
            if profile is None:
                raise PreconditionError("per-branch lifts need a profile")
            branch_lifts = {}
            for place in places:
                D = place.triple.triple.D
                branch_lifts[place.id] = [
                    [IntegerLift(u=rng.randrange(e * e * D), v=rng.randrange(e * e * D)) for _ in range(N)]
                    for e in profile.per_place[place.id]
                ]
        return GlobalPointSet(lifts=lifts, branch_lifts=branch_lifts)

    def branch_lifts(
        self, points: GlobalPointSet, place_id: str, branch: int, e: int
    ) -> List[IntegerLift]:
        """Lifts of every point at one branch (shared model: (e u, e v))"""
        if points.branch_lifts is not None:
            return points.branch_lifts[place_id][branch]
        return [IntegerLift(u=e * p.u, v=e * p.v) for p in points.lifts[place_id]]

    def restrict(self, points: GlobalPointSet, indices: Sequence[int]) -> GlobalPointSet:
        """Sub-multiset of the points with the given indices, at every place and branch"""
        lifts = {pid: [pts[i] for i in indices] for pid, pts in points.lifts.items()}
        branch_lifts = None
        if points.branch_lifts is not None:
            branch_lifts = {
                pid: [[pts[i] for i in indices] for pts in branches]
                for pid, branches in points.branch_lifts.items()
            }
        return GlobalPointSet(lifts=lifts, branch_lifts=branch_lifts)

    # ------------------------------------------------------------------
    # Double average and estimates
    # ------------------------------------------------------------------

    def global_double_average(
        self,
        places: Sequence[PlaceModel],
        profile: ExtensionProfile,
        points: GlobalPointSet,
        d: int,
    ) -> GlobalAverage:
        """
        (1/n) sum_v sum_{w | v} Avg_{i != j} Avg_d lambda^B_w(P_i - P_j), exact

        Args:
            places: Places
            profile: Ramification indices at every place
            points: Lifts aligned by index, N >= 2
            d: Multiple of 2 Delta_v for every place

        Returns:
            GlobalAverage with per-(place, branch) contributions already divided by n
        """
        self.check_profile(places, profile)
        if points.N < 2:
            raise PreconditionError(f"double average needs N >= 2, got N={points.N}")
        contributions: Dict[str, List[Fraction]] = {}
        total = Fraction(0)
        for place in places:
            local_height_tool.require_valid_d(place.triple, d)
            row = []
            for w, e in enumerate(profile.per_place[place.id]):
                scaled = self.scaled_place(place, e)
                lifts = self.branch_lifts(points, place.id, w, e)
                value = local_height_tool.pair_double_average(scaled, lifts, d) / profile.n
                row.append(value)
                total += value
            contributions[place.id] = row
        return GlobalAverage(total=total, contributions=contributions)

    def estimate_constants(
        self, places: Sequence[PlaceModel], v0: str, d: int
    ) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        """C1 = xi_0/(144 d^2), C2 = (alpha_0+gamma_0+b_0)/(24 d^2 D_0), C3 = xi_0/(24 d^2), C4 = sum_{v != v0} xi_v/(24 d^2)"""
        base = self._place(places, v0).triple.triple
        xi0 = quadform_tool.xi(base)
        C1 = xi0 / (144 * d * d)
        C2 = Fraction(base.alpha + base.gamma + base.b, 24 * d * d * base.D)
        C3 = xi0 / (24 * d * d)
        C4 = sum((quadform_tool.xi(p.triple) for p in places if p.id != v0), Fraction(0)) / (24 * d * d)
        return C1, C2, C3, C4

    def _place(self, places: Sequence[PlaceModel], place_id: str) -> PlaceModel:
        for place in places:
            if place.id == place_id:
                return place
        raise PreconditionError(f"unknown place {place_id!r}")

    def theorem_estimates(
        self,
        places: Sequence[PlaceModel],
        profile: ExtensionProfile,
        points: GlobalPointSet,
        d: int,
        v0: str,
        w0: Optional[int] = None,
        average: Optional[GlobalAverage] = None,
        strict: bool = True,
    ) -> EstimateReport:
        """
        est1 + est2 + est3 against the exact partial sums of the double average

        Args:
            places, profile, points, d: As for global_double_average
            v0: Designated place
            w0: Branch of maximal e_w above v0 (computed when omitted)
            average: Precomputed double average, reused when given
            strict: Raise TheoremCheckFailed when an estimate exceeds its partial sum
                (otherwise every outcome is only recorded in the check ledger)

        Returns:
            EstimateReport

        Raises:
            PreconditionError: invalid v0 / w0, or the v0 points do not share one cube cell at w0
        """
        base = self._place(places, v0)
        indices = profile.per_place.get(v0)
        if indices is None:
            raise PreconditionError(f"profile has no ramification indices for {v0!r}")
        if w0 is None:
            w0 = self.heaviest_branch(profile, v0)
        if not 0 <= w0 < len(indices) or indices[w0] != max(indices):
            raise PreconditionError(f"w0={w0} is not a branch of maximal ramification above {v0!r}")

        e0 = indices[w0]
        lifts0 = self.branch_lifts(points, v0, w0, e0)
        _, members = local_height_tool.largest_cell(self.scaled_place(base, e0), lifts0, d)
        if len(members) != points.N:
            raise PreconditionError(f"points at ({v0}, w0={w0}) are spread over several cube cells")

        if average is None:
            average = self.global_double_average(places, profile, points, d)
        n, N = profile.n, points.N
        C1, C2, C3, C4 = self.estimate_constants(places, v0, d)

        est1 = C1 * e0 / n
        est2 = C2 / n * sum((Fraction(1, e) for w, e in enumerate(indices) if w != w0), Fraction(0)) - C3 / (N - 1)
        est3 = -C4 / (N - 1)
        combined = est1 + est2 + est3

        at_v0 = average.contributions[v0]
        part1 = at_v0[w0]
        part2 = sum((value for w, value in enumerate(at_v0) if w != w0), Fraction(0))
        part3 = average.total - part1 - part2

        holder_floor = None
        if n * n * C1 >= C2:
            holder_floor = (float(C1 * C1 * C2) * n) ** (1.0 / 3.0) / n - float(C3 + C4) / (N - 1)

        checks = [
            ("estimate_1", est1 <= part1, f"est1={est1} part1={part1}"),
            ("estimate_2", est2 <= part2, f"est2={est2} part2={part2}"),
            ("estimate_3", est3 <= part3, f"est3={est3} part3={part3}"),
        ]
        if holder_floor is not None:
            slack = settings.float_slack * (1.0 + abs(holder_floor))
            checks.append(("combined_floor", float(combined) >= holder_floor - slack,
                           f"combined={float(combined)} floor={holder_floor}"))
        holds = True
        note = check_logger.ensure if strict else check_logger.record
        for name, passed, detail in checks:
            note(name, passed, detail)
            holds = holds and passed
        return EstimateReport(
            est1=est1, est2=est2, est3=est3, combined=combined,
            part1=part1, part2=part2, part3=part3,
            C1=C1, C2=C2, C3=C3, C4=C4,
            holder_floor=holder_floor, holds=holds,
        )

    # ------------------------------------------------------------------
    # Holder-type inequality
    # ------------------------------------------------------------------

    def holder_profile(self, w: float) -> float:
        """
        F(w) = inf_{u > 0} (1/u + u^2 - w u)

        The minimizer is the unique positive root of 2u^3 - w u^2 - 1 = 0.
        F is strictly decreasing with F(1) = 1.
        """
        hi = max(1.0, w) + 1.0
        u = brentq(lambda s: 2.0 * s ** 3 - w * s * s - 1.0, 0.0, hi, xtol=1e-14)
        return 1.0 / u + u * u - w * u

    def holder_bound(self, alpha: float, beta: float, e: Sequence[float], strict: bool = True) -> HolderReport:
        """
        alpha e_0 + beta sum_{i >= 1} 1/e_i against (alpha^2 beta n)^(1/3)

        Args:
            alpha, beta: Positive reals
            e: Positive reals with e[0] = max(e); n = sum(e)
            strict: Raise TheoremCheckFailed when the chain of bounds breaks

        Returns:
            HolderReport with lhs >= intermediate >= sharper >= rhs

        Raises:
            PreconditionError: non-positive inputs, e[0] not maximal, or n^2 < beta/alpha
        """
        if alpha <= 0 or beta <= 0 or not e or any(x <= 0 for x in e):
            raise PreconditionError("alpha, beta and every e_i must be positive")
        if e[0] < max(e):
            raise PreconditionError(f"e[0]={e[0]} is not the largest index")
        n = float(sum(e))
        if n * n < beta / alpha:
            raise PreconditionError(f"n^2={n * n} < beta/alpha={beta / alpha}")

        r = len(e) - 1
        lhs = alpha * e[0] + beta * math.fsum(1.0 / x for x in e[1:])
        rhs = (alpha * alpha * beta * n) ** (1.0 / 3.0)
        gamma = (beta / (alpha * n * n)) ** (1.0 / 3.0)
        sharper = rhs * self.holder_profile(gamma)
        intermediate = alpha * n / (r + 1) + beta * (r * r + r) / n

        slack = settings.holder_slack
        holds = (
            lhs >= intermediate * (1.0 - slack)
            and intermediate >= sharper * (1.0 - slack)
            and sharper >= rhs * (1.0 - slack)
        )
        if strict:
            check_logger.ensure("holder_bound", holds, f"lhs={lhs} mid={intermediate} sharper={sharper} rhs={rhs}")
        return HolderReport(lhs=lhs, rhs=rhs, sharper=sharper, intermediate=intermediate, holds=holds)

    # ------------------------------------------------------------------
    # Greedy conflict avoidance
    # ------------------------------------------------------------------

    def greedy_torsion_avoid(self, N: int, hits: ConflictOracle, nu: int, strict: bool = True) -> GreedySelection:
        """
        Keep the first remaining index, discard every later index it conflicts with, repeat

        Args:
            N: Number of indices 0..N-1
            hits: Predicate hits(i, j), consulted with i < j
            nu: Maximal number of later conflicts per anchor, nu >= 2
            strict: Raise TheoremCheckFailed if the result breaks the size bound or is not conflict-free

        Returns:
            GreedySelection; at least ceil(N / (2 nu)) indices survive

        Raises:
            OracleViolationError: an anchor conflicts with more than nu later indices
        """
        if nu < 2:
            raise PreconditionError(f"nu must be >= 2, got {nu}")
        remaining = list(range(N))
        kept: List[int] = []
        discarded: List[int] = []
        while remaining:
            anchor = remaining.pop(0)
            conflicts = [j for j in range(anchor + 1, N) if hits(anchor, j)]
            if len(conflicts) > nu:
                raise OracleViolationError(f"index {anchor} conflicts with {len(conflicts)} > nu={nu} later indices")
            kept.append(anchor)
            dropped = set(conflicts)
            discarded.extend(j for j in remaining if j in dropped)
            remaining = [j for j in remaining if j not in dropped]

        size_bound = -(-N // (2 * nu))
        conflict_free = not any(hits(i, j) for k, i in enumerate(kept) for j in kept[k + 1:])
        if strict:
            check_logger.ensure("greedy_size", len(kept) >= size_bound, f"kept={len(kept)} bound={size_bound}")
            check_logger.ensure("greedy_conflict_free", conflict_free, f"kept={kept}")
        return GreedySelection(indices=kept, discarded=sorted(discarded), size_bound=size_bound)

    def build_conflict_oracle(self, N: int, nu: int, rng=None) -> Tuple[ConflictOracle, Set[Tuple[int, int]]]:
        """
        Conflict predicate with at most nu later conflicts per anchor

        Without rng every anchor conflicts with exactly its next nu indices;
        with rng each anchor draws up to nu random later indices.

        Returns:
            (hits, pairs) with pairs the set of conflicting (i, j), i < j
        """
        pairs: Set[Tuple[int, int]] = set()
        for i in range(N):
            later = list(range(i + 1, N))
            if rng is None:
                chosen = later[:nu]
            else:
                chosen = rng.sample(later, min(len(later), rng.randint(0, nu)))
            pairs.update((i, j) for j in chosen)

        def hits(i: int, j: int) -> bool:
            return (min(i, j), max(i, j)) in pairs

        return hits, pairs


# Singleton instance
global_model_tool = GlobalModelTool()
