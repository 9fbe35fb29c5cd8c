"""
Local Height Tool - Bernoulli local heights at one bad place
Torus coordinates from integer lifts, the closed-form d-average, and the two local lower bounds
"""
import logging
from collections import defaultdict
from fractions import Fraction
from math import floor, gcd
from typing import Dict, List, Sequence, Tuple

import numpy as np

from backend.errors import PreconditionError
from backend.state import (
    AverageComparison,
    AverageMethod,
    BoundCheck,
    IntegerLift,
    LocalHeightValue,
    LocalPointSet,
    NormalizedTriple,
    PigeonholeResult,
    QuadTriple,
    TorusPoint,
)
from backend.tools.deterministic.bernoulli_tool import bernoulli_tool
from backend.tools.deterministic.periodic_form_tool import periodic_form_tool
from backend.tools.deterministic.quadform_tool import TripleLike, quadform_tool
from backend.utils.helpers import b2_numerator, frac, lift_coordinates, torus_mean
from backend.utils.run_logger import check_logger

logger = logging.getLogger(__name__)


def zero_mode(t: QuadTriple) -> Fraction:
    """L^(0, 0), the torus mean of L"""
    return torus_mean(t.a, t.b, t.c)


def residue_terms(t: QuadTriple) -> List[Tuple[int, int]]:
    """
    (C_k, g_k) for the three Bernoulli terms of the d-average:
    (alpha, gcd(c,b)) on b x + c y, (gamma, gcd(a,b)) on a x + b y, (b, gcd(alpha,gamma)) on alpha x - gamma y
    """
    return [
        (t.alpha, gcd(t.c, t.b)),
        (t.gamma, gcd(t.a, t.b)),
        (t.b, gcd(t.alpha, t.gamma)),
    ]


def linear_values(t: QuadTriple, x: Fraction, y: Fraction) -> Tuple[Fraction, Fraction, Fraction]:
    """(b x + c y, a x + b y, alpha x - gamma y); for a lift these are (v, u, u - v)"""
    return (
        t.b * x + t.c * y,
        t.a * x + t.b * y,
        t.alpha * x - t.gamma * y,
    )


class LocalHeightTool:
    """
    Bernoulli local height lambda^B = L/4 - L^(0,0)/4 at one place.

    The 2-torsion translate of the theta divisor is not applied; every
    average here runs over an even d, which absorbs it.
    """

    # ------------------------------------------------------------------
    # Coordinates
    # ------------------------------------------------------------------

    def lift_coordinates(self, t: TripleLike, lift: IntegerLift) -> Tuple[Fraction, Fraction]:
        """(x, y) = Q^{-1} (u, v) before reduction"""
        tr = quadform_tool.as_triple(t)
        return lift_coordinates(tr.a, tr.b, tr.c, lift.u, lift.v)

    def lift_to_torus(self, t: TripleLike, lift: IntegerLift) -> TorusPoint:
        """
        Torus point of an integer lift

        Args:
            t: Triple (normalization is not needed for the coordinates)
            lift: Integer coordinates (u, v)

        Returns:
            TorusPoint reduced to the centered square
        """
        x, y = self.lift_coordinates(t, lift)
        return TorusPoint(x=x, y=y)

    def lift_identities(self, t: TripleLike, lift: IntegerLift) -> Dict[str, bool]:
        """b x + c y = v, a x + b y = u and alpha x - gamma y = u - v before reduction"""
        tr = quadform_tool.as_triple(t)
        x, y = self.lift_coordinates(tr, lift)
        l1, l2, l3 = linear_values(tr, x, y)
        return {
            "bx+cy=v": l1 == lift.v,
            "ax+by=u": l2 == lift.u,
            "alpha*x-gamma*y=u-v": l3 == lift.u - lift.v,
        }

    # ------------------------------------------------------------------
    # Heights and d-averages
    # ------------------------------------------------------------------

    def bernoulli_local_height(self, t: TripleLike, p: TorusPoint) -> LocalHeightValue:
        """
        lambda^B(p) = L(p)/4 - L^(0,0)/4

        Args:
            t: Normalized triple
            p: Torus point

        Returns:
            LocalHeightValue with both parts exact
        """
        tr = quadform_tool.as_normalized(t)
        quarter_l = periodic_form_tool.eval_l(tr, p).value / 4
        normalization = zero_mode(tr) / 4
        return LocalHeightValue(quarter_l=quarter_l, normalization=normalization, height=quarter_l - normalization)

    def require_valid_d(self, t: TripleLike, d: int) -> int:
        """d must be a positive multiple of 2 Delta(a, b, c)"""
        tr = quadform_tool.as_triple(t)
        modulus = 2 * quadform_tool.delta(tr)
        if d < 1 or d % modulus:
            raise PreconditionError(f"d={d} is not a positive multiple of 2*Delta={modulus} for {tr.as_tuple()}")
        return d

    def bernoulli_combination(self, t: TripleLike, x: Fraction, y: Fraction, d: int) -> Fraction:
        """
        sum_k [C_k g_k^2 / (D d^2)] B2(d l_k(x, y) / g_k), exact

        This is Avg_d L - L^(0,0) at (x, y).
        """
        tr = quadform_tool.as_triple(t)
        total = Fraction(0)
        for (C, g), value in zip(residue_terms(tr), linear_values(tr, Fraction(x), Fraction(y))):
            if C == 0:
                continue
            total += Fraction(C * g * g, tr.D * d * d) * bernoulli_tool.b2(d * value / g)
        return total

    def avg_d_closed_form(self, t: TripleLike, p: TorusPoint, d: int) -> Fraction:
        """
        Closed form of (Avg_d L)(p): L^(0,0) plus three Bernoulli terms

        Args:
            t: Normalized triple
            p: Torus point
            d: Multiple of 2 Delta(a, b, c)

        Returns:
            Fraction (exact)

        Raises:
            PreconditionError: d violates the congruence
        """
        tr = quadform_tool.as_normalized(t)
        self.require_valid_d(tr, d)
        return zero_mode(tr) + self.bernoulli_combination(tr, p.x, p.y, d)

    def compare_avg_d(self, t: TripleLike, p: TorusPoint, d: int, strict: bool = True) -> AverageComparison:
        """Closed form against direct torsion enumeration; equality is exact"""
        closed = self.avg_d_closed_form(t, p, d)
        direct = periodic_form_tool.avg_d_direct(t, p, d)
        equal = closed == direct
        if strict:
            check_logger.ensure("avg_d_identity", equal, f"p=({p.x},{p.y}) d={d} closed={closed} direct={direct}")
        return AverageComparison(closed_form=closed, direct=direct, equal=equal)

    def torsion_normalization(self, t: TripleLike, ds: Sequence[int]) -> List[Tuple[int, Fraction, Fraction]]:
        """
        Mean of lambda^B over the d-torsion grid for each d, with mean * d^2

        Returns:
            List of (d, mean, mean * d^2)
        """
        tr = quadform_tool.as_normalized(t)
        origin = TorusPoint(x=0, y=0)
        rows = []
        for d in ds:
            mean = (periodic_form_tool.avg_d_direct(tr, origin, d) - zero_mode(tr)) / 4
            rows.append((d, mean, mean * d * d))
        return rows

    # ------------------------------------------------------------------
    # Pair averages over point sets
    # ------------------------------------------------------------------

    def pair_height_average(self, t: TripleLike, du: int, dv: int, d: int) -> Fraction:
        """
        Avg_d lambda^B at the difference of two lifted points, (du, dv) = lift(P) - lift(Q)

        Equals sum_k C_k (6 r_k^2 - 6 r_k g_k + g_k^2) / (24 D d^2) with r_k = d l_k mod g_k.
        """
        tr = quadform_tool.as_triple(t)
        total = 0
        for (C, g), ell in zip(residue_terms(tr), (dv, du, du - dv)):
            if C == 0:
                continue
            total += C * b2_numerator((d % g) * (ell % g) % g, g)
        return Fraction(total, 24 * tr.D * d * d)

    def pair_double_average(self, t: TripleLike, lifts: Sequence[IntegerLift], d: int) -> Fraction:
        """
        Average over ordered pairs of distinct indices of Avg_d lambda^B(P_i - P_j)

        Repeated torus points are allowed. Vectorized over the N x N residue matrices.
        """
        tr = quadform_tool.as_triple(t)
        N = len(lifts)
        if N < 2:
            raise PreconditionError(f"pair average needs N >= 2, got N={N}")
        u = np.array([p.u for p in lifts], dtype=np.int64)
        v = np.array([p.v for p in lifts], dtype=np.int64)
        total = 0
        for (C, g), ell in zip(residue_terms(tr), (v, u, u - v)):
            if C == 0:
                continue
            reduced = (ell % g) * (d % g) % g
            r = (reduced[:, None] - reduced[None, :]) % g
            numerators = 6 * r * r - 6 * r * g + g * g
            # diagonal entries are r = 0, contributing g^2 each
            off_diagonal = int(numerators.sum(dtype=np.int64)) - N * g * g
            total += C * off_diagonal
        return Fraction(total, 24 * tr.D * d * d * (N * N - N))

    def fourier_avg_lower_bound_rhs(self, t: TripleLike, N: int, d: int) -> Fraction:
        """(1 / 24 d^2) ((alpha + gamma + b)/D - xi/(N - 1))"""
        tr = quadform_tool.as_triple(t)
        return (Fraction(tr.alpha + tr.gamma + tr.b, tr.D) - quadform_tool.xi(tr) / (N - 1)) / (24 * d * d)

    def fourier_avg_lower_bound(
        self,
        S: LocalPointSet,
        d: int,
        method: AverageMethod = AverageMethod.DIRECT,
        strict: bool = True,
    ) -> BoundCheck:
        """
        Pair-and-torsion average of lambda^B against its Fourier lower bound

        Args:
            S: Distinct points at one place, N >= 2
            d: Multiple of 2 Delta
            method: DIRECT enumerates the d^2 torsion grid through L; CLOSED_FORM uses the Bernoulli terms
            strict: Raise TheoremCheckFailed if lhs < rhs

        Returns:
            BoundCheck(lhs, rhs, holds)
        """
        tr = quadform_tool.as_normalized(S.place)
        if S.N < 2:
            raise PreconditionError(f"lower bound needs N >= 2, got N={S.N}")
        self.require_valid_d(tr, d)

        if method == AverageMethod.CLOSED_FORM:
            lhs = self.pair_double_average(tr, S.points, d)
        else:
            points = S.derived
            offset = zero_mode(tr)
            total = Fraction(0)
            for i in range(S.N):
                for j in range(i + 1, S.N):
                    diff = points[i] - points[j]
                    total += (periodic_form_tool.avg_d_direct(tr, diff, d) - offset) / 4
            lhs = 2 * total / (S.N * S.N - S.N)

        rhs = self.fourier_avg_lower_bound_rhs(tr, S.N, d)
        holds = lhs >= rhs
        if strict:
            check_logger.ensure("fourier_avg_bound", holds, f"N={S.N} d={d} lhs={lhs} rhs={rhs}")
        return BoundCheck(lhs=lhs, rhs=rhs, holds=holds)

    def cube_cell(self, t: TripleLike, lift: IntegerLift, d: int) -> Tuple[int, int, int]:
        """Half-open cube [k/6, (k+1)/6)^3 containing the residues (d v/g1, d u/g2, d (u - v)/g3) mod 1"""
        tr = quadform_tool.as_triple(t)
        cell = []
        for (_, g), ell in zip(residue_terms(tr), (lift.v, lift.u, lift.u - lift.v)):
            cell.append(floor(6 * frac(Fraction(d * ell, g))))
        return tuple(cell)

    def largest_cell(
        self, t: TripleLike, lifts: Sequence[IntegerLift], d: int
    ) -> Tuple[Tuple[int, int, int], List[int]]:
        """
        Most populated cube cell and the indices of its lifts (multisets allowed)

        Ties go to the smallest cell key.
        """
        tr = quadform_tool.as_triple(t)
        cells: Dict[Tuple[int, int, int], List[int]] = defaultdict(list)
        for index, lift in enumerate(lifts):
            cells[self.cube_cell(tr, lift, d)].append(index)
        return max(sorted(cells.items()), key=lambda item: len(item[1]))

    def pigeonhole_subset(self, S: LocalPointSet, d: int, strict: bool = True) -> PigeonholeResult:
        """
        Largest cube cell of the 6^3 partition, with the pairwise bound xi / (144 d^2)

        Args:
            S: Distinct points at one place, N >= 1
            d: Multiple of 2 Delta
            strict: Raise TheoremCheckFailed if the size or pair bound fails

        Returns:
            PigeonholeResult with the subset, its cell, the bound and the smallest pair average
        """
        tr = quadform_tool.as_normalized(S.place)
        self.require_valid_d(tr, d)
        if S.N < 1:
            raise PreconditionError("pigeonhole subset needs at least one point")

        cell, indices = self.largest_cell(tr, S.points, d)
        members = [S.points[i] for i in indices]

        bound = quadform_tool.xi(tr) / (144 * d * d)
        min_pair = None
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                value = self.pair_height_average(
                    tr, members[i].u - members[j].u, members[i].v - members[j].v, d
                )
                if min_pair is None or value < min_pair:
                    min_pair = value

        size_ok = 216 * len(members) >= S.N
        pair_ok = min_pair is None or min_pair >= bound
        if strict:
            check_logger.ensure("pigeonhole_size", size_ok, f"subset={len(members)} N={S.N}")
            check_logger.ensure("pigeonhole_pair_bound", pair_ok, f"min_pair={min_pair} bound={bound}")
        return PigeonholeResult(
            subset=LocalPointSet(place=S.place, points=members),
            cell=cell,
            bound=bound,
            min_pair_average=min_pair,
            holds=size_ok and pair_ok,
        )

    def random_point_set(self, t: TripleLike, N: int, rng) -> LocalPointSet:
        """
        N distinct points from uniformly drawn lifts in [0, D)^2

        Args:
            t: Normalized triple (or NormalizedTriple)
            N: Number of points; must not exceed the torus group order D
            rng: random.Random-compatible generator
        """
        if isinstance(t, NormalizedTriple):
            place = t
        else:
            place = NormalizedTriple(triple=quadform_tool.as_normalized(t))
        tr = place.triple
        if N > tr.D:
            raise PreconditionError(f"only D={tr.D} distinct points exist, asked for {N}")
        seen, points = set(), []
        while len(points) < N:
            lift = IntegerLift(u=rng.randrange(tr.D), v=rng.randrange(tr.D))
            key = self.lift_to_torus(tr, lift)
            if key in seen:
                continue
            seen.add(key)
            points.append(lift)
        return LocalPointSet(place=place, points=points)


# Singleton instance
local_height_tool = LocalHeightTool()
