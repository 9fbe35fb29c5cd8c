"""
Bernoulli Tool - the periodic second Bernoulli polynomial B2
Exact values, Fourier partial sums, the distribution relation and the Fejer-type pair bound
"""
import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from backend.errors import PreconditionError
from backend.state import BoundCheck, DistributionCheck, RationalGridSet
from backend.utils.helpers import frac
from backend.utils.run_logger import check_logger

SIXTH = Fraction(1, 6)


class BernoulliTool:
    """B2(x) = {x}^2 - {x} + 1/6 and the averages built from it"""

    def b2(self, x: Fraction) -> Fraction:
        f = frac(Fraction(x))
        return f * f - f + SIXTH

    def b2_fourier_partial(self, x: Fraction, K: int) -> float:
        """
        (1 / 2 pi^2) sum_{0 < |k| <= K} e(k x) / k^2

        Args:
            x: Point (reduced mod 1 exactly before going to floats)
            K: Truncation, K >= 1

        Returns:
            float
        """
        if K < 1:
            raise PreconditionError(f"K must be >= 1, got {K}")
        k = np.arange(1, K + 1, dtype=np.float64)
        terms = np.cos(2.0 * np.pi * k * float(frac(Fraction(x)))) / (k * k)
        return math.fsum(terms) / (np.pi ** 2)

    def b2_distribution(self, x: Fraction, N: int) -> DistributionCheck:
        """
        (1/N) sum_{j < N} B2(x + j/N) against B2(N x) / N^2

        Args:
            x: Rational point
            N: N >= 1

        Returns:
            DistributionCheck with exact lhs and rhs
        """
        if N < 1:
            raise PreconditionError(f"N must be >= 1, got {N}")
        x = Fraction(x)
        lhs = sum((self.b2(x + Fraction(j, N)) for j in range(N)), Fraction(0)) / N
        rhs = self.b2(N * x) / (N * N)
        return DistributionCheck(lhs=lhs, rhs=rhs, equal=lhs == rhs)

    def pair_average(self, values: Sequence[Fraction]) -> Fraction:
        """
        (1 / (N^2 - N)) sum over ordered pairs of distinct indices of B2(s - t)

        Repeated values are allowed (multisets).
        """
        N = len(values)
        if N < 2:
            raise PreconditionError(f"need at least 2 values, got {N}")
        total = Fraction(0)
        for i in range(N):
            for j in range(i + 1, N):
                total += self.b2(values[i] - values[j])
        # B2 is even, so each unordered pair counts twice
        return 2 * total / (N * N - N)

    def fejer_lower_bound(self, T: RationalGridSet, strict: bool = True) -> BoundCheck:
        """
        Pair average of B2 over T against 1/(6 R^2) - 1/(6 (N - 1))

        Args:
            T: Distinct rationals with denominators dividing R, N >= 2
            strict: Raise TheoremCheckFailed when the bound fails

        Returns:
            BoundCheck(lhs=average, rhs=bound, holds)
        """
        if T.N < 2:
            raise PreconditionError(f"Fejer bound needs N >= 2, got N={T.N}")
        average = self.pair_average(T.elements)
        bound = Fraction(1, 6 * T.R * T.R) - Fraction(1, 6 * (T.N - 1))
        holds = average >= bound
        if strict:
            check_logger.ensure("fejer_bound", holds, f"R={T.R} N={T.N} average={average} bound={bound}")
        return BoundCheck(lhs=average, rhs=bound, holds=holds)

    def character_sum_average(self, T: Sequence[Fraction], K: int) -> float:
        """
        Fourier side of the pair average:
        (1 / (2 pi^2 (N^2 - N))) sum_{0 < |k| <= K} (|sum_t e(k t)|^2 - N) / k^2
        """
        N = len(T)
        if N < 2:
            raise PreconditionError(f"need at least 2 elements, got {N}")
        k = np.arange(1, K + 1, dtype=np.float64)
        t = np.array([float(frac(Fraction(v))) for v in T])
        phases = 2.0 * np.pi * np.outer(k, t)
        power = np.cos(phases).sum(axis=1) ** 2 + np.sin(phases).sum(axis=1) ** 2
        total = 2.0 * math.fsum((power - N) / (k * k))
        return total / (2.0 * np.pi ** 2 * (N * N - N))

    def random_grid_set(self, rng, max_R: int) -> RationalGridSet:
        """Random RationalGridSet with R <= max_R and 2 <= N <= R"""
        R = rng.randint(2, max_R)
        N = rng.randint(2, R)
        residues = rng.sample(range(R), N)
        return RationalGridSet(R=R, elements=[Fraction(r, R) for r in residues])


# Singleton instance
bernoulli_tool = BernoulliTool()
