"""
Theta Tool - tropical model of the theta function's valuation
trop(Q, w) = min over m in Z^g of m^T Q m + m^T w, and the transformation identities it satisfies
"""
import itertools
import logging
import math
from fractions import Fraction
from typing import List, Sequence, Tuple

from backend.state import (
    LambdaInvarianceCheck,
    ThetaTransformCheck,
    TropicalThetaResult,
    ValuationMatrix,
    ValuationVector,
)
from backend.utils.helpers import dot, fraction_inverse, mat_vec, quad_value
from backend.utils.run_logger import check_logger

logger = logging.getLogger(__name__)


def _ceil_sqrt(value: Fraction) -> int:
    """Smallest integer R >= 0 with R^2 >= value"""
    if value <= 0:
        return 0
    bound = math.ceil(value)
    root = math.isqrt(bound)
    return root if root * root >= bound else root + 1


class ThetaTool:
    """
    Exact tropical theta values.

    The objective equals (m - m*)^T Q (m - m*) + const with m* = -Q^{-1} w / 2.
    If the rounded incumbent sits at distance `gap` in that norm, every better m
    has |m_i - m*_i|^2 <= gap * (Q^{-1})_ii, so that box is exhaustive.
    """

    def _objective(self, Q: Sequence[Sequence[Fraction]], w: Sequence[Fraction], m: Sequence[int]) -> Fraction:
        return quad_value(Q, m) + dot(m, w)

    def tropical_theta(self, Q: ValuationMatrix, w: ValuationVector, widen: int = 0) -> TropicalThetaResult:
        """
        trop(Q, w) = min_m m^T Q m + m^T w

        Args:
            Q: Positive-definite valuation matrix
            w: Valuation vector (length g)
            widen: Extra radius added to the provable window (used to test window sufficiency)

        Returns:
            TropicalThetaResult with the value, every minimizing m and the radius used
        """
        g = Q.g
        if len(w.w) != g:
            raise ValueError(f"w has length {len(w.w)}, expected {g}")
        inverse = fraction_inverse(Q.Q)
        center = [-x / 2 for x in mat_vec(inverse, w.w)]
        incumbent = [round(x) for x in center]
        shift = [Fraction(m) - c for m, c in zip(incumbent, center)]
        gap = quad_value(Q.Q, shift)
        radii = [_ceil_sqrt(gap * inverse[i][i]) + widen for i in range(g)]
        radius = max(radii)

        ranges = [range(math.ceil(c - r), math.floor(c + r) + 1) for c, r in zip(center, radii)]
        best = None
        argmins: List[Tuple[int, ...]] = []
        for m in itertools.product(*ranges):
            value = self._objective(Q.Q, w.w, m)
            if best is None or value < best:
                best, argmins = value, [m]
            elif value == best:
                argmins.append(m)
        logger.debug("tropical theta g=%d radius=%d value=%s ties=%d", g, radius, best, len(argmins))
        return TropicalThetaResult(value=best, argmins=sorted(argmins), window_radius=radius)

    def _translate(self, Q: ValuationMatrix, w: ValuationVector, n: Sequence[int]) -> ValuationVector:
        two_qn = [2 * x for x in mat_vec(Q.Q, [Fraction(k) for k in n])]
        return ValuationVector(w=[a + b for a, b in zip(w.w, two_qn)])

    def check_theta_transform(
        self, Q: ValuationMatrix, w: ValuationVector, n: Sequence[int], strict: bool = True
    ) -> ThetaTransformCheck:
        """
        trop(Q, w + 2 Q n) against trop(Q, w) - n^T Q n - n^T w (exact)

        Args:
            Q: Valuation matrix
            w: Valuation vector
            n: Integer translation vector
            strict: Raise TheoremCheckFailed on mismatch
        """
        n_frac = [Fraction(k) for k in n]
        lhs = self.tropical_theta(Q, self._translate(Q, w, n)).value
        rhs = self.tropical_theta(Q, w).value - quad_value(Q.Q, n_frac) - dot(n_frac, w.w)
        equal = lhs == rhs
        if strict:
            check_logger.ensure("theta_transform", equal, f"n={list(n)} lhs={lhs} rhs={rhs}")
        return ThetaTransformCheck(lhs=lhs, rhs=rhs, equal=equal)

    def lambda_value(self, Q: ValuationMatrix, w: ValuationVector) -> Fraction:
        """trop(Q, w) + w^T Q^{-1} w / 4"""
        inverse = fraction_inverse(Q.Q)
        return self.tropical_theta(Q, w).value + quad_value(inverse, w.w) / 4

    def check_lambda_invariance(
        self, Q: ValuationMatrix, w: ValuationVector, n: Sequence[int], strict: bool = True
    ) -> LambdaInvarianceCheck:
        """Lambda(w + 2 Q n) - Lambda(w), which must be exactly zero"""
        delta = self.lambda_value(Q, self._translate(Q, w, n)) - self.lambda_value(Q, w)
        zero = delta == 0
        if strict:
            check_logger.ensure("lambda_invariance", zero, f"n={list(n)} delta={delta}")
        return LambdaInvarianceCheck(delta=delta, zero=zero)

    def from_triple(self, a: int, b: int, c: int) -> ValuationMatrix:
        return ValuationMatrix(Q=[[a, b], [b, c]])

    def random_matrix(self, rng, g: int = 2, bound: int = 20) -> ValuationMatrix:
        """
        Random positive-definite rational matrix A^T A + I with small rational entries

        Args:
            rng: random.Random-compatible generator
            g: Dimension
            bound: Numerator bound of the entries of A
        """
        A = [
            [Fraction(rng.randint(-bound, bound), rng.randint(1, 4)) for _ in range(g)]
            for _ in range(g)
        ]
        Q = [
            [sum((A[k][i] * A[k][j] for k in range(g)), Fraction(0)) + (1 if i == j else 0) for j in range(g)]
            for i in range(g)
        ]
        return ValuationMatrix(Q=Q)


# Singleton instance
theta_tool = ThetaTool()
