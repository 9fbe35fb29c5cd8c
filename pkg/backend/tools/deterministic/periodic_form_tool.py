"""
Periodic Form Tool - the Z^2-periodic quadratic form L(x, y)
L = min over integer translates of F(x, y) = a x^2 + 2 b x y + c y^2
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from backend.config import REGION_BY_OFFSET, RELEVANT_VECTORS, settings
from backend.errors import PreconditionError
from backend.state import HexagonGeometry, MinimizerResult, Region, TorusPoint
from backend.tools.deterministic.quadform_tool import TripleLike, quadform_tool
from backend.utils.helpers import HALF, centered, lcm_all

logger = logging.getLogger(__name__)

Point = Tuple[Fraction, Fraction]

# Integer-grid sums stay in int64 below this bound, object (Python int) arrays above it
_INT64_LIMIT = 1 << 62


def _f(a, b, c, x, y):
    return a * x * x + 2 * b * x * y + c * y * y


class PeriodicFormTool:
    """
    Exact evaluation of L on rational points.

    For a normalized triple the minimum over all translates is attained at one of
    the 9 offsets {-1, 0, 1}^2 applied to the centered representative.
    """

    def __init__(self):
        self.window = settings.offset_window
        self.oracle_window = settings.oracle_window

    def eval_f(self, t: TripleLike, x: Fraction, y: Fraction) -> Fraction:
        """F(x, y) = a x^2 + 2 b x y + c y^2, exact"""
        tr = quadform_tool.as_triple(t)
        return _f(tr.a, tr.b, tr.c, Fraction(x), Fraction(y))

    def _minimize(self, a, b, c, x: Fraction, y: Fraction, radius: int) -> MinimizerResult:
        best: Optional[Fraction] = None
        minimizers: List[Tuple[int, int]] = []
        span = range(-radius, radius + 1)
        for m in span:
            for n in span:
                value = _f(a, b, c, x + m, y + n)
                if best is None or value < best:
                    best, minimizers = value, [(m, n)]
                elif value == best:
                    minimizers.append((m, n))
        return MinimizerResult(value=best, minimizers=minimizers, region=self._region(minimizers))

    @staticmethod
    def _region(minimizers: List[Tuple[int, int]]) -> Region:
        if len(minimizers) > 1:
            return Region.BOUNDARY
        offset = minimizers[0]
        if offset not in REGION_BY_OFFSET:
            # Outside the region table: only possible for non-normalized input
            return Region.BOUNDARY
        return Region(REGION_BY_OFFSET[offset])

    def eval_l(self, t: TripleLike, p: TorusPoint) -> MinimizerResult:
        """
        L at a torus point via the 9-offset window

        Args:
            t: Normalized triple
            p: Torus point (already centered)

        Returns:
            MinimizerResult with value, all minimizing offsets and the region tag

        Raises:
            NotNormalizedError: triple is not normalized
        """
        tr = quadform_tool.as_normalized(t)
        return self._minimize(tr.a, tr.b, tr.c, p.x, p.y, self.window)

    def brute_force_l(self, t: TripleLike, p: TorusPoint, radius: Optional[int] = None) -> MinimizerResult:
        """Exhaustive minimum over offsets in [-radius, radius]^2; any positive-definite triple"""
        tr = quadform_tool.as_triple(t)
        return self._minimize(tr.a, tr.b, tr.c, p.x, p.y, radius or self.oracle_window)

    def l_value(self, t: TripleLike, x: Fraction, y: Fraction) -> Fraction:
        """L(x, y) for arbitrary rational (x, y) without building result models"""
        tr = quadform_tool.as_normalized(t)
        x, y = centered(Fraction(x)), centered(Fraction(y))
        a, b, c = tr.a, tr.b, tr.c
        return min(_f(a, b, c, x + m, y + n) for m in (-1, 0, 1) for n in (-1, 0, 1))

    # ------------------------------------------------------------------
    # Hexagon geometry
    # ------------------------------------------------------------------

    def _bisector_vertex(self, a, b, c, k1, k2) -> Point:
        """Solve 2 B(p, k) = F(k) for two lattice vectors k (B the bilinear form)"""
        rows = []
        for (k, l) in (k1, k2):
            # 2 B(p, k) = 2 (a k + b l) x + 2 (b k + c l) y
            rows.append((2 * (a * k + b * l), 2 * (b * k + c * l), _f(a, b, c, k, l)))
        (p11, p12, r1), (p21, p22, r2) = rows
        det = p11 * p22 - p12 * p21
        return Fraction(r1 * p22 - p12 * r2, det), Fraction(p11 * r2 - r1 * p21, det)

    def hexagon_vertices(self, t: TripleLike) -> HexagonGeometry:
        """
        Hexagon where F = L, and the decomposition of the centered square

        Args:
            t: Normalized triple

        Returns:
            HexagonGeometry; for b = 0 the cell is the square and only its corners are returned
        """
        tr = quadform_tool.as_normalized(t)
        a, b, c, D = tr.a, tr.b, tr.c, tr.D

        if b == 0:
            corners = {
                "C++": (HALF, HALF), "C-+": (-HALF, HALF),
                "C--": (-HALF, -HALF), "C+-": (HALF, -HALF),
            }
            square = [corners["C++"], corners["C-+"], corners["C--"], corners["C+-"]]
            return HexagonGeometry(degenerate=True, vertices=corners, polygons={"octagon": square})

        q12 = (Fraction(c * tr.alpha, 2 * D), Fraction(a * tr.gamma, 2 * D))
        # the region F = L is centrally symmetric, so Q34 = -Q12
        q34 = (-q12[0], -q12[1])
        vertices: Dict[str, Point] = {
            "Q12": q12,
            "Q34": q34,
            "E+x": (HALF, Fraction(0)),
            "E+y": (Fraction(0), HALF),
            "E-x": (-HALF, Fraction(0)),
            "E-y": (Fraction(0), -HALF),
        }
        cell = [
            self._bisector_vertex(a, b, c, RELEVANT_VECTORS[i], RELEVANT_VECTORS[(i + 1) % 6])
            for i in range(6)
        ]
        ppx, ppy = (HALF, HALF), (-HALF, -HALF)
        polygons = {
            "octagon": [
                vertices["E+x"], q12, vertices["E+y"], (-HALF, HALF),
                vertices["E-x"], q34, vertices["E-y"], (HALF, -HALF),
            ],
            "I": [q12, ppx, vertices["E+y"]],
            "II": [vertices["E+x"], ppx, q12],
            "III": [vertices["E-y"], ppy, q34],
            "IV": [q34, ppy, vertices["E-x"]],
        }
        return HexagonGeometry(degenerate=False, vertices=vertices, cell_vertices=cell, polygons=polygons)

    def bisector_equalities(self, t: TripleLike, point: Point) -> int:
        """How many of F(p) = F(p + k), k in {+-(1,0), +-(0,1), +-(1,-1)}, hold at point"""
        tr = quadform_tool.as_triple(t)
        x, y = point
        here = _f(tr.a, tr.b, tr.c, x, y)
        return sum(
            1 for (k, l) in RELEVANT_VECTORS
            if _f(tr.a, tr.b, tr.c, x + k, y + l) == here
        )

    # ------------------------------------------------------------------
    # d-torsion averaging
    # ------------------------------------------------------------------

    def torsion_sum(self, t: TripleLike, x: Fraction, y: Fraction, d: int) -> Tuple[int, int]:
        """
        Sum of L over the d^2 translates (x + i/d, y + j/d), as (numerator, denominator)

        Works on the integer grid X / Q with Q = lcm(den x, den y) * d so the result is exact.
        """
        tr = quadform_tool.as_normalized(t)
        x, y = Fraction(x), Fraction(y)
        base = lcm_all([x.denominator, y.denominator])
        Q = base * d
        worst = (tr.a + 2 * abs(tr.b) + tr.c) * (2 * Q) ** 2 * d * d
        dtype = np.int64 if worst < _INT64_LIMIT else object

        steps = np.arange(d, dtype=dtype) * base
        X = (x * Q).numerator + steps  # x*Q is an integer
        Y = (y * Q).numerator + steps
        # Center each coordinate into [-Q/2, Q/2)
        X = X - Q * ((2 * X + Q) // (2 * Q))
        Y = Y - Q * ((2 * Y + Q) // (2 * Q))
        GX, GY = np.meshgrid(X, Y, indexing="ij")

        best = None
        for m in (-1, 0, 1):
            for n in (-1, 0, 1):
                SX, SY = GX + m * Q, GY + n * Q
                value = tr.a * SX * SX + 2 * tr.b * SX * SY + tr.c * SY * SY
                best = value if best is None else np.minimum(best, value)
        total = int(sum(int(v) for v in best.ravel())) if dtype is object else int(best.sum(dtype=np.int64))
        return total, Q * Q * d * d

    def avg_d_direct(self, t: TripleLike, p: TorusPoint, d: int) -> Fraction:
        """
        (1/d^2) sum_{i,j < d} L(x + i/d, y + j/d), exact

        Args:
            t: Normalized triple
            p: Torus point
            d: Torsion order, d >= 1

        Returns:
            Fraction
        """
        if d < 1:
            raise PreconditionError(f"d must be >= 1, got {d}")
        numerator, denominator = self.torsion_sum(t, p.x, p.y, d)
        return Fraction(numerator, denominator)


# Singleton instance
periodic_form_tool = PeriodicFormTool()
