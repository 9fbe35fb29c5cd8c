"""
Quadrature Tool - independent numerical oracle for the Fourier coefficients
Midpoint rule on a 2^k x 2^k grid over the centered square
"""
import logging
import math
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from backend.config import settings
from backend.errors import PreconditionError
from backend.state import QuadratureResult
from backend.tools.deterministic.quadform_tool import TripleLike, quadform_tool

logger = logging.getLogger(__name__)

MIN_GRID_EXPONENT = 6


def _midpoints(k: int) -> np.ndarray:
    size = 1 << k
    return (np.arange(size, dtype=np.float64) + 0.5) / size - 0.5


@lru_cache(maxsize=4)
def _sample_grid(a: int, b: int, c: int, k: int, periodic: bool) -> np.ndarray:
    """L (periodic=True) or F (periodic=False) at the grid midpoints, indexed [i_x, i_y]"""
    x = _midpoints(k)
    X, Y = np.meshgrid(x, x, indexing="ij")
    if not periodic:
        return a * X * X + 2 * b * X * Y + c * Y * Y
    best = None
    for m in (-1.0, 0.0, 1.0):
        for n in (-1.0, 0.0, 1.0):
            SX, SY = X + m, Y + n
            value = a * SX * SX + 2 * b * SX * SY + c * SY * SY
            best = value if best is None else np.minimum(best, value)
    return best


class QuadratureTool:
    """Cosine-transform quadrature; the sine part vanishes since L(-p) = L(p)"""

    def __init__(self):
        self.grid_exponent = settings.grid_exponent

    def _check_exponent(self, k: int) -> None:
        if k < MIN_GRID_EXPONENT:
            raise PreconditionError(f"grid exponent must be >= {MIN_GRID_EXPONENT}, got {k}")

    def _integrate(self, grid: np.ndarray, k: int, m: int, n: int) -> float:
        x = _midpoints(k)
        cx, sx = np.cos(2.0 * np.pi * m * x), np.sin(2.0 * np.pi * m * x)
        cy, sy = np.cos(2.0 * np.pi * n * x), np.sin(2.0 * np.pi * n * x)
        total = math.fsum(cx * (grid @ cy)) - math.fsum(sx * (grid @ sy))
        return total / float(grid.size)

    def integral(self, t: TripleLike, m: int, n: int, grid_exponent: int, periodic: bool = True) -> float:
        self._check_exponent(grid_exponent)
        tr = quadform_tool.as_normalized(t) if periodic else quadform_tool.as_triple(t)
        grid = _sample_grid(tr.a, tr.b, tr.c, grid_exponent, periodic)
        return self._integrate(grid, grid_exponent, m, n)

    def quadrature_oracle(self, t: TripleLike, m: int, n: int, grid_exponent: int = None) -> QuadratureResult:
        """
        Midpoint approximation of the (m, n) coefficient of L

        Args:
            t: Normalized triple
            m, n: Index pair
            grid_exponent: k >= 6, grid of 2^k x 2^k cells (settings default)

        Returns:
            QuadratureResult with the grid-doubling error estimate |Q_k - Q_(k-1)| / 3
        """
        k = grid_exponent or self.grid_exponent
        fine = self.integral(t, m, n, k)
        coarse = self.integral(t, m, n, k - 1) if k - 1 >= MIN_GRID_EXPONENT else fine
        return QuadratureResult(m=m, n=n, value=fine, grid_exponent=k, error_estimate=abs(fine - coarse) / 3.0)

    def oracle_table(self, t: TripleLike, M: int, grid_exponent: int = None) -> Dict[Tuple[int, int], float]:
        """
        Oracle values for all |m|, |n| <= M from one grid

        Returns:
            {(m, n): value}
        """
        k = grid_exponent or self.grid_exponent
        self._check_exponent(k)
        tr = quadform_tool.as_normalized(t)
        grid = _sample_grid(tr.a, tr.b, tr.c, k, True)
        x = _midpoints(k)
        ks = np.arange(-M, M + 1)
        angles = 2.0 * np.pi * np.outer(x, ks)
        cos_y, sin_y = grid @ np.cos(angles), grid @ np.sin(angles)
        cos_x, sin_x = np.cos(angles), np.sin(angles)
        table = {}
        for i, m in enumerate(ks):
            for j, n in enumerate(ks):
                total = math.fsum(cos_x[:, i] * cos_y[:, j]) - math.fsum(sin_x[:, i] * sin_y[:, j])
                table[(int(m), int(n))] = total / float(grid.size)
        logger.debug("oracle table M=%d k=%d for %s", M, k, tr.as_tuple())
        return table

    def f_quadrature(self, t: TripleLike, m: int, n: int, grid_exponent: int = None) -> float:
        """Midpoint integral of F (not L) against the cosine; compare with square_integral"""
        return self.integral(t, m, n, grid_exponent or self.grid_exponent, periodic=False)


# Singleton instance
quadrature_tool = QuadratureTool()
