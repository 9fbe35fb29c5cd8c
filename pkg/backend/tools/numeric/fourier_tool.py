"""
Fourier Tool - closed-form Fourier coefficients of the periodic form L
Five-case formula, alternate generic forms, coefficient tables, partial sums and limit checks
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from backend.config import settings
from backend.errors import PreconditionError
from backend.state import CaseTag, FourierCoefficient, LimitReport, LimitStep, TorusPoint
from backend.tools.deterministic.quadform_tool import TripleLike, quadform_tool
from backend.utils.helpers import torus_mean

logger = logging.getLogger(__name__)

RationalTriple = Tuple[Fraction, Fraction, Fraction]

QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)


def sin_turns(r: Fraction) -> float:
    """
    sin(2 pi r) for rational r

    r is reduced exactly into [-1/4, 1/4] first, so multiples of 1/2 give exact zeros
    and arguments near them keep full relative precision.
    """
    r = Fraction(r) % 1
    if r >= HALF:
        r -= 1
    if r > QUARTER:
        r = HALF - r
    elif r < -QUARTER:
        r = -HALF - r
    if r == 0:
        return 0.0
    return math.sin(2.0 * math.pi * float(r))


@dataclass(frozen=True)
class _Forms:
    a: Fraction
    b: Fraction
    c: Fraction
    D: Fraction
    alpha: Fraction
    gamma: Fraction
    F0: Fraction
    F1: Fraction
    F2: Fraction
    F3: Fraction


def _forms(a, b, c, m: int, n: int) -> _Forms:
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    D = a * c - b * b
    if a <= 0 or D <= 0:
        raise PreconditionError(f"({a},{b},{c}) is not positive definite")
    alpha, gamma = a - b, c - b
    return _Forms(
        a=a, b=b, c=c, D=D, alpha=alpha, gamma=gamma,
        F0=c * alpha * m + a * gamma * n,
        F1=c * m - b * n,
        F2=a * n - b * m,
        F3=gamma * m + alpha * n,
    )


def _case(f: _Forms, m: int, n: int) -> CaseTag:
    if m == 0 and n == 0:
        return CaseTag.ZERO_INDEX
    if f.F1 == 0:
        return CaseTag.F1_ZERO
    if f.F2 == 0:
        return CaseTag.F2_ZERO
    if f.F3 == 0:
        return CaseTag.F3_ZERO
    return CaseTag.GENERIC


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


class FourierTool:
    """
    Closed-form coefficients L^(m, n) = prefactor * s / pi^pi_power.

    Case detection is exact arithmetic on F1, F2, F3; pi and sin only enter
    when the float value is formed.
    """

    def closed_form(self, a, b, c, m: int, n: int) -> FourierCoefficient:
        """
        Five-case coefficient for any positive-definite rational triple

        Args:
            a, b, c: Triple entries (int, Fraction or "p/q")
            m, n: Index pair

        Returns:
            FourierCoefficient (prefactor exact, value float)
        """
        f = _forms(a, b, c, m, n)
        case = _case(f, m, n)
        s = 1.0
        if case == CaseTag.ZERO_INDEX:
            prefactor = torus_mean(f.a, f.b, f.c)
            pi_power = 0
        elif case == CaseTag.F1_ZERO:
            prefactor = _sign(n) * f.alpha * f.c * f.c / (2 * f.D * n * n)
            pi_power = 2
        elif case == CaseTag.F2_ZERO:
            prefactor = _sign(m) * f.gamma * f.a * f.a / (2 * f.D * m * m)
            pi_power = 2
        elif case == CaseTag.F3_ZERO:
            prefactor = _sign(m + n + 1) * f.alpha * f.gamma * f.b / (2 * f.D * m * n)
            pi_power = 2
        else:
            prefactor = f.D * f.D / (2 * f.F1 * f.F2 * f.F3)
            pi_power = 3
            s = sin_turns(f.F0 / (2 * f.D))
        value = float(prefactor) * s / math.pi ** pi_power
        return FourierCoefficient(m=m, n=n, value=value, case_tag=case, prefactor=prefactor, pi_power=pi_power)

    def coefficient(self, t: TripleLike, m: int, n: int) -> FourierCoefficient:
        """
        L^(m, n) for a normalized integer triple

        Raises:
            NotNormalizedError: triple is not normalized
        """
        tr = quadform_tool.as_normalized(t)
        return self.closed_form(tr.a, tr.b, tr.c, m, n)

    def coefficient_alternate(self, t: TripleLike, m: int, n: int, variant: int) -> float:
        """
        Generic coefficient through one of the three shifted sine arguments

        Args:
            t: Normalized triple
            m, n: Index pair with F1 F2 F3 != 0
            variant: 1 (alpha F1 / 2D), 2 (gamma F2 / 2D) or 3 (b F3 / 2D)

        Returns:
            float equal to coefficient(t, m, n).value up to rounding

        Raises:
            PreconditionError: degenerate index or unknown variant
        """
        tr = quadform_tool.as_normalized(t)
        f = _forms(tr.a, tr.b, tr.c, m, n)
        if _case(f, m, n) != CaseTag.GENERIC:
            raise PreconditionError(f"alternate forms need a generic index, ({m},{n}) is {_case(f, m, n).value}")
        if variant == 1:
            s = _sign(n) * sin_turns(f.alpha * f.F1 / (2 * f.D))
        elif variant == 2:
            s = _sign(m) * sin_turns(f.gamma * f.F2 / (2 * f.D))
        elif variant == 3:
            s = _sign(m + n + 1) * sin_turns(f.b * f.F3 / (2 * f.D))
        else:
            raise PreconditionError(f"variant must be 1, 2 or 3, got {variant}")
        return float(f.D * f.D / (2 * f.F1 * f.F2 * f.F3)) * s / math.pi ** 3

    def square_integral(self, t: TripleLike, m: int, n: int) -> float:
        """
        Integral of F(x, y) cos(2 pi (m x + n y)) over the centered square

        For m n != 0 only the cross term survives: (-1)^(m+n+1) b / (2 pi^2 m n).
        """
        tr = quadform_tool.as_triple(t)
        if m == 0 and n == 0:
            return (tr.a + tr.c) / 12.0
        if n == 0:
            return _sign(m) * tr.a / (2.0 * math.pi ** 2 * m * m)
        if m == 0:
            return _sign(n) * tr.c / (2.0 * math.pi ** 2 * n * n)
        return _sign(m + n + 1) * tr.b / (2.0 * math.pi ** 2 * m * n)

    # ------------------------------------------------------------------
    # Tables and partial sums
    # ------------------------------------------------------------------

    def coefficient_table(self, t: TripleLike, M: int) -> np.ndarray:
        """
        All coefficients with |m|, |n| <= M as a (2M+1) x (2M+1) float array indexed [m + M, n + M]

        Case masks are computed on integer arrays; generic sines use F0 mod 2D exactly.
        """
        if M < 0:
            raise PreconditionError(f"M must be >= 0, got {M}")
        tr = quadform_tool.as_normalized(t)
        a, b, c, D, alpha, gamma = tr.a, tr.b, tr.c, tr.D, tr.alpha, tr.gamma
        ks = np.arange(-M, M + 1, dtype=np.int64)
        m, n = np.meshgrid(ks, ks, indexing="ij")
        F0 = c * alpha * m + a * gamma * n
        F1 = c * m - b * n
        F2 = a * n - b * m
        F3 = gamma * m + alpha * n

        sign_m = np.where(m % 2 == 0, 1.0, -1.0)
        sign_n = np.where(n % 2 == 0, 1.0, -1.0)
        table = np.zeros(m.shape, dtype=np.float64)
        pi2 = 2.0 * math.pi ** 2

        zero = (m == 0) & (n == 0)
        f1 = (F1 == 0) & ~zero
        f2 = (F2 == 0) & ~zero
        f3 = (F3 == 0) & ~zero
        generic = ~(zero | f1 | f2 | f3)

        with np.errstate(divide="ignore", invalid="ignore"):
            table = np.where(f1, sign_n * alpha * c * c / (pi2 * D * n * n), table)
            table = np.where(f2, sign_m * gamma * a * a / (pi2 * D * m * m), table)
            table = np.where(f3, -sign_m * sign_n * alpha * gamma * b / (pi2 * D * m * n), table)
            # F0 / 2D mod 1 taken on integers; multiples of D give exact zeros
            residue = np.mod(F0, 2 * D)
            sines = np.where(residue % D == 0, 0.0, np.sin(np.pi * residue / D))
            product = F1.astype(np.float64) * F2 * F3
            table = np.where(generic, float(D * D) * sines / (2.0 * math.pi ** 3 * product), table)
        table[M, M] = float(torus_mean(a, b, c))
        return table

    def _phases(self, x: Fraction, M: int) -> Tuple[np.ndarray, np.ndarray]:
        angles = np.array([2.0 * math.pi * float((k * x) % 1) for k in range(-M, M + 1)])
        return np.cos(angles), np.sin(angles)

    def partial_sum(self, t: TripleLike, p: TorusPoint, M: Optional[int] = None) -> float:
        """
        Real part of sum_{|m|,|n| <= M} L^(m, n) e(m x + n y)

        Args:
            t: Normalized triple
            p: Torus point
            M: Truncation, M >= 1 (settings.partial_sum_terms when omitted)

        Returns:
            float, converging to L(p) as M grows
        """
        M = settings.partial_sum_terms if M is None else M
        if M < 1:
            raise PreconditionError(f"M must be >= 1, got {M}")
        table = self.coefficient_table(t, M)
        cx, sx = self._phases(p.x, M)
        cy, sy = self._phases(p.y, M)
        return math.fsum(cx * (table @ cy)) - math.fsum(sx * (table @ sy))

    # ------------------------------------------------------------------
    # Limits of the generic formula
    # ------------------------------------------------------------------

    def approach_sequence(
        self, limit: Sequence, direction: Sequence[int], steps: int = 6
    ) -> List[RationalTriple]:
        """limit + 10^-k * direction for k = 1..steps, as exact rational triples"""
        base = [Fraction(v) for v in limit]
        return [
            tuple(v + Fraction(1, 10 ** k) * dv for v, dv in zip(base, direction))
            for k in range(1, steps + 1)
        ]

    def limit_consistency(
        self, sequence: Sequence[Sequence], m: int, n: int, limit: Sequence
    ) -> LimitReport:
        """
        Generic-case values along a sequence of triples against the degenerate formula at the limit

        Args:
            sequence: Rational triples, each generic at (m, n), approaching the limit
            m, n: Index pair
            limit: Triple at which exactly one of F1, F2, F3 vanishes

        Returns:
            LimitReport; converged when errors never increase and the last error is
            within 100 (1 + |target|) times the last parameter gap

        Raises:
            PreconditionError: the limit triple is not degenerate at (m, n), or a member is not generic
        """
        target = self.closed_form(*limit, m, n)
        if target.case_tag in (CaseTag.GENERIC, CaseTag.ZERO_INDEX):
            raise PreconditionError(f"limit triple {tuple(limit)} does not drive any F_i({m},{n}) to zero")

        base = [Fraction(v) for v in limit]
        steps: List[LimitStep] = []
        for triple in sequence:
            value = self.closed_form(*triple, m, n)
            if value.case_tag != CaseTag.GENERIC:
                raise PreconditionError(f"sequence member {tuple(triple)} is not generic at ({m},{n})")
            gap = max(abs(Fraction(v) - w) for v, w in zip(triple, base))
            steps.append(LimitStep(gap=gap, generic_value=value.value, error=abs(value.value - target.value)))

        converged = bool(steps) and all(
            later.error <= earlier.error + 1e-15 for earlier, later in zip(steps, steps[1:])
        )
        if converged:
            last = steps[-1]
            converged = last.error <= 100.0 * (1.0 + abs(target.value)) * float(last.gap)
        logger.debug("limit (%d,%d) -> %s: %d steps, converged=%s", m, n, target.case_tag.value, len(steps), converged)
        return LimitReport(
            m=m, n=n, case_tag=target.case_tag, limit_value=target.value, steps=steps, converged=converged
        )


# Singleton instance
fourier_tool = FourierTool()
