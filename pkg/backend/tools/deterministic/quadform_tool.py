"""
Quadform Tool - integer binary quadratic forms
Invariants, the linear forms F0..F3, Gauss normalization and the xi / Delta functions
"""
import itertools
import logging
from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple, Union

from pydantic import ValidationError

from backend.errors import InvalidTripleError, NotNormalizedError
from backend.state import LinearFormValues, NormalizedTriple, QuadTriple, TripleInvariants

logger = logging.getLogger(__name__)

TripleLike = Union[QuadTriple, NormalizedTriple, Sequence[int]]
Matrix2 = Tuple[Tuple[int, int], Tuple[int, int]]

IDENTITY: Matrix2 = ((1, 0), (0, 1))


def _matmul(left: Matrix2, right: Matrix2) -> Matrix2:
    (p, q), (r, s) = left
    (e, f), (g, h) = right
    return ((p * e + q * g, p * f + q * h), (r * e + s * g, r * f + s * h))


class QuadformTool:
    """
    Arithmetic of positive-definite integer triples (a, b, c).

    All results are exact integers or Fractions.
    """

    def as_triple(self, t: TripleLike) -> QuadTriple:
        """
        Coerce a triple-like value to a validated QuadTriple

        Args:
            t: QuadTriple, NormalizedTriple or an (a, b, c) sequence

        Returns:
            QuadTriple

        Raises:
            InvalidTripleError: D <= 0, a <= 0 or c <= 0
        """
        if isinstance(t, NormalizedTriple):
            return t.triple
        if isinstance(t, QuadTriple):
            return t
        try:
            a, b, c = (int(v) for v in t)
            return QuadTriple(a=a, b=b, c=c)
        except ValidationError as exc:
            raise InvalidTripleError(f"{tuple(t)} is not a positive-definite triple") from exc
        except (TypeError, ValueError) as exc:
            raise InvalidTripleError(f"cannot read a triple from {t!r}") from exc

    def as_normalized(self, t: TripleLike) -> QuadTriple:
        """Like as_triple, but also require 0 <= 2b <= a <= c"""
        triple = self.as_triple(t)
        if not triple.is_normalized:
            raise NotNormalizedError(f"{triple.as_tuple()} is not normalized (need 0 <= 2b <= a <= c)")
        return triple

    def invariants(self, t: TripleLike) -> TripleInvariants:
        triple = self.as_triple(t)
        return TripleInvariants(D=triple.D, alpha=triple.alpha, gamma=triple.gamma)

    def linear_forms(self, t: TripleLike, m: int, n: int) -> LinearFormValues:
        """
        Evaluate F0 = c alpha m + a gamma n, F1 = c m - b n, F2 = a n - b m, F3 = gamma m + alpha n

        Args:
            t: Triple
            m, n: Index pair

        Returns:
            LinearFormValues
        """
        tr = self.as_triple(t)
        a, b, c, alpha, gamma = tr.a, tr.b, tr.c, tr.alpha, tr.gamma
        return LinearFormValues(
            m=m,
            n=n,
            F0=c * alpha * m + a * gamma * n,
            F1=c * m - b * n,
            F2=a * n - b * m,
            F3=gamma * m + alpha * n,
        )

    def linear_form_identities(self, t: TripleLike, m: int, n: int) -> List[Tuple[str, int, int]]:
        """
        The exact identities relating F0..F3, as (name, lhs, rhs) triples

        Every pair must be equal for every triple and every (m, n).
        """
        tr = self.as_triple(t)
        f = self.linear_forms(tr, m, n)
        a, b, c, D, alpha, gamma = tr.a, tr.b, tr.c, tr.D, tr.alpha, tr.gamma
        return [
            ("F3=F1+F2", f.F3, f.F1 + f.F2),
            ("F0-alpha*F1=D*n", f.F0 - alpha * f.F1, D * n),
            ("F0-gamma*F2=D*m", f.F0 - gamma * f.F2, D * m),
            ("F0+b*F3=D*(m+n)", f.F0 + b * f.F3, D * (m + n)),
            ("a*F1+b*F2=D*m", a * f.F1 + b * f.F2, D * m),
            ("b*F1+c*F2=D*n", b * f.F1 + c * f.F2, D * n),
            ("alpha*F1+b*F3=D*m", alpha * f.F1 + b * f.F3, D * m),
            ("-gamma*F1+c*F3=D*n", -gamma * f.F1 + c * f.F3, D * n),
            ("-alpha*F2+a*F3=D*m", -alpha * f.F2 + a * f.F3, D * m),
            ("gamma*F2+b*F3=D*n", gamma * f.F2 + b * f.F3, D * n),
        ]

    def apply_transform(self, t: TripleLike, transform: Matrix2) -> QuadTriple:
        """Gram matrix of M Q M^T for a unimodular M"""
        tr = self.as_triple(t)
        (p, q), (r, s) = transform
        a, b, c = tr.a, tr.b, tr.c
        return QuadTriple(
            a=a * p * p + 2 * b * p * q + c * q * q,
            b=a * p * r + b * (p * s + q * r) + c * q * s,
            c=a * r * r + 2 * b * r * s + c * s * s,
        )

    def normalize(self, t: TripleLike) -> NormalizedTriple:
        """
        Gauss reduction to 0 <= 2b <= a <= c, recording the basis change

        Translation e2 -> e2 - k e1 brings b into [-a/2, a/2), a swap is applied
        while a > c, and a final sign flip of the first basis vector makes b >= 0.

        Args:
            t: Positive-definite triple

        Returns:
            NormalizedTriple whose transform M satisfies M Q M^T = Q_normalized
        """
        tr = self.as_triple(t)
        a, b, c = tr.a, tr.b, tr.c
        transform = IDENTITY
        steps = 0

        while not (abs(2 * b) <= a <= c):
            if abs(2 * b) > a:
                k = (2 * b + a) // (2 * a)
                b, c = b - k * a, c - 2 * k * b + k * k * a
                transform = _matmul(((1, 0), (-k, 1)), transform)
            else:
                a, c = c, a
                transform = _matmul(((0, 1), (1, 0)), transform)
            steps += 1

        if b < 0:
            b = -b
            transform = _matmul(((-1, 0), (0, 1)), transform)

        logger.debug("normalized %s -> (%d,%d,%d) in %d steps", tr.as_tuple(), a, b, c, steps)
        return NormalizedTriple(triple=QuadTriple(a=a, b=b, c=c), transform=transform)

    def brute_force_normalize(self, t: TripleLike, bound: int = 10) -> QuadTriple:
        """
        Exhaustive oracle: among all unimodular images with entries in [-bound, bound],
        take the lexicographically smallest (a, |b|)

        Args:
            t: Positive-definite triple
            bound: Entry bound for the unimodular matrices

        Returns:
            QuadTriple (a, |b|, c)
        """
        tr = self.as_triple(t)
        rng = range(-bound, bound + 1)
        rows = [(p, q) for p in rng for q in rng if (p, q) != (0, 0)]

        def value(p: int, q: int) -> int:
            return tr.a * p * p + 2 * tr.b * p * q + tr.c * q * q

        best_a = min(value(p, q) for p, q in rows if gcd(p, q) == 1)
        best = None
        for (p, q) in rows:
            if gcd(p, q) != 1 or value(p, q) != best_a:
                continue
            for (r, s) in rows:
                if p * s - q * r not in (1, -1):
                    continue
                image = self.apply_transform(tr, ((p, q), (r, s)))
                key = (image.a, abs(image.b))
                if best is None or key < best:
                    best = key
        a, b_abs = best
        return QuadTriple(a=a, b=b_abs, c=(tr.D + b_abs * b_abs) // a)

    def xi(self, t: TripleLike) -> Fraction:
        """
        xi = (alpha gcd(c,b)^2 + gamma gcd(a,b)^2 + b gcd(alpha,gamma)^2) / D

        The third term is dropped when b = 0, so gcd(0, 0) never occurs.
        """
        tr = self.as_triple(t)
        total = tr.alpha * gcd(tr.c, tr.b) ** 2 + tr.gamma * gcd(tr.a, tr.b) ** 2
        if tr.b != 0:
            total += tr.b * gcd(tr.alpha, tr.gamma) ** 2
        return Fraction(total, tr.D)

    def delta(self, t: TripleLike) -> int:
        """Delta = D / gcd(a,b,c)^2 (always an integer)"""
        tr = self.as_triple(t)
        g = gcd(gcd(tr.a, tr.b), tr.c)
        return tr.D // (g * g)

    def scaled(self, t: TripleLike, e: int) -> QuadTriple:
        tr = self.as_triple(t)
        return QuadTriple(a=e * tr.a, b=e * tr.b, c=e * tr.c)

    def random_triple(self, rng, bound: int) -> QuadTriple:
        """
        Random positive-definite triple with |a|, |b|, |c| <= bound

        Args:
            rng: random.Random-compatible generator (randint)
            bound: Entry bound

        Returns:
            QuadTriple (not necessarily normalized)
        """
        for _ in itertools.count():
            a, c = rng.randint(1, bound), rng.randint(1, bound)
            b = rng.randint(-bound, bound)
            if a * c - b * b > 0:
                return QuadTriple(a=a, b=b, c=c)

    def random_normalized(self, rng, bound: int) -> NormalizedTriple:
        """Random normalized triple with entries bounded by bound"""
        for _ in itertools.count():
            a = rng.randint(1, bound)
            c = rng.randint(a, bound)
            b = rng.randint(0, a // 2)
            if a * c - b * b > 0:
                return NormalizedTriple(triple=QuadTriple(a=a, b=b, c=c))


# Singleton instance
quadform_tool = QuadformTool()
