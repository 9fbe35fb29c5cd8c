"""
Utility helper functions
Exact rational arithmetic shared by the tools and the state models
"""
import math
from fractions import Fraction
from typing import Iterable, List, Sequence, Tuple, Union

RationalLike = Union[int, Fraction, str]

HALF = Fraction(1, 2)


def parse_rational(value: RationalLike) -> Fraction:
    """
    Parse an exact rational from an int, a Fraction or a "p/q" / decimal string

    Args:
        value: Input value; floats are rejected because they are not exact

    Returns:
        Fraction
    """
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise ValueError(f"expected int, Fraction or 'p/q' string, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    """Serialize as "p/q" (denominator always present)"""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def frac(value: Fraction) -> Fraction:
    """Fractional part in [0, 1)"""
    return value - math.floor(value)


def centered(value: Fraction) -> Fraction:
    """Representative of value mod 1 in [-1/2, 1/2)"""
    return value - math.floor(value + HALF)


def lcm_all(values: Iterable[int]) -> int:
    result = 1
    for v in values:
        result = result * v // math.gcd(result, v)
    return result


def lift_coordinates(a: int, b: int, c: int, u: int, v: int) -> Tuple[Fraction, Fraction]:
    """
    Solve (a b; b c)(x, y) = (u, v) exactly

    Args:
        a, b, c: Form coefficients (D = ac - b^2 must be nonzero)
        u, v: Integer lift

    Returns:
        (x, y) before reduction mod Z^2
    """
    D = a * c - b * b
    return Fraction(c * u - b * v, D), Fraction(-b * u + a * v, D)


def fraction_det(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by exact Gaussian elimination"""
    rows = [[Fraction(x) for x in row] for row in matrix]
    size = len(rows)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        for r in range(col + 1, size):
            factor = rows[r][col] / rows[col][col]
            if factor:
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[col])]
    return det


def leading_minors(matrix: Sequence[Sequence[Fraction]]) -> List[Fraction]:
    size = len(matrix)
    return [fraction_det([row[:k] for row in matrix[:k]]) for k in range(1, size + 1)]


def fraction_inverse(matrix: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    """
    Exact inverse by Gauss-Jordan elimination

    Raises:
        ZeroDivisionError: matrix is singular
    """
    size = len(matrix)
    aug = [
        [Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(size)]
        for i, row in enumerate(matrix)
    ]
    for col in range(size):
        pivot = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        scale = aug[col][col]
        aug[col] = [x / scale for x in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [row[size:] for row in aug]


def mat_vec(matrix: Sequence[Sequence[Fraction]], vector: Sequence[Fraction]) -> List[Fraction]:
    return [sum((m * v for m, v in zip(row, vector)), Fraction(0)) for row in matrix]


def dot(left: Sequence[Fraction], right: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(left, right)), Fraction(0))


def quad_value(matrix: Sequence[Sequence[Fraction]], vector: Sequence[Fraction]) -> Fraction:
    """vector^T matrix vector"""
    return dot(vector, mat_vec(matrix, vector))


def b2_numerator(r: int, g: int) -> int:
    """
    6 g^2 B2(r/g) as an integer, for 0 <= r < g

    B2(r/g) = (6r^2 - 6rg + g^2) / (6 g^2)
    """
    return 6 * r * r - 6 * r * g + g * g


def torus_mean(a, b, c) -> Fraction:
    """
    Mean of L over the torus, the (0, 0) Fourier coefficient, exact

    (a^2 c + a c^2 - 2 a b^2 - 2 b^2 c + 2 b^3) / (12 D), valid for 0 <= 2b <= min(a, c).
    Reduces to (a + c) / 12 when b = 0.
    """
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    numerator = a * a * c + a * c * c - 2 * a * b * b - 2 * b * b * c + 2 * b ** 3
    return numerator / (12 * (a * c - b * b))
