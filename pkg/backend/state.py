"""
Domain state for HexHeight
Pydantic models shared by the tools, the orchestrator, the trial workflow and the API
"""
from enum import Enum
from fractions import Fraction
from typing import Annotated, Any, Callable, Dict, List, Optional, Tuple, TypedDict

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    WithJsonSchema,
    field_validator,
    model_validator,
)

from backend.utils.helpers import (
    centered,
    format_rational,
    leading_minors,
    lift_coordinates,
    parse_rational,
)

# Exact rational field: accepts int / Fraction / "p/q", dumps to "p/q" in JSON mode
Rational = Annotated[
    Fraction,
    BeforeValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str, when_used="json"),
    WithJsonSchema({"type": "string", "pattern": r"^-?\d+/\d+$"}),
]

IntPair = Tuple[int, int]
RationalPair = Tuple[Rational, Rational]


class Region(str, Enum):
    """Region of the centered square (see config.REGION_BY_OFFSET)"""
    OCTAGON = "octagon"
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    BOUNDARY = "boundary"


class CaseTag(str, Enum):
    """Which closed-form branch produced a Fourier coefficient"""
    ZERO_INDEX = "ZERO_INDEX"
    F1_ZERO = "F1_ZERO"
    F2_ZERO = "F2_ZERO"
    F3_ZERO = "F3_ZERO"
    GENERIC = "GENERIC"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON_LINES = "json-lines"


class Subcommand(str, Enum):
    REDUCE = "reduce"
    EVAL_L = "eval-l"
    FOURIER = "fourier"
    HEXAGON = "hexagon"
    AVG_D = "avg-d"
    LOCAL_BOUNDS = "local-bounds"
    THETA = "theta"
    SIMULATE = "simulate"
    HOLDER = "holder"
    SCALING = "scaling"


class ProfileKind(str, Enum):
    FIXED = "fixed"
    RANDOM_PARTITION = "random-partition"
    SINGLE_BRANCH = "single-branch"


class LiftModel(str, Enum):
    """How points of the global set are lifted at each branch above a place"""
    SHARED = "shared"
    PER_BRANCH = "per-branch"


class AverageMethod(str, Enum):
    DIRECT = "direct"
    CLOSED_FORM = "closed_form"


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


# ---------------------------------------------------------------------------
# quadform
# ---------------------------------------------------------------------------

class QuadTriple(_Frozen):
    """Integer binary quadratic form a x^2 + 2 b x y + c y^2, positive definite"""
    a: int
    b: int
    c: int

    @model_validator(mode="after")
    def _positive_definite(self) -> "QuadTriple":
        if self.a <= 0 or self.c <= 0 or self.a * self.c - self.b * self.b <= 0:
            raise ValueError(f"({self.a},{self.b},{self.c}) is not positive definite")
        return self

    @property
    def D(self) -> int:
        return self.a * self.c - self.b * self.b

    @property
    def alpha(self) -> int:
        return self.a - self.b

    @property
    def gamma(self) -> int:
        return self.c - self.b

    @property
    def is_normalized(self) -> bool:
        return 0 <= 2 * self.b <= self.a <= self.c

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def gram(self) -> List[List[int]]:
        return [[self.a, self.b], [self.b, self.c]]


class NormalizedTriple(_Frozen):
    """Normalized triple plus the unimodular basis change that produced it"""
    triple: QuadTriple
    transform: Tuple[IntPair, IntPair] = ((1, 0), (0, 1))

    @model_validator(mode="after")
    def _check(self) -> "NormalizedTriple":
        if not self.triple.is_normalized:
            raise ValueError(f"{self.triple.as_tuple()} violates 0 <= 2b <= a <= c")
        (p, q), (r, s) = self.transform
        if p * s - q * r not in (1, -1):
            raise ValueError("transform must have determinant +-1")
        return self


class TripleInvariants(_Frozen):
    D: int
    alpha: int
    gamma: int


class LinearFormValues(_Frozen):
    """F0..F3 at one index pair"""
    m: int
    n: int
    F0: int
    F1: int
    F2: int
    F3: int


# ---------------------------------------------------------------------------
# periodic_form
# ---------------------------------------------------------------------------

class TorusPoint(_Frozen):
    """Point of (R/Z)^2, stored as its representative in [-1/2, 1/2)^2"""
    x: Rational
    y: Rational

    @field_validator("x", "y")
    @classmethod
    def _reduce(cls, value: Fraction) -> Fraction:
        return centered(value)

    def __add__(self, other: "TorusPoint") -> "TorusPoint":
        return TorusPoint(x=self.x + other.x, y=self.y + other.y)

    def __sub__(self, other: "TorusPoint") -> "TorusPoint":
        return TorusPoint(x=self.x - other.x, y=self.y - other.y)

    def __neg__(self) -> "TorusPoint":
        return TorusPoint(x=-self.x, y=-self.y)


class MinimizerResult(_Frozen):
    value: Rational
    minimizers: List[IntPair]
    region: Region


class HexagonGeometry(_Frozen):
    """
    Hexagon of a normalized form and its decomposition of the centered square

    vertices: Q12, Q34 and the four square-boundary points (or the 4 corners when degenerate)
    cell_vertices: six Voronoi-cell vertices (empty when degenerate)
    polygons: octagon and triangular regions I-IV as vertex lists
    """
    degenerate: bool
    vertices: Dict[str, RationalPair]
    cell_vertices: List[RationalPair] = Field(default_factory=list)
    polygons: Dict[str, List[RationalPair]] = Field(default_factory=dict)


# ---------------------------------------------------------------------------
# fourier
# ---------------------------------------------------------------------------

class FourierCoefficient(_Frozen):
    """
    One closed-form coefficient L^(m, n)

    value = prefactor * s / pi^pi_power where s = Sin(F0 / 2D) for GENERIC and 1 otherwise
    """
    m: int
    n: int
    value: float
    case_tag: CaseTag
    prefactor: Rational
    pi_power: int


class QuadratureResult(_Frozen):
    m: int
    n: int
    value: float
    grid_exponent: int
    error_estimate: float


class LimitStep(_Frozen):
    gap: Rational
    generic_value: float
    error: float


class LimitReport(_Frozen):
    m: int
    n: int
    case_tag: CaseTag
    limit_value: float
    steps: List[LimitStep]
    converged: bool


# ---------------------------------------------------------------------------
# bernoulli
# ---------------------------------------------------------------------------

class RationalGridSet(_Frozen):
    """Distinct rationals mod 1 with denominators dividing R"""
    R: int = Field(ge=1)
    elements: List[Rational]

    @model_validator(mode="after")
    def _check(self) -> "RationalGridSet":
        for t in self.elements:
            if self.R % t.denominator:
                raise ValueError(f"denominator of {t} does not divide R={self.R}")
        if len({t % 1 for t in self.elements}) != len(self.elements):
            raise ValueError("elements must be distinct modulo 1")
        return self

    @property
    def N(self) -> int:
        return len(self.elements)


class DistributionCheck(_Frozen):
    lhs: Rational
    rhs: Rational
    equal: bool


class BoundCheck(_Frozen):
    """Generic lhs >= rhs (or average >= bound) check"""
    lhs: Rational
    rhs: Rational
    holds: bool


# ---------------------------------------------------------------------------
# local_height
# ---------------------------------------------------------------------------

class IntegerLift(_Frozen):
    u: int
    v: int


class LocalPointSet(_Frozen):
    """Points of one bad place given by integer lifts, distinct on the torus"""
    place: NormalizedTriple
    points: List[IntegerLift]

    @model_validator(mode="after")
    def _distinct(self) -> "LocalPointSet":
        seen = set()
        for p in self.points:
            x, y = self._coordinates(p)
            key = (centered(x), centered(y))
            if key in seen:
                raise ValueError(f"lift ({p.u},{p.v}) repeats a torus point")
            seen.add(key)
        return self

    def _coordinates(self, lift: IntegerLift) -> Tuple[Fraction, Fraction]:
        t = self.place.triple
        return lift_coordinates(t.a, t.b, t.c, lift.u, lift.v)

    @property
    def N(self) -> int:
        return len(self.points)

    @property
    def derived(self) -> List[TorusPoint]:
        return [TorusPoint(x=x, y=y) for x, y in map(self._coordinates, self.points)]


class DAverageParams(_Frozen):
    d: int = Field(ge=1)


class LocalHeightValue(_Frozen):
    """lambda^B = quarter_l - normalization, both exact"""
    quarter_l: Rational
    normalization: Rational
    height: Rational


class AverageComparison(_Frozen):
    closed_form: Rational
    direct: Rational
    equal: bool


class PigeonholeResult(_Frozen):
    subset: LocalPointSet
    cell: Tuple[int, int, int]
    bound: Rational
    min_pair_average: Optional[Rational] = None
    holds: bool = True


# ---------------------------------------------------------------------------
# theta
# ---------------------------------------------------------------------------

class ValuationMatrix(_Frozen):
    """Symmetric positive-definite rational matrix Q = v(q)"""
    Q: List[List[Rational]]

    @model_validator(mode="after")
    def _check(self) -> "ValuationMatrix":
        g = len(self.Q)
        if g == 0 or any(len(row) != g for row in self.Q):
            raise ValueError("Q must be a nonempty square matrix")
        for i in range(g):
            for j in range(i):
                if self.Q[i][j] != self.Q[j][i]:
                    raise ValueError("Q must be symmetric")
        if any(minor <= 0 for minor in leading_minors(self.Q)):
            raise ValueError("Q must be positive definite")
        return self

    @property
    def g(self) -> int:
        return len(self.Q)


class ValuationVector(_Frozen):
    w: List[Rational]


class TropicalThetaResult(_Frozen):
    value: Rational
    argmins: List[Tuple[int, ...]]
    window_radius: int

    @property
    def ties(self) -> int:
        return len(self.argmins)


class ThetaTransformCheck(_Frozen):
    lhs: Rational
    rhs: Rational
    equal: bool


class LambdaInvarianceCheck(_Frozen):
    delta: Rational
    zero: bool


# ---------------------------------------------------------------------------
# global_model
# ---------------------------------------------------------------------------

class PlaceModel(_Frozen):
    id: str
    triple: NormalizedTriple


class ExtensionProfile(_Frozen):
    """Ramification indices e_w above each place, summing to n everywhere"""
    n: int = Field(ge=1)
    per_place: Dict[str, List[int]]

    @model_validator(mode="after")
    def _sums(self) -> "ExtensionProfile":
        for place_id, indices in self.per_place.items():
            if not indices or any(e <= 0 for e in indices):
                raise ValueError(f"place {place_id}: ramification indices must be positive")
            if sum(indices) != self.n:
                raise ValueError(f"place {place_id}: indices sum to {sum(indices)}, expected n={self.n}")
        return self


class GlobalPointSet(_Frozen):
    """
    Lifts of the points of Sigma at every place, aligned by index.

    branch_lifts (optional) holds independent lifts per branch for the scaled
    triple e_w * Q_v; when absent every branch uses (e u, e v).
    """
    lifts: Dict[str, List[IntegerLift]]
    branch_lifts: Optional[Dict[str, List[List[IntegerLift]]]] = None

    @model_validator(mode="after")
    def _aligned(self) -> "GlobalPointSet":
        sizes = {len(points) for points in self.lifts.values()}
        if self.branch_lifts:
            for branches in self.branch_lifts.values():
                sizes.update(len(points) for points in branches)
        if len(sizes) > 1:
            raise ValueError("every place (and branch) must carry the same number of points")
        return self

    @property
    def N(self) -> int:
        return len(next(iter(self.lifts.values()), []))


class GlobalAverage(_Frozen):
    """Double average with its per-(place, branch) contributions, each already divided by n"""
    total: Rational
    contributions: Dict[str, List[Rational]]


class EstimateReport(_Frozen):
    """The three per-place estimates, the exact partial sums they bound, and the chain constants"""
    est1: Rational
    est2: Rational
    est3: Rational
    combined: Rational
    part1: Rational
    part2: Rational
    part3: Rational
    C1: Rational
    C2: Rational
    C3: Rational
    C4: Rational
    holder_floor: Optional[float] = None
    holds: bool


class HolderReport(_Frozen):
    lhs: float
    rhs: float
    sharper: float
    intermediate: float
    holds: bool


class GreedySelection(_Frozen):
    indices: List[int]
    discarded: List[int]
    size_bound: int


class ScenarioPlace(_Frozen):
    id: str
    triple: Tuple[int, int, int]
    indices: Optional[List[int]] = None


class Scenario(_Frozen):
    """Simulation scenario document (YAML)"""
    id: str
    places: List[ScenarioPlace]
    n: int = Field(ge=1)
    profile: ProfileKind = ProfileKind.RANDOM_PARTITION
    points: int = Field(default=20, ge=2)
    d: Optional[int] = None
    seed: Optional[int] = None
    trials: Optional[int] = None
    lift_model: LiftModel = LiftModel.SHARED
    nu: int = Field(default=2, ge=2)
    conflicts: bool = False
    v0: Optional[str] = None
    base_change_slack: int = Field(default=1, ge=1)


# ---------------------------------------------------------------------------
# cli / run bookkeeping
# ---------------------------------------------------------------------------

class RunConfig(_Frozen):
    subcommand: Subcommand
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int
    output_format: OutputFormat = OutputFormat.CSV
    output_path: Optional[str] = None
    oracle: bool = False
    grid_exponent: int = Field(default=11, ge=6)
    trials: int = Field(default=100, ge=1)


class CheckRecord(_Frozen):
    """One theorem-backed check outcome"""
    name: str
    passed: bool
    detail: str = ""


class Report(BaseModel):
    """Rows produced by one subcommand plus its check ledger"""
    subcommand: Subcommand
    seed: Optional[int] = None
    rows: List[Dict[str, Any]] = Field(default_factory=list)
    checks: List[CheckRecord] = Field(default_factory=list)

    @property
    def failed(self) -> List[CheckRecord]:
        return [c for c in self.checks if not c.passed]


class TrialState(TypedDict):
    """
    Shared state for the simulation trial graph.
    Every node reads/writes this state.
    """
    # Input
    scenario: Scenario
    places: List[PlaceModel]
    d: int
    trial: int
    seed: int
    conflict_oracle: Optional[Callable[[int, int], bool]]

    # Sampled data
    profile: Optional[ExtensionProfile]
    points: Optional[GlobalPointSet]
    v0: Optional[str]
    w0: Optional[int]

    # Selection
    selected: List[int]

    # Results
    lhs: Optional[Fraction]
    estimates: Optional[EstimateReport]
    skipped: bool
    checks: List[CheckRecord]
    row: Optional[Dict[str, Any]]


# Helper functions for state updates
def add_check(state: TrialState, check: CheckRecord) -> TrialState:
    """Immutable-style add check record to state"""
    return {
        **state,
        "checks": state.get("checks", []) + [check]
    }


def update_state(state: TrialState, key: str, value: Any) -> TrialState:
    """Generic immutable state update for any field"""
    return {
        **state,
        key: value
    }
