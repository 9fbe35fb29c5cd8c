"""
Orchestrator - routes a RunConfig to the tools and collects rows and checks
Shared by the command line and the HTTP surface
"""
import logging
import random
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

from backend.config import OUTPUT_COLUMNS, settings
from backend.errors import PreconditionError
from backend.state import (
    AverageMethod,
    LiftModel,
    ProfileKind,
    Report,
    RunConfig,
    Scenario,
    ScenarioPlace,
    Subcommand,
    TorusPoint,
    ValuationMatrix,
    ValuationVector,
)
from backend.tools.deterministic.bernoulli_tool import bernoulli_tool
from backend.tools.deterministic.global_model_tool import global_model_tool
from backend.tools.deterministic.local_height_tool import local_height_tool
from backend.tools.deterministic.periodic_form_tool import periodic_form_tool
from backend.tools.deterministic.quadform_tool import quadform_tool
from backend.tools.deterministic.scenario_parser_tool import scenario_parser_tool
from backend.tools.deterministic.theta_tool import theta_tool
from backend.tools.numeric.fourier_tool import fourier_tool
from backend.tools.numeric.quadrature_tool import quadrature_tool
from backend.utils.helpers import parse_rational
from backend.utils.run_logger import check_logger
from backend.workflow import create_trial_workflow, initial_state

logger = logging.getLogger(__name__)

DEFAULT_SCALING_N = [3, 5, 10, 20, 50, 100, 200]
DEFAULT_SCALING_TRIPLE = (2, 1, 7)  # D = 13 >= the default 12 points


def _triple(params: Dict[str, Any]):
    return quadform_tool.as_triple((params["a"], params["b"], params["c"]))


class Orchestrator:
    """
    Subcommand router.

    run() resets the check ledger, dispatches to one handler and returns a
    Report whose rows follow config.OUTPUT_COLUMNS.
    """

    def __init__(self):
        self.name = "orchestrator"
        self._handlers: Dict[Subcommand, Callable[[RunConfig, Report], None]] = {
            Subcommand.REDUCE: self._reduce,
            Subcommand.EVAL_L: self._eval_l,
            Subcommand.FOURIER: self._fourier,
            Subcommand.HEXAGON: self._hexagon,
            Subcommand.AVG_D: self._avg_d,
            Subcommand.LOCAL_BOUNDS: self._local_bounds,
            Subcommand.THETA: self._theta,
            Subcommand.SIMULATE: self._simulate,
            Subcommand.HOLDER: self._holder,
            Subcommand.SCALING: self._scaling,
        }
        self._graph = None

    @property
    def trial_graph(self):
        if self._graph is None:
            self._graph = create_trial_workflow()
        return self._graph

    def run(self, config: RunConfig) -> Report:
        """
        Execute one subcommand

        Args:
            config: Subcommand, parameters, seed and flags

        Returns:
            Report with rows and every recorded check

        Raises:
            HexHeightError subclasses for invalid input
        """
        check_logger.reset()
        report = Report(subcommand=config.subcommand)
        logger.info("running %s (seed=%d)", config.subcommand.value, config.seed)
        self._handlers[config.subcommand](config, report)
        logger.info("%s: %d rows, %s", config.subcommand.value, len(report.rows), check_logger.summary())
        return report

    def columns(self, subcommand: Subcommand) -> List[str]:
        return OUTPUT_COLUMNS[subcommand.value]

    @staticmethod
    def _check(report: Report, name: str, passed: bool, detail: str = "") -> bool:
        report.checks.append(check_logger.record(name, passed, detail))
        return passed

    # ------------------------------------------------------------------
    # Single-shot subcommands
    # ------------------------------------------------------------------

    def _reduce(self, config: RunConfig, report: Report) -> None:
        result = quadform_tool.normalize(_triple(config.params))
        (t11, t12), (t21, t22) = result.transform
        tr = result.triple
        report.rows.append({
            "a": tr.a, "b": tr.b, "c": tr.c, "D": tr.D,
            "t11": t11, "t12": t12, "t21": t21, "t22": t22,
        })
        if config.oracle:
            oracle = quadform_tool.brute_force_normalize(_triple(config.params))
            self._check(report, "reduce_oracle", oracle == tr, f"oracle={oracle.as_tuple()}")

    def _eval_l(self, config: RunConfig, report: Report) -> None:
        params = config.params
        tr = quadform_tool.as_normalized(_triple(params))
        p = TorusPoint(x=parse_rational(params["x"]), y=parse_rational(params["y"]))
        result = periodic_form_tool.eval_l(tr, p)
        report.rows.append({
            "x": p.x, "y": p.y, "value": result.value,
            "region": result.region, "minimizers": [list(m) for m in result.minimizers],
        })
        if config.oracle:
            oracle = periodic_form_tool.brute_force_l(tr, p)
            self._check(report, "window_oracle", oracle.value == result.value, f"oracle={oracle.value}")

    def _fourier(self, config: RunConfig, report: Report) -> None:
        params = config.params
        tr = quadform_tool.as_normalized(_triple(params))
        M = int(params.get("M", 6))
        oracle = quadrature_tool.oracle_table(tr, M, config.grid_exponent) if config.oracle else {}
        error = 0.0
        if config.oracle:
            error = quadrature_tool.quadrature_oracle(tr, 1, 1, config.grid_exponent).error_estimate
        for m in range(-M, M + 1):
            for n in range(-M, M + 1):
                coefficient = fourier_tool.coefficient(tr, m, n)
                row = {
                    "m": m, "n": n, "case": coefficient.case_tag, "value": coefficient.value,
                    "prefactor": coefficient.prefactor, "pi_power": coefficient.pi_power,
                }
                if config.oracle:
                    diff = abs(coefficient.value - oracle[(m, n)])
                    row.update({"oracle": oracle[(m, n)], "oracle_error": error, "abs_diff": diff})
                    tolerance = settings.oracle_tolerance + 4.0 * error
                    self._check(report, "fourier_oracle", diff <= tolerance, f"({m},{n}) diff={diff}")
                report.rows.append(row)

    def _hexagon(self, config: RunConfig, report: Report) -> None:
        tr = quadform_tool.as_normalized(_triple(config.params))
        geometry = periodic_form_tool.hexagon_vertices(tr)
        for label, (x, y) in geometry.vertices.items():
            report.rows.append({"kind": "vertex", "label": label, "index": 0, "x": x, "y": y})
            needed = 1 if label.startswith("E") or geometry.degenerate else 2
            count = periodic_form_tool.bisector_equalities(tr, (x, y))
            self._check(report, "hexagon_vertex", count >= needed, f"{label} has {count} equalities")
        for index, (x, y) in enumerate(geometry.cell_vertices):
            report.rows.append({"kind": "cell", "label": f"V{index}", "index": index, "x": x, "y": y})
            count = periodic_form_tool.bisector_equalities(tr, (x, y))
            self._check(report, "hexagon_cell_vertex", count >= 2, f"V{index} has {count} equalities")
        for name, polygon in geometry.polygons.items():
            for index, (x, y) in enumerate(polygon):
                report.rows.append({"kind": "polygon", "label": name, "index": index, "x": x, "y": y})

    def _avg_d(self, config: RunConfig, report: Report) -> None:
        params = config.params
        tr = quadform_tool.as_normalized(_triple(params))
        p = TorusPoint(x=parse_rational(params["x"]), y=parse_rational(params["y"]))
        d = int(params["d"])
        comparison = local_height_tool.compare_avg_d(tr, p, d, strict=False)
        report.rows.append({
            "x": p.x, "y": p.y, "d": d, "closed_form": comparison.closed_form,
            "direct": comparison.direct, "equal": comparison.equal,
        })
        self._check(report, "avg_d_identity", comparison.equal, f"p=({p.x},{p.y}) d={d}")

    def _holder(self, config: RunConfig, report: Report) -> None:
        params = config.params
        result = global_model_tool.holder_bound(
            float(params["alpha"]), float(params["beta"]), [float(e) for e in params["e"]], strict=False
        )
        report.rows.append(result.model_dump())
        self._check(report, "holder_bound", result.holds, f"lhs={result.lhs} rhs={result.rhs}")

    # ------------------------------------------------------------------
    # Randomized suites
    # ------------------------------------------------------------------

    def _local_bounds(self, config: RunConfig, report: Report) -> None:
        params = config.params
        report.seed = config.seed
        rng = random.Random(config.seed)
        max_points = int(params.get("max_points", 12))

        for trial in range(config.trials):
            if "a" in params:
                place = quadform_tool.normalize(_triple(params))
            else:
                place = quadform_tool.random_normalized(rng, int(params.get("bound", 12)))
            tr = place.triple
            d = int(params["d"]) if "d" in params else 2 * quadform_tool.delta(tr) * rng.randint(1, 2)

            grid = bernoulli_tool.random_grid_set(rng, int(params.get("max_R", 24)))
            fejer = bernoulli_tool.fejer_lower_bound(grid, strict=False)
            self._local_row(report, trial, "fejer_bound", grid.N, None, fejer.lhs, fejer.rhs, fejer.holds)

            m, n = rng.randint(-6, 6), rng.randint(-6, 6)
            identities = quadform_tool.linear_form_identities(tr, m, n)
            ok = all(lhs == rhs for _, lhs, rhs in identities)
            self._local_row(report, trial, "linear_form_identities", None, None, None, None, ok)

            if tr.D < 2:
                continue
            N = rng.randint(2, min(tr.D, max_points))
            S = local_height_tool.random_point_set(place, N, rng)
            closed = local_height_tool.fourier_avg_lower_bound(S, d, method=AverageMethod.CLOSED_FORM, strict=False)
            self._local_row(report, trial, "fourier_avg_bound", N, d, closed.lhs, closed.rhs, closed.holds)

            pairs = N * (N - 1) // 2
            if config.oracle or pairs * d * d <= settings.direct_average_budget:
                direct = local_height_tool.fourier_avg_lower_bound(S, d, method=AverageMethod.DIRECT, strict=False)
                self._local_row(report, trial, "fourier_avg_bound_direct", N, d, direct.lhs, direct.rhs, direct.holds)
                self._local_row(
                    report, trial, "fourier_avg_methods_agree", N, d, direct.lhs, closed.lhs, direct.lhs == closed.lhs,
                )
            else:
                logger.debug("trial=%d direct average skipped: %d pairs at d=%d", trial, pairs, d)

            subset = local_height_tool.pigeonhole_subset(S, d, strict=False)
            self._local_row(
                report, trial, "pigeonhole_pair_bound", subset.subset.N, d,
                subset.min_pair_average, subset.bound, subset.holds,
            )

    def _local_row(self, report, trial, check, N, d, lhs, rhs, holds) -> None:
        report.rows.append({"trial": trial, "check": check, "N": N, "d": d, "lhs": lhs, "rhs": rhs, "holds": holds})
        self._check(report, check, holds, f"trial={trial} lhs={lhs} rhs={rhs}")

    def _theta(self, config: RunConfig, report: Report) -> None:
        params = config.params
        if "Q" in params:
            instances = [(
                ValuationMatrix(Q=params["Q"]),
                ValuationVector(w=params["w"]),
                [int(k) for k in params["n"]],
            )]
        else:
            report.seed = config.seed
            rng = random.Random(config.seed)
            instances = []
            for _ in range(config.trials):
                g = rng.randint(1, 3)
                Q = theta_tool.random_matrix(rng, g=g, bound=3)
                w = ValuationVector(w=[Fraction(rng.randint(-12, 12), rng.randint(1, 6)) for _ in range(g)])
                instances.append((Q, w, [rng.randint(-3, 3) for _ in range(g)]))

        for Q, w, n in instances:
            ties = theta_tool.tropical_theta(Q, w).ties
            transform = theta_tool.check_theta_transform(Q, w, n, strict=False)
            report.rows.append({
                "check": "theta_transform", "lhs": transform.lhs, "rhs": transform.rhs,
                "delta": transform.lhs - transform.rhs, "holds": transform.equal, "ties": ties,
            })
            self._check(report, "theta_transform", transform.equal, f"n={n}")
            invariance = theta_tool.check_lambda_invariance(Q, w, n, strict=False)
            report.rows.append({
                "check": "lambda_invariance", "lhs": None, "rhs": None,
                "delta": invariance.delta, "holds": invariance.zero, "ties": ties,
            })
            self._check(report, "lambda_invariance", invariance.zero, f"n={n}")

    def _load_scenario(self, params: Dict[str, Any]) -> Scenario:
        if "scenario" in params and isinstance(params["scenario"], Scenario):
            return params["scenario"]
        if "scenario_text" in params:
            return scenario_parser_tool.parse(params["scenario_text"])
        if "scenario" in params:
            return scenario_parser_tool.load(params["scenario"])
        raise PreconditionError("simulate needs a scenario file")

    def run_trials(self, scenario: Scenario, trials: int, seed: int) -> List[Dict[str, Any]]:
        """
        Run the trial graph for one scenario

        Returns:
            Final trial states, in trial order
        """
        places = scenario_parser_tool.places(scenario)
        d = scenario_parser_tool.resolve_d(scenario)
        states = []
        for trial in range(trials):
            oracle = None
            if scenario.conflicts:
                oracle, _ = global_model_tool.build_conflict_oracle(
                    scenario.points, scenario.nu, random.Random(f"conflicts:{seed}:{trial}")
                )
            states.append(self.trial_graph.invoke(initial_state(scenario, places, d, trial, seed, oracle)))
        return states

    def _simulate(self, config: RunConfig, report: Report) -> None:
        scenario = self._load_scenario(config.params)
        seed = config.seed
        if scenario.seed is not None and not config.params.get("seed_given", False):
            seed = scenario.seed
        report.seed = seed
        trials = scenario.trials or config.trials
        for state in self.run_trials(scenario, trials, seed):
            report.rows.append(state["row"])
            report.checks.extend(state["checks"])

    def scaling_scenario(
        self, n: int, triple=DEFAULT_SCALING_TRIPLE, points: int = 12, lift_model: LiftModel = LiftModel.SHARED
    ) -> Scenario:
        """Single place, single-branch scenario of the scaling study at degree n"""
        D = quadform_tool.as_triple(tuple(triple)).D
        if D < points:
            logger.warning("triple %s has D=%d < %d points, lifts must repeat torus points", tuple(triple), D, points)
        return Scenario(
            id=f"scaling-n{n}",
            places=[ScenarioPlace(id="v0", triple=tuple(triple))],
            n=n,
            profile=ProfileKind.SINGLE_BRANCH,
            points=points,
            lift_model=LiftModel(lift_model),
        )

    def _scaling(self, config: RunConfig, report: Report) -> None:
        """Single-branch sweep over n of (double average + (C3 + C4)/(N - 1)) * n^(2/3)"""
        params = config.params
        report.seed = config.seed
        triple = tuple(params.get("triple", DEFAULT_SCALING_TRIPLE))
        N = int(params.get("points", 12))
        n_values = [int(n) for n in params.get("n_values", DEFAULT_SCALING_N)]

        for n in n_values:
            scenario = self.scaling_scenario(n, triple, N, params.get("lift_model", LiftModel.SHARED))
            places = scenario_parser_tool.places(scenario)
            d = scenario_parser_tool.resolve_d(scenario)
            C1, C2, C3, C4 = global_model_tool.estimate_constants(places, "v0", d)
            floor = 0.9 * float(C1 * C1 * C2) ** (1.0 / 3.0)

            scaled: List[float] = []
            for state in self.run_trials(scenario, config.trials, config.seed + n):
                report.checks.extend(state["checks"])
                if state["skipped"]:
                    continue
                kept = state["points"].N
                shifted = state["lhs"] + (C3 + C4) / (kept - 1)
                scaled.append(float(shifted) * n ** (2.0 / 3.0))
            min_scaled: Optional[float] = min(scaled) if scaled else None
            holds = min_scaled is not None and min_scaled >= floor
            report.rows.append({"n": n, "trials": len(scaled), "min_scaled": min_scaled, "floor": floor, "holds": holds})
            self._check(report, "scaling_floor", holds, f"n={n} min={min_scaled} floor={floor}")


# Create singleton instance
orchestrator = Orchestrator()
