"""
LangGraph Workflow Definition
One simulation trial as a state graph: sample -> pigeonhole -> greedy -> estimate -> record
"""
import logging
import random
from typing import Callable, List, Literal, Optional

from langgraph.graph import END, StateGraph

from backend.state import (
    CheckRecord,
    PlaceModel,
    Scenario,
    TrialState,
    add_check,
    update_state,
)
from backend.tools.deterministic.global_model_tool import global_model_tool
from backend.tools.deterministic.local_height_tool import local_height_tool
from backend.tools.deterministic.scenario_parser_tool import scenario_parser_tool
from backend.utils.run_logger import check_logger

logger = logging.getLogger(__name__)


def trial_rng(seed: int, trial: int) -> random.Random:
    """Independent, reproducible generator per (seed, trial)"""
    return random.Random(seed * 1_000_003 + trial)


class TrialNodes:
    """
    Node functions of the trial graph.

    Each node takes the whole TrialState and returns the updated state.
    """

    def sample(self, state: TrialState) -> TrialState:
        """Draw the ramification profile and the lifts of the point multiset"""
        scenario = state["scenario"]
        places = state["places"]
        rng = trial_rng(state["seed"], state["trial"])
        profile = global_model_tool.random_profile(
            places,
            scenario.n,
            scenario.profile,
            rng,
            fixed=scenario_parser_tool.fixed_indices(scenario),
        )
        points = global_model_tool.random_point_set(
            places, scenario.points, rng, profile=profile, lift_model=scenario.lift_model
        )
        v0 = scenario.v0 or places[0].id
        w0 = global_model_tool.heaviest_branch(profile, v0)
        state = update_state(state, "profile", profile)
        state = update_state(state, "points", points)
        state = update_state(state, "v0", v0)
        state = update_state(state, "w0", w0)
        return update_state(state, "selected", list(range(points.N)))

    def pigeonhole(self, state: TrialState) -> TrialState:
        """Keep the points in the fullest cube cell at the heaviest branch above v0"""
        places = {p.id: p for p in state["places"]}
        v0, w0, points = state["v0"], state["w0"], state["points"]
        e0 = state["profile"].per_place[v0][w0]
        scaled = global_model_tool.scaled_place(places[v0], e0)
        lifts = global_model_tool.branch_lifts(points, v0, w0, e0)
        cell, members = local_height_tool.largest_cell(scaled, lifts, state["d"])

        size_ok = 216 * len(members) >= points.N
        state = add_check(state, check_logger.record(
            "pigeonhole_size", size_ok, f"cell={cell} kept={len(members)} of {points.N}"
        ))
        state = update_state(state, "points", global_model_tool.restrict(points, members))
        return update_state(state, "selected", [state["selected"][i] for i in members])

    def greedy(self, state: TrialState) -> TrialState:
        """Drop conflicting points when the scenario injects a conflict oracle"""
        oracle: Optional[Callable[[int, int], bool]] = state.get("conflict_oracle")
        if oracle is None:
            return state
        selected = state["selected"]

        def hits(i: int, j: int) -> bool:
            return oracle(selected[i], selected[j])

        selection = global_model_tool.greedy_torsion_avoid(
            len(selected), hits, state["scenario"].nu, strict=False
        )
        state = add_check(state, check_logger.record(
            "greedy_size", len(selection.indices) >= selection.size_bound,
            f"kept={len(selection.indices)} bound={selection.size_bound}",
        ))
        state = update_state(state, "points", global_model_tool.restrict(state["points"], selection.indices))
        return update_state(state, "selected", [selected[i] for i in selection.indices])

    def estimate(self, state: TrialState) -> TrialState:
        """Exact double average and the estimate chain"""
        places, profile, points, d = state["places"], state["profile"], state["points"], state["d"]
        average = global_model_tool.global_double_average(places, profile, points, d)
        report = global_model_tool.theorem_estimates(
            places, profile, points, d, state["v0"], state["w0"], average=average, strict=False
        )
        state = update_state(state, "lhs", average.total)
        state = update_state(state, "estimates", report)
        return add_check(state, CheckRecord(
            name="estimate_chain", passed=report.holds,
            detail=f"lhs={average.total} combined={report.combined}",
        ))

    def skip(self, state: TrialState) -> TrialState:
        logger.info("trial %d skipped: fewer than 2 points survive selection", state["trial"])
        return update_state(state, "skipped", True)

    def record(self, state: TrialState) -> TrialState:
        """Flatten the trial into one output row"""
        scenario = state["scenario"]
        report = state.get("estimates")
        row = {
            "scenario": scenario.id,
            "trial": state["trial"],
            "n": scenario.n,
            "n_base_change": scenario.n * scenario.base_change_slack,
            "N": state["points"].N,
            "lhs": state.get("lhs"),
            "est1": report.est1 if report else None,
            "est2": report.est2 if report else None,
            "est3": report.est3 if report else None,
            "combined": report.combined if report else None,
            "holder_floor": report.holder_floor if report else None,
            "holds": report.holds if report else None,
        }
        return update_state(state, "row", row)


def _route_after_selection(state: TrialState) -> Literal["estimate", "skip"]:
    return "skip" if state["points"].N < 2 else "estimate"


def create_trial_workflow():
    """
    Creates the trial state machine

    Workflow:
    1. sample -> pigeonhole -> greedy
    2. greedy -> estimate (N >= 2) or skip
    3. estimate / skip -> record -> END

    Returns:
        Compiled StateGraph ready for invocation
    """
    nodes = TrialNodes()
    workflow = StateGraph(TrialState)

    workflow.add_node("sample", nodes.sample)
    workflow.add_node("pigeonhole", nodes.pigeonhole)
    workflow.add_node("greedy", nodes.greedy)
    workflow.add_node("estimate", nodes.estimate)
    workflow.add_node("skip", nodes.skip)
    workflow.add_node("record", nodes.record)

    workflow.set_entry_point("sample")
    workflow.add_edge("sample", "pigeonhole")
    workflow.add_edge("pigeonhole", "greedy")
    workflow.add_conditional_edges(
        "greedy",
        _route_after_selection,
        {"estimate": "estimate", "skip": "skip"},
    )
    workflow.add_edge("estimate", "record")
    workflow.add_edge("skip", "record")
    workflow.add_edge("record", END)

    return workflow.compile()


def initial_state(
    scenario: Scenario,
    places: List[PlaceModel],
    d: int,
    trial: int,
    seed: int,
    conflict_oracle: Optional[Callable[[int, int], bool]] = None,
) -> TrialState:
    return {
        "scenario": scenario,
        "places": places,
        "d": d,
        "trial": trial,
        "seed": seed,
        "conflict_oracle": conflict_oracle,
        "profile": None,
        "points": None,
        "v0": None,
        "w0": None,
        "selected": [],
        "lhs": None,
        "estimates": None,
        "skipped": False,
        "checks": [],
        "row": None,
    }
