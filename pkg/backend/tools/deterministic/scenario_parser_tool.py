"""
Scenario Parser Tool - YAML scenario documents for the simulation sweep
"""
import logging
from pathlib import Path
from typing import Dict, List, Union

import yaml
from pydantic import ValidationError

from backend.errors import PreconditionError
from backend.state import PlaceModel, ProfileKind, Scenario
from backend.tools.deterministic.global_model_tool import global_model_tool
from backend.tools.deterministic.local_height_tool import local_height_tool

logger = logging.getLogger(__name__)


class ScenarioParserTool:
    """Parse and validate scenario documents"""

    def parse(self, content: str) -> Scenario:
        """
        Parse one scenario document

        Args:
            content: YAML text

        Returns:
            Validated Scenario

        Raises:
            PreconditionError: malformed YAML, schema errors, bad d override or fixed profile
        """
        try:
            data = yaml.safe_load(content)
        except yaml.YAMLError as exc:
            raise PreconditionError(f"scenario is not valid YAML: {exc}") from exc
        if not isinstance(data, dict):
            raise PreconditionError("scenario document must be a mapping")
        try:
            scenario = Scenario.model_validate(data)
        except ValidationError as exc:
            raise PreconditionError(f"invalid scenario: {exc}") from exc

        places = self.places(scenario)
        if scenario.d is not None:
            for place in places:
                local_height_tool.require_valid_d(place.triple, scenario.d)
        if scenario.profile == ProfileKind.FIXED:
            missing = [p.id for p in scenario.places if p.indices is None]
            if missing:
                raise PreconditionError(f"fixed profile needs indices for {missing}")
            for p in scenario.places:
                if sum(p.indices) != scenario.n:
                    raise PreconditionError(f"place {p.id}: indices sum to {sum(p.indices)}, expected n={scenario.n}")
        if scenario.v0 is not None and scenario.v0 not in {p.id for p in scenario.places}:
            raise PreconditionError(f"v0={scenario.v0!r} is not a place of the scenario")
        logger.info("parsed scenario %s with %d places, n=%d", scenario.id, len(places), scenario.n)
        return scenario

    def load(self, path: Union[str, Path]) -> Scenario:
        return self.parse(Path(path).read_text(encoding="utf-8"))

    def places(self, scenario: Scenario) -> List[PlaceModel]:
        """Place models, normalizing any non-reduced triple"""
        return global_model_tool.make_places({p.id: p.triple for p in scenario.places})

    def fixed_indices(self, scenario: Scenario) -> Dict[str, List[int]]:
        return {p.id: list(p.indices) for p in scenario.places if p.indices is not None}

    def resolve_d(self, scenario: Scenario) -> int:
        """The override when given, otherwise 2 lcm(Delta_v)"""
        return scenario.d if scenario.d is not None else global_model_tool.compute_d(self.places(scenario))

    def dump(self, scenario: Scenario) -> str:
        return yaml.safe_dump(scenario.model_dump(mode="json", exclude_none=True), sort_keys=False)


# Singleton instance
scenario_parser_tool = ScenarioParserTool()
