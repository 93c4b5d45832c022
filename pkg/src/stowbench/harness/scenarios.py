"""Registry of the eight benchmark scenarios.

Sizes are bays x rows x tiers. Scenarios 1-5 are single-crane; 6-8 exercise
the multi-crane formulations with 3, 3, and 5 cranes.
"""

from __future__ import annotations

from ..errors import ConfigError
from ..model import GridSpec, ScenarioSpec

SCENARIOS: dict[int, dict] = {
    1: {"vessel": (3, 5, 3), "yard": (3, 5, 3), "containers": 45, "groups": 3, "cranes": 1},
    2: {"vessel": (3, 5, 3), "yard": (3, 5, 3), "containers": 45, "groups": 8, "cranes": 1},
    3: {"vessel": (3, 5, 3), "yard": (8, 5, 5), "containers": 45, "groups": 8, "cranes": 1},
    4: {"vessel": (8, 5, 5), "yard": (3, 5, 3), "containers": 45, "groups": 8, "cranes": 1},
    5: {"vessel": (8, 5, 5), "yard": (8, 5, 5), "containers": 200, "groups": 8, "cranes": 1},
    6: {"vessel": (3, 5, 3), "yard": (8, 5, 5), "containers": 45, "groups": 8, "cranes": 3},
    7: {"vessel": (8, 5, 5), "yard": (8, 5, 5), "containers": 200, "groups": 8, "cranes": 3},
    8: {"vessel": (8, 5, 5), "yard": (8, 5, 5), "containers": 200, "groups": 8, "cranes": 5},
}

SINGLE_CRANE_SCENARIOS = (1, 2, 3, 4, 5)
MULTI_CRANE_SCENARIOS = (6, 7, 8)

#: Evaluation cadence defaults: large multi-crane scenarios evaluate less often.
DEFAULT_EVAL_EVERY = {7: 500, 8: 500}
FALLBACK_EVAL_EVERY = 200


def scenario_spec(scenario_id: int, seed: int = 0) -> ScenarioSpec:
    if scenario_id not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario id {scenario_id}; valid ids are {sorted(SCENARIOS)}"
        )
    row = SCENARIOS[scenario_id]
    return ScenarioSpec(
        vessel=GridSpec(*row["vessel"]),
        yard=GridSpec(*row["yard"]),
        num_containers=row["containers"],
        num_groups=row["groups"],
        num_cranes=row["cranes"],
        seed=seed,
    )


def default_eval_every(scenario_id: int | None) -> int:
    if scenario_id is None:
        return FALLBACK_EVAL_EVERY
    return DEFAULT_EVAL_EVERY.get(scenario_id, FALLBACK_EVAL_EVERY)


def scenario_label(scenario: dict) -> str:
    """Registry id of a serialized ScenarioSpec, or 'custom'."""
    for sid in SCENARIOS:
        ref = scenario_spec(sid, seed=int(scenario.get("seed", 0))).to_dict()
        if {k: v for k, v in ref.items() if k != "seed"} == \
           {k: v for k, v in scenario.items() if k != "seed"}:
            return str(sid)
    return "custom"
