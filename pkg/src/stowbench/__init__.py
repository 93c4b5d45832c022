"""Container stowage planning benchmark: slot-grid environments, masked RL, oracles, harness."""

from .model import (
    GROUP_NONE,
    GridSpec,
    GridState,
    ProblemInstance,
    ScenarioSpec,
    SlotCoord,
    SlotRecord,
    build_sequencer,
    count_shifters,
    extract_container,
    generate_instance,
    partition_targets,
    place_container,
)

__version__ = "0.1.0"

__all__ = [
    "GROUP_NONE",
    "GridSpec",
    "GridState",
    "ProblemInstance",
    "ScenarioSpec",
    "SlotCoord",
    "SlotRecord",
    "build_sequencer",
    "count_shifters",
    "extract_container",
    "generate_instance",
    "partition_targets",
    "place_container",
    "__version__",
]
