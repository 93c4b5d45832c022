from .clocked import AgentCycleEnv, CraneState, MultiCraneEnv, TimeModel
from .factory import VARIANTS, EpisodeFactory, make_env
from .spge import DEFAULT_INVALID_PENALTY, SpgeEnv, StepResult

__all__ = [
    "AgentCycleEnv",
    "CraneState",
    "DEFAULT_INVALID_PENALTY",
    "EpisodeFactory",
    "MultiCraneEnv",
    "SpgeEnv",
    "StepResult",
    "TimeModel",
    "VARIANTS",
    "make_env",
]
