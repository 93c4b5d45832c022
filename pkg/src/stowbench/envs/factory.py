"""Per-episode environment construction with derived seeds.

Training and evaluation both run on fresh instances: episode i of a run uses
an instance seed derived from (run seed, stream, i), so runs are reproducible
and the evaluation instance set is fixed across evaluation points within a
run.
"""

from __future__ import annotations

from dataclasses import replace

from ..errors import ConfigError
from ..model import ProblemInstance, ScenarioSpec, generate_instance
from ..seeding import STREAM_EVAL, STREAM_INSTANCE, STREAM_TRAIN, derive_seed
from .clocked import DEFAULT_LAMBDA_TIME, AgentCycleEnv, MultiCraneEnv, TimeModel
from .spge import SpgeEnv

VARIANTS = ("spge", "spge-mc", "spaec")


def make_env(variant: str, instance: ProblemInstance, *,
             time_model: TimeModel | None = None,
             lambda_time: float = DEFAULT_LAMBDA_TIME,
             normalize: bool = True,
             trace=None):
    if variant == "spge":
        return SpgeEnv(instance, normalize=normalize, trace=trace)
    if variant == "spge-mc":
        return MultiCraneEnv(instance, time_model=time_model, lambda_time=lambda_time,
                             normalize=normalize, trace=trace)
    if variant == "spaec":
        return AgentCycleEnv(instance, time_model=time_model, lambda_time=lambda_time,
                             normalize=normalize, trace=trace)
    raise ConfigError(f"unknown environment variant {variant!r}; expected one of {VARIANTS}")


class EpisodeFactory:
    """Builds fresh-instance environments for one training run."""

    def __init__(self, scenario: ScenarioSpec, variant: str, run_seed: int, *,
                 time_model: TimeModel | None = None,
                 lambda_time: float = DEFAULT_LAMBDA_TIME,
                 normalize: bool = True,
                 trace=None):
        if variant not in VARIANTS:
            raise ConfigError(f"unknown environment variant {variant!r}")
        self.scenario = scenario
        self.variant = variant
        self.run_seed = run_seed
        self.time_model = time_model or TimeModel()
        self.lambda_time = lambda_time
        self.normalize = normalize
        self.trace = trace
        probe = self.training_env(0)
        self.observation_dim = probe.observation_dim
        self.n_actions = probe.n_actions

    def _instance(self, stream: int, index: int) -> ProblemInstance:
        seed = derive_seed(self.run_seed, STREAM_INSTANCE, stream, index)
        return generate_instance(replace(self.scenario, seed=seed))

    def training_env(self, episode_index: int):
        return self._build(self._instance(STREAM_TRAIN, episode_index))

    def eval_env(self, episode_index: int):
        return self._build(self._instance(STREAM_EVAL, episode_index))

    def _build(self, instance: ProblemInstance):
        return make_env(self.variant, instance, time_model=self.time_model,
                        lambda_time=self.lambda_time, normalize=self.normalize,
                        trace=self.trace)
