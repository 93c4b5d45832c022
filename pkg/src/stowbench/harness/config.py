"""Experiment configuration: schema, validation, JSON loading."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..algos.config import ALGORITHMS, AlgoConfig
from ..envs.clocked import DEFAULT_LAMBDA_TIME, TimeModel
from ..envs.factory import VARIANTS
from ..errors import ConfigError
from ..model import ScenarioSpec
from .scenarios import (
    MULTI_CRANE_SCENARIOS,
    SINGLE_CRANE_SCENARIOS,
    default_eval_every,
    scenario_spec,
)

DEFAULT_REPS_SINGLE = 10
DEFAULT_REPS_MULTI = 30

#: Environment variable consulted when a config does not set ``workers``.
WORKERS_ENV_VAR = "STOWBENCH_WORKERS"


@dataclass
class ExperimentConfig:
    scenario: int | ScenarioSpec
    algo: str
    variant: str
    total_timesteps: int
    out_dir: str
    repetitions: int | None = None
    eval_every: int | None = None
    eval_episodes: int = 10
    seed: int = 0
    algo_config: AlgoConfig = field(default_factory=AlgoConfig)
    time_model: TimeModel = field(default_factory=TimeModel)
    lambda_time: float = DEFAULT_LAMBDA_TIME
    workers: int | None = None
    trace_path: str | None = None

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algo!r}; valid: {ALGORITHMS}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown environment variant {self.variant!r}; valid: {VARIANTS}")
        if isinstance(self.scenario, int):
            if self.scenario in SINGLE_CRANE_SCENARIOS and self.variant != "spge":
                raise ConfigError(
                    f"scenario {self.scenario} is single-crane and requires --env spge")
            if self.scenario in MULTI_CRANE_SCENARIOS and self.variant == "spge":
                raise ConfigError(
                    f"scenario {self.scenario} is multi-crane; use spge-mc or spaec")
            if self.scenario not in SINGLE_CRANE_SCENARIOS + MULTI_CRANE_SCENARIOS:
                scenario_spec(self.scenario)  # raises with the valid-id message
        else:
            if self.variant == "spge" and self.scenario.num_cranes != 1:
                raise ConfigError("spge is single-crane; custom scenario has num_cranes > 1")
        if self.total_timesteps < 0:
            raise ConfigError("total_timesteps must be non-negative")
        if self.repetitions is not None and self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.eval_every is not None and self.eval_every < 1:
            raise ConfigError("eval_every must be >= 1")
        if self.eval_episodes < 1:
            raise ConfigError("eval_episodes must be >= 1")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.trace_path is not None and self.resolved_workers != 1:
            raise ConfigError("tracing requires workers = 1")

    # -- resolved values ----------------------------------------------------

    def resolved_scenario(self, seed: int = 0) -> ScenarioSpec:
        if isinstance(self.scenario, int):
            return scenario_spec(self.scenario, seed=seed)
        return self.scenario

    @property
    def resolved_repetitions(self) -> int:
        if self.repetitions is not None:
            return self.repetitions
        return DEFAULT_REPS_SINGLE if self.variant == "spge" else DEFAULT_REPS_MULTI

    @property
    def resolved_eval_every(self) -> int:
        if self.eval_every is not None:
            return self.eval_every
        sid = self.scenario if isinstance(self.scenario, int) else None
        return default_eval_every(sid)

    @property
    def resolved_workers(self) -> int:
        if self.workers is not None:
            return self.workers
        raw = os.environ.get(WORKERS_ENV_VAR, "1")
        try:
            parsed = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV_VAR}={raw!r} is not an integer") from exc
        if parsed < 1:
            raise ConfigError(f"{WORKERS_ENV_VAR} must be >= 1")
        return parsed

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        scenario = self.scenario if isinstance(self.scenario, int) else self.scenario.to_dict()
        return {
            "scenario": scenario,
            "algo": self.algo,
            "env": self.variant,
            "reps": self.repetitions,
            "total_timesteps": self.total_timesteps,
            "eval_every": self.eval_every,
            "eval_episodes": self.eval_episodes,
            "seed": self.seed,
            "out": self.out_dir,
            "algo_config": self.algo_config.to_dict(),
            "time_model": self.time_model.to_dict(),
            "lambda_time": self.lambda_time,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"scenario", "algo", "env", "reps", "total_timesteps", "eval_every",
                 "eval_episodes", "seed", "out", "algo_config", "time_model",
                 "lambda_time", "workers", "trace"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for required in ("scenario", "algo", "env", "total_timesteps", "out"):
            if required not in d:
                raise ConfigError(f"config is missing required field {required!r}")
        scenario = d["scenario"]
        if not isinstance(scenario, int):
            scenario = ScenarioSpec.from_dict(scenario)
        return cls(
            scenario=scenario,
            algo=d["algo"],
            variant=d["env"],
            total_timesteps=int(d["total_timesteps"]),
            out_dir=str(d["out"]),
            repetitions=None if d.get("reps") is None else int(d["reps"]),
            eval_every=None if d.get("eval_every") is None else int(d["eval_every"]),
            eval_episodes=int(d.get("eval_episodes", 10)),
            seed=int(d.get("seed", 0)),
            algo_config=AlgoConfig.from_dict(d.get("algo_config", {})),
            time_model=TimeModel.from_dict(d["time_model"]) if "time_model" in d else TimeModel(),
            lambda_time=float(d.get("lambda_time", DEFAULT_LAMBDA_TIME)),
            workers=None if d.get("workers") is None else int(d["workers"]),
            trace_path=d.get("trace"),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            payload = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(payload)
