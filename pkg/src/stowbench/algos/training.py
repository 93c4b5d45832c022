"""Training loop with interleaved deterministic evaluation.

Evaluation uses the greedy/argmax policy on a fixed set of fresh instances
(derived from the run seed), so curve points are comparable across the run.
Everything is a pure function of (factory, algorithm, config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..envs.factory import EpisodeFactory
from ..errors import ConfigError
from .a2c import A2cAgent
from .config import ALGORITHMS, AlgoConfig
from .dqn import DqnAgent
from .ppo import PpoAgent
from .qrdqn import QrdqnAgent
from .trpo import TrpoAgent

_AGENTS = {
    "dqn": DqnAgent,
    "qrdqn": QrdqnAgent,
    "a2c": A2cAgent,
    "ppo": PpoAgent,
    "trpo": TrpoAgent,
}


def make_agent(algo: str, obs_dim: int, n_actions: int, cfg: AlgoConfig, seed: int):
    if algo not in _AGENTS:
        raise ConfigError(f"unknown algorithm {algo!r}; expected one of {ALGORITHMS}")
    return _AGENTS[algo](obs_dim, n_actions, cfg, seed)


@dataclass(frozen=True)
class CurvePoint:
    timestep: int
    mean_shifters: float
    mean_optime: float


@dataclass
class RunRecord:
    algo: str
    variant: str
    seed: int
    scenario: dict
    algo_config: dict
    time_model: dict
    lambda_time: float
    total_timesteps: int
    eval_every: int
    eval_episodes: int
    curve: list[CurvePoint] = field(default_factory=list)

    def __post_init__(self):
        steps = [p.timestep for p in self.curve]
        if steps != sorted(set(steps)):
            raise ConfigError("curve timesteps must be strictly increasing")

    @property
    def final_shifters(self) -> float:
        return self.curve[-1].mean_shifters

    @property
    def final_optime(self) -> float:
        return self.curve[-1].mean_optime

    def to_dict(self) -> dict:
        return {
            "algo": self.algo,
            "variant": self.variant,
            "seed": self.seed,
            "scenario": self.scenario,
            "algo_config": self.algo_config,
            "time_model": self.time_model,
            "lambda_time": self.lambda_time,
            "total_timesteps": self.total_timesteps,
            "eval_every": self.eval_every,
            "eval_episodes": self.eval_episodes,
            "curve": [[p.timestep, p.mean_shifters, p.mean_optime] for p in self.curve],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        curve = [CurvePoint(int(t), float(s), float(o)) for t, s, o in d["curve"]]
        return cls(
            algo=d["algo"], variant=d["variant"], seed=int(d["seed"]),
            scenario=d["scenario"], algo_config=d["algo_config"],
            time_model=d["time_model"], lambda_time=float(d["lambda_time"]),
            total_timesteps=int(d["total_timesteps"]), eval_every=int(d["eval_every"]),
            eval_episodes=int(d["eval_episodes"]), curve=curve,
        )


def run_episode_greedy(env, agent) -> tuple[int, float | None]:
    """Greedy rollout; returns (episode shifters, makespan or None)."""
    obs, mask = env.reset()
    while not env.done:
        action = agent.greedy_action(obs, mask)
        result = env.step(action)
        obs = result.observation
        mask = env.action_mask() if not env.done else mask
    makespan = env.makespan() if hasattr(env, "makespan") else None
    return env.episode_shifters(), makespan


def evaluate(agent, factory: EpisodeFactory, eval_episodes: int) -> tuple[float, float]:
    """Mean (shifters, operation time) of greedy play on the fixed eval set.

    Single-crane episodes have no clock; their operation time is the serial
    equivalent m * t_load + shifters * t_shift under the factory's time model.
    """
    shifters, optimes = [], []
    tm = factory.time_model
    for j in range(eval_episodes):
        env = factory.eval_env(j)
        s, makespan = run_episode_greedy(env, agent)
        shifters.append(s)
        if makespan is None:
            makespan = env.num_targets * tm.t_load + s * tm.t_shift
        optimes.append(makespan)
    return float(np.mean(shifters)), float(np.mean(optimes))


def train(
    factory: EpisodeFactory,
    algo: str,
    cfg: AlgoConfig,
    total_timesteps: int,
    eval_every: int,
    eval_episodes: int,
    seed: int,
    torch_threads: int = 1,
) -> RunRecord:
    """Train one run and record its evaluation curve.

    The loop counts environment steps; evaluation happens before training, at
    every ``eval_every`` step boundary, and at the final step.
    """
    if total_timesteps < 0:
        raise ConfigError("total_timesteps must be non-negative")
    if eval_every <= 0 or eval_episodes <= 0:
        raise ConfigError("eval_every and eval_episodes must be positive")
    torch.set_num_threads(torch_threads)
    agent = make_agent(algo, factory.observation_dim, factory.n_actions, cfg, seed)

    record = RunRecord(
        algo=algo, variant=factory.variant, seed=seed,
        scenario=factory.scenario.to_dict(), algo_config=cfg.to_dict(),
        time_model=factory.time_model.to_dict(), lambda_time=factory.lambda_time,
        total_timesteps=total_timesteps, eval_every=eval_every,
        eval_episodes=eval_episodes,
    )

    def eval_point(timestep: int) -> None:
        mean_shifters, mean_optime = evaluate(agent, factory, eval_episodes)
        record.curve.append(CurvePoint(timestep, mean_shifters, mean_optime))

    eval_point(0)
    if total_timesteps == 0:
        return record
    if factory.scenario.num_containers == 0:
        raise ConfigError("cannot train on scenarios with zero containers")

    episode_index = 0
    env = factory.training_env(episode_index)
    obs, mask = env.reset()
    zero_mask = np.zeros(factory.n_actions, dtype=bool)
    for step in range(1, total_timesteps + 1):
        agent.set_progress(step / total_timesteps)
        action = agent.select_action(obs, mask)
        result = env.step(action)
        done = result.done
        next_obs = result.observation
        next_mask = env.action_mask() if not done else zero_mask
        agent.observe(obs, mask, action, result.reward, next_obs, next_mask, done)
        if done:
            episode_index += 1
            env = factory.training_env(episode_index)
            obs, mask = env.reset()
        else:
            obs, mask = next_obs, next_mask
        if step % eval_every == 0:
            eval_point(step)
    if record.curve[-1].timestep != total_timesteps:
        eval_point(total_timesteps)
    return record
