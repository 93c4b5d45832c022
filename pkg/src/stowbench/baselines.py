"""Non-learning reference policies and exhaustive optimizers.

The brute-force searches run through the real environment transition
functions (cloned per branch), never a parallel model, so oracle/environment
agreement is a meaningful correctness check. Enumeration guards keep the
worst case below roughly a million environment steps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envs.clocked import MultiCraneEnv, TimeModel
from .envs.spge import SpgeEnv
from .errors import ConfigError
from .model import ProblemInstance


@dataclass(frozen=True)
class OracleResult:
    best_value: float
    best_sequence: tuple[int, ...]
    nodes_explored: int


@dataclass(frozen=True)
class EpisodeStats:
    shifters: int
    makespan: float | None
    reward_total: float
    steps: int


def random_action(mask: np.ndarray, rng: np.random.Generator) -> int:
    valid = np.flatnonzero(mask)
    return int(valid[rng.integers(0, len(valid))])


def greedy_min_shifter_action(env) -> int:
    """Mask-valid action with the fewest current shifters; ties to the lowest index.

    For composite-action environments the blocker count of an action is that
    of its container slot, so the tie-break prefers the lowest crane index at
    equal container cost.
    """
    mask = env.action_mask()
    counts = env.shifter_counts()
    if counts.shape != mask.shape:  # composite (container, crane) space
        counts = np.tile(counts, mask.shape[0] // counts.shape[0])
    costs = np.where(mask, counts, np.inf)
    best = int(np.argmin(costs))
    if not mask[best]:
        raise ConfigError("no valid action available")
    return best


def run_random_episode(env, rng: np.random.Generator) -> EpisodeStats:
    """Uniform choice among mask-valid actions until done."""
    return _run_policy(env, lambda e: random_action(e.action_mask(), rng))


def run_greedy_episode(env) -> EpisodeStats:
    """Greedy min-shifter policy until done."""
    return _run_policy(env, greedy_min_shifter_action)


def _run_policy(env, pick) -> EpisodeStats:
    env.reset()
    total_reward = 0.0
    steps = 0
    while not env.done:
        result = env.step(pick(env))
        total_reward += result.reward
        steps += 1
    makespan = env.makespan() if hasattr(env, "makespan") else None
    return EpisodeStats(
        shifters=env.episode_shifters(),
        makespan=makespan,
        reward_total=total_reward,
        steps=steps,
    )


def brute_force_min_shifters(instance: ProblemInstance, max_containers: int = 8) -> OracleResult:
    """Exhaustive search over valid container orders for the fixed sequencer."""
    m = len(instance.targets)
    if m > max_containers:
        raise ConfigError(
            f"instance has {m} containers; enumeration guarded at {max_containers}"
        )
    env = SpgeEnv(instance, normalize=False)
    best = {"value": np.inf, "sequence": (), "nodes": 0}

    def search(node: SpgeEnv, picked: tuple[int, ...], cost: int) -> None:
        best["nodes"] += 1
        if node.done:
            if cost < best["value"]:
                best["value"] = cost
                best["sequence"] = picked
            return
        for action in np.flatnonzero(node.action_mask()):
            child = node.clone()
            result = child.step(int(action))
            search(child, picked + (int(action),), cost - int(result.reward))

    search(env, (), 0)
    return OracleResult(float(best["value"]), best["sequence"], best["nodes"])


def brute_force_min_makespan(
    instance: ProblemInstance,
    time_model: TimeModel | None = None,
    max_containers: int = 6,
    max_cranes: int = 3,
) -> OracleResult:
    """Exhaustive search over interleaved (container, crane) decisions."""
    m = len(instance.targets)
    k = instance.spec.num_cranes
    if m > max_containers or k > max_cranes:
        raise ConfigError(
            f"instance has m={m}, k={k}; enumeration guarded at "
            f"m<={max_containers}, k<={max_cranes}"
        )
    env = MultiCraneEnv(instance, time_model=time_model, lambda_time=0.0, normalize=False)
    best = {"value": np.inf, "sequence": (), "nodes": 0}

    def search(node: MultiCraneEnv, picked: tuple[int, ...]) -> None:
        best["nodes"] += 1
        if node.done:
            span = node.makespan()
            if span < best["value"]:
                best["value"] = span
                best["sequence"] = picked
            return
        for action in np.flatnonzero(node.action_mask()):
            child = node.clone()
            child.step(int(action))
            search(child, picked + (int(action),))

    search(env, ())
    return OracleResult(float(best["value"]), best["sequence"], best["nodes"])
