"""Single-crane stowage environment: sequencer-driven targets, masked container picks.

An episode iterates over the instance's target vessel slots in sequencer
order. The agent's action is a yard slot id; a valid pick extracts the
container (blockers above it drop back onto the same stack), places it on the
current target, and earns ``-shifters`` reward. Invalid picks cost a fixed
penalty and leave the state and the sequencer untouched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Any

import numpy as np

from ..errors import EpisodeActiveError, EpisodeDoneError
from ..model import (
    GROUP_NONE,
    GridState,
    ProblemInstance,
    extract_container,
    occupied_above,
    place_container,
)

#: Default penalty for actions the mask would have filtered out.
DEFAULT_INVALID_PENALTY = 100.0


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    info: dict[str, Any] = field(default_factory=dict)


def grid_features(grid: GridState, coords: np.ndarray) -> np.ndarray:
    """Flattened per-slot records (bay, row, tier, occupancy, group)."""
    feats = np.empty((grid.spec.capacity, 5), dtype=np.float64)
    feats[:, :3] = coords
    feats[:, 3] = grid.occupancy
    feats[:, 4] = grid.group
    return feats.reshape(-1)


class SpgeEnv:
    """Basic stowage planning environment (one crane, container-selection actions)."""

    def __init__(
        self,
        instance: ProblemInstance,
        invalid_penalty: float = DEFAULT_INVALID_PENALTY,
        normalize: bool = True,
        trace: IO[str] | None = None,
    ):
        self.instance = instance
        self.invalid_penalty = float(invalid_penalty)
        self.normalize = normalize
        self._trace = trace
        self._vessel_coords = instance.spec.vessel.coord_array()
        self._yard_coords = instance.spec.yard.coord_array()
        self._obs_bounds = self._feature_bounds()
        self.reset()

    # -- spaces ---------------------------------------------------------

    @property
    def n_actions(self) -> int:
        return self.instance.spec.yard.capacity

    @property
    def observation_dim(self) -> int:
        spec = self.instance.spec
        return 5 * (spec.vessel.capacity + spec.yard.capacity) + 6

    @property
    def num_targets(self) -> int:
        return len(self.instance.targets)

    @property
    def done(self) -> bool:
        return self.cursor >= self.num_targets

    # -- episode API ------------------------------------------------------

    def reset(self) -> tuple[np.ndarray, np.ndarray]:
        self.vessel: GridState = self.instance.vessel0.copy()
        self.yard: GridState = self.instance.yard0.copy()
        self.cursor: int = 0
        self.steps: int = 0
        self._shifter_total: int = 0
        self._reward_total: float = 0.0
        obs = self.observation()
        mask = self.action_mask() if not self.done else np.zeros(self.n_actions, dtype=bool)
        return obs, mask

    def step(self, action: int) -> StepResult:
        if self.done:
            raise EpisodeDoneError("episode is finished; reset() before stepping")
        action = int(action)
        target = self.instance.targets[self.cursor]
        valid = self._valid(action)
        if valid:
            group, shifters, self.yard = extract_container(self.yard, action)
            self.vessel = place_container(self.vessel, target, group)
            self.cursor += 1
            reward = -float(shifters)
            self._shifter_total += shifters
        else:
            shifters = 0
            reward = -self.invalid_penalty
        self.steps += 1
        self._reward_total += reward
        info = {"shifters": shifters, "invalid": not valid}
        self._write_trace(action, shifters, reward, info)
        return StepResult(self.observation(), reward, self.done, info)

    def action_mask(self) -> np.ndarray:
        """Validity per yard slot: occupied and matching the current target's group."""
        if self.done:
            raise EpisodeDoneError("no action mask for a finished episode")
        required = self.vessel.group[self.instance.targets[self.cursor]]
        return (self.yard.occupancy.astype(bool)) & (self.yard.group == required)

    def episode_shifters(self) -> int:
        """Total shifters over the episode's valid steps; the evaluation KPI."""
        if not self.done:
            raise EpisodeActiveError("episode_shifters is defined only once done")
        return self._shifter_total

    def episode_reward(self) -> float:
        if not self.done:
            raise EpisodeActiveError("episode_reward is defined only once done")
        return self._reward_total

    def shifter_counts(self) -> np.ndarray:
        """Current per-slot blocker counts (0 for empty slots); used by baselines."""
        return occupied_above(self.yard)

    def clone(self) -> "SpgeEnv":
        other = object.__new__(SpgeEnv)
        other.instance = self.instance
        other.invalid_penalty = self.invalid_penalty
        other.normalize = self.normalize
        other._trace = None
        other._vessel_coords = self._vessel_coords
        other._yard_coords = self._yard_coords
        other._obs_bounds = self._obs_bounds
        other.vessel = self.vessel.copy()
        other.yard = self.yard.copy()
        other.cursor = self.cursor
        other.steps = self.steps
        other._shifter_total = self._shifter_total
        other._reward_total = self._reward_total
        return other

    # -- observations -----------------------------------------------------

    def raw_observation(self) -> np.ndarray:
        """Unnormalized feature vector: slot records plus the target descriptor."""
        return np.concatenate([
            grid_features(self.vessel, self._vessel_coords),
            grid_features(self.yard, self._yard_coords),
            self._target_descriptor(),
        ])

    def observation(self) -> np.ndarray:
        obs = self.raw_observation()
        if self.normalize:
            lo, hi = self._obs_bounds
            span = np.where(hi > lo, hi - lo, 1.0)
            obs = (obs - lo) / span
        return obs

    def _target_descriptor(self) -> np.ndarray:
        """Full record of the current target slot: id, bay, row, tier, occupancy, group."""
        if self.done:
            # Terminal padding; only seen by the final StepResult's observation.
            return np.array([-1, 0, 0, 0, 0, GROUP_NONE], dtype=np.float64)
        target = self.instance.targets[self.cursor]
        coord = self._vessel_coords[target]
        return np.array([
            target, coord[0], coord[1], coord[2],
            self.vessel.occupancy[target], self.vessel.group[target],
        ], dtype=np.float64)

    def _feature_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        spec = self.instance.spec
        lo_parts, hi_parts = [], []
        for grid in (spec.vessel, spec.yard):
            lo = np.tile([1.0, 1.0, 1.0, 0.0, float(GROUP_NONE)], grid.capacity)
            hi = np.tile([
                float(grid.bays), float(grid.rows), float(grid.tiers),
                1.0, float(spec.num_groups - 1),
            ], grid.capacity)
            lo_parts.append(lo)
            hi_parts.append(hi)
        lo_parts.append(np.array([-1.0, 0.0, 0.0, 0.0, 0.0, float(GROUP_NONE)]))
        hi_parts.append(np.array([
            float(spec.vessel.capacity - 1), float(spec.vessel.bays),
            float(spec.vessel.rows), float(spec.vessel.tiers),
            1.0, float(spec.num_groups - 1),
        ]))
        return np.concatenate(lo_parts), np.concatenate(hi_parts)

    # -- internals --------------------------------------------------------

    def _valid(self, action: int) -> bool:
        if not 0 <= action < self.n_actions or not self.yard.occupancy[action]:
            return False
        required = self.vessel.group[self.instance.targets[self.cursor]]
        return bool(self.yard.group[action] == required)

    def _write_trace(self, action: int, shifters: int, reward: float, info: dict) -> None:
        if self._trace is None:
            return
        entry = {"step": self.steps - 1, "action": action, "shifters": shifters,
                 "reward": reward, "invalid": info["invalid"]}
        self._trace.write(json.dumps(entry) + "\n")
