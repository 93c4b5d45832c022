"""Multi-crane stowage environments with an explicit operation clock.

Two formulations over the same clocked core:

* ``MultiCraneEnv`` — one agent, composite (container, crane) actions.
* ``AgentCycleEnv`` — one agent per crane sharing a policy; cranes are
  activated in a fixed order (lowest crane index first) and each action is
  just a container pick for the active crane.

Each crane owns a contiguous sublist of the target sequence and a private
cursor. Executing a pick occupies the crane for
``t_load + shifters * t_shift`` seconds; the clock advances automatically to
the next crane-idle decision point, so every decision is requested in a state
with at least one valid action.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO

import numpy as np

from ..errors import ConfigError, EpisodeActiveError, EpisodeDoneError
from ..model import GROUP_NONE, GridState, ProblemInstance, extract_container, occupied_above, place_container
from .spge import DEFAULT_INVALID_PENALTY, StepResult, grid_features

#: Reward weight on operation time, in lifts-worth of busy time per shifter unit.
DEFAULT_LAMBDA_TIME = 0.5

IDLE = -1  # "operating" sentinel for a crane not carrying a container
EXHAUSTED = -1  # "sequencer target" sentinel for a crane with no targets left


@dataclass(frozen=True)
class TimeModel:
    """Seconds per lift and per shifter move."""

    t_load: float = 60.0
    t_shift: float = 50.0

    def __post_init__(self):
        if self.t_load <= 0 or self.t_shift <= 0:
            raise ConfigError("time model durations must be positive")

    def duration(self, shifters: int) -> float:
        return self.t_load + shifters * self.t_shift

    def to_dict(self) -> dict:
        return {"t_load": self.t_load, "t_shift": self.t_shift}

    @classmethod
    def from_dict(cls, d: dict) -> "TimeModel":
        return cls(float(d["t_load"]), float(d["t_shift"]))


@dataclass
class CraneState:
    """Busy-until time, in-flight container origin, private sequencer cursor."""

    free_at: float = 0.0
    operating: int = IDLE
    cursor: int = 0


class _ClockedEnv:
    """State and transition core shared by both multi-crane formulations."""

    def __init__(
        self,
        instance: ProblemInstance,
        time_model: TimeModel | None = None,
        lambda_time: float = DEFAULT_LAMBDA_TIME,
        invalid_penalty: float = DEFAULT_INVALID_PENALTY,
        normalize: bool = True,
        trace: IO[str] | None = None,
    ):
        self.instance = instance
        self.time_model = time_model or TimeModel()
        self.lambda_time = float(lambda_time)
        self.invalid_penalty = float(invalid_penalty)
        self.normalize = normalize
        self._trace = trace
        self._vessel_coords = instance.spec.vessel.coord_array()
        self._yard_coords = instance.spec.yard.coord_array()
        self._obs_bounds = self._feature_bounds()
        self.reset()

    # -- dimensions -------------------------------------------------------

    @property
    def num_cranes(self) -> int:
        return self.instance.spec.num_cranes

    @property
    def yard_capacity(self) -> int:
        return self.instance.spec.yard.capacity

    @property
    def observation_dim(self) -> int:
        spec = self.instance.spec
        base = 5 * (spec.vessel.capacity + spec.yard.capacity) + 6
        return base + 3 * self.num_cranes + self._extra_obs_dim()

    def _extra_obs_dim(self) -> int:
        return 0

    # -- episode state ----------------------------------------------------

    def reset(self) -> tuple[np.ndarray, np.ndarray]:
        self.vessel: GridState = self.instance.vessel0.copy()
        self.yard: GridState = self.instance.yard0.copy()
        self.clock: float = 0.0
        self.cranes: list[CraneState] = [CraneState() for _ in range(self.num_cranes)]
        self.steps: int = 0
        self._shifter_total: int = 0
        self._reward_total: float = 0.0
        if not self.done:
            self._advance_to_decision()
        mask = self.action_mask() if not self.done else np.zeros(self.mask_length, dtype=bool)
        return self.observation(), mask

    @property
    def done(self) -> bool:
        return all(self._exhausted(c) for c in range(self.num_cranes))

    def _exhausted(self, crane: int) -> bool:
        return self.cranes[crane].cursor >= len(self.instance.crane_partition[crane])

    def _idle(self, crane: int) -> bool:
        return self.cranes[crane].free_at <= self.clock

    def crane_target(self, crane: int) -> int | None:
        """Flat vessel slot id of the crane's current sequencer target."""
        if self._exhausted(crane):
            return None
        return self.instance.crane_partition[crane][self.cranes[crane].cursor]

    def _target_placeable(self, crane: int) -> bool:
        target = self.crane_target(crane)
        if target is None:
            return False
        tiers = self.instance.spec.vessel.tiers
        return target % tiers == 0 or bool(self.vessel.occupancy[target - 1])

    def _valid_containers(self, crane: int) -> np.ndarray:
        """Boolean validity over yard slots for one crane (idle state not included)."""
        target = self.crane_target(crane)
        if target is None or not self._target_placeable(crane):
            return np.zeros(self.yard_capacity, dtype=bool)
        required = self.vessel.group[target]
        return self.yard.occupancy.astype(bool) & (self.yard.group == required)

    def _crane_can_act(self, crane: int) -> bool:
        return (
            self._idle(crane)
            and not self._exhausted(crane)
            and bool(self._valid_containers(crane).any())
        )

    def _advance_to_decision(self) -> None:
        """Settle arrivals and move the clock until some crane can act."""
        self._settle_arrivals()
        while not any(self._crane_can_act(c) for c in range(self.num_cranes)):
            busy = [c.free_at for c in self.cranes if c.free_at > self.clock]
            if not busy:
                raise RuntimeError("no valid action and no busy crane; instance invariant broken")
            self.clock = min(busy)
            self._settle_arrivals()

    def _settle_arrivals(self) -> None:
        for crane in self.cranes:
            if crane.free_at <= self.clock:
                crane.operating = IDLE

    def _execute(self, container: int, crane: int) -> StepResult:
        target = self.crane_target(crane)
        group, shifters, self.yard = extract_container(self.yard, container)
        self.vessel = place_container(self.vessel, target, group)
        state = self.cranes[crane]
        duration = self.time_model.duration(shifters)
        start = self.clock
        state.free_at = start + duration
        state.operating = container
        state.cursor += 1
        self._shifter_total += shifters
        reward = -float(shifters) - self.lambda_time * duration / self.time_model.t_load

        if self.done:
            # No decisions remain: fast-forward to completion.
            self.clock = max(c.free_at for c in self.cranes)
            self._settle_arrivals()
        else:
            self._advance_to_decision()
        return self._finish_step(container, crane, start, shifters, reward, invalid=False)

    def _invalid_step(self, action: int, crane: int) -> StepResult:
        reward = -self.invalid_penalty
        return self._finish_step(action, crane, self.clock, 0, reward, invalid=True)

    def _finish_step(self, action: int, crane: int, start: float, shifters: int,
                     reward: float, invalid: bool) -> StepResult:
        self.steps += 1
        self._reward_total += reward
        info = {
            "shifters": shifters,
            "invalid": invalid,
            "crane": crane,
            "t": start,
            "tau": self.cranes[crane].free_at,
            "makespan": self.makespan_so_far(),
        }
        if self._trace is not None:
            entry = {"step": self.steps - 1, "action": int(action), "shifters": shifters,
                     "reward": reward, "invalid": invalid, "crane": crane,
                     "t": start, "tau": info["tau"], "makespan": info["makespan"]}
            self._trace.write(json.dumps(entry) + "\n")
        return StepResult(self.observation(), reward, self.done, info)

    # -- KPIs ---------------------------------------------------------------

    def makespan_so_far(self) -> float:
        return max(c.free_at for c in self.cranes)

    def makespan(self) -> float:
        """Seconds until the last crane finishes; the operation-time KPI."""
        if not self.done:
            raise EpisodeActiveError("makespan is defined only once done")
        return self.makespan_so_far()

    def episode_shifters(self) -> int:
        if not self.done:
            raise EpisodeActiveError("episode_shifters is defined only once done")
        return self._shifter_total

    def episode_reward(self) -> float:
        if not self.done:
            raise EpisodeActiveError("episode_reward is defined only once done")
        return self._reward_total

    def shifter_counts(self) -> np.ndarray:
        return occupied_above(self.yard)

    def clone(self):
        other = object.__new__(type(self))
        other.instance = self.instance
        other.time_model = self.time_model
        other.lambda_time = self.lambda_time
        other.invalid_penalty = self.invalid_penalty
        other.normalize = self.normalize
        other._trace = None
        other._vessel_coords = self._vessel_coords
        other._yard_coords = self._yard_coords
        other._obs_bounds = self._obs_bounds
        other.vessel = self.vessel.copy()
        other.yard = self.yard.copy()
        other.clock = self.clock
        other.cranes = [CraneState(c.free_at, c.operating, c.cursor) for c in self.cranes]
        other.steps = self.steps
        other._shifter_total = self._shifter_total
        other._reward_total = self._reward_total
        return other

    # -- observations -------------------------------------------------------

    def active_crane(self) -> int:
        """Lowest-index idle, non-exhausted crane that has a valid pick."""
        if self.done:
            raise EpisodeDoneError("no active crane once the episode is done")
        for c in range(self.num_cranes):
            if self._crane_can_act(c):
                return c
        raise RuntimeError("auto-advance left no actionable crane")

    def raw_observation(self) -> np.ndarray:
        parts = [
            grid_features(self.vessel, self._vessel_coords),
            grid_features(self.yard, self._yard_coords),
            self._target_descriptor(),
            self._availability_vector(),
            self._operating_vector(),
            self._sequencer_vector(),
        ]
        extra = self._extra_obs()
        if extra is not None:
            parts.append(extra)
        return np.concatenate(parts)

    def observation(self) -> np.ndarray:
        obs = self.raw_observation()
        if self.normalize:
            lo, hi = self._obs_bounds
            span = np.where(hi > lo, hi - lo, 1.0)
            obs = (obs - lo) / span
        return obs

    def _extra_obs(self) -> np.ndarray | None:
        return None

    def _target_descriptor(self) -> np.ndarray:
        if self.done:
            return np.array([-1, 0, 0, 0, 0, GROUP_NONE], dtype=np.float64)
        target = self.crane_target(self.active_crane())
        coord = self._vessel_coords[target]
        return np.array([
            target, coord[0], coord[1], coord[2],
            self.vessel.occupancy[target], self.vessel.group[target],
        ], dtype=np.float64)

    def _availability_vector(self) -> np.ndarray:
        return np.array([max(c.free_at - self.clock, 0.0) for c in self.cranes])

    def _operating_vector(self) -> np.ndarray:
        return np.array([float(c.operating) for c in self.cranes])

    def _sequencer_vector(self) -> np.ndarray:
        out = np.empty(self.num_cranes)
        for c in range(self.num_cranes):
            target = self.crane_target(c)
            out[c] = EXHAUSTED if target is None else target
        return out

    def _feature_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        spec = self.instance.spec
        lo_parts, hi_parts = [], []
        for grid in (spec.vessel, spec.yard):
            lo_parts.append(np.tile([1.0, 1.0, 1.0, 0.0, float(GROUP_NONE)], grid.capacity))
            hi_parts.append(np.tile([
                float(grid.bays), float(grid.rows), float(grid.tiers),
                1.0, float(spec.num_groups - 1),
            ], grid.capacity))
        lo_parts.append(np.array([-1.0, 0.0, 0.0, 0.0, 0.0, float(GROUP_NONE)]))
        hi_parts.append(np.array([
            float(spec.vessel.capacity - 1), float(spec.vessel.bays),
            float(spec.vessel.rows), float(spec.vessel.tiers),
            1.0, float(spec.num_groups - 1),
        ]))
        k = self.num_cranes
        max_duration = self.time_model.duration(spec.yard.tiers - 1)
        lo_parts.extend([np.zeros(k), np.full(k, -1.0), np.full(k, -1.0)])
        hi_parts.extend([
            np.full(k, max_duration),
            np.full(k, float(spec.yard.capacity - 1)),
            np.full(k, float(spec.vessel.capacity - 1)),
        ])
        extra = self._extra_obs_dim()
        if extra:
            lo_parts.append(np.zeros(extra))
            hi_parts.append(np.ones(extra))
        return np.concatenate(lo_parts), np.concatenate(hi_parts)


class MultiCraneEnv(_ClockedEnv):
    """Single-agent multi-crane formulation with composite (container, crane) actions."""

    @property
    def n_actions(self) -> int:
        return self.yard_capacity * self.num_cranes

    @property
    def mask_length(self) -> int:
        return self.n_actions

    def decode_action(self, action: int) -> tuple[int, int]:
        """Composite index -> (container yard slot, crane)."""
        if not 0 <= action < self.n_actions:
            raise ValueError(f"composite action {action} out of range")
        return action % self.yard_capacity, action // self.yard_capacity

    def encode_action(self, container: int, crane: int) -> int:
        return crane * self.yard_capacity + container

    def action_mask(self) -> np.ndarray:
        if self.done:
            raise EpisodeDoneError("no action mask for a finished episode")
        blocks = []
        for c in range(self.num_cranes):
            if self._idle(c):
                blocks.append(self._valid_containers(c))
            else:
                blocks.append(np.zeros(self.yard_capacity, dtype=bool))
        return np.concatenate(blocks)

    def step(self, action: int) -> StepResult:
        if self.done:
            raise EpisodeDoneError("episode is finished; reset() before stepping")
        container, crane = self.decode_action(int(action))
        if not (self._idle(crane) and self._valid_containers(crane)[container]):
            return self._invalid_step(int(action), crane)
        return self._execute(container, crane)


class AgentCycleEnv(_ClockedEnv):
    """Per-crane agents under a shared policy, activated lowest-crane-first.

    Observations append a one-hot identity of the active crane so a shared
    policy can tell whose sequencer target applies.
    """

    @property
    def n_actions(self) -> int:
        return self.yard_capacity

    @property
    def mask_length(self) -> int:
        return self.n_actions

    def _extra_obs_dim(self) -> int:
        return self.num_cranes

    def _extra_obs(self) -> np.ndarray:
        onehot = np.zeros(self.num_cranes)
        if not self.done:
            onehot[self.active_crane()] = 1.0
        return onehot

    def action_mask(self) -> np.ndarray:
        if self.done:
            raise EpisodeDoneError("no action mask for a finished episode")
        return self._valid_containers(self.active_crane())

    def step(self, action: int) -> StepResult:
        if self.done:
            raise EpisodeDoneError("episode is finished; reset() before stepping")
        container = int(action)
        crane = self.active_crane()
        if not (0 <= container < self.yard_capacity
                and self._valid_containers(crane)[container]):
            return self._invalid_step(container, crane)
        return self._execute(container, crane)
