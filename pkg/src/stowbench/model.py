"""Slot-grid data model: grids, scenarios, instance generation, stacking physics.

Vessel and yard are cubes of slots addressed by 1-based (bay, row, tier)
coordinates, tier 1 at the bottom. A slot's flat id is
``(bay-1)*rows*tiers + (row-1)*tiers + (tier-1)``, so one (bay, row) column
occupies a contiguous id range and stack operations are cheap slices.

All state transitions are value-semantic: operations return new GridState
objects and never mutate their inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, PlacementError, SlotEmptyError
from .seeding import make_rng

#: Sentinel for "no group": empty yard slots and vessel slots without a requirement.
GROUP_NONE = -1


@dataclass(frozen=True)
class SlotCoord:
    """1-based (bay, row, tier) address of one slot."""

    bay: int
    row: int
    tier: int


@dataclass(frozen=True)
class SlotRecord:
    """Observable state of one slot: coordinates, occupancy, group."""

    coord: SlotCoord
    occupancy: int
    group: int


@dataclass(frozen=True)
class GridSpec:
    """Dimensions of a slot cube."""

    bays: int
    rows: int
    tiers: int

    def __post_init__(self):
        if self.bays < 1 or self.rows < 1 or self.tiers < 1:
            raise ConfigError(f"grid dimensions must be positive, got {self}")

    @property
    def capacity(self) -> int:
        return self.bays * self.rows * self.tiers

    @property
    def columns(self) -> int:
        """Number of (bay, row) stacks."""
        return self.bays * self.rows

    def slot_id(self, coord: SlotCoord) -> int:
        if not (1 <= coord.bay <= self.bays and 1 <= coord.row <= self.rows
                and 1 <= coord.tier <= self.tiers):
            raise ConfigError(f"{coord} outside grid {self}")
        return ((coord.bay - 1) * self.rows + (coord.row - 1)) * self.tiers + (coord.tier - 1)

    def slot_coord(self, slot_id: int) -> SlotCoord:
        if not 0 <= slot_id < self.capacity:
            raise ConfigError(f"slot id {slot_id} outside grid {self}")
        bay, rest = divmod(slot_id, self.rows * self.tiers)
        row, tier = divmod(rest, self.tiers)
        return SlotCoord(bay + 1, row + 1, tier + 1)

    def column_of(self, slot_id: int) -> int:
        """Index of the (bay, row) stack containing the slot."""
        return slot_id // self.tiers

    def coord_array(self) -> np.ndarray:
        """(capacity, 3) int array of 1-based (bay, row, tier) per flat id."""
        ids = np.arange(self.capacity)
        bay = ids // (self.rows * self.tiers) + 1
        row = (ids // self.tiers) % self.rows + 1
        tier = ids % self.tiers + 1
        return np.column_stack([bay, row, tier])

    def to_dict(self) -> dict:
        return {"bays": self.bays, "rows": self.rows, "tiers": self.tiers}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(int(d["bays"]), int(d["rows"]), int(d["tiers"]))


class GridState:
    """Occupancy and group arrays over one grid, indexed by flat slot id."""

    __slots__ = ("spec", "occupancy", "group")

    def __init__(self, spec: GridSpec, occupancy: np.ndarray, group: np.ndarray):
        self.spec = spec
        self.occupancy = occupancy
        self.group = group

    @classmethod
    def empty(cls, spec: GridSpec) -> "GridState":
        return cls(
            spec,
            np.zeros(spec.capacity, dtype=np.int8),
            np.full(spec.capacity, GROUP_NONE, dtype=np.int64),
        )

    def copy(self) -> "GridState":
        return GridState(self.spec, self.occupancy.copy(), self.group.copy())

    def record(self, slot_id: int) -> SlotRecord:
        return SlotRecord(
            self.spec.slot_coord(slot_id),
            int(self.occupancy[slot_id]),
            int(self.group[slot_id]),
        )

    def occupied_count(self) -> int:
        return int(self.occupancy.sum())

    def stack_view(self, column: int) -> tuple[np.ndarray, np.ndarray]:
        """(occupancy, group) slices for one (bay, row) column, bottom to top."""
        t = self.spec.tiers
        return self.occupancy[column * t:(column + 1) * t], self.group[column * t:(column + 1) * t]

    def gravity_ok(self) -> bool:
        """True iff no occupied slot floats above an empty one in any stack."""
        occ = self.occupancy.reshape(self.spec.columns, self.spec.tiers)
        return bool(np.all(occ[:, 1:] <= occ[:, :-1]))

    def group_counts(self, num_groups: int) -> np.ndarray:
        """Occupied-slot count per group id 0..num_groups-1."""
        occupied_groups = self.group[self.occupancy.astype(bool)]
        return np.bincount(occupied_groups, minlength=num_groups)[:num_groups]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GridState)
            and self.spec == other.spec
            and np.array_equal(self.occupancy, other.occupancy)
            and np.array_equal(self.group, other.group)
        )

    def to_dict(self) -> dict:
        return {
            "occupancy": self.occupancy.astype(int).tolist(),
            "group": self.group.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, spec: GridSpec, d: dict) -> "GridState":
        occ = np.asarray(d["occupancy"], dtype=np.int8)
        grp = np.asarray(d["group"], dtype=np.int64)
        if occ.shape != (spec.capacity,) or grp.shape != (spec.capacity,):
            raise ConfigError("grid arrays do not match spec capacity")
        return cls(spec, occ, grp)


@dataclass(frozen=True)
class ScenarioSpec:
    """A generated-scenario description: grid sizes, container/group/crane counts, seed."""

    vessel: GridSpec
    yard: GridSpec
    num_containers: int
    num_groups: int
    num_cranes: int
    seed: int
    #: Fraction of the spare (non-target) vessel columns pre-filled at reset.
    vessel_preoccupied: float = 0.0

    def __post_init__(self):
        m = self.num_containers
        if m < 0:
            raise ConfigError("num_containers must be non-negative")
        if m > self.vessel.capacity or m > self.yard.capacity:
            raise ConfigError(
                f"num_containers {m} exceeds vessel ({self.vessel.capacity}) "
                f"or yard ({self.yard.capacity}) capacity"
            )
        if self.num_groups < 1 or (m > 0 and self.num_groups > m):
            raise ConfigError("need 1 <= num_groups <= num_containers")
        if self.num_cranes < 1:
            raise ConfigError("num_cranes must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not 0.0 <= self.vessel_preoccupied < 1.0:
            raise ConfigError("vessel_preoccupied must be in [0, 1)")

    def to_dict(self) -> dict:
        return {
            "vessel": self.vessel.to_dict(),
            "yard": self.yard.to_dict(),
            "num_containers": self.num_containers,
            "num_groups": self.num_groups,
            "num_cranes": self.num_cranes,
            "seed": self.seed,
            "vessel_preoccupied": self.vessel_preoccupied,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        return cls(
            vessel=GridSpec.from_dict(d["vessel"]),
            yard=GridSpec.from_dict(d["yard"]),
            num_containers=int(d["num_containers"]),
            num_groups=int(d["num_groups"]),
            num_cranes=int(d["num_cranes"]),
            seed=int(d["seed"]),
            vessel_preoccupied=float(d.get("vessel_preoccupied", 0.0)),
        )


@dataclass(frozen=True)
class ProblemInstance:
    """One generated scenario: initial grids, target order, crane partition."""

    spec: ScenarioSpec
    vessel0: GridState
    yard0: GridState
    targets: tuple[int, ...]
    crane_partition: tuple[tuple[int, ...], ...] = field(default=())

    def to_json(self) -> str:
        payload = {
            "spec": self.spec.to_dict(),
            "vessel": self.vessel0.to_dict(),
            "yard": self.yard0.to_dict(),
            "targets": list(self.targets),
            "crane_partition": [list(part) for part in self.crane_partition],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProblemInstance":
        d = json.loads(text)
        spec = ScenarioSpec.from_dict(d["spec"])
        return cls(
            spec=spec,
            vessel0=GridState.from_dict(spec.vessel, d["vessel"]),
            yard0=GridState.from_dict(spec.yard, d["yard"]),
            targets=tuple(int(t) for t in d["targets"]),
            crane_partition=tuple(tuple(int(t) for t in part) for part in d["crane_partition"]),
        )


def count_shifters(yard: GridState, slot_id: int) -> int:
    """Number of occupied slots strictly above ``slot_id`` in its stack."""
    if not yard.occupancy[slot_id]:
        raise SlotEmptyError(f"yard slot {slot_id} is empty")
    col = yard.spec.column_of(slot_id)
    top = (col + 1) * yard.spec.tiers
    return int(yard.occupancy[slot_id + 1:top].sum())


def occupied_above(yard: GridState) -> np.ndarray:
    """Per-slot count of occupied slots above it in its stack (all slots)."""
    occ = yard.occupancy.reshape(yard.spec.columns, yard.spec.tiers)
    above = occ[:, ::-1].cumsum(axis=1)[:, ::-1] - occ
    return above.reshape(-1)


def extract_container(yard: GridState, slot_id: int) -> tuple[int, int, GridState]:
    """Remove the container at ``slot_id``; blockers above drop one tier in order.

    Returns (group, shifters, new yard state).
    """
    if not yard.occupancy[slot_id]:
        raise SlotEmptyError(f"yard slot {slot_id} is empty")
    shifters = count_shifters(yard, slot_id)
    group = int(yard.group[slot_id])

    out = yard.copy()
    col = yard.spec.column_of(slot_id)
    top = (col + 1) * yard.spec.tiers
    # Slide the occupied run above the target down one tier; the run is
    # contiguous by the gravity invariant.
    out.group[slot_id:top - 1] = yard.group[slot_id + 1:top]
    out.occupancy[slot_id:top - 1] = yard.occupancy[slot_id + 1:top]
    out.occupancy[slot_id + shifters] = 0
    out.group[slot_id + shifters] = GROUP_NONE
    return group, shifters, out


def place_container(vessel: GridState, slot_id: int, group: int) -> GridState:
    """Fill a required vessel slot with a container of its group."""
    if vessel.occupancy[slot_id]:
        raise PlacementError(f"vessel slot {slot_id} already occupied")
    required = int(vessel.group[slot_id])
    if required != group:
        raise PlacementError(
            f"vessel slot {slot_id} requires group {required}, got {group}"
        )
    if slot_id % vessel.spec.tiers != 0 and not vessel.occupancy[slot_id - 1]:
        raise PlacementError(f"vessel slot {slot_id} would float above an empty slot")
    out = vessel.copy()
    out.occupancy[slot_id] = 1
    return out


def build_sequencer(vessel0: GridState, num_targets: int) -> list[int]:
    """First ``num_targets`` empty vessel slots in ascending (bay, row, tier) order.

    Flat ids already sort by (bay, row, tier), so the order is gravity
    consistent: a slot's below-neighbour is either occupied or listed earlier.
    """
    empties = np.flatnonzero(vessel0.occupancy == 0)
    if len(empties) < num_targets:
        raise ConfigError(
            f"vessel has {len(empties)} empty slots, need {num_targets}"
        )
    return [int(s) for s in empties[:num_targets]]


def partition_targets(targets: Sequence[int], num_cranes: int, tiers: int) -> list[list[int]]:
    """Split the target list into contiguous per-crane sublists in bay order.

    Cuts are placed at (bay, row) column boundaries nearest to the ideal
    equal-share positions, so no stack is split between two cranes and each
    crane's own placements stay gravity-safe regardless of the other cranes'
    progress. When there are fewer columns than cranes, the cut falls back to
    a plain index split.
    """
    m = len(targets)
    if num_cranes < 1:
        raise ConfigError("num_cranes must be >= 1")
    if num_cranes > m:
        raise ConfigError(f"cannot partition {m} targets over {num_cranes} cranes")
    columns = [t // tiers for t in targets]
    boundaries = [i for i in range(1, m) if columns[i] != columns[i - 1]]

    cuts = []
    prev = 0
    for i in range(1, num_cranes):
        ideal = i * m / num_cranes
        hi = m - (num_cranes - i)  # leave at least one target per later crane
        candidates = [b for b in boundaries if prev < b <= hi]
        if candidates:
            # Nearest column boundary; ties go to the larger cut so earlier
            # cranes take the remainder.
            cut = min(candidates, key=lambda b: (abs(b - ideal), -b))
        else:
            cut = min(max(prev + 1, round(ideal)), hi)
        cuts.append(cut)
        prev = cut
    edges = [0] + cuts + [m]
    return [list(targets[edges[i]:edges[i + 1]]) for i in range(num_cranes)]


def generate_instance(spec: ScenarioSpec) -> ProblemInstance:
    """Deterministically realize a scenario as a concrete problem instance.

    Target slots are the first ``num_containers`` vessel slots in sequencer
    order, with requirements drawn uniformly over the groups. The yard is
    stacked bottom-up into uniformly chosen columns and its contents are a
    permutation of the target requirements, so per-group counts always match
    and a valid action exists at every step.
    """
    rng = make_rng(spec.seed)
    m = spec.num_containers

    vessel = GridState.empty(spec.vessel)
    targets = build_sequencer(vessel, m)
    target_groups = rng.integers(0, spec.num_groups, size=m, dtype=np.int64)
    for slot, grp in zip(targets, target_groups):
        vessel.group[slot] = grp

    if spec.vessel_preoccupied > 0.0:
        _preoccupy_vessel(vessel, targets, spec, rng)

    yard = GridState.empty(spec.yard)
    heights = np.zeros(spec.yard.columns, dtype=np.int64)
    yard_groups = rng.permutation(target_groups)
    for grp in yard_groups:
        open_cols = np.flatnonzero(heights < spec.yard.tiers)
        col = int(open_cols[rng.integers(0, len(open_cols))])
        slot = col * spec.yard.tiers + int(heights[col])
        yard.occupancy[slot] = 1
        yard.group[slot] = grp
        heights[col] += 1

    if m > 0:
        partition = partition_targets(targets, spec.num_cranes, spec.vessel.tiers)
    else:
        partition = [[] for _ in range(spec.num_cranes)]

    return ProblemInstance(
        spec=spec,
        vessel0=vessel,
        yard0=yard,
        targets=tuple(targets),
        crane_partition=tuple(tuple(p) for p in partition),
    )


def _preoccupy_vessel(vessel: GridState, targets: list[int], spec: ScenarioSpec,
                      rng: np.random.Generator) -> None:
    """Pre-fill a fraction of the vessel columns that hold no targets.

    Restricting pre-occupancy to target-free columns keeps every target
    reachable bottom-up and the gravity invariant intact from reset onward.
    """
    tiers = spec.vessel.tiers
    target_cols = {t // tiers for t in targets}
    spare = [s for s in range(spec.vessel.capacity)
             if s // tiers not in target_cols]
    n_pre = int(spec.vessel_preoccupied * len(spare))
    for slot in spare[:n_pre]:
        vessel.occupancy[slot] = 1
        vessel.group[slot] = int(rng.integers(0, spec.num_groups))
