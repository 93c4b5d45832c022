from __future__ import annotations

import numpy as np
import pytest

from stowbench.model import GridSpec, ScenarioSpec, generate_instance
from stowbench.seeding import make_rng


def small_spec(seed: int = 7, *, vessel=(3, 5, 3), yard=(3, 5, 3), m=45, groups=3, cranes=1,
               preoccupied=0.0) -> ScenarioSpec:
    return ScenarioSpec(
        vessel=GridSpec(*vessel),
        yard=GridSpec(*yard),
        num_containers=m,
        num_groups=groups,
        num_cranes=cranes,
        seed=seed,
        vessel_preoccupied=preoccupied,
    )


def random_small_spec(rng: np.random.Generator, *, max_dims=(3, 5, 3), max_m=45,
                      cranes=1) -> ScenarioSpec:
    """Random scenario within the property-suite envelope (grids <= 3x5x3)."""
    def dims():
        return tuple(int(rng.integers(1, d + 1)) for d in max_dims)

    vessel = GridSpec(*dims())
    yard = GridSpec(*dims())
    cap = min(vessel.capacity, yard.capacity, max_m)
    lo = min(cranes, cap)
    m = int(rng.integers(lo, cap + 1)) if cap >= lo else cap
    groups = int(rng.integers(1, min(8, max(m, 1)) + 1)) if m > 0 else 1
    return ScenarioSpec(vessel=vessel, yard=yard, num_containers=m, num_groups=groups,
                        num_cranes=cranes, seed=int(rng.integers(0, 2 ** 63)))


@pytest.fixture
def scenario1_instance():
    return generate_instance(small_spec(seed=7))


@pytest.fixture
def rng():
    return make_rng(20240817)
