"""Exception types raised by environments and the slot-grid model."""


class StowbenchError(Exception):
    """Base class for all package errors."""


class SlotEmptyError(StowbenchError):
    """An operation that requires an occupied slot was given an empty one."""


class PlacementError(StowbenchError):
    """A container placement violated occupancy, group, or gravity rules."""


class EpisodeDoneError(StowbenchError):
    """step() or action_mask() was called on a finished episode."""


class EpisodeActiveError(StowbenchError):
    """An end-of-episode quantity was queried mid-episode."""


class MaskAllInvalidError(StowbenchError):
    """A masked selection was requested with no valid entry."""


class ConfigError(StowbenchError):
    """A scenario or experiment configuration violates its invariants."""
