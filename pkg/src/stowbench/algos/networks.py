"""Small feed-forward networks with the heads the five algorithms need."""

from __future__ import annotations

import torch
from torch import nn

from ..errors import ConfigError

_ACTIVATIONS = {"tanh": nn.Tanh, "relu": nn.ReLU, "elu": nn.ELU}


def make_trunk(input_dim: int, hidden: tuple[int, ...], activation: str) -> tuple[nn.Sequential, int]:
    if activation not in _ACTIVATIONS:
        raise ConfigError(f"unknown activation {activation!r}")
    act = _ACTIVATIONS[activation]
    layers: list[nn.Module] = []
    width = input_dim
    for h in hidden:
        layers += [nn.Linear(width, h), act()]
        width = h
    return nn.Sequential(*layers), width


class QNetwork(nn.Module):
    """State -> action values."""

    def __init__(self, input_dim: int, n_actions: int, hidden=(256, 256), activation="tanh"):
        super().__init__()
        self.trunk, width = make_trunk(input_dim, tuple(hidden), activation)
        self.head = nn.Linear(width, n_actions)

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.head(self.trunk(obs))


class QuantileNetwork(nn.Module):
    """State -> (n_actions, n_quantiles) quantile estimates."""

    def __init__(self, input_dim: int, n_actions: int, n_quantiles: int,
                 hidden=(256, 256), activation="tanh"):
        super().__init__()
        self.n_actions = n_actions
        self.n_quantiles = n_quantiles
        self.trunk, width = make_trunk(input_dim, tuple(hidden), activation)
        self.head = nn.Linear(width, n_actions * n_quantiles)

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        out = self.head(self.trunk(obs))
        return out.view(*obs.shape[:-1], self.n_actions, self.n_quantiles)


class ActorCriticNetwork(nn.Module):
    """Shared trunk with policy-logit and state-value heads (A2C, PPO)."""

    def __init__(self, input_dim: int, n_actions: int, hidden=(256, 256), activation="tanh"):
        super().__init__()
        self.trunk, width = make_trunk(input_dim, tuple(hidden), activation)
        self.policy_head = nn.Linear(width, n_actions)
        self.value_head = nn.Linear(width, 1)

    def forward(self, obs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        features = self.trunk(obs)
        return self.policy_head(features), self.value_head(features).squeeze(-1)


class PolicyNetwork(nn.Module):
    """Standalone policy (TRPO keeps its value function separate)."""

    def __init__(self, input_dim: int, n_actions: int, hidden=(256, 256), activation="tanh"):
        super().__init__()
        self.trunk, width = make_trunk(input_dim, tuple(hidden), activation)
        self.head = nn.Linear(width, n_actions)

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.head(self.trunk(obs))


class ValueNetwork(nn.Module):
    def __init__(self, input_dim: int, hidden=(256, 256), activation="tanh"):
        super().__init__()
        self.trunk, width = make_trunk(input_dim, tuple(hidden), activation)
        self.head = nn.Linear(width, 1)

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.head(self.trunk(obs)).squeeze(-1)


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())
