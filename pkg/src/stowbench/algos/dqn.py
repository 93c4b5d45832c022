"""DQN with masked epsilon-greedy behaviour and a periodically synced target net."""

from __future__ import annotations

import copy

import numpy as np
import torch

from ..seeding import STREAM_NET, STREAM_POLICY, derive_seed, make_rng
from .common import ReplayBuffer, Transition, masked_greedy
from .config import AlgoConfig
from .networks import QNetwork


def dqn_loss(online: torch.nn.Module, target: torch.nn.Module,
             batch: dict[str, torch.Tensor], gamma: float) -> torch.Tensor:
    """Mean squared TD error against the target network's masked max."""
    q = online(batch["obs"]).gather(1, batch["action"].unsqueeze(1)).squeeze(1)
    with torch.no_grad():
        next_q = target(batch["next_obs"])
        neg_inf = torch.finfo(next_q.dtype).min
        next_q = next_q.masked_fill(~batch["next_mask"].bool(), neg_inf)
        next_max = next_q.max(dim=1).values
        # Terminal rows have all-invalid masks; their bootstrap is zero.
        next_max = torch.where(batch["next_mask"].any(dim=1), next_max,
                               torch.zeros_like(next_max))
        y = batch["reward"] + gamma * next_max * (~batch["done"]).to(next_max.dtype)
    return torch.mean((q - y.to(q.dtype)) ** 2)


class DqnAgent:
    name = "dqn"

    def __init__(self, obs_dim: int, n_actions: int, cfg: AlgoConfig, seed: int):
        self.cfg = cfg
        self.n_actions = n_actions
        torch.manual_seed(derive_seed(seed, STREAM_NET))
        self.online = self._build_network(obs_dim, n_actions, cfg)
        self.target = copy.deepcopy(self.online)
        self.optimizer = torch.optim.Adam(self.online.parameters(), lr=cfg.learning_rate)
        self.buffer = ReplayBuffer(cfg.buffer_size, obs_dim, n_actions)
        self.rng = make_rng(derive_seed(seed, STREAM_POLICY))
        self.env_steps = 0
        self.updates = 0
        self.progress = 0.0

    def _build_network(self, obs_dim, n_actions, cfg):
        return QNetwork(obs_dim, n_actions, cfg.hidden, cfg.activation)

    # -- acting -----------------------------------------------------------

    def epsilon(self) -> float:
        cfg = self.cfg
        frac = min(self.progress / cfg.eps_fraction, 1.0) if cfg.eps_fraction > 0 else 1.0
        return cfg.eps_start + frac * (cfg.eps_end - cfg.eps_start)

    def set_progress(self, progress: float) -> None:
        self.progress = progress

    def select_action(self, obs: np.ndarray, mask: np.ndarray) -> int:
        if self.rng.random() < self.epsilon():
            valid = np.flatnonzero(mask)
            return int(valid[self.rng.integers(0, len(valid))])
        return self.greedy_action(obs, mask)

    def greedy_action(self, obs: np.ndarray, mask: np.ndarray) -> int:
        with torch.no_grad():
            q = self._action_values(torch.as_tensor(obs, dtype=torch.float32))
        return masked_greedy(q.numpy(), mask)

    def _action_values(self, obs: torch.Tensor) -> torch.Tensor:
        return self.online(obs)

    # -- learning ---------------------------------------------------------

    def observe(self, obs, mask, action, reward, next_obs, next_mask, done) -> dict | None:
        self.buffer.add(Transition(obs, mask, action, reward, next_obs, next_mask, done))
        self.env_steps += 1
        if self.env_steps < self.cfg.warmup_steps or len(self.buffer) < self.cfg.batch_size:
            return None
        if self.env_steps % self.cfg.update_every != 0:
            return None
        batch = self.buffer.sample(self.cfg.batch_size, self.rng)
        loss = self.update(batch)
        return {"loss": loss}

    def update(self, batch: dict[str, torch.Tensor]) -> float:
        loss = self._loss(batch)
        self.optimizer.zero_grad()
        loss.backward()
        self.optimizer.step()
        self.updates += 1
        if self.updates % self.cfg.target_sync == 0:
            self.sync_target()
        return float(loss.detach())

    def _loss(self, batch) -> torch.Tensor:
        return dqn_loss(self.online, self.target, batch, self.cfg.gamma)

    def sync_target(self) -> None:
        self.target.load_state_dict(self.online.state_dict())
