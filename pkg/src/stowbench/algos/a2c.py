"""Synchronous advantage actor-critic with 5-step returns and no GAE.

Advantages are raw n-step-return residuals (no normalization); one gradient
step per rollout, no ratio clipping.
"""

from __future__ import annotations

import numpy as np
import torch

from ..seeding import STREAM_NET, STREAM_POLICY, derive_seed
from .common import masked_entropy, masked_log_softmax, masked_sample, nstep_returns
from .config import AlgoConfig
from .networks import ActorCriticNetwork


def a2c_losses(net: ActorCriticNetwork, obs: torch.Tensor, masks: torch.Tensor,
               actions: torch.Tensor, returns: torch.Tensor, advantages: torch.Tensor,
               value_coef: float, entropy_coef: float) -> tuple[torch.Tensor, dict]:
    """Policy gradient with fixed advantages, value regression, entropy bonus."""
    logits, values = net(obs)
    log_probs = masked_log_softmax(logits, masks)
    taken = log_probs.gather(1, actions.unsqueeze(1)).squeeze(1)
    policy_loss = -(taken * advantages).mean()
    value_loss = value_coef * torch.mean((values - returns) ** 2)
    entropy = masked_entropy(logits, masks).mean()
    total = policy_loss + value_loss - entropy_coef * entropy
    parts = {
        "policy_loss": float(policy_loss.detach()),
        "value_loss": float(value_loss.detach()),
        "entropy": float(entropy.detach()),
    }
    return total, parts


class _RolloutMixin:
    """Shared rollout buffering for the on-policy agents."""

    def _reset_rollout(self) -> None:
        self._obs: list[np.ndarray] = []
        self._masks: list[np.ndarray] = []
        self._actions: list[int] = []
        self._rewards: list[float] = []
        self._dones: list[bool] = []
        self._log_probs: list[float] = []
        self._last_next: tuple[np.ndarray, np.ndarray, bool] | None = None

    def set_progress(self, progress: float) -> None:
        pass

    def select_action(self, obs: np.ndarray, mask: np.ndarray) -> int:
        with torch.no_grad():
            logits = self._policy_logits(torch.as_tensor(obs, dtype=torch.float32))
        action, log_prob = masked_sample(
            logits, torch.as_tensor(np.asarray(mask, dtype=bool)), self.torch_rng)
        self._pending_log_prob = log_prob
        return action

    def greedy_action(self, obs: np.ndarray, mask: np.ndarray) -> int:
        from .common import masked_greedy

        with torch.no_grad():
            logits = self._policy_logits(torch.as_tensor(obs, dtype=torch.float32))
        return masked_greedy(logits.numpy(), mask)

    def observe(self, obs, mask, action, reward, next_obs, next_mask, done) -> dict | None:
        self._obs.append(np.asarray(obs, dtype=np.float32))
        self._masks.append(np.asarray(mask, dtype=bool))
        self._actions.append(int(action))
        self._rewards.append(float(reward))
        self._dones.append(bool(done))
        self._log_probs.append(getattr(self, "_pending_log_prob", 0.0))
        self._last_next = (np.asarray(next_obs, dtype=np.float32),
                           np.asarray(next_mask, dtype=bool), bool(done))
        if len(self._obs) >= self.rollout_length:
            stats = self.update_from_rollout()
            self._reset_rollout()
            return stats
        return None

    def _rollout_tensors(self):
        obs = torch.as_tensor(np.stack(self._obs))
        masks = torch.as_tensor(np.stack(self._masks))
        actions = torch.as_tensor(np.asarray(self._actions, dtype=np.int64))
        return obs, masks, actions


class A2cAgent(_RolloutMixin):
    name = "a2c"

    def __init__(self, obs_dim: int, n_actions: int, cfg: AlgoConfig, seed: int):
        self.cfg = cfg
        torch.manual_seed(derive_seed(seed, STREAM_NET))
        self.net = ActorCriticNetwork(obs_dim, n_actions, cfg.hidden, cfg.activation)
        self.optimizer = torch.optim.Adam(self.net.parameters(), lr=cfg.learning_rate)
        self.torch_rng = torch.Generator().manual_seed(derive_seed(seed, STREAM_POLICY))
        self.rollout_length = cfg.n_step
        self._reset_rollout()

    def _policy_logits(self, obs: torch.Tensor) -> torch.Tensor:
        logits, _ = self.net(obs)
        return logits

    def update_from_rollout(self) -> dict:
        obs, masks, actions = self._rollout_tensors()
        next_obs, _, _ = self._last_next
        with torch.no_grad():
            _, values = self.net(obs)
            _, bootstrap = self.net(torch.as_tensor(next_obs).unsqueeze(0))
        value_seq = np.append(values.numpy().astype(np.float64), float(bootstrap[0]))
        returns = nstep_returns(self._rewards, self._dones, value_seq,
                                self.cfg.n_step, self.cfg.gamma)
        returns_t = torch.as_tensor(returns, dtype=torch.float32)
        advantages = torch.as_tensor(returns - value_seq[:-1], dtype=torch.float32)
        total, parts = a2c_losses(self.net, obs, masks, actions, returns_t, advantages,
                                  self.cfg.value_coef, self.cfg.entropy_coef)
        self.optimizer.zero_grad()
        total.backward()
        self.optimizer.step()
        parts["loss"] = float(total.detach())
        return parts
