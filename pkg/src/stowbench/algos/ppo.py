"""PPO with a clipped surrogate, GAE advantages, and per-batch normalization."""

from __future__ import annotations

import numpy as np
import torch

from ..seeding import STREAM_NET, STREAM_POLICY, derive_seed, make_rng
from .a2c import _RolloutMixin
from .common import gae, masked_entropy, masked_log_softmax
from .config import AlgoConfig
from .networks import ActorCriticNetwork

ADV_EPS = 1e-8


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    return (adv - adv.mean()) / (adv.std() + ADV_EPS)


def ppo_losses(net: ActorCriticNetwork, obs: torch.Tensor, masks: torch.Tensor,
               actions: torch.Tensor, old_log_probs: torch.Tensor,
               advantages: torch.Tensor, returns: torch.Tensor,
               clip_range: float, value_coef: float, entropy_coef: float,
               ) -> tuple[torch.Tensor, dict]:
    logits, values = net(obs)
    log_probs = masked_log_softmax(logits, masks)
    taken = log_probs.gather(1, actions.unsqueeze(1)).squeeze(1)
    ratio = torch.exp(taken - old_log_probs)
    unclipped = ratio * advantages
    clipped = torch.clamp(ratio, 1.0 - clip_range, 1.0 + clip_range) * advantages
    policy_loss = -torch.min(unclipped, clipped).mean()
    value_loss = value_coef * torch.mean((values - returns) ** 2)
    entropy = masked_entropy(logits, masks).mean()
    total = policy_loss + value_loss - entropy_coef * entropy
    parts = {
        "policy_loss": float(policy_loss.detach()),
        "value_loss": float(value_loss.detach()),
        "entropy": float(entropy.detach()),
        "clip_fraction": float(((ratio - 1.0).abs() > clip_range).float().mean()),
    }
    return total, parts


class PpoAgent(_RolloutMixin):
    name = "ppo"

    def __init__(self, obs_dim: int, n_actions: int, cfg: AlgoConfig, seed: int):
        self.cfg = cfg
        torch.manual_seed(derive_seed(seed, STREAM_NET))
        self.net = ActorCriticNetwork(obs_dim, n_actions, cfg.hidden, cfg.activation)
        self.optimizer = torch.optim.Adam(self.net.parameters(), lr=cfg.learning_rate)
        self.torch_rng = torch.Generator().manual_seed(derive_seed(seed, STREAM_POLICY))
        self.np_rng = make_rng(derive_seed(seed, STREAM_POLICY, 1))
        self.rollout_length = cfg.rollout_steps
        self._reset_rollout()

    def _policy_logits(self, obs: torch.Tensor) -> torch.Tensor:
        logits, _ = self.net(obs)
        return logits

    def update_from_rollout(self) -> dict:
        cfg = self.cfg
        obs, masks, actions = self._rollout_tensors()
        next_obs, _, _ = self._last_next
        with torch.no_grad():
            _, values = self.net(obs)
            _, bootstrap = self.net(torch.as_tensor(next_obs).unsqueeze(0))
        value_seq = np.append(values.numpy().astype(np.float64), float(bootstrap[0]))
        advantages = gae(self._rewards, self._dones, value_seq, cfg.gamma, cfg.gae_lambda)
        returns = advantages + value_seq[:-1]
        advantages = normalize_advantages(advantages)

        adv_t = torch.as_tensor(advantages, dtype=torch.float32)
        ret_t = torch.as_tensor(returns, dtype=torch.float32)
        old_logp = torch.as_tensor(np.asarray(self._log_probs, dtype=np.float32))

        stats: dict = {}
        n = len(self._obs)
        for _ in range(cfg.epochs):
            perm = self.np_rng.permutation(n)
            for start in range(0, n, cfg.minibatch_size):
                idx = torch.as_tensor(perm[start:start + cfg.minibatch_size])
                total, parts = ppo_losses(
                    self.net, obs[idx], masks[idx], actions[idx], old_logp[idx],
                    adv_t[idx], ret_t[idx], cfg.clip_range, cfg.value_coef,
                    cfg.entropy_coef)
                self.optimizer.zero_grad()
                total.backward()
                self.optimizer.step()
                stats = parts
                stats["loss"] = float(total.detach())
        return stats
