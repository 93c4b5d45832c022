"""Masked action selection, return computations, and replay storage.

Return and advantage computations run in float64 numpy; the losses consume
them as tensors. Invalid actions always carry exactly zero probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from ..errors import MaskAllInvalidError


def masked_greedy(qvalues, mask) -> int:
    """Argmax over mask-valid entries; ties break to the lowest index."""
    q = np.asarray(qvalues, dtype=np.float64).reshape(-1)
    m = np.asarray(mask, dtype=bool).reshape(-1)
    if not m.any():
        raise MaskAllInvalidError("no valid action to choose from")
    return int(np.argmax(np.where(m, q, -np.inf)))


def masked_log_softmax(logits: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Log-probabilities of the softmax renormalized over valid entries.

    Invalid entries come out as -inf; callers must never index them into
    gathered log-probs of taken actions.
    """
    neg_inf = torch.finfo(logits.dtype).min
    masked = torch.where(mask.bool(), logits, torch.full_like(logits, neg_inf))
    return torch.log_softmax(masked, dim=-1)


def masked_probs(logits: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    log_p = masked_log_softmax(logits, mask)
    return torch.where(mask.bool(), log_p.exp(), torch.zeros_like(log_p))


def masked_entropy(logits: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Entropy of the renormalized distribution, 0 terms for invalid entries."""
    log_p = masked_log_softmax(logits, mask)
    p = torch.where(mask.bool(), log_p.exp(), torch.zeros_like(log_p))
    contrib = torch.where(mask.bool(), -p * log_p, torch.zeros_like(p))
    return contrib.sum(dim=-1)


def masked_sample(logits: torch.Tensor, mask: torch.Tensor,
                  generator: torch.Generator) -> tuple[int, float]:
    """Sample from the renormalized masked softmax; returns (action, log_prob)."""
    if not bool(mask.any()):
        raise MaskAllInvalidError("no valid action to sample from")
    log_p = masked_log_softmax(logits.reshape(-1), mask.reshape(-1))
    probs = torch.where(mask.reshape(-1).bool(), log_p.exp(), torch.zeros_like(log_p))
    action = int(torch.multinomial(probs, 1, generator=generator).item())
    return action, float(log_p[action])


def td_target(reward: float, done: bool, next_q, next_mask, gamma: float) -> float:
    """One-step bootstrapped target with the max over mask-valid next actions."""
    if done:
        return float(reward)
    q = np.asarray(next_q, dtype=np.float64).reshape(-1)
    m = np.asarray(next_mask, dtype=bool).reshape(-1)
    if not m.any():
        raise MaskAllInvalidError("non-terminal transition with no valid next action")
    return float(reward + gamma * q[m].max())


def nstep_returns(rewards, dones, values, n: int, gamma: float) -> np.ndarray:
    """Truncated n-step returns with bootstrap at the segment boundary.

    ``values`` has one more entry than ``rewards``: per-step state values plus
    the value of the state after the last transition. Windows never bootstrap
    across a terminal step.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    values = np.asarray(values, dtype=np.float64)
    T = len(rewards)
    if values.shape != (T + 1,):
        raise ValueError("values must hold T+1 entries (including the bootstrap)")
    out = np.empty(T)
    for t in range(T):
        g = 0.0
        disc = 1.0
        j = 0
        terminated = False
        while j < n and t + j < T:
            g += disc * rewards[t + j]
            disc *= gamma
            if dones[t + j]:
                terminated = True
                break
            j += 1
        if not terminated:
            g += disc * values[t + j]
        out[t] = g
    return out


def gae(rewards, dones, values, gamma: float, lam: float) -> np.ndarray:
    """Generalized advantage estimates; terminal steps bootstrap zero."""
    rewards = np.asarray(rewards, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    values = np.asarray(values, dtype=np.float64)
    T = len(rewards)
    if values.shape != (T + 1,):
        raise ValueError("values must hold T+1 entries (including the bootstrap)")
    out = np.empty(T)
    running = 0.0
    for t in range(T - 1, -1, -1):
        nonterminal = 0.0 if dones[t] else 1.0
        delta = rewards[t] + gamma * values[t + 1] * nonterminal - values[t]
        running = delta + gamma * lam * nonterminal * running
        out[t] = running
    return out


@dataclass
class Transition:
    obs: np.ndarray
    mask: np.ndarray
    action: int
    reward: float
    next_obs: np.ndarray
    next_mask: np.ndarray
    done: bool


class ReplayBuffer:
    """Fixed-capacity circular transition store with seeded uniform sampling."""

    def __init__(self, capacity: int, obs_dim: int, n_actions: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.mask = np.zeros((capacity, n_actions), dtype=bool)
        self.action = np.zeros(capacity, dtype=np.int64)
        self.reward = np.zeros(capacity, dtype=np.float32)
        self.next_obs = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.next_mask = np.zeros((capacity, n_actions), dtype=bool)
        self.done = np.zeros(capacity, dtype=bool)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, t: Transition) -> None:
        i = self._next
        self.obs[i] = t.obs
        self.mask[i] = t.mask
        self.action[i] = t.action
        self.reward[i] = t.reward
        self.next_obs[i] = t.next_obs
        self.next_mask[i] = t.next_mask
        self.done[i] = t.done
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict[str, torch.Tensor]:
        idx = rng.integers(0, self._size, size=batch_size)
        return {
            "obs": torch.as_tensor(self.obs[idx]),
            "mask": torch.as_tensor(self.mask[idx]),
            "action": torch.as_tensor(self.action[idx]),
            "reward": torch.as_tensor(self.reward[idx]),
            "next_obs": torch.as_tensor(self.next_obs[idx]),
            "next_mask": torch.as_tensor(self.next_mask[idx]),
            "done": torch.as_tensor(self.done[idx]),
        }
