"""Distributional QR-DQN: quantile regression with a Huber kernel.

Quantile estimates live at the midpoints tau_i = (2i-1)/(2N). Greedy actions
maximize the quantile mean; learning minimizes the asymmetric Huber quantile
loss against per-quantile bootstrapped targets.
"""

from __future__ import annotations

import torch

from .config import AlgoConfig
from .dqn import DqnAgent
from .networks import QuantileNetwork


def quantile_midpoints(n_quantiles: int, dtype=torch.float32) -> torch.Tensor:
    i = torch.arange(1, n_quantiles + 1, dtype=dtype)
    return (2.0 * i - 1.0) / (2.0 * n_quantiles)


def quantile_huber_loss(pred: torch.Tensor, target: torch.Tensor,
                        taus: torch.Tensor, kappa: float) -> torch.Tensor:
    """Quantile regression loss: rho_tau(u) = |tau - 1{u<0}| * huber(u)/kappa.

    ``pred`` is (B, N) predicted quantiles. ``target`` is either (B, N) with
    quantiles aligned one-to-one (per-sample Bellman targets shift every
    quantile by the same reward, so alignment is exact) or (B, 1) with a
    single sample regressed against every predicted quantile. Loss sums over
    quantiles and averages over the batch.
    """
    u = target - pred if target.shape == pred.shape else target.expand_as(pred) - pred
    abs_u = u.abs()
    huber = torch.where(abs_u <= kappa, 0.5 * u ** 2, kappa * (abs_u - 0.5 * kappa))
    weight = (taus.view(1, -1) - (u.detach() < 0).to(u.dtype)).abs()
    elementwise = weight * huber / kappa
    return elementwise.sum(dim=1).mean()


def qrdqn_loss(online: torch.nn.Module, target: torch.nn.Module,
               batch: dict[str, torch.Tensor], gamma: float, kappa: float) -> torch.Tensor:
    n_quantiles = online.n_quantiles
    taus = quantile_midpoints(n_quantiles)
    quantiles = online(batch["obs"])                       # (B, A, N)
    actions = batch["action"].view(-1, 1, 1).expand(-1, 1, n_quantiles)
    pred = quantiles.gather(1, actions).squeeze(1)         # (B, N)

    with torch.no_grad():
        next_quantiles = target(batch["next_obs"])         # (B, A, N)
        next_q = next_quantiles.mean(dim=2)
        neg_inf = torch.finfo(next_q.dtype).min
        next_q = next_q.masked_fill(~batch["next_mask"].bool(), neg_inf)
        best = next_q.argmax(dim=1)
        chosen = next_quantiles.gather(
            1, best.view(-1, 1, 1).expand(-1, 1, n_quantiles)).squeeze(1)
        has_valid = batch["next_mask"].any(dim=1, keepdim=True)
        not_done = (~batch["done"]).view(-1, 1).to(chosen.dtype)
        bootstrap = torch.where(has_valid, chosen, torch.zeros_like(chosen))
        y = batch["reward"].view(-1, 1) + gamma * bootstrap * not_done

    return quantile_huber_loss(pred, y.to(pred.dtype), taus.to(pred.dtype), kappa)


class QrdqnAgent(DqnAgent):
    name = "qrdqn"

    def _build_network(self, obs_dim, n_actions, cfg: AlgoConfig):
        return QuantileNetwork(obs_dim, n_actions, cfg.num_quantiles,
                               cfg.hidden, cfg.activation)

    def _action_values(self, obs: torch.Tensor) -> torch.Tensor:
        return self.online(obs).mean(dim=-1)

    def _loss(self, batch) -> torch.Tensor:
        return qrdqn_loss(self.online, self.target, batch,
                          self.cfg.gamma, self.cfg.huber_kappa)
