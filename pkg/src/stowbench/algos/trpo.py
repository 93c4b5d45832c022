"""TRPO: natural-gradient policy steps under a mean-KL trust region.

The search direction solves ``H x = g`` by conjugate gradients on
Fisher-vector products (Hessian-vector products of the mean KL), the step is
scaled to the trust-region boundary, and a backtracking line search accepts
the first candidate that improves the surrogate while keeping the measured
KL within the bound. The value function is a separate network fit by
regression, so its updates cannot perturb the policy between trust-region
steps.
"""

from __future__ import annotations

import numpy as np
import torch

from ..seeding import STREAM_NET, STREAM_POLICY, derive_seed, make_rng
from .a2c import _RolloutMixin
from .common import gae, masked_log_softmax
from .config import AlgoConfig
from .networks import PolicyNetwork, ValueNetwork
from .ppo import normalize_advantages


def flat_params(module: torch.nn.Module) -> torch.Tensor:
    return torch.cat([p.data.reshape(-1) for p in module.parameters()])


def set_flat_params(module: torch.nn.Module, vec: torch.Tensor) -> None:
    offset = 0
    for p in module.parameters():
        n = p.numel()
        p.data.copy_(vec[offset:offset + n].view_as(p))
        offset += n


def flat_grad(output: torch.Tensor, params, retain_graph=None, create_graph=False) -> torch.Tensor:
    grads = torch.autograd.grad(output, params, retain_graph=retain_graph,
                                create_graph=create_graph)
    return torch.cat([g.reshape(-1) for g in grads])


def masked_kl(old_logits: torch.Tensor, new_logits: torch.Tensor,
              mask: torch.Tensor) -> torch.Tensor:
    """Mean KL(old || new) between masked categorical distributions."""
    old_logp = masked_log_softmax(old_logits, mask)
    new_logp = masked_log_softmax(new_logits, mask)
    p_old = torch.where(mask.bool(), old_logp.exp(), torch.zeros_like(old_logp))
    diff = torch.where(mask.bool(), old_logp - new_logp, torch.zeros_like(old_logp))
    return (p_old * diff).sum(dim=-1).mean()


def surrogate_loss(policy: torch.nn.Module, obs, masks, actions, old_log_probs,
                   advantages) -> torch.Tensor:
    """Importance-weighted advantage objective (to maximize)."""
    log_probs = masked_log_softmax(policy(obs), masks)
    taken = log_probs.gather(1, actions.unsqueeze(1)).squeeze(1)
    ratio = torch.exp(taken - old_log_probs)
    return (ratio * advantages).mean()


def conjugate_gradient(matvec, b: torch.Tensor, iters: int,
                       residual_tol: float = 1e-10) -> torch.Tensor:
    x = torch.zeros_like(b)
    r = b.clone()
    p = b.clone()
    rs_old = r.dot(r)
    for _ in range(iters):
        Ap = matvec(p)
        alpha = rs_old / (p.dot(Ap) + 1e-12)
        x = x + alpha * p
        r = r - alpha * Ap
        rs_new = r.dot(r)
        if rs_new < residual_tol:
            break
        p = r + (rs_new / rs_old) * p
        rs_old = rs_new
    return x


def fisher_vector_product(policy: torch.nn.Module, obs, masks, old_logits,
                          vector: torch.Tensor, damping: float) -> torch.Tensor:
    """(H + damping I) v where H is the Hessian of the mean KL at the policy."""
    kl = masked_kl(old_logits, policy(obs), masks)
    grad = flat_grad(kl, list(policy.parameters()), create_graph=True)
    grad_v = (grad * vector).sum()
    hv = flat_grad(grad_v, list(policy.parameters()), retain_graph=True)
    return hv + damping * vector


def trpo_step(policy: torch.nn.Module, obs, masks, actions, old_log_probs,
              advantages, cfg: AlgoConfig) -> dict:
    """One trust-region update in place; returns step diagnostics."""
    old_logits = policy(obs).detach()

    def surrogate() -> torch.Tensor:
        return surrogate_loss(policy, obs, masks, actions, old_log_probs, advantages)

    loss_before = surrogate()
    grad = flat_grad(loss_before, list(policy.parameters()), retain_graph=True).detach()

    def matvec(v: torch.Tensor) -> torch.Tensor:
        return fisher_vector_product(policy, obs, masks, old_logits, v, cfg.cg_damping)

    direction = conjugate_gradient(matvec, grad, cfg.cg_iters)
    dHd = direction.dot(matvec(direction))
    if dHd <= 0 or not torch.isfinite(dHd):
        return {"accepted": False, "kl": 0.0, "surrogate_improvement": 0.0,
                "step_scale": 0.0, "backtracks": 0}
    full_step = direction * torch.sqrt(2.0 * cfg.kl_delta / dHd)

    params_before = flat_params(policy)
    for backtrack in range(cfg.max_backtracks + 1):
        scale = cfg.backtrack_coef ** backtrack
        set_flat_params(policy, params_before + scale * full_step)
        with torch.no_grad():
            loss_after = surrogate()
            kl_after = masked_kl(old_logits, policy(obs), masks)
        if loss_after > loss_before and kl_after <= cfg.kl_delta:
            return {
                "accepted": True,
                "kl": float(kl_after),
                "surrogate_improvement": float(loss_after - loss_before.detach()),
                "step_scale": scale,
                "backtracks": backtrack,
            }
    # Line search exhausted: zero step, keep the old parameters.
    set_flat_params(policy, params_before)
    return {"accepted": False, "kl": 0.0, "surrogate_improvement": 0.0,
            "step_scale": 0.0, "backtracks": cfg.max_backtracks}


class TrpoAgent(_RolloutMixin):
    name = "trpo"

    def __init__(self, obs_dim: int, n_actions: int, cfg: AlgoConfig, seed: int):
        self.cfg = cfg
        torch.manual_seed(derive_seed(seed, STREAM_NET))
        self.policy = PolicyNetwork(obs_dim, n_actions, cfg.hidden, cfg.activation)
        self.value = ValueNetwork(obs_dim, cfg.hidden, cfg.activation)
        self.value_optimizer = torch.optim.Adam(self.value.parameters(), lr=cfg.learning_rate)
        self.torch_rng = torch.Generator().manual_seed(derive_seed(seed, STREAM_POLICY))
        self.np_rng = make_rng(derive_seed(seed, STREAM_POLICY, 1))
        self.rollout_length = cfg.rollout_steps
        self.kl_history: list[float] = []
        self._reset_rollout()

    def _policy_logits(self, obs: torch.Tensor) -> torch.Tensor:
        return self.policy(obs)

    def update_from_rollout(self) -> dict:
        cfg = self.cfg
        obs, masks, actions = self._rollout_tensors()
        next_obs, _, _ = self._last_next
        with torch.no_grad():
            values = self.value(obs)
            bootstrap = self.value(torch.as_tensor(next_obs).unsqueeze(0))
        value_seq = np.append(values.numpy().astype(np.float64), float(bootstrap[0]))
        advantages = gae(self._rewards, self._dones, value_seq, cfg.gamma, cfg.gae_lambda)
        returns = advantages + value_seq[:-1]
        advantages = normalize_advantages(advantages)

        adv_t = torch.as_tensor(advantages, dtype=torch.float32)
        ret_t = torch.as_tensor(returns, dtype=torch.float32)
        old_logp = torch.as_tensor(np.asarray(self._log_probs, dtype=np.float32))

        stats = trpo_step(self.policy, obs, masks, actions, old_logp, adv_t, cfg)
        if stats["accepted"]:
            self.kl_history.append(stats["kl"])

        for _ in range(cfg.vf_iters):
            value_loss = torch.mean((self.value(obs) - ret_t) ** 2)
            self.value_optimizer.zero_grad()
            value_loss.backward()
            self.value_optimizer.step()
        stats["value_loss"] = float(value_loss.detach())
        stats["loss"] = stats["value_loss"]
        return stats
