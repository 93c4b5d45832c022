"""TRPO machinery: KL, Fisher-vector products, conjugate gradient, trust-region step."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from stowbench.algos import AlgoConfig, conjugate_gradient, fisher_vector_product, masked_kl, trpo_step
from stowbench.algos.networks import PolicyNetwork
from stowbench.algos.trpo import flat_grad, flat_params, set_flat_params, surrogate_loss

OBS_DIM = 4
N_ACTIONS = 3


def make_policy(seed=0, hidden=(12,)):
    torch.manual_seed(seed)
    return PolicyNetwork(OBS_DIM, N_ACTIONS, hidden=hidden).double()


def make_batch(rng, T=8):
    obs = torch.as_tensor(rng.normal(size=(T, OBS_DIM)))
    masks = torch.as_tensor(np.stack([
        np.array([True] + list(rng.integers(0, 2, N_ACTIONS - 1).astype(bool)))
        for _ in range(T)
    ]))
    actions = torch.as_tensor(np.array([
        int(rng.choice(np.flatnonzero(m.numpy()))) for m in masks]))
    advantages = torch.as_tensor(rng.normal(size=T))
    return obs, masks, actions, advantages


class TestMaskedKl:
    def test_zero_against_itself(self, rng):
        logits = torch.as_tensor(rng.normal(size=(5, N_ACTIONS)))
        mask = torch.ones((5, N_ACTIONS), dtype=torch.bool)
        assert float(masked_kl(logits, logits.clone(), mask)) == pytest.approx(0.0, abs=1e-12)

    def test_nonnegative(self, rng):
        for _ in range(20):
            old = torch.as_tensor(rng.normal(size=(4, N_ACTIONS)))
            new = torch.as_tensor(rng.normal(size=(4, N_ACTIONS)))
            mask = torch.as_tensor(rng.integers(0, 2, (4, N_ACTIONS)).astype(bool))
            mask[:, 0] = True
            assert float(masked_kl(old, new, mask)) >= -1e-12

    def test_matches_manual_computation(self):
        old = torch.tensor([[1.0, 0.0, -1.0]])
        new = torch.tensor([[0.0, 0.0, 0.0]])
        mask = torch.tensor([[True, True, False]])
        p_old = np.exp([1.0, 0.0]) / np.exp([1.0, 0.0]).sum()
        p_new = np.array([0.5, 0.5])
        expected = float(np.sum(p_old * (np.log(p_old) - np.log(p_new))))
        assert float(masked_kl(old, new, mask)) == pytest.approx(expected, abs=1e-6)


class TestConjugateGradient:
    def test_solves_spd_system(self, rng):
        n = 12
        a = rng.normal(size=(n, n))
        spd = torch.as_tensor(a @ a.T + n * np.eye(n))
        b = torch.as_tensor(rng.normal(size=n))
        x = conjugate_gradient(lambda v: spd @ v, b, iters=50)
        expected = torch.linalg.solve(spd, b)
        assert torch.allclose(x, expected, atol=1e-6)

    def test_respects_iteration_budget(self, rng):
        calls = {"n": 0}
        spd = torch.eye(4, dtype=torch.float64) * 2.0

        def matvec(v):
            calls["n"] += 1
            return spd @ v

        conjugate_gradient(matvec, torch.ones(4, dtype=torch.float64), iters=3)
        assert calls["n"] <= 3


class TestFisherVectorProduct:
    def test_matches_finite_difference_of_kl_gradient(self, rng):
        policy = make_policy(seed=1)
        obs, masks, _, _ = make_batch(rng)
        old_logits = policy(obs).detach()
        params = list(policy.parameters())
        theta = flat_params(policy).clone()
        v = torch.as_tensor(rng.normal(size=len(theta)))
        v = v / v.norm()

        hv = fisher_vector_product(policy, obs, masks, old_logits, v, damping=0.0)

        # Oracle: central difference of the KL gradient along v.
        eps = 1e-5
        def kl_grad_at(vec):
            set_flat_params(policy, vec)
            kl = masked_kl(old_logits, policy(obs), masks)
            g = flat_grad(kl, list(policy.parameters()))
            return g

        g_plus = kl_grad_at(theta + eps * v)
        g_minus = kl_grad_at(theta - eps * v)
        set_flat_params(policy, theta)
        hv_numeric = (g_plus - g_minus) / (2 * eps)
        rel = float((hv - hv_numeric).norm()) / max(float(hv_numeric.norm()), 1e-12)
        assert rel < 1e-3

    def test_damping_adds_identity_multiple(self, rng):
        policy = make_policy(seed=2)
        obs, masks, _, _ = make_batch(rng, T=4)
        old_logits = policy(obs).detach()
        v = torch.as_tensor(rng.normal(size=len(flat_params(policy))))
        hv0 = fisher_vector_product(policy, obs, masks, old_logits, v, damping=0.0)
        hv1 = fisher_vector_product(policy, obs, masks, old_logits, v, damping=0.5)
        assert torch.allclose(hv1 - hv0, 0.5 * v, atol=1e-9)


class TestTrpoStep:
    def cfg(self, **kw):
        return AlgoConfig(**kw)

    def test_accepted_step_keeps_kl_within_bound(self, rng):
        policy = make_policy(seed=3)
        obs, masks, actions, adv = make_batch(rng, T=16)
        with torch.no_grad():
            from stowbench.algos import masked_log_softmax
            old_logp = masked_log_softmax(policy(obs), masks).gather(
                1, actions.unsqueeze(1)).squeeze(1)
        cfg = self.cfg(kl_delta=0.01)
        old_logits = policy(obs).detach()
        stats = trpo_step(policy, obs, masks, actions, old_logp, adv, cfg)
        assert stats["accepted"]
        with torch.no_grad():
            measured = float(masked_kl(old_logits, policy(obs), masks))
        assert measured <= 1.5 * cfg.kl_delta
        assert stats["kl"] == pytest.approx(measured, abs=1e-8)

    def test_full_step_matches_scaled_cg_direction(self, rng):
        # With the constraint satisfied at the first candidate (0 backtracks),
        # the parameter delta equals sqrt(2 delta / xHx) * x for the CG
        # solution x of H x = g.
        policy = make_policy(seed=4)
        obs, masks, actions, adv = make_batch(rng, T=16)
        with torch.no_grad():
            from stowbench.algos import masked_log_softmax
            old_logp = masked_log_softmax(policy(obs), masks).gather(
                1, actions.unsqueeze(1)).squeeze(1)
        cfg = self.cfg(kl_delta=1e-4)  # tiny region: first candidate accepted
        theta_before = flat_params(policy).clone()
        old_logits = policy(obs).detach()

        loss = surrogate_loss(policy, obs, masks, actions, old_logp, adv)
        grad = flat_grad(loss, list(policy.parameters())).detach()
        matvec = lambda v: fisher_vector_product(policy, obs, masks, old_logits, v, cfg.cg_damping)
        x = conjugate_gradient(matvec, grad, cfg.cg_iters)
        expected_step = x * torch.sqrt(2.0 * cfg.kl_delta / x.dot(matvec(x)))

        stats = trpo_step(policy, obs, masks, actions, old_logp, adv, cfg)
        assert stats["accepted"] and stats["backtracks"] == 0
        delta = flat_params(policy) - theta_before
        assert torch.allclose(delta, expected_step, atol=1e-10)

    def test_exhausted_line_search_is_zero_step(self, rng):
        policy = make_policy(seed=5)
        obs, masks, actions, adv = make_batch(rng, T=8)
        with torch.no_grad():
            from stowbench.algos import masked_log_softmax
            old_logp = masked_log_softmax(policy(obs), masks).gather(
                1, actions.unsqueeze(1)).squeeze(1)
        # Zero advantages: the surrogate cannot improve, so every candidate is
        # rejected and the parameters must come back bit-identical.
        theta_before = flat_params(policy).clone()
        stats = trpo_step(policy, obs, masks, actions, old_logp,
                          torch.zeros_like(adv), self.cfg())
        assert not stats["accepted"]
        assert torch.equal(flat_params(policy), theta_before)

    def test_surrogate_improves_on_accepted_step(self, rng):
        policy = make_policy(seed=6)
        obs, masks, actions, adv = make_batch(rng, T=16)
        with torch.no_grad():
            from stowbench.algos import masked_log_softmax
            old_logp = masked_log_softmax(policy(obs), masks).gather(
                1, actions.unsqueeze(1)).squeeze(1)
        with torch.no_grad():
            before = float(surrogate_loss(policy, obs, masks, actions, old_logp, adv))
        stats = trpo_step(policy, obs, masks, actions, old_logp, adv, self.cfg())
        with torch.no_grad():
            after = float(surrogate_loss(policy, obs, masks, actions, old_logp, adv))
        assert stats["accepted"]
        assert after > before
        assert stats["surrogate_improvement"] == pytest.approx(after - before, abs=1e-9)
