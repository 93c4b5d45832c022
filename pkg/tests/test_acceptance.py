"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timing. The long benchmark reproduction (criterion 6) is marked
``extended`` and excluded from the default gate.
"""

from __future__ import annotations

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.stats

from stowbench.algos import AlgoConfig, gae, make_agent, nstep_returns, train
from stowbench.baselines import brute_force_min_shifters, run_greedy_episode, run_random_episode
from stowbench.envs import AgentCycleEnv, EpisodeFactory, MultiCraneEnv, SpgeEnv
from stowbench.harness import compare_variants, scenario_spec, welch_t_test
from stowbench.model import GridSpec, ScenarioSpec, generate_instance
from stowbench.seeding import make_rng

from test_stats import record_with_final


def report(criterion: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {criterion}: {status} - {detail}")


def random_scenario(rng, cranes=1):
    def dims():
        return (int(rng.integers(1, 4)), int(rng.integers(1, 6)), int(rng.integers(1, 4)))

    vessel = GridSpec(*dims())
    yard = GridSpec(*dims())
    cap = min(vessel.capacity, yard.capacity, 45)
    m = int(rng.integers(1, cap + 1))
    groups = int(rng.integers(1, min(8, m) + 1))
    return ScenarioSpec(vessel=vessel, yard=yard, num_containers=m, num_groups=groups,
                        num_cranes=min(cranes, m), seed=int(rng.integers(0, 2 ** 63)))


def check_invariants(env, spec) -> None:
    assert env.yard.gravity_ok(), "yard gravity violated"
    assert env.vessel.gravity_ok(), "vessel gravity violated"
    placed = sum(
        int(env.vessel.occupancy[t]) for t in env.instance.targets)
    assert env.yard.occupied_count() + placed == spec.num_containers, "container conservation violated"
    target_groups = env.instance.vessel0.group[list(env.instance.targets)]
    placed_mask = np.asarray(
        [bool(env.vessel.occupancy[t]) for t in env.instance.targets])
    yard_counts = env.yard.group_counts(spec.num_groups)
    placed_counts = np.bincount(target_groups[placed_mask],
                                minlength=spec.num_groups)[:spec.num_groups]
    expected = np.bincount(target_groups, minlength=spec.num_groups)[:spec.num_groups]
    assert np.array_equal(yard_counts + placed_counts, expected), "group conservation violated"


def mask_oracle_spge(env) -> np.ndarray:
    required = env.vessel.group[env.instance.targets[env.cursor]]
    return np.asarray([
        bool(env.yard.occupancy[a]) and env.yard.group[a] == required
        for a in range(env.n_actions)
    ])


def mask_oracle_clocked(env) -> np.ndarray:
    out = np.zeros(env.mask_length, dtype=bool)
    tiers = env.instance.spec.vessel.tiers
    for a in range(env.mask_length):
        if isinstance(env, MultiCraneEnv):
            container, crane = env.decode_action(a)
        else:
            container, crane = a, env.active_crane()
        target = env.crane_target(crane)
        out[a] = (
            env.cranes[crane].free_at <= env.clock
            and target is not None
            and bool(env.yard.occupancy[container])
            and env.yard.group[container] == env.vessel.group[target]
            and (target % tiers == 0 or bool(env.vessel.occupancy[target - 1]))
        )
    return out


class TestCriterion1EnvironmentGroundTruth:
    def test_property_suite_over_1000_random_episodes(self):
        started = time.time()
        rng = make_rng(20240831)
        episodes = 0
        for variant, count, cranes in (("spge", 700, 1), ("spge-mc", 150, 3), ("spaec", 150, 3)):
            for _ in range(count):
                k = min(cranes, 1 + int(rng.integers(0, 3))) if cranes > 1 else 1
                spec = random_scenario(rng, cranes=k)
                instance = generate_instance(spec)
                if variant == "spge":
                    env = SpgeEnv(instance)
                elif variant == "spge-mc":
                    env = MultiCraneEnv(instance)
                else:
                    env = AgentCycleEnv(instance)
                env.reset()
                while not env.done:
                    mask = env.action_mask()
                    assert mask.any(), "mask empty mid-episode"
                    oracle = (mask_oracle_spge(env) if variant == "spge"
                              else mask_oracle_clocked(env))
                    assert np.array_equal(mask, oracle), "mask disagrees with predicate"
                    action = int(rng.choice(np.flatnonzero(mask)))
                    result = env.step(action)
                    assert result.info["invalid"] is False, "masked action reported invalid"
                    check_invariants(env, spec)
                episodes += 1
        elapsed = time.time() - started
        report("1", True, f"{episodes} random episodes, invariants held, {elapsed:.1f}s")
        assert episodes >= 1000


class TestCriterion2OracleAgreement:
    def test_replay_exact_and_greedy_within_gap(self):
        matches = 0
        total = 0
        for seed in range(50):
            rng = make_rng(seed + 1000)
            spec = ScenarioSpec(
                vessel=GridSpec(2, 2, 2), yard=GridSpec(2, 2, 2),
                num_containers=int(rng.integers(3, 7)),
                num_groups=int(rng.integers(1, 4)),
                num_cranes=1, seed=seed)
            instance = generate_instance(spec)
            oracle = brute_force_min_shifters(instance)

            env = SpgeEnv(instance)
            replayed = 0
            for action in oracle.best_sequence:
                step = env.step(int(action))
                assert step.info["invalid"] is False
                replayed += step.info["shifters"]
            assert env.done
            assert replayed == oracle.best_value, "oracle replay mismatch (tolerance 0)"

            greedy = run_greedy_episode(SpgeEnv(instance)).shifters
            assert greedy >= oracle.best_value, "greedy beat the exhaustive optimum"
            total += 1
            if greedy == oracle.best_value:
                matches += 1
        rate = matches / total
        report("2", rate >= 0.8, f"oracle replay exact on 50/50; greedy optimal on {matches}/{total}")
        assert rate >= 0.8


SCENARIO1 = scenario_spec(1)
LEARNING_ALGOS = ("dqn", "qrdqn", "a2c", "ppo", "trpo")
LEARNING_REPS = 3
LEARNING_STEPS = 20_000
LEARNING_BASE_SEED = 700


@pytest.fixture(scope="module")
def random_baseline_by_rep():
    """Random-policy mean shifters over 100 eval-stream episodes per rep seed."""
    means = []
    for rep in range(LEARNING_REPS):
        factory = EpisodeFactory(SCENARIO1, "spge", run_seed=LEARNING_BASE_SEED + rep)
        rng = make_rng(LEARNING_BASE_SEED + rep)
        shifters = [run_random_episode(factory.eval_env(j), rng).shifters
                    for j in range(100)]
        means.append(float(np.mean(shifters)))
    return means


class TestCriterion3LearningEffect:
    @pytest.mark.parametrize("algo", LEARNING_ALGOS)
    def test_final_beats_random_by_thirty_percent(self, algo, random_baseline_by_rep):
        started = time.time()
        finals = []
        for rep in range(LEARNING_REPS):
            seed = LEARNING_BASE_SEED + rep
            factory = EpisodeFactory(SCENARIO1, "spge", run_seed=seed)
            record = train(factory, algo, AlgoConfig(), LEARNING_STEPS,
                           eval_every=5000, eval_episodes=10, seed=seed)
            finals.append(record.final_shifters)
        mean_final = float(np.mean(finals))
        threshold = 0.7 * float(np.mean(random_baseline_by_rep))
        elapsed = time.time() - started
        ok = mean_final <= threshold
        report(f"3[{algo}]", ok,
               f"final {mean_final:.2f} vs 0.7x random {threshold:.2f} "
               f"({LEARNING_REPS} reps x {LEARNING_STEPS} steps, {elapsed:.0f}s)")
        assert ok


class TestCriterion4SingleCraneEquivalence:
    def test_stepwise_identical_rewards_across_formulations(self):
        for seed in range(20):
            spec = ScenarioSpec(vessel=GridSpec(2, 3, 2), yard=GridSpec(2, 3, 2),
                                num_containers=10, num_groups=3, num_cranes=1,
                                seed=seed + 40)
            instance = generate_instance(spec)
            spge = SpgeEnv(instance)
            mc = MultiCraneEnv(instance, lambda_time=0.0)
            aec = AgentCycleEnv(instance, lambda_time=0.0)
            while not spge.done:
                action = int(np.flatnonzero(spge.action_mask())[0])  # scripted choice
                r_spge = spge.step(action)
                r_mc = mc.step(mc.encode_action(action, 0))
                r_aec = aec.step(action)
                assert r_spge.reward == r_mc.reward == r_aec.reward, "reward mismatch"
                assert (r_spge.info["shifters"] == r_mc.info["shifters"]
                        == r_aec.info["shifters"]), "shifter mismatch"
            assert mc.done and aec.done
            assert spge.episode_shifters() == mc.episode_shifters() == aec.episode_shifters()
        report("4", True, "spge / spge-mc / spaec identical on 20 seeded k=1 instances")


class TestCriterion5MakespanCalibration:
    def greedy_makespans(self, scenario_id: int, seeds: int = 10) -> list[float]:
        spans = []
        for seed in range(seeds):
            spec = scenario_spec(scenario_id, seed=seed)
            env = MultiCraneEnv(generate_instance(spec))
            spans.append(run_greedy_episode(env).makespan)
        return spans

    def test_scenario6_band(self):
        mean = float(np.mean(self.greedy_makespans(6)))
        ok = 850.0 <= mean <= 1150.0
        report("5a", ok, f"scenario 6 greedy mean makespan {mean:.0f}s in [850, 1150]")
        assert ok

    def test_scenario7_band(self):
        mean = float(np.mean(self.greedy_makespans(7)))
        ok = 5800.0 <= mean <= 7000.0
        report("5b", ok, f"scenario 7 greedy mean makespan {mean:.0f}s vs stated [5800, 7000]; "
                         "the greedy policy digs far less than the trained policies the band "
                         "was derived from (see docs/decisions ledger)")
        assert ok, (
            f"scenario 7 greedy mean makespan {mean:.0f}s falls below the stated band "
            "[5800, 7000]s. The band presumes ~150 shifters per episode (the trained-policy "
            "count the reported operation times imply), but the greedy baseline needs only "
            "~40, so its busiest-crane time is ~4200s + ~650s of shifting. The clocked "
            "simulation's scale is right; the band's policy assumption is not attainable "
            "with the greedy baseline."
        )


class TestCriterion7AlgorithmNumerics:
    def test_returns_and_gae_match_bruteforce(self):
        # |delta| < 1e-10 against literal summation on 100 random trajectories.
        rng = make_rng(77)
        worst = 0.0
        for _ in range(100):
            T = int(rng.integers(1, 11))
            rewards = rng.normal(size=T)
            dones = rng.random(T) < 0.2
            values = rng.normal(size=T + 1)
            n = int(rng.integers(1, 7))
            gamma = float(rng.uniform(0.8, 1.0))
            lam = float(rng.uniform(0.0, 1.0))

            got_n = nstep_returns(rewards, dones, values, n, gamma)
            got_g = gae(rewards, dones, values, gamma, lam)

            for t in range(T):
                g = 0.0
                hit = False
                w = min(n, T - t)
                for j in range(w):
                    g += gamma ** j * rewards[t + j]
                    if dones[t + j]:
                        hit = True
                        break
                if not hit:
                    g += gamma ** w * values[t + w]
                worst = max(worst, abs(got_n[t] - g))

            deltas = [rewards[t] + gamma * values[t + 1] * (not dones[t]) - values[t]
                      for t in range(T)]
            for t in range(T):
                a = 0.0
                weight = 1.0
                for j in range(t, T):
                    a += weight * deltas[j]
                    if dones[j]:
                        break
                    weight *= gamma * lam
                worst = max(worst, abs(got_g[t] - a))
        report("7[returns]", worst < 1e-10, f"max |delta| {worst:.2e} over 100 trajectories")
        assert worst < 1e-10

    def test_trpo_kl_bound_on_scenario1_training(self):
        cfg = AlgoConfig(rollout_steps=256, cg_iters=10)
        factory = EpisodeFactory(SCENARIO1, "spge", run_seed=55)
        agent = make_agent("trpo", factory.observation_dim, factory.n_actions, cfg, seed=55)
        env = factory.training_env(0)
        obs, mask = env.reset()
        episode = 0
        for step in range(2048):
            action = agent.select_action(obs, mask)
            result = env.step(action)
            next_mask = (env.action_mask() if not result.done
                         else np.zeros(factory.n_actions, dtype=bool))
            agent.observe(obs, mask, action, result.reward, result.observation,
                          next_mask, result.done)
            if result.done:
                episode += 1
                env = factory.training_env(episode)
                obs, mask = env.reset()
            else:
                obs, mask = result.observation, next_mask
        assert agent.kl_history, "no accepted trust-region steps during the run"
        worst = max(agent.kl_history)
        ok = worst <= 1.5 * cfg.kl_delta
        report("7[trpo-kl]", ok,
               f"{len(agent.kl_history)} accepted steps, max KL {worst:.4f} "
               f"<= 1.5*delta={1.5 * cfg.kl_delta:.4f}")
        assert ok

    def test_gradient_checks_pass(self):
        # The detailed checks live in test_updates.py / test_trpo.py; this
        # re-runs one representative double-precision check per family.
        from test_trpo import TestFisherVectorProduct
        from test_updates import TestA2cLosses, TestDqnLoss, TestPpoLosses, TestQrdqnLoss
        rng = make_rng(123)
        TestDqnLoss().test_gradient_matches_finite_differences(rng)
        TestQrdqnLoss().test_gradient_matches_finite_differences(make_rng(124))
        TestA2cLosses().test_gradient_matches_finite_differences(make_rng(125))
        TestPpoLosses().test_gradient_matches_finite_differences(make_rng(126))
        TestFisherVectorProduct().test_matches_finite_difference_of_kl_gradient(make_rng(127))
        report("7[gradients]", True, "DQN/QR-DQN/A2C/PPO losses and TRPO FVP vs finite differences")


class TestCriterion8Statistics:
    def test_welch_against_reference_and_table_structure(self, tmp_path):
        rng = make_rng(88)
        worst = 0.0
        for _ in range(100):
            a = rng.normal(size=int(rng.integers(2, 25)))
            b = rng.normal(loc=rng.uniform(-1, 1), size=int(rng.integers(2, 25)))
            _, _, p = welch_t_test(a, b)
            ref = float(scipy.stats.ttest_ind(a, b, equal_var=False).pvalue)
            worst = max(worst, abs(p - ref))
        t, _, p = welch_t_test([2.0, 2.0, 2.0], [2.0, 2.0, 2.0])
        exact = (t == 0.0 and p == 1.0)

        base = [record_with_final(10.0 + 0.1 * s, 200.0, seed=s) for s in range(5)]
        shifted = [record_with_final(8.0 + 0.1 * s, 200.0, seed=s) for s in range(5)]
        rows = compare_variants(shifted, base, tmp_path / "cmp.csv", "mc", "aec")
        shifter_row = next(r for r in rows if r["kpi"] == "shifters")
        structure_ok = (
            "(" in shifter_row["mc_value"]
            and shifter_row["significant"] == "*"
            and float(shifter_row["diff"]) == pytest.approx(-2.0)
            and len(rows) == 2
        )
        ok = worst < 1e-6 and exact and structure_ok
        report("8", ok, f"max |delta p| {worst:.2e}; identical-sample p=1 exact; "
                        f"comparison table structure ok")
        assert worst < 1e-6
        assert exact
        assert structure_ok


class TestCriterion9Reproducibility:
    def test_cli_run_byte_identical(self, tmp_path):
        def run(out_dir: Path) -> bytes:
            cmd = [sys.executable, "-m", "stowbench.cli", "run",
                   "--scenario", "2", "--algo", "dqn", "--env", "spge",
                   "--reps", "2", "--timesteps", "5000", "--seed", "123",
                   "--eval-every", "1000",
                   "--out", str(out_dir)]
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=900)
            assert proc.returncode == 0, proc.stderr
            return (out_dir / "curves.csv").read_bytes()

        first = run(tmp_path / "first")
        second = run(tmp_path / "second")
        ok = first == second
        report("9", ok, f"two CLI executions produced byte-identical curves.csv "
                        f"({len(first)} bytes)")
        assert ok


@pytest.mark.extended
class TestCriterion6ExtendedHeadline:
    def test_trpo_scenario5_headline_band(self):
        """Optional long reproduction: TRPO, scenario 5, 200k steps, 3 reps.

        Pass band: mean final shifters within 193 +/- 10%. Excluded from the
        default gate (run with ``pytest -m extended``).
        """
        finals = []
        for rep in range(3):
            seed = 900 + rep
            factory = EpisodeFactory(scenario_spec(5), "spge", run_seed=seed)
            record = train(factory, "trpo", AlgoConfig(), 200_000,
                           eval_every=20_000, eval_episodes=10, seed=seed)
            finals.append(record.final_shifters)
        mean_final = float(np.mean(finals))
        ok = 193 * 0.9 <= mean_final <= 193 * 1.1
        report("6[extended]", ok, f"TRPO scenario 5 mean final shifters {mean_final:.1f} "
                                  f"vs 193 +/- 10%")
        assert ok
