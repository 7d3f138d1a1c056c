import numpy as np
import pytest

from irsdrl.agent import (Batch, DdpgAgent, RandomAgent, ReplayBuffer, Td3Agent,
                          soft_update)
from irsdrl.channel import ChannelConfig, SystemGeometry
from irsdrl.env import EnvConfig, MisoEnv
from irsdrl.mlp import Mlp


def small_env(episode_length=100):
    config = EnvConfig(channel=ChannelConfig(num_bs_antennas=2, num_irs_elements=2,
                                             num_users=2),
                       geometry=SystemGeometry(), pt=10.0,
                       episode_length=episode_length)
    return MisoEnv(config)


def small_agent(cls=Td3Agent, env=None, seed=0, **kwargs):
    env = env or small_env()
    defaults = dict(hidden_sizes=[16, 16], batch_size=4, total_steps=200)
    defaults.update(kwargs)
    return Td3Agent(env.state_dim, env.action_dim, rng=np.random.default_rng(seed),
                    **defaults) if cls is Td3Agent else DdpgAgent(
                        env.state_dim, env.action_dim, rng=np.random.default_rng(seed),
                        **defaults)


def snapshot(agent):
    return [w.copy() for net in agent.all_networks() for w in net.weights + net.biases]


def params_equal(a, b):
    return all(np.array_equal(x, y) for x, y in zip(a, b))


class TestReplayBuffer:
    def test_push_grows_size(self):
        buf = ReplayBuffer(5, 3, 2)
        buf.push(np.ones(3), np.ones(2), 1.0, np.ones(3))
        assert len(buf) == 1

    def test_ring_overwrites_oldest(self):
        buf = ReplayBuffer(3, 1, 1)
        for i in range(4):
            buf.push([float(i)], [0.0], float(i), [0.0])
        assert len(buf) == 3
        assert 0.0 not in buf.rewards[:3] or buf.rewards.tolist()[:3] == [3.0, 1.0, 2.0]
        assert set(buf.rewards[:3]) == {1.0, 2.0, 3.0}

    def test_sample_single_item(self):
        buf = ReplayBuffer(3, 1, 1)
        buf.push([7.0], [0.5], 2.0, [8.0])
        batch = buf.sample(1, np.random.default_rng(0))
        assert batch.states[0, 0] == 7.0
        assert batch.rewards[0] == 2.0

    def test_full_sample_is_permutation(self):
        buf = ReplayBuffer(10, 1, 1)
        for i in range(10):
            buf.push([float(i)], [0.0], float(i), [0.0])
        batch = buf.sample(10, np.random.default_rng(1))
        assert sorted(batch.rewards.tolist()) == [float(i) for i in range(10)]

    def test_sample_uniformity(self):
        buf = ReplayBuffer(10, 1, 1)
        for i in range(10):
            buf.push([float(i)], [0.0], float(i), [0.0])
        rng = np.random.default_rng(2)
        counts = np.zeros(10)
        draws = 100_000
        for _ in range(draws):
            counts[int(buf.sample(1, rng).rewards[0])] += 1
        assert np.max(np.abs(counts / draws - 0.1)) < 0.01

    def test_zero_sample_empty(self):
        buf = ReplayBuffer(3, 1, 1)
        buf.push([0.0], [0.0], 0.0, [0.0])
        batch = buf.sample(0, np.random.default_rng(0))
        assert len(batch.rewards) == 0

    def test_oversample_rejected(self):
        buf = ReplayBuffer(3, 1, 1)
        buf.push([0.0], [0.0], 0.0, [0.0])
        with pytest.raises(ValueError):
            buf.sample(2, np.random.default_rng(0))


class TestSelectAction:
    def test_no_explore_is_actor_output(self):
        env = small_env()
        agent = small_agent(env=env)
        state = env.reset(np.random.default_rng(0))
        action = agent.select_action(state, explore=False)
        expected, _ = agent.actor.forward(agent._norm(state))
        np.testing.assert_array_equal(action, expected)
        assert np.all(np.abs(action) <= 1.0)

    def test_zero_noise_equals_greedy(self):
        env = small_env()
        agent = small_agent(env=env, noise_std_initial=0.0, noise_std_final=0.0)
        agent._noise_std = 0.0
        state = env.reset(np.random.default_rng(1))
        greedy = agent.select_action(state, explore=False)
        noisy = agent.select_action(state, explore=True, rng=np.random.default_rng(2))
        np.testing.assert_array_equal(greedy, noisy)

    def test_noisy_actions_stay_clipped(self):
        env = small_env()
        agent = small_agent(env=env, noise_std_initial=2.0)
        agent._noise_std = 2.0
        state = env.reset(np.random.default_rng(3))
        rng = np.random.default_rng(4)
        for _ in range(1000):
            action = agent.select_action(state, explore=True, rng=rng)
            assert np.all(action >= -1.0) and np.all(action <= 1.0)


class TestComputeTarget:
    def make_agent_with_constant_critics(self, q1, q2):
        env = small_env()
        agent = small_agent(env=env)
        for tc, value in zip(agent.target_critics, (q1, q2)):
            for w in tc.weights:
                w[:] = 0
            for b in tc.biases:
                b[:] = 0
            tc.biases[-1][0] = value
        return env, agent

    def batch_of_one(self, env, reward):
        state = env.reset(np.random.default_rng(0))
        return Batch(states=state[None, :], actions=np.zeros((1, env.action_dim)),
                     rewards=np.array([reward]), next_states=state[None, :])

    def test_min_of_two_constants(self):
        env, agent = self.make_agent_with_constant_critics(2.0, 3.0)
        y = agent.compute_target(self.batch_of_one(env, 1.0))
        assert y[0, 0] == pytest.approx(1.0 + 0.99 * 2.0)

    def test_zero_gamma_returns_reward(self):
        env, agent = self.make_agent_with_constant_critics(2.0, 3.0)
        agent.gamma = 0.0
        y = agent.compute_target(self.batch_of_one(env, 1.5))
        assert y[0, 0] == 1.5

    def test_equal_critics(self):
        env, agent = self.make_agent_with_constant_critics(4.0, 4.0)
        y = agent.compute_target(self.batch_of_one(env, 1.0))
        assert y[0, 0] == pytest.approx(1.0 + 0.99 * 4.0)

    def test_never_exceeds_single_critic_targets(self):
        env = small_env()
        agent = small_agent(env=env, seed=3)
        rng = np.random.default_rng(5)
        batch = Batch(states=rng.standard_normal((8, env.state_dim)),
                      actions=rng.uniform(-1, 1, (8, env.action_dim)),
                      rewards=rng.uniform(0, 5, 8),
                      next_states=rng.standard_normal((8, env.state_dim)))
        y = agent.compute_target(batch)
        s2 = agent._norm(batch.next_states)
        a2, _ = agent.target_actor.forward(s2)
        x2 = np.concatenate([s2, a2], axis=1)
        for tc in agent.target_critics:
            single = batch.rewards[:, None] + agent.gamma * tc.forward(x2)[0]
            assert np.all(y <= single + 1e-12)


class TestUpdates:
    def random_batch(self, env, agent, rng, size=4):
        states = rng.standard_normal((size, env.state_dim))
        actions = rng.uniform(-1, 1, (size, env.action_dim))
        rewards = rng.uniform(0, 3, size)
        next_states = rng.standard_normal((size, env.state_dim))
        return Batch(states, actions, rewards, next_states)

    def test_critic_loss_zero_at_target(self):
        env = small_env()
        agent = small_agent(env=env)
        # Make Q(s, a) = y for all items: zero critics, zero targets, r = 0
        for net in agent.critics + agent.target_critics + [agent.target_actor]:
            for w in net.weights:
                w[:] = 0
            for b in net.biases:
                b[:] = 0
        batch = Batch(states=np.zeros((2, env.state_dim)),
                      actions=np.zeros((2, env.action_dim)),
                      rewards=np.zeros(2), next_states=np.zeros((2, env.state_dim)))
        before = [w.copy() for w in agent.critics[0].weights]
        losses = agent.update_critics(batch)
        assert losses == (0.0, 0.0)
        for w, orig in zip(agent.critics[0].weights, before):
            np.testing.assert_array_equal(w, orig)

    def test_single_item_squared_error(self):
        env = small_env()
        agent = small_agent(env=env)
        for net in agent.critics + agent.target_critics:
            for w in net.weights:
                w[:] = 0
            for b in net.biases:
                b[:] = 0
        for tc in agent.target_critics:
            tc.biases[-1][0] = 2.0 / agent.gamma  # min target becomes 2 with r = 0
        batch = Batch(states=np.zeros((1, env.state_dim)),
                      actions=np.zeros((1, env.action_dim)),
                      rewards=np.zeros(1), next_states=np.zeros((1, env.state_dim)))
        losses = agent.update_critics(batch)
        assert losses[0] == pytest.approx(4.0)

    def test_critic_gradients_match_finite_differences(self):
        env = small_env()
        agent = small_agent(env=env, hidden_sizes=[6])
        rng = np.random.default_rng(6)
        batch = self.random_batch(env, agent, rng)
        y = agent.compute_target(batch)
        x = np.concatenate([agent._norm(batch.states), batch.actions], axis=1)
        critic = agent.critics[0]
        q, cache = critic.forward(x)
        grad_w, grad_b, _ = critic.backward(cache, 2.0 * (q - y) / len(y))

        def mse():
            q_now, _ = critic.forward(x)
            return float(np.mean((q_now - y) ** 2))

        h = 1e-5
        for layer in range(len(critic.weights)):
            w = critic.weights[layer]
            flat_idx = [(0, 0), (w.shape[0] - 1, w.shape[1] - 1)]
            for idx in flat_idx:
                orig = w[idx]
                w[idx] = orig + h
                up = mse()
                w[idx] = orig - h
                down = mse()
                w[idx] = orig
                numeric = (up - down) / (2 * h)
                analytic = grad_w[layer][idx]
                denom = max(abs(numeric), abs(analytic), 1e-8)
                assert abs(analytic - numeric) / denom < 1e-4

    def test_actor_unchanged_when_critic_flat(self):
        env = small_env()
        agent = small_agent(env=env)
        for w in agent.critics[0].weights:
            w[:] = 0
        for b in agent.critics[0].biases:
            b[:] = 0
        before = [w.copy() for w in agent.actor.weights]
        agent.update_actor(self.random_batch(env, agent, np.random.default_rng(7)))
        for w, orig in zip(agent.actor.weights, before):
            np.testing.assert_array_equal(w, orig)

    def test_actor_moves_toward_quadratic_optimum(self):
        # Critic fixed at Q(s, a) = -(a - 0.3)^2 via a hand-built quadratic probe
        env = small_env()

        class QuadraticCritic:
            def forward(self, x):
                a = x[:, -env.action_dim:]
                q = -np.sum((a - 0.3) ** 2, axis=1, keepdims=True)
                return q, ("cache", x)

            def backward(self, cache, dout):
                _, x = cache
                a = x[:, -env.action_dim:]
                grad_a = dout * (-2.0 * (a - 0.3))
                grad_x = np.concatenate([np.zeros((len(a), env.state_dim)), grad_a], axis=1)
                return [], [], grad_x

        agent = small_agent(env=env)
        agent.critics[0] = QuadraticCritic()
        agent.critic_adams[0] = None

        class NoopAdam:
            def step(self, *args):
                pass

        # keep the actor optimizer real; replace nothing else
        rng = np.random.default_rng(8)
        batch = self.random_batch(env, agent, rng)
        state = agent._norm(batch.states)
        before, _ = agent.actor.forward(state)
        agent.update_actor(batch)
        after, _ = agent.actor.forward(state)
        gap_before = np.mean((before - 0.3) ** 2)
        gap_after = np.mean((after - 0.3) ** 2)
        assert gap_after < gap_before

    def test_second_critic_does_not_affect_actor_update(self):
        env = small_env()

        def actor_after_update(perturb):
            agent = small_agent(env=env, seed=11)
            if perturb:
                agent.critics[1].weights[0] += 0.5
            batch = self.random_batch(env, agent, np.random.default_rng(9))
            agent.update_actor(batch)
            return [w.copy() for w in agent.actor.weights]

        assert params_equal(actor_after_update(False), actor_after_update(True))

    def test_no_gradient_leak_into_targets(self):
        env = small_env()
        agent = small_agent(env=env, seed=12)
        batch = self.random_batch(env, agent, np.random.default_rng(10))
        y_before = agent.compute_target(batch)
        agent.update_critics(batch)
        y_after = agent.compute_target(batch)
        np.testing.assert_array_equal(y_before, y_after)


class TestSoftUpdate:
    def test_tau_one_copies_source(self):
        rng = np.random.default_rng(13)
        source, target = Mlp([2, 3, 1], "linear", rng), Mlp([2, 3, 1], "linear", rng)
        soft_update(target, source, 1.0)
        for tw, sw in zip(target.weights, source.weights):
            np.testing.assert_array_equal(tw, sw)

    def test_tau_zero_keeps_target(self):
        rng = np.random.default_rng(14)
        source, target = Mlp([2, 3, 1], "linear", rng), Mlp([2, 3, 1], "linear", rng)
        before = [w.copy() for w in target.weights]
        soft_update(target, source, 0.0)
        for w, orig in zip(target.weights, before):
            np.testing.assert_array_equal(w, orig)

    def test_scalar_convex_combination(self):
        source, target = Mlp([1, 1], "linear"), Mlp([1, 1], "linear")
        source.weights[0][0, 0] = 2.0
        soft_update(target, source, 0.25)
        assert target.weights[0][0, 0] == pytest.approx(0.5)

    def test_contraction_toward_frozen_source(self):
        rng = np.random.default_rng(15)
        source, target = Mlp([3, 4, 2], "tanh", rng), Mlp([3, 4, 2], "tanh", rng)
        tau, n = 0.1, 20
        gap0 = max(np.max(np.abs(tw - sw))
                   for tw, sw in zip(target.weights, source.weights))
        for _ in range(n):
            soft_update(target, source, tau)
        gap = max(np.max(np.abs(tw - sw))
                  for tw, sw in zip(target.weights, source.weights))
        assert gap <= gap0 * (1 - tau) ** n + 1e-10

    def test_bad_tau_rejected(self):
        with pytest.raises(ValueError):
            soft_update(Mlp([1, 1]), Mlp([1, 1]), 1.5)


class TestTrainStep:
    def test_targets_equal_originals_at_init(self):
        agent = small_agent()
        for net, target in zip([agent.actor] + agent.critics,
                               [agent.target_actor] + agent.target_critics):
            for w, tw in zip(net.weights, target.weights):
                assert np.array_equal(w, tw)
            for b, tb in zip(net.biases, target.biases):
                assert np.array_equal(b, tb)

    def test_cold_buffer_changes_nothing(self):
        env = small_env()
        agent = small_agent(env=env, batch_size=50)
        env.reset(np.random.default_rng(16))
        before = snapshot(agent)
        rng = np.random.default_rng(17)
        for t in range(10):
            agent.train_step(env, t, rng)
        assert params_equal(before, snapshot(agent))

    @pytest.mark.parametrize("delay", [1, 2, 5])
    def test_update_schedule_floor(self, delay):
        env = small_env()
        agent = small_agent(env=env, batch_size=4, policy_delay=delay)
        env.reset(np.random.default_rng(18))
        rng = np.random.default_rng(19)
        updates = 0
        warm = 0
        for t in range(37):
            actor_before = [w.copy() for w in agent.actor.weights]
            _, diag = agent.train_step(env, t, rng)
            if diag["critic1_loss"] is not None:
                warm += 1
            if not params_equal(actor_before, [w for w in agent.actor.weights]):
                updates += 1
        assert updates == warm // delay

    def test_td3_first_critic_update_matches_ddpg(self):
        # With both TD3 critics identical, min(Q1', Q2') = Q1' and the first
        # critic's regression equals the single-critic DDPG update.
        env1, env2 = small_env(), small_env()
        td3 = small_agent(Td3Agent, env=env1, seed=20)
        ddpg = small_agent(DdpgAgent, env=env2, seed=21)
        # force identical networks everywhere
        for src, dst in [(td3.actor, ddpg.actor), (td3.target_actor, ddpg.target_actor)]:
            dst.weights = [w.copy() for w in src.weights]
            dst.biases = [b.copy() for b in src.biases]
        for net in (td3.critics[1], td3.target_critics[1], ddpg.critics[0],
                    ddpg.target_critics[0]):
            net.weights = [w.copy() for w in td3.critics[0].weights]
            net.biases = [b.copy() for b in td3.critics[0].biases]
        td3.target_critics[0].weights = [w.copy() for w in td3.critics[0].weights]
        td3.target_critics[0].biases = [b.copy() for b in td3.critics[0].biases]
        rng = np.random.default_rng(22)
        batch = Batch(states=rng.standard_normal((4, env1.state_dim)),
                      actions=rng.uniform(-1, 1, (4, env1.action_dim)),
                      rewards=rng.uniform(0, 3, 4),
                      next_states=rng.standard_normal((4, env1.state_dim)))
        td3.normalizer = None
        ddpg.normalizer = None
        loss_td3 = td3.update_critics(batch)[0]
        loss_ddpg = ddpg.update_critics(batch)[0]
        assert loss_td3 == pytest.approx(loss_ddpg, rel=1e-12)
        for a, b in zip(td3.critics[0].weights, ddpg.critics[0].weights):
            np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_ddpg_target_arithmetic(self):
        env = small_env()
        agent = small_agent(DdpgAgent, env=env)
        for tc in agent.target_critics:
            for w in tc.weights:
                w[:] = 0
            for b in tc.biases:
                b[:] = 0
            tc.biases[-1][0] = 2.0
        state = env.reset(np.random.default_rng(23))
        batch = Batch(states=state[None, :], actions=np.zeros((1, env.action_dim)),
                      rewards=np.array([1.0]), next_states=state[None, :])
        y = agent.compute_target(batch)
        assert y[0, 0] == pytest.approx(2.98)

    def test_ddpg_has_fewer_trainables_than_td3(self):
        env = small_env()
        td3 = small_agent(Td3Agent, env=env)
        ddpg = small_agent(DdpgAgent, env=env)
        assert ddpg.count_trainable_params() < td3.count_trainable_params()

    def test_training_run_deterministic(self):
        def final_weights(seed):
            env = small_env()
            agent = small_agent(env=env, seed=seed)
            env_rng = np.random.default_rng(100)
            train_rng = np.random.default_rng(200)
            for t in range(60):
                if t % 20 == 0:
                    env.reset(env_rng)
                agent.train_step(env, t, train_rng)
            return snapshot(agent)

        assert params_equal(final_weights(5), final_weights(5))


class TestRandomAgent:
    def test_actions_in_bounds(self):
        agent = RandomAgent(6)
        rng = np.random.default_rng(24)
        action = agent.select_action(None, rng=rng)
        assert action.shape == (6,)
        assert np.all(np.abs(action) <= 1.0)

    def test_train_step_returns_reward(self):
        env = small_env()
        env.reset(np.random.default_rng(25))
        agent = RandomAgent(env.action_dim)
        reward, diag = agent.train_step(env, 0, np.random.default_rng(26))
        assert reward >= 0.0
        assert diag["critic1_loss"] is None
