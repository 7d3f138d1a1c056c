"""DDPG and TD3 agents: replay buffer, twin critics, delayed policy updates.

Both agents share the same machinery; TD3 adds the second critic (minimum
target) and the update delay. Critic inputs are the concatenation of the
state and action vectors. States are standardized with running statistics
before entering any network; the statistics update deterministically from
the visited states, so a whole training run remains a pure function of the
configuration and seed.
"""

from collections import namedtuple

import numpy as np

from .mlp import AdamState, Mlp

Batch = namedtuple("Batch", ["states", "actions", "rewards", "next_states"])


class ReplayBuffer:
    """Fixed-capacity ring of (s, a, r, s') transitions."""

    def __init__(self, capacity, state_dim, action_dim):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.size = 0
        self._head = 0

    def __len__(self):
        return self.size

    def push(self, state, action, reward, next_state):
        i = self._head
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self._head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, w, rng):
        """Uniform sample of w transitions without replacement."""
        if w > self.size:
            raise ValueError(f"cannot sample {w} items from buffer of size {self.size}")
        idx = rng.choice(self.size, size=w, replace=False)
        return Batch(self.states[idx], self.actions[idx], self.rewards[idx],
                     self.next_states[idx])


class RunningNormalizer:
    """Per-coordinate Welford mean/variance for state standardization."""

    def __init__(self, dim, epsilon=1e-8, clip=10.0):
        self.count = 0
        self.mean = np.zeros(dim)
        self._m2 = np.zeros(dim)
        self.epsilon = epsilon
        self.clip = clip

    def update(self, x):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (x - self.mean)

    def normalize(self, x):
        if self.count < 2:
            return np.asarray(x, dtype=float)
        std = np.sqrt(self._m2 / self.count + self.epsilon)
        return np.clip((x - self.mean) / std, -self.clip, self.clip)


def soft_update(target, source, tau):
    """Polyak step: target <- tau * source + (1 - tau) * target."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    for tw, sw in zip(target.weights, source.weights):
        if tw.shape != sw.shape:
            raise ValueError("network shapes do not match")
        tw *= 1.0 - tau
        tw += tau * sw
    for tb, sb in zip(target.biases, source.biases):
        tb *= 1.0 - tau
        tb += tau * sb


class _ActorCriticAgent:
    """Common machinery; subclasses fix the critic count and delay."""

    num_critics = 1

    def __init__(self, state_dim, action_dim, hidden_sizes, rng, gamma=0.99,
                 lr=1e-3, lr_decay=1e-5, tau_actor=0.005, tau_critic=0.005,
                 policy_delay=1, batch_size=16, buffer_capacity=100_000,
                 noise_std_initial=0.1, noise_std_final=0.01, total_steps=8000,
                 normalize_states=True):
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if policy_delay < 1:
            raise ValueError("policy_delay must be >= 1")
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.gamma = gamma
        self.tau_actor = tau_actor
        self.tau_critic = tau_critic
        self.policy_delay = policy_delay
        self.batch_size = batch_size
        self.noise_std_initial = noise_std_initial
        self.noise_std_final = noise_std_final
        self.total_steps = total_steps
        self._noise_std = noise_std_initial
        self._warm_steps = 0

        hidden = list(hidden_sizes)
        self.actor = Mlp([state_dim] + hidden + [action_dim], "tanh", rng)
        self.critics = [Mlp([state_dim + action_dim] + hidden + [1], "linear", rng)
                        for _ in range(self.num_critics)]
        self.target_actor = self.actor.copy()
        self.target_critics = [c.copy() for c in self.critics]

        self.actor_adam = AdamState(self.actor, base_lr=lr, decay=lr_decay)
        self.critic_adams = [AdamState(c, base_lr=lr, decay=lr_decay)
                             for c in self.critics]

        self.buffer = ReplayBuffer(buffer_capacity, state_dim, action_dim)
        self.normalizer = RunningNormalizer(state_dim) if normalize_states else None

    # ----- networks -----

    def _norm(self, states):
        if self.normalizer is None:
            return np.asarray(states, dtype=float)
        return self.normalizer.normalize(states)

    def all_networks(self):
        """Trainables first, then their targets."""
        return ([self.actor] + self.critics
                + [self.target_actor] + self.target_critics)

    def count_trainable_params(self, include_targets=True):
        nets = self.all_networks() if include_targets else [self.actor] + self.critics
        return sum(net.count_params() for net in nets)

    def to_bytes(self):
        """Checkpoint: all networks (targets included), concatenated."""
        import struct
        parts = [struct.pack("<q", len(self.all_networks()))]
        for net in self.all_networks():
            parts.append(net.to_bytes())
        return b"".join(parts)

    # ----- acting -----

    def exploration_std(self, t):
        """Linear decay from the initial to the final std over the run."""
        horizon = max(self.total_steps - 1, 1)
        frac = min(t / horizon, 1.0)
        return self.noise_std_initial + frac * (self.noise_std_final - self.noise_std_initial)

    def select_action(self, state, explore=False, rng=None):
        state = np.asarray(state, dtype=float)
        if state.shape != (self.state_dim,):
            raise ValueError("state dimension mismatch")
        action, _ = self.actor.forward(self._norm(state))
        if explore:
            action = action + rng.normal(0.0, self._noise_std, self.action_dim)
            action = np.clip(action, -1.0, 1.0)
        return action

    # ----- learning -----

    def compute_target(self, batch):
        """y = r + gamma * min_i Q_i'(s', pi'(s')); column vector (W, 1)."""
        s2 = self._norm(batch.next_states)
        a2, _ = self.target_actor.forward(s2)
        x2 = np.concatenate([s2, a2], axis=1)
        q2 = np.min([tc.forward(x2)[0] for tc in self.target_critics], axis=0)
        return batch.rewards[:, None] + self.gamma * q2

    def update_critics(self, batch):
        """One MSE regression step per critic toward the shared target."""
        y = self.compute_target(batch)
        x = np.concatenate([self._norm(batch.states), batch.actions], axis=1)
        w = len(batch.rewards)
        losses = []
        for critic, adam in zip(self.critics, self.critic_adams):
            q, cache = critic.forward(x)
            diff = q - y
            losses.append(float(np.mean(diff**2)))
            grad_w, grad_b, _ = critic.backward(cache, 2.0 * diff / w)
            adam.step(critic, grad_w, grad_b)
        return tuple(losses)

    def update_actor(self, batch):
        """Deterministic policy gradient ascent through the first critic."""
        s = self._norm(batch.states)
        actions, actor_cache = self.actor.forward(s)
        x = np.concatenate([s, actions], axis=1)
        q, critic_cache = self.critics[0].forward(x)
        w = len(q)
        # Descend on -mean(Q); critic parameter gradients are discarded.
        _, _, grad_x = self.critics[0].backward(critic_cache, -np.ones_like(q) / w)
        grad_action = grad_x[:, self.state_dim:]
        grad_w, grad_b, _ = self.actor.backward(actor_cache, grad_action)
        self.actor_adam.step(self.actor, grad_w, grad_b)
        return float(-np.mean(q))

    def soft_update_targets(self):
        soft_update(self.target_actor, self.actor, self.tau_actor)
        for tc, c in zip(self.target_critics, self.critics):
            soft_update(tc, c, self.tau_critic)

    def train_step(self, env, t, rng):
        """One environment step plus (when the buffer is warm) one update.

        Critics update every warm step; the actor and all targets update
        once per policy_delay warm steps.
        """
        self._noise_std = self.exploration_std(t)
        state = env.current_state
        if self.normalizer is not None:
            self.normalizer.update(state)
        action = self.select_action(state, explore=True, rng=rng)
        next_state, reward = env.step(action)
        self.buffer.push(state, action, reward, next_state)

        diagnostics = {"critic1_loss": None, "critic2_loss": None, "actor_loss": None}
        if len(self.buffer) >= self.batch_size:
            batch = self.buffer.sample(self.batch_size, rng)
            losses = self.update_critics(batch)
            diagnostics["critic1_loss"] = losses[0]
            if len(losses) > 1:
                diagnostics["critic2_loss"] = losses[1]
            self._warm_steps += 1
            if self._warm_steps % self.policy_delay == 0:
                diagnostics["actor_loss"] = self.update_actor(batch)
                self.soft_update_targets()
        return reward, diagnostics


class DdpgAgent(_ActorCriticAgent):
    """Single critic, no update delay."""

    num_critics = 1

    def __init__(self, *args, **kwargs):
        kwargs["policy_delay"] = 1
        super().__init__(*args, **kwargs)


class Td3Agent(_ActorCriticAgent):
    """Twin critics with minimum bootstrap target and delayed policy updates."""

    num_critics = 2


class RandomAgent:
    """Uniform actions in [-1, 1]; the no-learning baseline arm."""

    def __init__(self, action_dim):
        self.action_dim = action_dim

    def select_action(self, state, explore=False, rng=None):
        return rng.uniform(-1.0, 1.0, self.action_dim)

    def train_step(self, env, t, rng):
        action = self.select_action(env.current_state, rng=rng)
        _, reward = env.step(action)
        return reward, {"critic1_loss": None, "critic2_loss": None, "actor_loss": None}
