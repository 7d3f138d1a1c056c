"""Training runs, parameter sweeps and complexity profiling.

A run executes episodes of fixed length until the step budget is spent,
logging every step to a MetricsLog. Sweeps repeat runs across transmit
powers or IRS sizes with per-point derived seeds. Profiling reports the
trainable-parameter count, checkpoint size and episode wall-clock of the
configured agent.
"""

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .agent import DdpgAgent, RandomAgent, Td3Agent
from .config import ConfigError
from .env import MisoEnv
from .mlp import hidden_width

CSV_COLUMNS = ("step", "episode", "reward", "avg_reward",
               "critic1_loss", "critic2_loss", "actor_loss")

REWARD_WINDOW = 200  # window for the secondary smoothed reward in the summary


@dataclass
class MetricsLog:
    steps: list = field(default_factory=list)
    episodes: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    avg_rewards: list = field(default_factory=list)
    critic1_losses: list = field(default_factory=list)
    critic2_losses: list = field(default_factory=list)
    actor_losses: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def append(self, step, episode, reward, avg_reward, critic1_loss,
               critic2_loss, actor_loss):
        self.steps.append(step)
        self.episodes.append(episode)
        self.rewards.append(reward)
        self.avg_rewards.append(avg_reward)
        self.critic1_losses.append(critic1_loss)
        self.critic2_losses.append(critic2_loss)
        self.actor_losses.append(actor_loss)

    def __len__(self):
        return len(self.steps)

    def windowed_mean(self, window=REWARD_WINDOW):
        """Mean reward over the trailing window (whole run if shorter)."""
        tail = self.rewards[-window:]
        return float(np.mean(tail)) if tail else 0.0

    def to_csv(self, path):
        """Write the per-step records; floats use repr so values round-trip."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            rows = zip(self.steps, self.episodes, self.rewards, self.avg_rewards,
                       self.critic1_losses, self.critic2_losses, self.actor_losses)
            for step, episode, reward, avg, c1, c2, al in rows:
                writer.writerow([step, episode, repr(reward), repr(avg),
                                 "" if c1 is None else repr(c1),
                                 "" if c2 is None else repr(c2),
                                 "" if al is None else repr(al)])

    @classmethod
    def from_csv(cls, path):
        log = cls()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != CSV_COLUMNS:
                raise ValueError(f"unexpected CSV header {header}")
            for row in reader:
                log.append(int(row[0]), int(row[1]), float(row[2]), float(row[3]),
                           *(None if cell == "" else float(cell) for cell in row[4:7]))
        return log

    def write_summary(self, path):
        with open(path, "w") as fh:
            for key, value in self.summary.items():
                fh.write(f"{key} = {value}\n")


def _agent_hidden_sizes(config):
    if config.hidden_width > 0:
        w = config.hidden_width
    else:
        w = hidden_width(config.num_bs_antennas, config.num_users,
                         config.num_irs_elements)
    return [w, w]


def build_agent(config, env, rng):
    """Instantiate the configured agent kind for a given environment."""
    common = dict(
        state_dim=env.state_dim, action_dim=env.action_dim,
        hidden_sizes=_agent_hidden_sizes(config), rng=rng,
        gamma=config.gamma, lr=config.learning_rate, lr_decay=config.lr_decay,
        tau_actor=config.tau_actor, tau_critic=config.tau_critic,
        batch_size=config.batch_size, buffer_capacity=config.buffer_capacity,
        noise_std_initial=config.noise_std_initial,
        noise_std_final=config.noise_std_final, total_steps=config.total_steps,
        normalize_states=config.normalize_states,
    )
    if config.agent == "td3":
        return Td3Agent(policy_delay=config.policy_delay, **common)
    if config.agent == "ddpg":
        return DdpgAgent(**common)
    if config.agent == "random":
        return RandomAgent(action_dim=env.action_dim)
    raise ConfigError(f"unknown agent kind {config.agent!r}")


def run(config):
    """Train (or roll out) one agent for config.total_steps steps."""
    init_rng, env_rng, train_rng = (np.random.default_rng(s) for s in
                                    np.random.SeedSequence(config.seed).spawn(3))
    env = MisoEnv(config.env_config())
    agent = build_agent(config, env, init_rng)

    log = MetricsLog()
    reward_sum = 0.0
    episode = -1
    episode_times = []
    episode_start = None
    start = time.perf_counter()
    for t in range(config.total_steps):
        if t % config.episode_length == 0:
            if episode_start is not None:
                episode_times.append(time.perf_counter() - episode_start)
            episode_start = time.perf_counter()
            env.reset(env_rng)
            episode += 1
        reward, diag = agent.train_step(env, t, train_rng)
        reward_sum += reward
        log.append(t, episode, reward, reward_sum / (t + 1),
                   diag["critic1_loss"], diag["critic2_loss"], diag["actor_loss"])
    if episode_start is not None:
        episode_times.append(time.perf_counter() - episode_start)

    log.summary = {
        "agent": config.agent,
        "seed": config.seed,
        "total_steps": config.total_steps,
        "best_se": max(log.rewards),
        "final_avg_reward": log.avg_rewards[-1],
        "final_window_mean": log.windowed_mean(),
        "trainable_params": (agent.count_trainable_params()
                             if hasattr(agent, "count_trainable_params") else 0),
        "checkpoint_bytes": (len(agent.to_bytes())
                             if hasattr(agent, "to_bytes") else 0),
        "seconds_per_episode": float(np.median(episode_times)),
        "wall_clock_seconds": time.perf_counter() - start,
    }
    return log


def _derived_seed(base_seed, *indices):
    """Stable per-sweep-point seed from the master seed and point indices."""
    return int(np.random.SeedSequence([base_seed, *indices]).generate_state(1)[0])


def sweep_power(config, pt_db_list, agents=("td3", "ddpg", "random")):
    """One full run per (agent, Pt); returns rows of (agent, pt_db, best_se)."""
    if not pt_db_list:
        raise ConfigError("pt_db_list must be non-empty")
    rows = []
    for ai, agent in enumerate(agents):
        for pi, pt_db in enumerate(pt_db_list):
            sub = config.replace(agent=agent, pt_db=pt_db,
                                 seed=_derived_seed(config.seed, ai, pi))
            log = run(sub)
            rows.append({"agent": agent, "pt_db": pt_db,
                         "best_se": log.summary["best_se"]})
    return rows


def sweep_elements(config, n_list):
    """One run per IRS size; returns {n: MetricsLog} with average-reward curves."""
    if not n_list:
        raise ConfigError("n_list must be non-empty")
    logs = {}
    for ni, n in enumerate(n_list):
        sub = config.replace(num_irs_elements=n,
                             seed=_derived_seed(config.seed, ni))
        logs[n] = run(sub)
    return logs


def write_sweep_csv(rows, path, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


@dataclass(frozen=True)
class ComplexityProfile:
    trainable_params: int  # actor + critics + all target networks
    checkpoint_bytes: int  # serialized float64 parameters of the same set
    seconds_per_episode: float  # median of 3 trained episodes


def profile_complexity(config, episodes=3):
    """Measure model size and per-episode training time for one agent kind."""
    if config.agent == "random":
        raise ConfigError("profiling needs a learning agent (td3 or ddpg)")
    init_rng, env_rng, train_rng = (np.random.default_rng(s) for s in
                                    np.random.SeedSequence(config.seed).spawn(3))
    env = MisoEnv(config.env_config())
    agent = build_agent(config, env, init_rng)
    durations = []
    t = 0
    for _ in range(episodes):
        env.reset(env_rng)
        start = time.perf_counter()
        for _ in range(config.episode_length):
            agent.train_step(env, t, train_rng)
            t += 1
        durations.append(time.perf_counter() - start)
    return ComplexityProfile(
        trainable_params=agent.count_trainable_params(),
        checkpoint_bytes=len(agent.to_bytes()),
        seconds_per_episode=float(np.median(durations)),
    )
