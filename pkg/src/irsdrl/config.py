"""Experiment configuration: a flat key=value text file with a strict schema.

Every knob of the simulator, environment, agents and training loop lives
here. Unknown keys are errors; missing keys fall back to the documented
defaults. The transmit power is written in dB and converted to linear
watts once, at load time.
"""

import dataclasses
from dataclasses import dataclass

from .channel import ChannelConfig, SystemGeometry
from .env import EnvConfig

AGENT_KINDS = ("td3", "ddpg", "random")


class ConfigError(ValueError):
    pass


def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    # agent / run
    agent: str = "td3"
    seed: int = 0
    total_steps: int = 8000
    episode_length: int = 8000
    # system dimensions
    num_bs_antennas: int = 4
    num_irs_elements: int = 4
    num_users: int = 4
    # channel statistics
    rician_k1: float = 10.0
    rician_k2: float = 10.0
    pathloss_exp_bs_irs: float = 2.2
    pathloss_exp_irs_user: float = 2.2
    pathloss_exp_bs_user: float = 3.5
    reference_pathloss_db: float = 30.0
    noise_variance: float = 1e-11
    # geometry
    bs_irs_distance: float = 51.0
    user_height_offset: float = 2.0
    user_placement_min: float = 10.0
    user_placement_max: float = 41.0
    carrier_spacing_ratio: float = 0.5
    # power budget (dB, converted to linear once)
    pt_db: float = 30.0
    # learning hyperparameters
    gamma: float = 0.99
    learning_rate: float = 1e-3
    lr_decay: float = 1e-5
    tau_actor: float = 0.005
    tau_critic: float = 0.005
    policy_delay: int = 1
    batch_size: int = 32
    buffer_capacity: int = 100_000
    noise_std_initial: float = 0.1
    noise_std_final: float = 0.01
    hidden_width: int = 0  # 0 = derive from system dimensions
    normalize_states: bool = True

    def __post_init__(self):
        if self.agent not in AGENT_KINDS:
            raise ConfigError(f"agent must be one of {AGENT_KINDS}, got {self.agent!r}")
        if self.total_steps < 1:
            raise ConfigError("total_steps must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")

    @property
    def pt_linear(self):
        return 10.0 ** (self.pt_db / 10.0)

    def channel_config(self):
        return ChannelConfig(
            num_bs_antennas=self.num_bs_antennas,
            num_irs_elements=self.num_irs_elements,
            num_users=self.num_users,
            rician_k1=self.rician_k1,
            rician_k2=self.rician_k2,
            pathloss_exp_bs_irs=self.pathloss_exp_bs_irs,
            pathloss_exp_irs_user=self.pathloss_exp_irs_user,
            pathloss_exp_bs_user=self.pathloss_exp_bs_user,
            reference_pathloss_db=self.reference_pathloss_db,
            noise_variance=self.noise_variance,
        )

    def geometry(self):
        return SystemGeometry(
            bs_irs_distance=self.bs_irs_distance,
            user_height_offset=self.user_height_offset,
            user_placement_min=self.user_placement_min,
            user_placement_max=self.user_placement_max,
            carrier_spacing_ratio=self.carrier_spacing_ratio,
        )

    def env_config(self):
        return EnvConfig(channel=self.channel_config(), geometry=self.geometry(),
                         pt=self.pt_linear, episode_length=self.episode_length)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
_PARSERS = {int: int, float: float, str: lambda s: s.strip(), bool: _parse_bool}


def load_config(path):
    """Parse a key = value config file. Unknown keys and bad values raise."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                values[key] = _PARSERS[_FIELD_TYPES[key]](value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return ExperimentConfig(**values)


def save_config(config, path):
    """Write a config back out in the same key = value format."""
    with open(path, "w") as fh:
        for field in dataclasses.fields(ExperimentConfig):
            value = getattr(config, field.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            fh.write(f"{field.name} = {value}\n")
