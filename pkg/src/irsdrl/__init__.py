"""Joint transmit-beamforming and IRS phase-shift optimization with DRL."""

from .channel import (ChannelConfig, ChannelRealization, SystemGeometry,
                      apply_pathloss, los_bs_irs, los_irs_user,
                      sample_direct, sample_realization, sample_rician,
                      steering_vector)
from .miso import (BeamformingMatrix, PhaseShiftMatrix, effective_channel,
                   project_power, received_signal, spectral_efficiency,
                   user_sinr)
from .env import EnvConfig, MisoEnv, decode_action, encode_state
from .mlp import AdamState, Mlp, hidden_width
from .agent import (DdpgAgent, RandomAgent, ReplayBuffer, Td3Agent,
                    soft_update)
from .config import ConfigError, ExperimentConfig, load_config, save_config
from .experiment import (MetricsLog, profile_complexity, run, sweep_elements,
                         sweep_power)

__version__ = "0.1.0"
