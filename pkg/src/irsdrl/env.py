"""RL environment around the MISO simulator.

States and actions are flat real vectors: every complex quantity occupies
two adjacent slots (real part then imaginary part). Channels are drawn at
reset and held fixed for the whole episode (one coherence block); the
reward of a step is the spectral efficiency achieved by the decoded
beamformer and phase shifts.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelConfig, SystemGeometry, sample_realization
from .miso import PhaseShiftMatrix, project_power, effective_channel_matrix, spectral_efficiency


@dataclass(frozen=True)
class EnvConfig:
    channel: ChannelConfig
    geometry: SystemGeometry
    pt: float  # transmit power budget, linear watts
    episode_length: int = 8000

    def __post_init__(self):
        if self.pt <= 0.0:
            raise ValueError("pt must be > 0")
        if self.episode_length < 1:
            raise ValueError("episode_length must be >= 1")

    @property
    def action_dim(self):
        m, n, k = (self.channel.num_bs_antennas, self.channel.num_irs_elements,
                   self.channel.num_users)
        return 2 * m * k + 2 * n

    @property
    def state_dim(self):
        m, n, k = (self.channel.num_bs_antennas, self.channel.num_irs_elements,
                   self.channel.num_users)
        # powers (2K) + previous action + Re/Im of H1, h_r, h_d
        return 2 * k + self.action_dim + 2 * n * m + 2 * n * k + 2 * m * k


def complex_to_interleaved(arr):
    """Flatten a complex array row-major into (re, im, re, im, ...)."""
    flat = np.asarray(arr, dtype=complex).ravel()
    out = np.empty(2 * flat.size)
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out


def interleaved_to_complex(vec):
    """Inverse of complex_to_interleaved (flat complex vector)."""
    vec = np.asarray(vec, dtype=float)
    if vec.size % 2 != 0:
        raise ValueError("interleaved vector must have even length")
    return vec[0::2] + 1j * vec[1::2]


def decode_action(action, m, n, k, pt):
    """Turn a raw action vector into a feasible (G, Phi) pair.

    The first 2*M*K entries are Re/Im pairs of the raw beamformer, which is
    then projected onto the power budget. The last 2*N entries are (u, v)
    pairs per IRS element with theta = atan2(v, u); the (0, 0) pair maps to
    angle 0.
    """
    action = np.asarray(action, dtype=float)
    expected = 2 * m * k + 2 * n
    if action.shape != (expected,):
        raise ValueError(f"action must have length {expected}, got {action.shape}")
    g_raw = interleaved_to_complex(action[: 2 * m * k]).reshape(m, k)
    uv = action[2 * m * k:]
    phases = np.arctan2(uv[1::2], uv[0::2])
    return project_power(g_raw, pt), PhaseShiftMatrix(phases=phases)


def encode_state(realization, prev_action, g, phi):
    """Build the observation vector for the current step.

    Order: per-user transmit powers ||g_k||^2, per-user received signal
    powers |h_eff,k g_k|^2, the previous action, then Re/Im of H1, of all
    h_r,k, and of all h_d,k.
    """
    tx_powers = np.sum(np.abs(g.g) ** 2, axis=0)
    h_eff = effective_channel_matrix(realization, phi)
    rx_powers = np.abs(np.einsum("km,mk->k", h_eff, g.g)) ** 2
    return np.concatenate([
        tx_powers,
        rx_powers,
        np.asarray(prev_action, dtype=float),
        complex_to_interleaved(realization.h1),
        complex_to_interleaved(realization.h_r),
        complex_to_interleaved(realization.h_d),
    ])


class MisoEnv:
    """Single-owner environment; channels are resampled at each reset."""

    def __init__(self, config: EnvConfig):
        self.config = config
        self._realization = None
        self._state = None
        self._step_count = 0

    @property
    def action_dim(self):
        return self.config.action_dim

    @property
    def state_dim(self):
        return self.config.state_dim

    @property
    def current_state(self):
        if self._state is None:
            raise RuntimeError("environment must be reset first")
        return self._state

    @property
    def realization(self):
        return self._realization

    def reset(self, rng):
        """Draw a fresh coherence block and return the initial state."""
        self._realization = sample_realization(self.config.channel, self.config.geometry, rng)
        zero_action = np.zeros(self.config.action_dim)
        ch = self.config.channel
        g0, phi0 = decode_action(zero_action, ch.num_bs_antennas, ch.num_irs_elements,
                                 ch.num_users, self.config.pt)
        self._state = encode_state(self._realization, zero_action, g0, phi0)
        self._step_count = 0
        return self._state

    def step(self, action):
        """Apply an action; returns (next_state, reward)."""
        if self._state is None:
            raise RuntimeError("step called before reset")
        ch = self.config.channel
        action = np.asarray(action, dtype=float)
        g, phi = decode_action(action, ch.num_bs_antennas, ch.num_irs_elements,
                               ch.num_users, self.config.pt)
        reward = spectral_efficiency(self._realization, phi, g, ch.noise_variance)
        self._state = encode_state(self._realization, action, g, phi)
        self._step_count += 1
        return self._state, reward
