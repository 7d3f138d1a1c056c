"""Physical-layer evaluation for the MU-MISO downlink with an IRS.

Effective channels, received signals, per-user SINR, sum spectral
efficiency, and the transmit-power projection. Everything here is a pure
function of its inputs.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class PhaseShiftMatrix:
    """IRS configuration stored as N angles.

    The implied matrix is diag(exp(j*theta_1), ..., exp(j*theta_N)), so the
    unit-modulus constraint holds by construction. Angles are canonicalized
    to [0, 2*pi).
    """

    phases: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        if phases.ndim != 1:
            raise ValueError("phases must be a 1-D array of angles")
        self.phases = np.mod(phases, 2.0 * np.pi)

    @property
    def num_elements(self):
        return self.phases.shape[0]

    @property
    def diagonal(self):
        """The N unit-modulus diagonal entries exp(j*theta_i)."""
        return np.exp(1j * self.phases)

    def matrix(self):
        """The full diagonal N x N matrix."""
        return np.diag(self.diagonal)


@dataclass
class BeamformingMatrix:
    """Transmit beamformer G, M x K; column k serves user k."""

    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=complex)
        if g.ndim != 2:
            raise ValueError("beamforming matrix must be 2-D")
        self.g = g

    @property
    def num_users(self):
        return self.g.shape[1]

    def transmit_power(self):
        """trace(G G^H), the total radiated power."""
        return float(np.sum(np.abs(self.g) ** 2))


def effective_channel(realization, phi, k):
    """Row vector h_r,k^T Phi H1 + h_d,k^T seen by user k (length M)."""
    if not 0 <= k < realization.num_users:
        raise IndexError(f"user index {k} out of range")
    return (realization.h_r[k] * phi.diagonal) @ realization.h1 + realization.h_d[k]


def effective_channel_matrix(realization, phi):
    """All K effective channel rows stacked into a K x M matrix."""
    return (realization.h_r * phi.diagonal) @ realization.h1 + realization.h_d


def received_signal(realization, phi, g, x, noise):
    """Received samples y_k = h_eff,k G x + noise_k for every user."""
    x = np.asarray(x, dtype=complex)
    noise = np.asarray(noise, dtype=complex)
    k = realization.num_users
    if x.shape != (k,) or noise.shape != (k,):
        raise ValueError("signal and noise must have one entry per user")
    h_eff = effective_channel_matrix(realization, phi)
    return h_eff @ g.g @ x + noise


def user_sinr(realization, phi, g, k, sigma2):
    """SINR of user k: desired power over interference plus noise."""
    if sigma2 <= 0.0:
        raise ValueError("noise variance must be > 0")
    h_eff = effective_channel(realization, phi, k)
    powers = np.abs(h_eff @ g.g) ** 2
    desired = powers[k]
    interference = np.sum(powers) - desired
    return float(desired / (interference + sigma2))


def spectral_efficiency(realization, phi, g, sigma2):
    """Sum spectral efficiency R = sum_k log2(1 + SINR_k) in bits/s/Hz."""
    if sigma2 <= 0.0:
        raise ValueError("noise variance must be > 0")
    h_eff = effective_channel_matrix(realization, phi)
    powers = np.abs(h_eff @ g.g) ** 2  # K x K, entry [k, i] = |h_eff,k g_i|^2
    desired = np.diag(powers)
    interference = powers.sum(axis=1) - desired
    sinr = desired / (interference + sigma2)
    return float(np.sum(np.log2(1.0 + sinr)))


def project_power(g_raw, pt):
    """Scale a raw beamformer onto the power budget trace(G G^H) = pt.

    A zero matrix passes through unchanged; anything else is normalized to
    use the full budget.
    """
    if pt <= 0.0:
        raise ValueError("power budget must be > 0")
    g_raw = np.asarray(g_raw, dtype=complex)
    trace = np.sum(np.abs(g_raw) ** 2)
    if trace == 0.0:
        return BeamformingMatrix(g=g_raw)
    return BeamformingMatrix(g=g_raw * np.sqrt(pt / trace))
