"""Random channel generation for the IRS-assisted MU-MISO downlink.

Generates the BS-IRS matrix (Rician), the IRS-user vectors (Rician) and the
direct BS-user vectors (Rayleigh), with log-distance path loss applied from
the BS / IRS / user geometry. All randomness flows through an explicit
numpy Generator so every draw is reproducible.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SystemGeometry:
    """Placement of the BS, the IRS and the users on a 2-D vertical cut.

    The BS sits at the origin, the IRS at ``bs_irs_distance`` on the
    horizontal axis, and users are dropped on the segment between them with
    a fixed vertical offset.
    """

    bs_irs_distance: float = 51.0
    user_height_offset: float = 2.0
    user_placement_min: float = 10.0
    user_placement_max: float = 41.0
    carrier_spacing_ratio: float = 0.5  # element spacing d / wavelength

    def __post_init__(self):
        if self.bs_irs_distance <= 0.0:
            raise ValueError("bs_irs_distance must be strictly positive")
        if self.user_height_offset <= 0.0:
            raise ValueError("user_height_offset must be strictly positive")
        if not 0.0 < self.user_placement_min < self.user_placement_max:
            raise ValueError("user placement range must be positive and ordered")
        if self.user_placement_max >= self.bs_irs_distance:
            raise ValueError("user placement range must lie before the IRS")
        if self.carrier_spacing_ratio <= 0.0:
            raise ValueError("carrier_spacing_ratio must be > 0")


@dataclass(frozen=True)
class ChannelConfig:
    """Dimensions and statistics of all links.

    ``noise_variance`` defaults to -80 dBm expressed in watts.
    """

    num_bs_antennas: int = 4
    num_irs_elements: int = 4
    num_users: int = 4
    rician_k1: float = 10.0
    rician_k2: float = 10.0
    pathloss_exp_bs_irs: float = 2.2
    pathloss_exp_irs_user: float = 2.2
    pathloss_exp_bs_user: float = 3.5
    reference_pathloss_db: float = 30.0
    noise_variance: float = 1e-11

    def __post_init__(self):
        for name in ("num_bs_antennas", "num_irs_elements", "num_users"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.rician_k1 < 0.0 or self.rician_k2 < 0.0:
            raise ValueError("Rician K-factors must be >= 0")
        if self.noise_variance <= 0.0:
            raise ValueError("noise_variance must be > 0")


@dataclass
class ChannelRealization:
    """One draw of every channel in the system, path loss included.

    h1 is N x M (BS to IRS), h_r is K x N (IRS to each user, rows are
    user channels), h_d is K x M (BS to each user). user_positions holds
    the K (x, y) coordinates the draw used.
    """

    h1: np.ndarray
    h_r: np.ndarray
    h_d: np.ndarray
    user_positions: np.ndarray

    def __post_init__(self):
        self.h1 = np.asarray(self.h1, dtype=complex)
        self.h_r = np.asarray(self.h_r, dtype=complex)
        self.h_d = np.asarray(self.h_d, dtype=complex)
        self.user_positions = np.asarray(self.user_positions, dtype=float)
        n, m = self.h1.shape
        k = self.h_r.shape[0]
        if self.h_r.shape != (k, n) or self.h_d.shape != (k, m):
            raise ValueError("channel dimensions are inconsistent")
        if self.user_positions.shape[0] != k:
            raise ValueError("user_positions must have one row per user")
        for arr in (self.h1, self.h_r, self.h_d):
            if not np.all(np.isfinite(arr.view(float))):
                raise ValueError("channel entries must be finite")

    @property
    def num_users(self):
        return self.h_r.shape[0]


def steering_vector(theta, n, spacing_ratio=0.5):
    """Uniform linear array response: entry i is exp(j*2*pi*ratio*i*sin(theta))."""
    if n < 1:
        raise ValueError("array size must be >= 1")
    phases = 2.0 * np.pi * spacing_ratio * np.arange(n) * np.sin(theta)
    return np.exp(1j * phases)


def los_bs_irs(theta_aoa, theta_aod, n, m, spacing_ratio=0.5):
    """Rank-1 LoS component of the BS-IRS link.

    Outer product of the conjugated arrival steering vector (length n,
    as a column) with the departure steering vector (length m, as a row).
    """
    a_n = steering_vector(theta_aoa, n, spacing_ratio)
    a_m = steering_vector(theta_aod, m, spacing_ratio)
    return np.outer(np.conj(a_n), a_m)


def los_irs_user(theta_aod, n, spacing_ratio=0.5):
    """LoS component of the IRS-user link: a plain steering vector."""
    return steering_vector(theta_aod, n, spacing_ratio)


def sample_rician(k_factor, los, rng):
    """Mix a deterministic LoS array with a CN(0, 1) scattered component.

    Returns sqrt(K/(K+1)) * los + sqrt(1/(K+1)) * W with W standard
    circularly symmetric complex Gaussian.
    """
    if k_factor < 0.0:
        raise ValueError("Rician K-factor must be >= 0")
    los = np.asarray(los, dtype=complex)
    los_scale = np.sqrt(k_factor / (k_factor + 1.0))
    nlos_scale = np.sqrt(1.0 / (k_factor + 1.0))
    assert abs(los_scale**2 + nlos_scale**2 - 1.0) < 1e-12
    w = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape))
    w /= np.sqrt(2.0)
    return los_scale * los + nlos_scale * w


def sample_direct(m, rng):
    """Rayleigh-fading direct link: m i.i.d. CN(0, 1) entries."""
    if m < 1:
        raise ValueError("vector length must be >= 1")
    return (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2.0)


def apply_pathloss(channel, distance, exponent, reference_pathloss_db):
    """Scale a channel by the amplitude log-distance path loss.

    Power gain is 10^(-ref_db/10) * distance^(-exponent); the channel is
    multiplied by its square root.
    """
    if distance <= 0.0:
        raise ValueError("distance must be strictly positive")
    gain = 10.0 ** (-reference_pathloss_db / 10.0) * distance ** (-exponent)
    return np.asarray(channel) * np.sqrt(gain)


def sample_realization(config, geometry, rng):
    """Draw a full ChannelRealization for one coherence block.

    User x-positions are uniform on the placement segment; all angles of
    arrival/departure are uniform on [0, 2*pi).
    """
    m = config.num_bs_antennas
    n = config.num_irs_elements
    k = config.num_users
    ratio = geometry.carrier_spacing_ratio

    xs = rng.uniform(geometry.user_placement_min, geometry.user_placement_max, k)
    h_off = geometry.user_height_offset
    positions = np.column_stack([xs, np.full(k, h_off)])

    theta_aoa1 = rng.uniform(0.0, 2.0 * np.pi)
    theta_aod1 = rng.uniform(0.0, 2.0 * np.pi)
    theta_aod2 = rng.uniform(0.0, 2.0 * np.pi, k)

    d_bs_irs = geometry.bs_irs_distance
    d_irs_user = np.hypot(d_bs_irs - xs, h_off)
    d_bs_user = np.hypot(xs, h_off)

    h1 = sample_rician(config.rician_k1, los_bs_irs(theta_aoa1, theta_aod1, n, m, ratio), rng)
    h1 = apply_pathloss(h1, d_bs_irs, config.pathloss_exp_bs_irs, config.reference_pathloss_db)

    h_r = np.empty((k, n), dtype=complex)
    h_d = np.empty((k, m), dtype=complex)
    for i in range(k):
        hr = sample_rician(config.rician_k2, los_irs_user(theta_aod2[i], n, ratio), rng)
        h_r[i] = apply_pathloss(hr, d_irs_user[i], config.pathloss_exp_irs_user,
                                config.reference_pathloss_db)
        hd = sample_direct(m, rng)
        h_d[i] = apply_pathloss(hd, d_bs_user[i], config.pathloss_exp_bs_user,
                                config.reference_pathloss_db)

    return ChannelRealization(h1=h1, h_r=h_r, h_d=h_d, user_positions=positions)
