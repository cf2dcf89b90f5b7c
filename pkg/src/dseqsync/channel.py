"""Downlink synthesis up to the ADC input: beams, multipath, CFO, noise.

Channels are normalized so the expected total tap energy equals
n_tot * m_tot, which makes a configured SNR read as post-beamforming
per-antenna SNR up to array gain. All randomness flows through an explicit
numpy Generator so trials are reproducible from their seed stream.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "BS_SECTOR_DEG",
    "UE_SECTOR_DEG",
    "RicianConfig",
    "ChannelRealization",
    "steering_beam",
    "ula_response",
    "single_path_channel",
    "rician_channel",
    "tdl_channel",
    "channel_transfer",
    "transmit_receive",
]

# Angular coverage used in the experiments: the BS serves +/-60 degrees
# around boresight, the UE monitors +/-90 degrees.
BS_SECTOR_DEG = 60.0
UE_SECTOR_DEG = 90.0


@dataclass(frozen=True)
class RicianConfig:
    """Narrowband Rician link description (K-factor in dB)."""

    k_factor_db: float
    n_nlos: int
    n_tot: int
    m_tot: int

    def __post_init__(self):
        if self.n_nlos < 1:
            raise ValueError(f"n_nlos must be >= 1, got {self.n_nlos}")
        if not math.isfinite(self.k_factor_db):
            raise ValueError("k_factor_db must be finite")


@dataclass(frozen=True)
class ChannelRealization:
    """One UE link: per-delay impulse-response matrices plus noise variance.

    taps has shape (L, m_tot, n_tot); noise_var is the complex noise variance
    per received sample.
    """

    taps: np.ndarray
    noise_var: float = 0.0
    # Departure angle of the LOS / first profile path; lets the harness point
    # the synchronization beam at the link it is probing.
    primary_tx_angle: float = 0.0

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=complex)
        if taps.ndim != 3 or taps.shape[0] < 1:
            raise ValueError(f"taps must have shape (L, m_tot, n_tot), got {taps.shape}")
        if self.noise_var < 0.0:
            raise ValueError(f"noise_var must be >= 0, got {self.noise_var}")
        object.__setattr__(self, "taps", taps)

    @property
    def n_taps(self) -> int:
        return self.taps.shape[0]

    @property
    def m_tot(self) -> int:
        return self.taps.shape[1]

    @property
    def n_tot(self) -> int:
        return self.taps.shape[2]

    def with_noise_var(self, noise_var: float) -> "ChannelRealization":
        return replace(self, noise_var=float(noise_var))


def ula_response(n_elem: int, angle_deg: float) -> np.ndarray:
    """Half-wavelength ULA array response, unit-modulus entries."""
    a = np.arange(n_elem)
    return np.exp(-1j * np.pi * a * math.sin(math.radians(angle_deg)))


def steering_beam(n_tot: int, angle_deg: float) -> np.ndarray:
    """Analog steering vector with the per-element power constraint 1/n_tot."""
    if n_tot < 1:
        raise ValueError(f"n_tot must be >= 1, got {n_tot}")
    if abs(angle_deg) > BS_SECTOR_DEG:
        raise ValueError(
            f"steering angle {angle_deg} outside the +/-{BS_SECTOR_DEG} degree sector"
        )
    return ula_response(n_tot, angle_deg) / math.sqrt(n_tot)


def _path_matrix(rng: np.random.Generator, n_tot: int, m_tot: int) -> tuple[np.ndarray, float]:
    """Random-angle rank-1 path: outer product of UE and BS array responses."""
    tx_angle = rng.uniform(-BS_SECTOR_DEG, BS_SECTOR_DEG)
    rx_angle = rng.uniform(-UE_SECTOR_DEG, UE_SECTOR_DEG)
    mat = np.outer(ula_response(m_tot, rx_angle), ula_response(n_tot, tx_angle).conj())
    return mat, tx_angle


def single_path_channel(
    n_tot: int, m_tot: int, rng: np.random.Generator
) -> ChannelRealization:
    """One random-angle path with a CN(0,1) gain; flat across frequency."""
    path, tx_angle = _path_matrix(rng, n_tot, m_tot)
    gain = (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
    return ChannelRealization(taps=(gain * path)[np.newaxis], primary_tx_angle=tx_angle)


def rician_channel(cfg: RicianConfig, rng: np.random.Generator) -> ChannelRealization:
    """Single-tap Rician realization.

    H = sqrt(K/(1+K)) * H_los + sqrt(1/(1+K)) * H_nlos where H_los is a
    random-angle rank-1 outer product with ||H_los||_F^2 = n_tot*m_tot and
    H_nlos sums n_nlos random-angle paths with IID CN(0,1) gains scaled to the
    same expected energy.
    """
    k_lin = 10.0 ** (cfg.k_factor_db / 10.0)
    h_los, los_tx_angle = _path_matrix(rng, cfg.n_tot, cfg.m_tot)
    h_nlos = np.zeros((cfg.m_tot, cfg.n_tot), dtype=complex)
    for _ in range(cfg.n_nlos):
        path, _ = _path_matrix(rng, cfg.n_tot, cfg.m_tot)
        gain = (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
        h_nlos += gain * path
    h_nlos /= math.sqrt(cfg.n_nlos)
    h = math.sqrt(k_lin / (1.0 + k_lin)) * h_los + math.sqrt(1.0 / (1.0 + k_lin)) * h_nlos
    return ChannelRealization(taps=h[np.newaxis], primary_tx_angle=los_tx_angle)


def tdl_channel(
    profile: list[tuple[int, float]],
    rng: np.random.Generator,
    n_tot: int,
    m_tot: int,
    cp_len: int,
) -> ChannelRealization:
    """Tapped-delay-line realization from a (delay_samples, power_db) profile.

    Each profile entry becomes one random-angle path with a CN(0, p) gain,
    where the linear powers p are normalized to sum to 1; intermediate delays
    hold zero matrices. Delays must stay below the cyclic-prefix length.
    """
    if not profile:
        raise ValueError("profile must contain at least one tap")
    delays = [int(d) for d, _ in profile]
    if len(set(delays)) != len(delays):
        raise ValueError("profile delays must be distinct")
    if min(delays) < 0:
        raise ValueError("profile delays must be non-negative")
    if max(delays) >= cp_len:
        raise ValueError(
            f"max delay {max(delays)} must be < cyclic-prefix length {cp_len}"
        )
    powers = np.array([10.0 ** (p / 10.0) for _, p in profile])
    powers /= powers.sum()
    taps = np.zeros((max(delays) + 1, m_tot, n_tot), dtype=complex)
    first_tx_angle = 0.0
    for i, (delay, _) in enumerate(profile):
        path, tx_angle = _path_matrix(rng, n_tot, m_tot)
        if i == 0:
            first_tx_angle = tx_angle
        gain = (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2.0)
        taps[delay] += math.sqrt(powers[i]) * gain * path
    return ChannelRealization(taps=taps, primary_tx_angle=first_tx_angle)


def channel_transfer(
    ch: ChannelRealization, beam: np.ndarray, omega: float
) -> np.ndarray:
    """Per-antenna transfer value sum_l H[l] @ f * exp(j*l*omega)."""
    phases = np.exp(1j * omega * np.arange(ch.n_taps))
    return np.tensordot(phases, ch.taps @ beam, axes=(0, 0))


def transmit_receive(
    seq: np.ndarray,
    ch: ChannelRealization,
    beam: np.ndarray,
    mu: float,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Unquantized received frame for one synchronization slot.

    sample[b, n] = exp(j*mu*n) * sum_l (H[l] @ f)_b * seq[(n-l) mod N] + w,
    w ~ CN(0, noise_var). The convolution is cyclic (cyclic prefix absorbed);
    noise is added after the CFO rotation, which multiplies only the signal.
    """
    seq = np.asarray(seq, dtype=complex)
    n = seq.size
    gains = ch.taps @ beam  # (L, m_tot)
    shifted = np.stack([np.roll(seq, lag) for lag in range(ch.n_taps)])
    signal = gains.T @ shifted  # (m_tot, N)
    rotation = np.exp(1j * mu * np.arange(n))
    frame = signal * rotation
    if ch.noise_var > 0.0:
        if rng is None:
            raise ValueError("rng is required when noise_var > 0")
        w = rng.standard_normal(frame.shape) + 1j * rng.standard_normal(frame.shape)
        frame = frame + w * math.sqrt(ch.noise_var / 2.0)
    return frame
