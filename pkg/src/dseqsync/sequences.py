"""Synchronization sequence construction and time/frequency mapping.

All sequences are unit-modulus complex vectors. The double-sequence pairs
(auxiliary and sum-difference) are used directly as time-domain samples;
only the Zadoff-Chu baseline goes through the subcarrier grid.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AuxParams",
    "SumDiffParams",
    "FreqGrid",
    "zc_generate",
    "zc_cyclic_autocorr",
    "map_to_subcarriers",
    "aux_pair",
    "sumdiff_pair",
    "time_freq_transform",
]


@dataclass(frozen=True)
class AuxParams:
    """Design parameters of the auxiliary pair.

    theta, delta are in radians per sample; delta must be 2*k'*pi/n for an
    integer k' in [1, n/4] so that both slot powers share the same fast
    oscillation term. The invertible range of the ratio metric is
    (theta - delta, theta + delta).
    """

    theta: float
    delta: float
    n: int

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"sequence length must be even and >= 8, got {self.n}")
        if abs(self.theta) > np.pi:
            raise ValueError(f"|theta| must be <= pi, got {self.theta}")
        k = self.delta * self.n / (2.0 * np.pi)
        if abs(k - round(k)) > 1e-9 or not 1 <= round(k) <= self.n // 4:
            raise ValueError(
                f"delta must equal 2*k'*pi/n with integer k' in [1, n/4], got {self.delta}"
            )

    @property
    def k_prime(self) -> int:
        return round(self.delta * self.n / (2.0 * np.pi))

    @classmethod
    def from_k_prime(cls, theta: float, k_prime: int, n: int) -> "AuxParams":
        return cls(theta=theta, delta=2.0 * np.pi * k_prime / n, n=n)


@dataclass(frozen=True)
class SumDiffParams:
    """Design parameter of the sum-difference pair.

    eta is in radians per sample. The invertible branch of the ratio metric
    is mu - eta in (0, 4*pi/n).
    """

    eta: float
    n: int

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"sequence length must be even and >= 8, got {self.n}")
        if abs(self.eta) > np.pi:
            raise ValueError(f"|eta| must be <= pi, got {self.eta}")


@dataclass(frozen=True)
class FreqGrid:
    """Frequency-domain symbols per subcarrier, in centered spectrum order.

    Bin k carries physical frequency k - n//2 subcarrier spacings, so the DC
    bin sits at dc_index = n//2 and a contiguous block centered there
    surrounds the carrier.
    """

    bins: np.ndarray
    dc_index: int = 0


def zc_generate(n_zc: int, root: int) -> np.ndarray:
    """Generate an odd-length Zadoff-Chu sequence.

    Sample m is exp(-j*pi*m*(m+1)*root / n_zc). Odd length guarantees the
    central symmetry s[m] == s[n_zc-1-m].
    """
    if n_zc <= 0 or n_zc % 2 == 0:
        raise ValueError(f"n_zc must be odd and positive, got {n_zc}")
    if not 0 <= root < n_zc:
        raise ValueError(f"root must be in [0, n_zc), got {root}")
    m = np.arange(n_zc, dtype=np.int64)
    # Reduce the phase index modulo 2*n_zc in integer arithmetic so the
    # central symmetry s[m] == s[n_zc-1-m] holds bit-exactly.
    phase_idx = (m * (m + 1) * root) % (2 * n_zc)
    return np.exp(-1j * np.pi * phase_idx / n_zc)


def zc_cyclic_autocorr(seq: np.ndarray, lag: int, normalized: bool = False) -> complex:
    """Cyclic autocorrelation sum_m s[m] * conj(s[(m+lag) mod N]).

    The raw sum peaks at N at zero lag; `normalized=True` divides by N so the
    zero-lag value is 1.
    """
    seq = np.asarray(seq)
    n = seq.size
    if not 0 <= lag < n:
        raise ValueError(f"lag must be in [0, {n}), got {lag}")
    acc = complex(np.sum(seq * np.conj(np.roll(seq, -lag))))
    return acc / n if normalized else acc


def map_to_subcarriers(seq: np.ndarray, n: int) -> FreqGrid:
    """Place a length-n_zc sequence on the subcarriers surrounding the carrier.

    Bins floor((n - n_zc - 1)/2) + 1 ... + n_zc carry the sequence in centered
    spectrum order (an odd-length block straddles DC exactly); every other bin
    is zero, and the DC bin itself is forced to zero afterwards.
    """
    seq = np.asarray(seq)
    n_zc = seq.size
    if n_zc >= n:
        raise ValueError(f"sequence length {n_zc} must be < grid size {n}")
    bins = np.zeros(n, dtype=complex)
    start = (n - n_zc - 1) // 2 + 1
    bins[start : start + n_zc] = seq
    dc = n // 2
    bins[dc] = 0.0
    return FreqGrid(bins=bins, dc_index=dc)


def aux_pair(params: AuxParams) -> tuple[np.ndarray, np.ndarray]:
    """Build the auxiliary pair d0[n] = exp(-j*n*(theta-delta)), d1 with theta+delta."""
    n = np.arange(params.n)
    d0 = np.exp(-1j * n * (params.theta - params.delta))
    d1 = np.exp(-1j * n * (params.theta + params.delta))
    return d0, d1


def sumdiff_pair(params: SumDiffParams) -> tuple[np.ndarray, np.ndarray]:
    """Build the sum/difference pair.

    d_sum[n] = exp(-j*n*eta) everywhere; d_diff agrees on the first half and
    is the additive inverse on the second half.
    """
    n = np.arange(params.n)
    d_sum = np.exp(-1j * n * params.eta)
    d_diff = d_sum.copy()
    d_diff[params.n // 2 :] *= -1.0
    return d_sum, d_diff


def time_freq_transform(seq: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Unitary DFT pair with 1/sqrt(N) normalization in both directions.

    `forward` maps time samples to subcarrier symbols; `inverse` maps a
    frequency grid to time samples. forward(inverse(x)) == x to 1e-12.
    """
    seq = np.asarray(seq, dtype=complex)
    root = np.sqrt(seq.size)
    if direction == "forward":
        return np.fft.fft(seq) / root
    if direction == "inverse":
        return np.fft.ifft(seq) * root
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def zc_time_symbol(n_zc: int, root: int, n: int) -> np.ndarray:
    """Time-domain OFDM symbol carrying a ZC sequence around the DC carrier.

    The centered grid is rotated into natural FFT bin order before the inverse
    transform, so the block's physical frequencies are the |k| <= n_zc/2
    subcarriers. The result inherits the sequence's central symmetry:
    d[n] == d[(N - n) mod N] exactly.
    """
    grid = map_to_subcarriers(zc_generate(n_zc, root), n)
    return time_freq_transform(np.fft.ifftshift(grid.bins), "inverse")
