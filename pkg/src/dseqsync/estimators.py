"""CFO estimators: ZC symmetry baseline, auxiliary ratio, sum-difference ratio.

Each estimator consumes quantized receive frames, reduces them to a scalar
metric that is channel-magnitude independent, and inverts that metric to a
normalized CFO estimate mu_hat (radians per sample). epsilon_hat is the same
quantity in subcarrier units, N*mu_hat/(2*pi).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from dseqsync.sequences import AuxParams, SumDiffParams

__all__ = [
    "DegenerateEstimateError",
    "EstimateReport",
    "AuxChannels",
    "SumDiffChannels",
    "select_antenna",
    "estimate_zc",
    "aux_channels",
    "aux_ratio",
    "aux_invert",
    "aux_ratio_closed_form",
    "sumdiff_channels",
    "sumdiff_ratio",
    "sumdiff_invert",
    "sumdiff_ratio_closed_form",
    "compensate",
    "symmetry_metric",
    "estimate_aux_frames",
    "estimate_sumdiff_frames",
    "estimate_zc_frame",
]


class DegenerateEstimateError(RuntimeError):
    """Raised when a ratio metric is undefined for the observed samples."""


@dataclass(frozen=True)
class EstimateReport:
    """One CFO estimate: mu_hat in radians/sample, epsilon_hat in subcarriers."""

    mu_hat: float
    n: int
    antenna: int = 0
    method: str = ""
    intermediate: dict = field(default_factory=dict)

    @property
    def epsilon_hat(self) -> float:
        return self.n * self.mu_hat / (2.0 * math.pi)


@dataclass(frozen=True)
class AuxChannels:
    """Received powers of the two auxiliary slots (squared coherent sums)."""

    p0: float
    p1: float


@dataclass(frozen=True)
class SumDiffChannels:
    """Coherent sums over the sum and difference slots."""

    p_sum: complex
    p_diff: complex


def select_antenna(frame: np.ndarray) -> int:
    """Index of the antenna with the largest summed |sample|^2; ties go low."""
    frame = np.atleast_2d(frame)
    return int(np.argmax(np.sum(np.abs(frame) ** 2, axis=1)))


def estimate_zc(q: np.ndarray, d: np.ndarray) -> EstimateReport:
    """Half-symbol phase comparison against the reference ZC symbol.

    epsilon_hat = angle(conj(first-half sum) * second-half sum) / pi, valid
    for fractional offsets |epsilon| < 1 only.
    """
    q = np.asarray(q)
    d = np.asarray(d)
    n = q.size
    if n % 2:
        raise ValueError(f"sample count must be even, got {n}")
    prod = q * np.conj(d)
    s1 = np.sum(prod[: n // 2])
    s2 = np.sum(prod[n // 2 :])
    if s1 == 0 and s2 == 0:
        raise DegenerateEstimateError("both half-symbol correlations are zero")
    eps = float(np.angle(np.conj(s1) * s2)) / math.pi
    return EstimateReport(
        mu_hat=2.0 * math.pi * eps / n,
        n=n,
        method="zc",
        intermediate={"half_sums": (s1, s2)},
    )


def aux_channels(q0: np.ndarray, q1: np.ndarray) -> AuxChannels:
    """Slot powers p_i = |sum_n q_i[n]|^2."""
    q0 = np.asarray(q0)
    q1 = np.asarray(q1)
    if q0.size != q1.size:
        raise ValueError("slot sample counts differ")
    return AuxChannels(
        p0=float(np.abs(np.sum(q0)) ** 2),
        p1=float(np.abs(np.sum(q1)) ** 2),
    )


def aux_ratio(ch: AuxChannels) -> float:
    """Ratio metric (p0 - p1) / (p0 + p1), in [-1, 1]."""
    total = ch.p0 + ch.p1
    if total == 0.0:
        raise DegenerateEstimateError("both auxiliary slot powers are zero")
    return (ch.p0 - ch.p1) / total


def aux_ratio_closed_form(mu: float, params: AuxParams) -> float:
    """Noiseless ratio -sin(mu-theta)*sin(delta) / (1 - cos(mu-theta)*cos(delta))."""
    x = mu - params.theta
    return -math.sin(x) * math.sin(params.delta) / (
        1.0 - math.cos(x) * math.cos(params.delta)
    )


def aux_invert(alpha: float, params: AuxParams, antenna: int = 0) -> EstimateReport:
    """Invert the auxiliary ratio metric on its monotone range |mu-theta| < delta.

    |alpha| > 1 cannot arise from aux_ratio but may be injected by analysis
    paths; it is clamped to +/-1 and flagged rather than rejected.
    """
    clamped = abs(alpha) > 1.0
    a = min(1.0, max(-1.0, alpha))
    sd, cd = math.sin(params.delta), math.cos(params.delta)
    arg = (a * sd - a * math.sqrt(1.0 - a * a) * sd * cd) / (sd * sd + a * a * cd * cd)
    mu_hat = params.theta - math.asin(arg)
    return EstimateReport(
        mu_hat=mu_hat,
        n=params.n,
        antenna=antenna,
        method="aux",
        intermediate={"alpha": alpha, "clamped": clamped},
    )


def sumdiff_channels(q_sum: np.ndarray, q_diff: np.ndarray) -> SumDiffChannels:
    """Coherent sums of the two slots."""
    q_sum = np.asarray(q_sum)
    q_diff = np.asarray(q_diff)
    if q_sum.size != q_diff.size or q_sum.size % 2:
        raise ValueError("slots must have equal even sample counts")
    return SumDiffChannels(
        p_sum=complex(np.sum(q_sum)),
        p_diff=complex(np.sum(q_diff)),
    )


def sumdiff_ratio(ch: SumDiffChannels) -> float:
    """Ratio measure Im{p_sum / p_diff}."""
    if ch.p_diff == 0:
        raise DegenerateEstimateError("difference channel is exactly zero")
    return float((ch.p_sum / ch.p_diff).imag)


def sumdiff_ratio_closed_form(mu: float, params: SumDiffParams) -> float:
    """Noiseless ratio cot((N/4)*(mu - eta))."""
    return 1.0 / math.tan(params.n * (mu - params.eta) / 4.0)


def sumdiff_invert(beta: float, params: SumDiffParams, antenna: int = 0) -> EstimateReport:
    """Invert beta = cot((N/4)(mu-eta)) on the branch mu - eta in (0, 4*pi/N).

    arccot maps the reals onto (0, pi), continuously through beta = 0.
    """
    arccot = math.pi / 2.0 - math.atan(beta)
    mu_hat = params.eta + 4.0 * arccot / params.n
    return EstimateReport(
        mu_hat=mu_hat,
        n=params.n,
        antenna=antenna,
        method="sumdiff",
        intermediate={"beta": beta},
    )


def compensate(q: np.ndarray, mu_hat: float) -> np.ndarray:
    """Remove an estimated CFO: output[n] = exp(-j*mu_hat*n) * q[n]."""
    q = np.asarray(q)
    return q * np.exp(-1j * mu_hat * np.arange(q.shape[-1]))


def symmetry_metric(q: np.ndarray) -> complex:
    """Half-flip matched filter 2 * sum_{n' < N/2} conj(q[n']) * q[N-1-n'].

    Peaks at the symbol's correlation energy when q is perfectly symmetric; a
    unit-modulus symmetric symbol of even length scores exactly N.
    """
    q = np.asarray(q)
    n = q.size
    half = n // 2
    return 2.0 * complex(np.sum(np.conj(q[:half]) * q[n - 1 - np.arange(half)]))


# ---------------------------------------------------------------------------
# Frame-level pipelines: antenna selection on the quantized slot-0 frame, the
# same antenna reused for slot 1.
# ---------------------------------------------------------------------------


def estimate_aux_frames(
    frame0: np.ndarray, frame1: np.ndarray, params: AuxParams
) -> EstimateReport:
    b = select_antenna(frame0)
    frame0 = np.atleast_2d(frame0)
    frame1 = np.atleast_2d(frame1)
    alpha = aux_ratio(aux_channels(frame0[b], frame1[b]))
    return aux_invert(alpha, params, antenna=b)


def estimate_sumdiff_frames(
    frame0: np.ndarray, frame1: np.ndarray, params: SumDiffParams
) -> EstimateReport:
    b = select_antenna(frame0)
    frame0 = np.atleast_2d(frame0)
    frame1 = np.atleast_2d(frame1)
    beta = sumdiff_ratio(sumdiff_channels(frame0[b], frame1[b]))
    return sumdiff_invert(beta, params, antenna=b)


def estimate_zc_frame(frame: np.ndarray, d: np.ndarray) -> EstimateReport:
    b = select_antenna(frame)
    frame = np.atleast_2d(frame)
    report = estimate_zc(frame[b], d)
    return EstimateReport(
        mu_hat=report.mu_hat,
        n=report.n,
        antenna=b,
        method="zc",
        intermediate=report.intermediate,
    )
