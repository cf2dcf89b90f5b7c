"""Closed-form performance predictions for the double-sequence estimators.

Contains the exact 1-bit Fisher information / CRLB machinery for the
two-slot observation model, and the low-resolution variance formulas for the
auxiliary and sum-difference ratio estimators together with their
signal/noise building blocks.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

__all__ = [
    "FisherResult",
    "VariancePrediction",
    "fisher_1bit",
    "crlb_phasor_bound",
    "crlb_cfo_bound",
    "lemma_aux_variance",
    "lemma_sumdiff_variance",
    "aux_slope",
    "aux_power_terms",
]


# Squared-sine values below this are float residue of an exact trigonometric
# null (residues scale like (N*eps_mach)^2 ~ 1e-25 even at N = 4096, while
# legitimate operating points sit many decades higher).
_NULL_TOL = 1e-20


@dataclass(frozen=True)
class FisherResult:
    """Fisher information of the 1-bit two-slot observation.

    real_fim is the 2N x 2N information matrix for the stacked
    [Re(e); Im(e)] phasor parameters; complex_fim the N x N complex reduction;
    crlb_diag the per-sample variance bounds on the phasor estimates
    (entries are +inf when the information matrix is singular).
    """

    real_fim: np.ndarray
    complex_fim: np.ndarray
    crlb_diag: np.ndarray


@dataclass(frozen=True)
class VariancePrediction:
    """Predicted estimator variance; infinite at formula singularities."""

    variance: float
    inputs_echo: dict

    @property
    def is_singular(self) -> bool:
        return math.isinf(self.variance)


def _sign_information(g: np.ndarray) -> np.ndarray:
    """Per-component information weight phi(g)^2 / (Phi(g) * (1 - Phi(g))).

    Evaluated in log space so the exponential tails stay finite for large |g|.
    """
    log_phi = -0.5 * g * g - 0.5 * math.log(2.0 * math.pi)
    return np.exp(2.0 * log_phi - log_ndtr(g) - log_ndtr(-g))


def _widen(a_diag: np.ndarray) -> np.ndarray:
    """Real 2N x 2N block matrix [[Re, -Im], [Im, Re]] of a diagonal matrix."""
    re = np.diag(a_diag.real)
    im = np.diag(a_diag.imag)
    return np.block([[re, -im], [im, re]])


def fisher_1bit(
    a0: np.ndarray, a1: np.ndarray, epsilon: float, sigma2: float
) -> FisherResult:
    """Fisher information and CRLB for sign-quantized two-slot observations.

    a0, a1 are the noiseless unrotated per-sample signals of the two slots;
    epsilon is the true CFO in subcarrier units, sigma2 the complex noise
    variance. The CFO enters through the phasor vector
    e[n] = exp(j*2*pi*epsilon*n/N), which is treated as the unknown parameter.
    """
    if sigma2 <= 0.0:
        raise ValueError(f"sigma2 must be > 0, got {sigma2}")
    a0 = np.asarray(a0, dtype=complex)
    a1 = np.asarray(a1, dtype=complex)
    n = a0.size
    if a1.size != n:
        raise ValueError("slot signals must have equal length")
    e = np.exp(2j * math.pi * epsilon * np.arange(n) / n)
    e_wide = np.concatenate([e.real, e.imag])
    sigma_r = math.sqrt(sigma2 / 2.0)

    real_fim = np.zeros((2 * n, 2 * n))
    for a in (a0, a1):
        a_wide = _widen(a)
        g = (a_wide @ e_wide) / sigma_r
        weights = _sign_information(g) / (sigma_r * sigma_r)
        real_fim += a_wide.T @ (weights[:, None] * a_wide)

    complex_fim = 0.25 * (
        real_fim[:n, :n]
        + real_fim[n:, n:]
        + 1j * (real_fim[:n, n:] - real_fim[n:, :n])
    )
    try:
        inv = np.linalg.inv(complex_fim)
        crlb = np.abs(np.diag(inv).real)
        if not np.all(np.isfinite(crlb)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        crlb = np.full(n, np.inf)
    return FisherResult(real_fim=real_fim, complex_fim=complex_fim, crlb_diag=crlb)


def crlb_phasor_bound(result: FisherResult) -> float:
    """Scalar bound: per-sample phasor variance averaged across the symbol."""
    return float(np.mean(result.crlb_diag))


def crlb_cfo_bound(result: FisherResult, epsilon: float) -> float:
    """Bound on var(epsilon_hat), in subcarrier-squared units.

    Projects the stacked real/imaginary phasor information onto the CFO
    direction de/d(epsilon); this is the scalar bound that stays finite (and
    floors) at high SNR, unlike the per-sample diagonal of the inverse.
    """
    n = result.complex_fim.shape[0]
    k = np.arange(n)
    ang = 2.0 * math.pi * epsilon * k / n
    rate = 2.0 * math.pi * k / n
    jac = np.concatenate([-rate * np.sin(ang), rate * np.cos(ang)])
    info = float(jac @ result.real_fim @ jac)
    return 1.0 / info if info > 0.0 else math.inf


def aux_slope(delta: float) -> float:
    """Slope of the auxiliary ratio metric at its reference frequency.

    Equals sin(delta)/(cos(delta)-1), i.e. -cot(delta/2).
    """
    if not 0.0 < delta < math.pi:
        raise ValueError(f"delta must be in (0, pi), got {delta}")
    return math.sin(delta) / (math.cos(delta) - 1.0)


def aux_power_terms(
    n: int, theta: float, delta: float, mu: float, kappa: float, gamma: float
) -> tuple[float, float]:
    """Signal power of the difference channel and noise power of the sum channel.

    Uses the unit-noise convention: the expected transfer power is gamma, so
    s0 = [gamma * sin^2(N(mu-theta+delta)/2) * (sin^2(-) - sin^2(+)) /
         (sin^2(+) * sin^2(-))]^2
    n1 = N^2 * [(1-kappa) * (kappa*gamma + 1)]^2
    with sin^2(+/-) shorthand for sin^2((mu-theta+/-delta)/2).
    """
    _check_lowres_args(kappa, gamma)
    x = mu - theta
    sin_plus = math.sin((x + delta) / 2.0) ** 2
    sin_minus = math.sin((x - delta) / 2.0) ** 2
    fast = math.sin(n * (x + delta) / 2.0) ** 2
    if fast < _NULL_TOL:
        # integer-subcarrier null: both slot sums vanish (up to float residue)
        fast = 0.0
    if sin_plus == 0.0 or sin_minus == 0.0:
        s0 = math.inf
    else:
        s0 = (gamma * fast * (sin_minus - sin_plus) / (sin_plus * sin_minus)) ** 2
    n1 = (n * (1.0 - kappa) * (kappa * gamma + 1.0)) ** 2
    return s0, n1


def lemma_aux_variance(
    n: int,
    kappa: float,
    theta: float,
    delta: float,
    mu: float,
    gamma: float,
    alpha: float,
) -> VariancePrediction:
    """Variance of the auxiliary-sequences CFO estimate under coarse ADCs.

    Assembled as (1 + alpha^2) * n1 / (slope^2 * s0) from the difference
    channel's signal power and the sum channel's quantization-plus-noise
    power. Zeros of the signal term are reported as infinite variance.
    """
    echo = {
        "n": n, "kappa": kappa, "theta": theta, "delta": delta,
        "mu": mu, "gamma": gamma, "alpha": alpha,
    }
    s0, n1 = aux_power_terms(n, theta, delta, mu, kappa, gamma)
    slope = aux_slope(delta)
    if s0 == 0.0 or math.isinf(s0):
        return VariancePrediction(variance=math.inf, inputs_echo=echo)
    var = (1.0 + alpha * alpha) * n1 / (slope * slope * s0)
    return VariancePrediction(variance=var, inputs_echo=echo)


def lemma_sumdiff_variance(
    n: int, kappa: float, eta: float, mu: float, gamma: float, beta: float
) -> VariancePrediction:
    """Variance of the sum-difference CFO estimate under coarse ADCs.

    variance = [ N*(1-kappa)*|1+e^{j(N/2)(mu-eta)}|^2 * sin^2((N/4)(mu-eta))
                 * csc^4(N*eta/4) / (16*(kappa+1/gamma)*sin^2((mu-eta)/2)) ]^-1
               * (1 + beta^2)
    Zeros of the bracket (including the branch-edge null of the slot
    difference) are reported as infinite variance; so is a vanishing
    csc^4 reference factor.
    """
    _check_lowres_args(kappa, gamma)
    echo = {"n": n, "kappa": kappa, "eta": eta, "mu": mu, "gamma": gamma, "beta": beta}
    x = mu - eta
    comb = 2.0 + 2.0 * math.cos((n / 2.0) * x)  # |1 + e^{j(N/2)x}|^2
    sin_quarter = math.sin(n * x / 4.0) ** 2
    sin_half = math.sin(x / 2.0) ** 2
    sin_ref = math.sin(n * eta / 4.0)
    if sin_ref == 0.0 or sin_half == 0.0:
        return VariancePrediction(variance=math.inf, inputs_echo=echo)
    if comb < _NULL_TOL or sin_quarter < _NULL_TOL:
        return VariancePrediction(variance=math.inf, inputs_echo=echo)
    bracket = (
        n * (1.0 - kappa) * comb * sin_quarter / (sin_ref**4)
        / (16.0 * (kappa + 1.0 / gamma) * sin_half)
    )
    if bracket == 0.0:
        return VariancePrediction(variance=math.inf, inputs_echo=echo)
    var = (1.0 + beta * beta) / bracket
    return VariancePrediction(variance=var, inputs_echo=echo)


def _check_lowres_args(kappa: float, gamma: float):
    if not 0.0 <= kappa < 1.0:
        raise ValueError(f"kappa must be in [0, 1), got {kappa}")
    if gamma <= 0.0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
