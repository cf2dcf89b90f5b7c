"""BS-side design-parameter selection for the multi-user scenario.

Collapses the active users into a single virtual UE (kappa, mu, alpha, gamma
drawn from long-term statistics), then exhaustively scans the reference
frequency codebook and the admissible frequency-spacing grid for the design
that minimizes the virtual UE's predicted estimation variance.
"""

import math
from dataclasses import dataclass

import numpy as np

from dseqsync.analysis import lemma_aux_variance, lemma_sumdiff_variance
from dseqsync.quantizer import kappa_for_bits

__all__ = [
    "VirtualUeParams",
    "ThetaCodebook",
    "OptResult",
    "virtual_variance",
    "optimize_aux",
    "optimize_sumdiff",
    "derive_vue",
]


@dataclass(frozen=True)
class VirtualUeParams:
    """System-specific stand-in parameters for the UE population."""

    kappa_ax: float
    mu_ax: float
    alpha_ax: float
    gamma_ax: float

    def __post_init__(self):
        if self.gamma_ax <= 0.0:
            raise ValueError(f"gamma_ax must be > 0, got {self.gamma_ax}")
        if not 0.0 <= self.kappa_ax < 1.0:
            raise ValueError(f"kappa_ax must be in [0, 1), got {self.kappa_ax}")


@dataclass(frozen=True)
class ThetaCodebook:
    """Sorted candidate reference frequencies, all within [-1, 1] rad/sample."""

    values: tuple

    def __post_init__(self):
        vals = tuple(sorted(float(v) for v in self.values))
        if not vals:
            raise ValueError("codebook must not be empty")
        if any(abs(v) > 1.0 for v in vals):
            raise ValueError("codebook values must lie within [-1, 1]")
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, count: int = 101, lo: float = -1.0, hi: float = 1.0) -> "ThetaCodebook":
        return cls(values=tuple(np.linspace(lo, hi, count)))


@dataclass(frozen=True)
class OptResult:
    """Winning design parameters and the objective value at the optimum."""

    theta_opt: float
    delta_opt: float
    objective: float
    scanned: int

    def k_prime(self, n: int) -> int:
        # Meaningful for the auxiliary design only.
        return round(self.delta_opt * n / (2.0 * math.pi))


def virtual_variance(
    vue: VirtualUeParams, theta: float, delta: float, n: int
) -> float:
    """Predicted variance for the virtual UE at one (theta, delta) grid point."""
    k = delta * n / (2.0 * math.pi)
    if abs(k - round(k)) > 1e-9 or not 1 <= round(k) <= n // 4:
        raise ValueError(f"delta must be 2*k'*pi/n with k' in [1, n/4], got {delta}")
    return lemma_aux_variance(
        n, vue.kappa_ax, theta, delta, vue.mu_ax, vue.gamma_ax, vue.alpha_ax
    ).variance


def optimize_aux(codebook: ThetaCodebook, n: int, vue: VirtualUeParams) -> OptResult:
    """Exhaustive scan over theta in the codebook and delta = 2*k'*pi/n.

    Ties break toward smaller delta, then smaller |theta|, so the result is
    independent of evaluation order. Raises if every grid point is singular.
    """
    best = None
    scanned = 0
    for k_prime in range(1, n // 4 + 1):
        delta = 2.0 * math.pi * k_prime / n
        for theta in codebook.values:
            scanned += 1
            obj = virtual_variance(vue, theta, delta, n)
            if math.isinf(obj):
                continue
            key = (obj, delta, abs(theta), theta)
            if best is None or key < best[0]:
                best = (key, theta, delta, obj)
    if best is None:
        raise RuntimeError("all grid points are singular; optimization degenerate")
    _, theta_opt, delta_opt, objective = best
    return OptResult(theta_opt=theta_opt, delta_opt=delta_opt, objective=objective, scanned=scanned)


def optimize_sumdiff(codebook: ThetaCodebook, n: int, vue: VirtualUeParams) -> OptResult:
    """Scan eta candidates with the sum-difference variance as the objective.

    Mirrors optimize_aux; the returned delta_opt slot carries the branch width
    4*pi/n for reporting symmetry. Candidates where sin(n*eta/4) vanishes are
    excluded: the closed form degenerates there (its reference factor blows
    up) and would report a spuriously zero variance.
    """
    best = None
    scanned = 0
    for eta in codebook.values:
        scanned += 1
        if abs(math.sin(n * eta / 4.0)) < 1e-9:
            continue
        obj = lemma_sumdiff_variance(
            n, vue.kappa_ax, eta, vue.mu_ax, vue.gamma_ax, vue.alpha_ax
        ).variance
        if math.isinf(obj):
            continue
        key = (obj, abs(eta), eta)
        if best is None or key < best[0]:
            best = (key, eta, obj)
    if best is None:
        raise RuntimeError("all eta candidates are singular; optimization degenerate")
    _, eta_opt, objective = best
    return OptResult(
        theta_opt=eta_opt, delta_opt=4.0 * math.pi / n, objective=objective, scanned=scanned
    )


def derive_vue(
    ue_stats: list[tuple[float, float, list[float]]],
    representative_bits: float = 2,
) -> VirtualUeParams:
    """Long-term statistics -> virtual UE parameters.

    ue_stats rows are (snr_linear, bits, cfo_history in radians per sample).
    gamma_ax is the mean SNR, mu_ax the mean of the pooled CFO history,
    kappa_ax the NMSE of the representative bit depth (2-bit by default), and
    alpha_ax zero: it scales the objective uniformly and cannot move the
    argmin.
    """
    if not ue_stats:
        raise ValueError("ue_stats must not be empty")
    snrs = [row[0] for row in ue_stats]
    pooled = [mu for row in ue_stats for mu in row[2]]
    mu_ax = float(np.mean(pooled)) if pooled else 0.0
    return VirtualUeParams(
        kappa_ax=kappa_for_bits(representative_bits),
        mu_ax=mu_ax,
        alpha_ax=0.0,
        gamma_ax=float(np.mean(snrs)),
    )
