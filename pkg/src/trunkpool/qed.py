"""Large-system approximations in the square-root staffing regime.

When both providers are staffed with loads a_i = N_i + beta_i sqrt(N_i)
and the overflow caps scale as k_i = gamma_i sqrt(N_i), the blocking
probabilities under bounded-overflow sharing behave like (1/sqrt(N)) times
a ratio of Gaussian functionals.  The computational cost of the
approximation is independent of the system size.

The normalizer has a geometric reading: it is the probability that a pair
of independent Gaussians Z_i ~ N(beta_i sqrt(alpha_i), alpha_i) falls in
the pentagon {z1 <= gamma2 sqrt(alpha2), z2 <= gamma1 sqrt(alpha1),
z1 + z2 <= 0}.  Conditioning on Z_1 turns that probability into the
explicit cdf-product-plus-integral form evaluated here, with integration
limits (-gamma1 sqrt(alpha1), gamma2 sqrt(alpha2)).  The per-provider
numerators are line integrals of the same Gaussian pair along the
pentagon's diagonal and outer edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .erlang import mills_ratio, normal_cdf, normal_pdf
from .errors import DomainError, NumericError
from .exact import SystemConfig
from .quadrature import adaptive_simpson

__all__ = [
    "QedParams",
    "map_finite_to_qed",
    "qed_params_to_finite",
    "qed_blocking",
    "qed_full_pooling",
]

_QUAD_TOL = 1e-12
# Gaussian factors are negligible this many standard deviations out
_TAIL_SDS = 10.0
_MIN_NORMALIZER = 1e-300


@dataclass(frozen=True)
class QedParams:
    """Scaled description of a two-provider system.

    n_scale is the scaling parameter N; provider i has alpha_i * N servers,
    staffing margin beta_i (in units of sqrt(N_i)), and overflow cap
    gamma_i * sqrt(N_i).
    """

    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    gamma1: float
    gamma2: float
    n_scale: float

    def __post_init__(self):
        if not (self.alpha1 > 0.0 and self.alpha2 > 0.0):
            raise DomainError("size ratios alpha_i must be positive")
        if self.gamma1 < 0.0 or self.gamma2 < 0.0:
            raise DomainError("sharing coefficients gamma_i must be nonnegative")
        if not self.n_scale >= 1.0:
            raise DomainError("scaling parameter must be at least 1")


def map_finite_to_qed(sys: SystemConfig, k1: float, k2: float) -> QedParams:
    """Express a finite system and overflow caps in scaled coordinates.

    Provider 1 anchors the scale: N = N_1, alpha_1 = 1.
    """
    if not (0.0 <= k1 <= sys.n1 and 0.0 <= k2 <= sys.n2):
        raise DomainError(f"overflow caps ({k1}, {k2}) out of range")
    n = float(sys.n1)
    return QedParams(
        alpha1=1.0,
        alpha2=sys.n2 / n,
        beta1=(sys.a1 - sys.n1) / math.sqrt(sys.n1),
        beta2=(sys.a2 - sys.n2) / math.sqrt(sys.n2),
        gamma1=k1 / math.sqrt(sys.n1),
        gamma2=k2 / math.sqrt(sys.n2),
        n_scale=n,
    )


def qed_params_to_finite(p: QedParams) -> tuple[float, float, float, float, float, float]:
    """Invert the scaling relations: (n1, n2, a1, a2, k1, k2)."""
    n1 = p.alpha1 * p.n_scale
    n2 = p.alpha2 * p.n_scale
    a1 = n1 + p.beta1 * math.sqrt(n1)
    a2 = n2 + p.beta2 * math.sqrt(n2)
    return n1, n2, a1, a2, p.gamma1 * math.sqrt(n1), p.gamma2 * math.sqrt(n2)


def _clip_to_window(lo: float, hi: float, centers_sds) -> tuple[float, float]:
    """Intersect [lo, hi] with the union-relevant Gaussian windows.

    Every (center, sd) pair contributes a factor that is negligible beyond
    _TAIL_SDS standard deviations, so the integrand support is the
    intersection of the individual windows.
    """
    for center, sd in centers_sds:
        lo = max(lo, center - _TAIL_SDS * sd)
        hi = min(hi, center + _TAIL_SDS * sd)
    return lo, hi


def qed_blocking(p: QedParams) -> tuple[float, float]:
    """Approximate per-provider blocking probabilities.

    Both numerators share the diagonal line integral; each adds the mass of
    its own outer edge of the pentagon.  At gamma = 0 the expression
    collapses to the single-system square-root staffing formula.
    """
    sa1 = math.sqrt(p.alpha1)
    sa2 = math.sqrt(p.alpha2)
    lo = -p.gamma1 * sa1
    hi = p.gamma2 * sa2

    def diag_integrand(x: float) -> float:
        return normal_pdf(x / sa1 - p.beta1) * normal_pdf(-x / sa2 - p.beta2)

    def norm_integrand(x: float) -> float:
        return normal_pdf(x / sa1 - p.beta1) * normal_cdf(-x / sa2 - p.beta2)

    d_lo, d_hi = _clip_to_window(lo, hi, [(sa1 * p.beta1, sa1),
                                          (-sa2 * p.beta2, sa2)])
    diag = adaptive_simpson(diag_integrand, d_lo, d_hi, _QUAD_TOL)

    g_lo, g_hi = _clip_to_window(lo, hi, [(sa1 * p.beta1, sa1)])
    tail = adaptive_simpson(norm_integrand, g_lo, g_hi, _QUAD_TOL)

    edge1 = (normal_pdf(p.gamma2 * sa2 / sa1 - p.beta1) / sa1
             * normal_cdf(-p.gamma2 - p.beta2))
    edge2 = (normal_pdf(p.gamma1 * sa1 / sa2 - p.beta2) / sa2
             * normal_cdf(-p.gamma1 - p.beta1))
    normalizer = (normal_cdf(p.gamma1 * sa1 / sa2 - p.beta2)
                  * normal_cdf(-p.gamma1 - p.beta1) + tail / sa1)
    if not normalizer > _MIN_NORMALIZER:
        raise NumericError(
            f"QED normalizer degenerate ({normalizer}); the scaled system "
            "is blocked almost surely")

    shared = diag / (sa1 * sa2)
    scale = 1.0 / (math.sqrt(p.n_scale) * normalizer)
    return (edge1 + shared) * scale, (edge2 + shared) * scale


def qed_full_pooling(p: QedParams) -> float:
    """Blocking of the fully pooled system in the same scaled regime.

    The aggregate is again a square-root staffed single system, with
    margin (beta1 sqrt(alpha1) + beta2 sqrt(alpha2)) / sqrt(alpha1 + alpha2).
    """
    asum = p.alpha1 + p.alpha2
    margin = (p.beta1 * math.sqrt(p.alpha1)
              + p.beta2 * math.sqrt(p.alpha2)) / math.sqrt(asum)
    return mills_ratio(margin) / math.sqrt(p.n_scale * asum)
