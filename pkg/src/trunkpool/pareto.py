"""QoS stability and the Pareto frontier of sharing configurations.

A configuration is QoS-stable when both providers strictly beat their
standalone blocking.  Every Pareto-efficient configuration has at least one
provider sharing everything, so the frontier lives on the upper-right
boundary of the normalized configuration square and can be swept by a
single parameter t in [0, 2]:

    t in [0, 1]  ->  (t, 1)        (provider 2 shares all)
    t in (1, 2]  ->  (1, 2 - t)    (provider 1 shares all)

Along this clockwise sweep provider 1's blocking strictly increases and
provider 2's strictly decreases, which is what makes the frontier
thresholds and every bargaining solution solvable by bisection.

The frontier itself comes in three shapes depending on how pooled
blocking compares with the standalone values; thresholds are computed in
normalized coordinates for both sharing models and converted to overflow
caps on output.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .erlang import erlang_b
from .errors import BracketError, DomainError, NumericError
from .exact import (
    BlockingResult,
    SharingModel,
    SharingPoint,
    SystemConfig,
    blocking,
    sharing_point_from_normalized,
)

__all__ = [
    "FrontierCase",
    "ParetoFrontier",
    "is_qos_stable",
    "classify_case",
    "compute_frontier",
    "sweep_xy",
    "sweep_point",
    "blocking_normalized",
    "find_improving_direction",
]

# Residual demanded of threshold equations, in probability space.
_RESIDUAL_TOL = 1e-10
_MAX_BISECT = 200


class FrontierCase(enum.Enum):
    """Which providers benefit from full pooling."""

    BOTH_BENEFIT = 1
    ONLY_P1_BENEFITS = 2
    ONLY_P2_BENEFITS = 3


@dataclass(frozen=True)
class ParetoFrontier:
    """Case classification plus the thresholds delimiting the Pareto set.

    Thresholds are in normalized coordinates.  Their meaning depends on the
    case:

    * BOTH_BENEFIT: (x1_hat, x2_hat); the frontier is the union of
      {(x, 1): x in (x1_hat, 1]} and {(1, x): x in (x2_hat, 1]}.
    * ONLY_P1_BENEFITS: (x2_low, x2_high); frontier {(1, x): x2_low < x < x2_high}.
    * ONLY_P2_BENEFITS: (x1_low, x1_high); frontier {(x, 1): x1_low < x < x1_high}.

    The frontier is open: its endpoints leave one provider exactly at its
    standalone blocking, hence not strictly better off.
    """

    case: FrontierCase
    model: SharingModel
    thresholds: tuple[float, float]
    standalone: tuple[float, float]
    pooled: float

    def t_interval(self) -> tuple[float, float]:
        """The open sweep-parameter interval covering the frontier."""
        lo, hi = self.thresholds
        if self.case is FrontierCase.BOTH_BENEFIT:
            return lo, 2.0 - hi
        if self.case is FrontierCase.ONLY_P1_BENEFITS:
            return 2.0 - hi, 2.0 - lo
        return lo, hi

    def contains_t(self, t: float, slack: float = 0.0) -> bool:
        lo, hi = self.t_interval()
        return lo - slack < t < hi + slack


def blocking_normalized(sys: SystemConfig, model: SharingModel,
                        x1: float, x2: float) -> BlockingResult:
    """Blocking at normalized coordinates (x1, x2) under either model."""
    return blocking(sys, sharing_point_from_normalized(sys, model, x1, x2))


def is_qos_stable(sys: SystemConfig, pt: SharingPoint) -> bool:
    """Whether both providers strictly beat their standalone blocking.

    Comparison is exact on the computed doubles; the no-pooling point is
    therefore never QoS-stable (it achieves equality, not improvement).
    """
    res = blocking(sys, pt)
    return (res.b1 < erlang_b(sys.n1, sys.a1)
            and res.b2 < erlang_b(sys.n2, sys.a2))


def classify_case(sys: SystemConfig) -> FrontierCase:
    """Compare pooled blocking against the standalone values.

    The pooled value can never weakly exceed both standalone values (it is
    strictly below their traffic-weighted average); that situation is
    asserted rather than assumed.
    """
    s1 = erlang_b(sys.n1, sys.a1)
    s2 = erlang_b(sys.n2, sys.a2)
    pooled = erlang_b(sys.n1 + sys.n2, sys.a1 + sys.a2)
    if pooled < s1 and pooled < s2:
        return FrontierCase.BOTH_BENEFIT
    if s2 <= pooled < s1:
        return FrontierCase.ONLY_P1_BENEFITS
    if s1 <= pooled < s2:
        return FrontierCase.ONLY_P2_BENEFITS
    raise NumericError(
        f"pooled blocking {pooled} not below either standalone value "
        f"({s1}, {s2}); this contradicts the Erlang-B averaging bound")


def _bisect_threshold(fn, lo: float, hi: float, tol: float) -> float:
    """Root of a monotone function on [lo, hi] by bisection.

    Runs until the bracket is narrower than `tol` AND the residual is below
    _RESIDUAL_TOL, or until the bracket degenerates at float resolution.
    `fn` must have opposite signs at the endpoints.
    """
    flo = fn(lo)
    fhi = fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise BracketError(
            f"no sign change on [{lo}, {hi}] (f = {flo:.3e}, {fhi:.3e}); "
            "monotone blocking violated upstream")
    best = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fmid = fn(mid)
        best = mid
        if hi - lo <= tol and abs(fmid) <= _RESIDUAL_TOL:
            break
        if (fmid > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    return best


def compute_frontier(sys: SystemConfig, model: SharingModel,
                     tol: float = 1e-9) -> ParetoFrontier:
    """Thresholds of the Pareto set by monotone bisection along the boundary.

    Each threshold solves an equation of the form "blocking equals the
    standalone value" along one boundary edge, which has a unique root by
    strict monotonicity.  In the single-beneficiary cases the upper
    threshold is clamped to 1 when pooled blocking exactly matches the
    other provider's standalone value (the knife edge where the frontier is
    half-open at full pooling).
    """
    if tol <= 0.0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    s1 = erlang_b(sys.n1, sys.a1)
    s2 = erlang_b(sys.n2, sys.a2)
    pooled = erlang_b(sys.n1 + sys.n2, sys.a1 + sys.a2)
    case = classify_case(sys)

    def b1_right_edge(x2):   # B1(1, x2) - s1, strictly decreasing in x2
        return blocking_normalized(sys, model, 1.0, x2).b1 - s1

    def b2_right_edge(x2):   # B2(1, x2) - s2, strictly increasing in x2
        return blocking_normalized(sys, model, 1.0, x2).b2 - s2

    def b2_top_edge(x1):     # B2(x1, 1) - s2, strictly decreasing in x1
        return blocking_normalized(sys, model, x1, 1.0).b2 - s2

    def b1_top_edge(x1):     # B1(x1, 1) - s1, strictly increasing in x1
        return blocking_normalized(sys, model, x1, 1.0).b1 - s1

    if case is FrontierCase.BOTH_BENEFIT:
        x2_hat = _bisect_threshold(b1_right_edge, 0.0, 1.0, tol)
        x1_hat = _bisect_threshold(b2_top_edge, 0.0, 1.0, tol)
        thresholds = (x1_hat, x2_hat)
    elif case is FrontierCase.ONLY_P1_BENEFITS:
        x2_low = _bisect_threshold(b1_right_edge, 0.0, 1.0, tol)
        # pooled >= s2 here, so B2(1, .) - s2 brackets unless equality at 1
        x2_high = 1.0 if b2_right_edge(1.0) <= 0.0 else _bisect_threshold(
            b2_right_edge, 0.0, 1.0, tol)
        thresholds = (x2_low, x2_high)
    else:
        x1_low = _bisect_threshold(b2_top_edge, 0.0, 1.0, tol)
        x1_high = 1.0 if b1_top_edge(1.0) <= 0.0 else _bisect_threshold(
            b1_top_edge, 0.0, 1.0, tol)
        thresholds = (x1_low, x1_high)

    return ParetoFrontier(case=case, model=model, thresholds=thresholds,
                          standalone=(s1, s2), pooled=pooled)


def sweep_xy(t: float) -> tuple[float, float]:
    """The boundary sweep map t -> (x1, x2), t in [0, 2]."""
    if not 0.0 <= t <= 2.0:
        raise DomainError(f"sweep parameter must lie in [0, 2], got {t}")
    if t <= 1.0:
        return t, 1.0
    return 1.0, 2.0 - t


def sweep_point(sys: SystemConfig, model: SharingModel, t: float,
                frontier: ParetoFrontier | None = None) -> SharingPoint:
    """Sharing configuration at sweep parameter t.

    Given a frontier, t is additionally required to lie in its (closed)
    parameter interval.
    """
    if frontier is not None and not frontier.contains_t(t, slack=1e-12):
        lo, hi = frontier.t_interval()
        raise DomainError(f"t = {t} outside the frontier interval [{lo}, {hi}]")
    x1, x2 = sweep_xy(t)
    return sharing_point_from_normalized(sys, model, x1, x2)


def find_improving_direction(sys: SystemConfig, model: SharingModel,
                             x1: float, x2: float, step: float = 1e-4) -> float:
    """A direction (1, theta), theta > 0, strictly improving both providers.

    At any interior configuration such a direction exists: raising both
    shares simultaneously trades each provider's own loss against the
    other's gain.  The admissible slopes are bracketed by ratios of the
    partial derivatives of B1 and B2; when the finite differences resolve,
    the geometric mean of the bracket is tried first.  Every returned theta
    is verified by an actual probe step that strictly lowers both blocking
    probabilities.

    On large systems a derivative can sit below double resolution (a cap
    that is effectively never reached); the derivative-based guess then
    degenerates and a ladder of fallback slopes is probed instead.  Raises
    NumericError when no candidate verifies, which at double precision can
    genuinely happen deep in such saturated regions.
    """
    if not (0.0 <= x1 < 1.0 and 0.0 <= x2 < 1.0):
        raise DomainError("interior search requires (x1, x2) in [0, 1)^2")
    h = step

    def b(u1, u2):
        return blocking_normalized(sys, model, u1, u2)

    base = b(x1, x2)
    # one-sided differences stay inside the square and match the
    # right-derivative convention at integer overflow caps
    up1 = b(x1 + h, x2)
    up2 = b(x1, x2 + h)
    d1_x1 = (up1.b1 - base.b1) / h
    d1_x2 = (up2.b1 - base.b1) / h
    d2_x1 = (up1.b2 - base.b2) / h
    d2_x2 = (up2.b2 - base.b2) / h

    candidates = []
    if d1_x1 > 0.0 and d1_x2 < 0.0 and d2_x2 > 0.0 and d2_x1 < 0.0:
        theta_lo = d1_x1 / (-d1_x2)   # improvement threshold for provider 1
        theta_hi = (-d2_x1) / d2_x2   # improvement ceiling for provider 2
        if theta_lo < theta_hi:
            candidates.append(float(np.sqrt(theta_lo * theta_hi)))
    candidates.extend((1.0, 0.3, 3.0, 0.1, 10.0, 0.03, 30.0))

    for theta in candidates:
        norm = float(np.hypot(1.0, theta))
        probe = b(min(x1 + h / norm, 1.0), min(x2 + h * theta / norm, 1.0))
        if probe.b1 < base.b1 and probe.b2 < base.b2:
            return theta
    raise NumericError(
        f"no verifiable improving direction at ({x1}, {x2}); the blocking "
        "surface is flat below double resolution here")
