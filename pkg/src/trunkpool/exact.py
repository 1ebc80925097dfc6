"""Exact steady-state blocking for two partially pooled loss systems.

Two providers, each an M/M/N/N loss system, lend free servers to each
other's overflow calls under one of two sharing disciplines:

* probabilistic sharing: provider i admits an overflow call of the other
  provider with a fixed probability x_i in [0, 1];
* bounded overflow: provider i hosts at most k_i concurrent overflow
  calls, with randomized admission of the ceil(k_i)-th call so that k_i
  may take any real value in [0, N_i].

Both disciplines assume call repacking, so the system state is just the
pair of per-provider call counts and the stationary distribution has a
product form.  The general engine here handles any state-dependent
acceptance policy; the two named models are thin adapters over it, with
their closed-form blocking expressions implemented independently so the
two routes can be cross-checked.

All blocking probabilities depend on the workload only through the
offered loads a_i = lambda_i / mu_i, and are insensitive to the
holding-time distribution beyond its mean.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from math import ceil, floor, inf, log

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, NumericError

__all__ = [
    "SystemConfig",
    "SharingModel",
    "SharingPoint",
    "AcceptancePolicy",
    "BlockingResult",
    "StationaryDistribution",
    "policy_from_sharing",
    "stationary_distribution",
    "blocking_from_policy",
    "blocking_probabilistic",
    "blocking_bounded_overflow",
    "blocking",
    "overall_blocking",
]

# Fractional parts below this are treated as exact integers, so that
# floating noise never triggers the randomized-admission branch.
_FRAC_SNAP = 1e-12

# Absolute disagreement between the closed forms and the generic engine
# above which the optional cross-check raises.
_CROSS_CHECK_TOL = 1e-10


@dataclass(frozen=True)
class SystemConfig:
    """The two providers' server counts, arrival rates, and service rates.

    Offered loads a_i = lambda_i / mu_i (in Erlangs) are derived; they are
    the only workload statistics that affect any blocking probability.
    """

    n1: int
    n2: int
    lambda1: float
    lambda2: float
    mu1: float = 1.0
    mu2: float = 1.0

    def __post_init__(self):
        for name in ("n1", "n2"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v}")
        for name in ("lambda1", "lambda2", "mu1", "mu2"):
            v = getattr(self, name)
            if not (v > 0.0 and math.isfinite(v)):
                raise DomainError(f"{name} must be positive and finite, got {v}")

    @property
    def a1(self) -> float:
        return self.lambda1 / self.mu1

    @property
    def a2(self) -> float:
        return self.lambda2 / self.mu2

    @property
    def total_servers(self) -> int:
        return self.n1 + self.n2

    def swapped(self) -> "SystemConfig":
        """The same system with the provider labels exchanged."""
        return SystemConfig(self.n2, self.n1, self.lambda2, self.lambda1,
                            self.mu2, self.mu1)


class SharingModel(enum.Enum):
    PROBABILISTIC = "prob"
    BOUNDED_OVERFLOW = "bo"


@dataclass(frozen=True)
class SharingPoint:
    """One sharing configuration.

    Under PROBABILISTIC, (share1, share2) are the admission probabilities
    (x1, x2) in [0, 1]^2.  Under BOUNDED_OVERFLOW they are the real-valued
    overflow caps (k1, k2) with k_i in [0, N_i]; a fractional part means the
    last overflow slot is granted with that probability.
    """

    model: SharingModel
    share1: float
    share2: float

    def __post_init__(self):
        for v in (self.share1, self.share2):
            if not math.isfinite(v) or v < 0.0:
                raise DomainError(f"sharing parameters must be finite and >= 0, got {v}")
        if self.model is SharingModel.PROBABILISTIC:
            if self.share1 > 1.0 or self.share2 > 1.0:
                raise DomainError("probabilistic sharing requires x_i in [0, 1]")

    @classmethod
    def probabilistic(cls, x1: float, x2: float) -> "SharingPoint":
        return cls(SharingModel.PROBABILISTIC, x1, x2)

    @classmethod
    def bounded_overflow(cls, k1: float, k2: float) -> "SharingPoint":
        return cls(SharingModel.BOUNDED_OVERFLOW, k1, k2)

    def normalized(self, sys: SystemConfig) -> tuple[float, float]:
        """The configuration mapped into [0, 1]^2 (x_i = k_i / N_i for caps)."""
        if self.model is SharingModel.PROBABILISTIC:
            return self.share1, self.share2
        return self.share1 / sys.n1, self.share2 / sys.n2

    def swapped(self) -> "SharingPoint":
        return SharingPoint(self.model, self.share2, self.share1)


def sharing_point_from_normalized(sys: SystemConfig, model: SharingModel,
                                  x1: float, x2: float) -> SharingPoint:
    """Build a SharingPoint from normalized coordinates in [0, 1]^2."""
    if not (0.0 <= x1 <= 1.0 and 0.0 <= x2 <= 1.0):
        raise DomainError(f"normalized shares must lie in [0,1]^2, got ({x1}, {x2})")
    if model is SharingModel.PROBABILISTIC:
        return SharingPoint.probabilistic(x1, x2)
    return SharingPoint.bounded_overflow(x1 * sys.n1, x2 * sys.n2)


@dataclass(frozen=True)
class AcceptancePolicy:
    """State-dependent admission probabilities.

    ``accept1[n]`` is the probability that an arriving call of provider 2 is
    admitted when provider 2 already has n active calls (provider 1 being
    the side that grants the overflow once n >= n2); ``accept2[n]`` plays
    the symmetric role for provider-1 arrivals, indexed by provider 1's call
    count.  Both sequences run over n = 0 .. n1+n2-1 and apply only while
    total occupancy is below n1+n2; at full occupancy every arrival is
    blocked regardless.
    """

    accept1: tuple[float, ...]
    accept2: tuple[float, ...]

    def __post_init__(self):
        if len(self.accept1) != len(self.accept2):
            raise DomainError("acceptance sequences must have equal length")
        for seq in (self.accept1, self.accept2):
            if any(not (0.0 <= p <= 1.0) for p in seq):
                raise DomainError("acceptance probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class BlockingResult:
    """Per-provider and traffic-weighted overall blocking probabilities."""

    b1: float
    b2: float
    b_overall: float

    def as_tuple(self) -> tuple[float, float]:
        return self.b1, self.b2


@dataclass(frozen=True)
class StationaryDistribution:
    """Product-form stationary distribution over the feasible state set.

    ``pi[m, n]`` is the stationary probability of m provider-1 calls and n
    provider-2 calls; ``support`` marks the feasible set (states with
    positive weight and total occupancy within capacity).
    """

    pi: np.ndarray
    support: np.ndarray

    def total_mass(self) -> float:
        return float(self.pi.sum())


def _snap_cap(k: float) -> float:
    """Round a real overflow cap whose fractional part is floating noise."""
    fr = k - floor(k)
    if fr < _FRAC_SNAP:
        return float(floor(k))
    if fr > 1.0 - _FRAC_SNAP:
        return float(ceil(k))
    return k


def _validate_point(sys: SystemConfig, pt: SharingPoint) -> SharingPoint:
    if pt.model is SharingModel.BOUNDED_OVERFLOW:
        if pt.share1 > sys.n1 or pt.share2 > sys.n2:
            raise DomainError(
                f"overflow caps ({pt.share1}, {pt.share2}) exceed server counts "
                f"({sys.n1}, {sys.n2})")
        return SharingPoint.bounded_overflow(_snap_cap(pt.share1), _snap_cap(pt.share2))
    return pt


def policy_from_sharing(sys: SystemConfig, pt: SharingPoint) -> AcceptancePolicy:
    """Translate a sharing configuration into per-state admission probabilities.

    Probabilistic: a provider-i call is admitted outright while the provider
    holds fewer than N_i calls, and with probability x_{-i} beyond that.
    Bounded overflow: admitted outright below N_i + floor(k_{-i}) calls, with
    probability frac(k_{-i}) at exactly that count, never beyond.
    """
    pt = _validate_point(sys, pt)
    ntot = sys.total_servers

    def ramp(n_own: int, x_other: float) -> tuple[float, ...]:
        return tuple(1.0 if n < n_own else x_other for n in range(ntot))

    def capped(n_own: int, k_other: float) -> tuple[float, ...]:
        kf = int(floor(k_other))
        fr = k_other - kf
        out = []
        for n in range(ntot):
            if n < n_own + kf:
                out.append(1.0)
            elif n == n_own + kf:
                out.append(fr)
            else:
                out.append(0.0)
        return tuple(out)

    if pt.model is SharingModel.PROBABILISTIC:
        accept2 = ramp(sys.n1, pt.share2)   # provider-1 arrivals, granted by P2
        accept1 = ramp(sys.n2, pt.share1)   # provider-2 arrivals, granted by P1
    else:
        accept2 = capped(sys.n1, pt.share2)
        accept1 = capped(sys.n2, pt.share1)
    return AcceptancePolicy(accept1=accept1, accept2=accept2)


def _policy_log_weights(sys: SystemConfig, pol: AcceptancePolicy) -> tuple[np.ndarray, np.ndarray]:
    """Per-provider log occupancy weights for the product form.

    The weight of state (m, n) factorizes as exp(w1[m] + w2[n]) with
    w_i built from the birth rates a_i * accept_{-i}(j) over death rates j+1;
    log domain keeps the terms finite for hundreds of servers.
    """
    ntot = sys.total_servers

    def weights(a: float, accept_other: tuple[float, ...]) -> np.ndarray:
        w = np.empty(ntot + 1)
        w[0] = 0.0
        acc = 0.0
        for n in range(1, ntot + 1):
            p = accept_other[n - 1]
            if acc == -inf or p <= 0.0:
                acc = -inf
            else:
                acc += log(a * p / n)
            w[n] = acc
        return w

    return weights(sys.a1, pol.accept2), weights(sys.a2, pol.accept1)


def stationary_distribution(sys: SystemConfig, pol: AcceptancePolicy) -> StationaryDistribution:
    """Stationary distribution of the state process under a general policy.

    The unnormalized weight of (m, n) is the product of per-provider birth
    chains; states outside total capacity or with a zero acceptance factor
    carry no mass.  Weights are normalized after subtracting the running
    maximum, so the normalizer cannot overflow; a vanishing normalizer is
    reported as a NumericError rather than silently returning NaNs.
    """
    ntot = sys.total_servers
    w1, w2 = _policy_log_weights(sys, pol)
    shift1 = np.max(w1[np.isfinite(w1)])
    shift2 = np.max(w2[np.isfinite(w2)])
    e1 = np.exp(w1 - shift1)
    e2 = np.exp(w2 - shift2)

    weights = np.outer(e1, e2)
    m_idx, n_idx = np.indices(weights.shape)
    support = (m_idx + n_idx <= ntot) & (weights > 0.0)
    weights[~support] = 0.0

    total = weights.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise NumericError("stationary distribution normalizer underflowed")
    return StationaryDistribution(pi=weights / total, support=support)


def overall_blocking(sys: SystemConfig, b1: float, b2: float) -> float:
    """Traffic-weighted overall blocking probability."""
    if not (0.0 <= b1 <= 1.0 and 0.0 <= b2 <= 1.0):
        raise DomainError("per-provider blocking probabilities must lie in [0, 1]")
    lam = sys.lambda1 + sys.lambda2
    return (sys.lambda1 * b1 + sys.lambda2 * b2) / lam


def _result(sys: SystemConfig, b1: float, b2: float) -> BlockingResult:
    b1 = float(min(max(b1, 0.0), 1.0))
    b2 = float(min(max(b2, 0.0), 1.0))
    return BlockingResult(b1=b1, b2=b2, b_overall=overall_blocking(sys, b1, b2))


def blocking_from_policy(sys: SystemConfig, pol: AcceptancePolicy) -> BlockingResult:
    """Blocking probabilities from the general engine.

    By PASTA, a provider-i arrival is admitted with the stationary average
    of its state-dependent acceptance probability over states below total
    capacity; blocking is the complement.
    """
    dist = stationary_distribution(sys, pol)
    ntot = sys.total_servers
    pi = dist.pi
    m_idx, n_idx = np.indices(pi.shape)
    below = m_idx + n_idx < ntot

    acc2 = np.asarray(pol.accept2 + (0.0,))   # index = provider-1 count
    acc1 = np.asarray(pol.accept1 + (0.0,))
    admit1 = float((pi * acc2[m_idx] * below).sum())
    admit2 = float((pi * acc1[n_idx] * below).sum())
    return _result(sys, 1.0 - admit1, 1.0 - admit2)


def _prob_log_weights(sys: SystemConfig, x1: float, x2: float) -> tuple[np.ndarray, np.ndarray]:
    ntot = sys.total_servers
    n = np.arange(ntot + 1)

    def weights(n_own: int, a: float, x_other: float) -> np.ndarray:
        w = n * log(a) - gammaln(n + 1.0)
        over = np.arange(1, ntot - n_own + 1)
        if x_other > 0.0:
            w[n_own + 1:] += over * log(x_other)
        else:
            w[n_own + 1:] = -inf
        return w

    return weights(sys.n1, sys.a1, x2), weights(sys.n2, sys.a2, x1)


def blocking_probabilistic(sys: SystemConfig, x1: float, x2: float,
                           check: bool = False) -> BlockingResult:
    """Closed-form blocking under probabilistic sharing.

    Provider i's blocking aggregates the full-occupancy diagonal plus the
    states where its arrivals face randomized admission, weighted by the
    rejection probability 1 - x_{-i}.  With ``check=True`` the result is
    recomputed through the general engine and a disagreement beyond 1e-10
    raises; the two routes are implemented independently.
    """
    if not (0.0 <= x1 <= 1.0 and 0.0 <= x2 <= 1.0):
        raise DomainError(f"admission probabilities must lie in [0,1]^2, got ({x1}, {x2})")
    ntot = sys.total_servers
    w1, w2 = _prob_log_weights(sys, x1, x2)
    e1 = np.exp(w1 - np.max(w1[np.isfinite(w1)]))
    e2 = np.exp(w2 - np.max(w2[np.isfinite(w2)]))
    p1 = np.cumsum(e1)
    p2 = np.cumsum(e2)

    n = np.arange(ntot + 1)
    norm = float(np.dot(e1, p2[ntot - n]))
    diag = float(np.dot(e1, e2[ntot - n]))

    def overflow_mass(e_own, p_other, n_own):
        # states with own count >= n_own and total strictly below capacity
        rows = np.arange(n_own, ntot)
        if len(rows) == 0:
            return 0.0
        return float(np.dot(e_own[rows], p_other[ntot - rows - 1]))

    d1 = overflow_mass(e1, p2, sys.n1)
    d2 = overflow_mass(e2, p1, sys.n2)
    res = _result(sys, (diag + (1.0 - x2) * d1) / norm,
                  (diag + (1.0 - x1) * d2) / norm)
    if check:
        _cross_check(sys, SharingPoint.probabilistic(x1, x2), res)
    return res


def _bo_log_weights(sys: SystemConfig, k1: float, k2: float) -> tuple[np.ndarray, np.ndarray]:
    ntot = sys.total_servers
    n = np.arange(ntot + 1)

    def weights(n_own: int, a: float, k_other: float) -> np.ndarray:
        kf = int(floor(k_other))
        fr = k_other - kf
        w = n * log(a) - gammaln(n + 1.0)
        top = n_own + kf
        if fr > 0.0:
            w[top + 1] += log(fr)
            w[top + 2:] = -inf
        else:
            w[top + 1:] = -inf
        return w

    return weights(sys.n1, sys.a1, k2), weights(sys.n2, sys.a2, k1)


def blocking_bounded_overflow(sys: SystemConfig, k1: float, k2: float,
                              check: bool = False) -> BlockingResult:
    """Closed-form blocking under bounded-overflow sharing.

    The feasible set caps provider i's count at N_i + ceil(k_{-i}); blocking
    for provider i sums the full-occupancy diagonal, the states sitting at
    its overflow ceiling, and (for fractional caps) the randomized boundary
    level weighted by 1 - frac(k_{-i}).  Continuous in (k1, k2), including
    across integer caps.  ``check=True`` cross-validates against the
    general engine as in blocking_probabilistic.
    """
    if not (0.0 <= k1 <= sys.n1 and 0.0 <= k2 <= sys.n2):
        raise DomainError(
            f"overflow caps must lie in [0,{sys.n1}] x [0,{sys.n2}], got ({k1}, {k2})")
    k1 = _snap_cap(k1)
    k2 = _snap_cap(k2)
    ntot = sys.total_servers
    w1, w2 = _bo_log_weights(sys, k1, k2)
    e1 = np.exp(w1 - np.max(w1[np.isfinite(w1)]))
    e2 = np.exp(w2 - np.max(w2[np.isfinite(w2)]))
    p1 = np.cumsum(e1)
    p2 = np.cumsum(e2)

    cap1 = sys.n1 + int(ceil(k2))
    cap2 = sys.n2 + int(ceil(k1))
    fr1 = k1 - floor(k1)
    fr2 = k2 - floor(k2)

    rows = np.arange(0, cap1 + 1)
    norm = float(np.dot(e1[rows], p2[np.minimum(cap2, ntot - rows)]))
    lo = max(0, ntot - cap2)
    diag_rows = np.arange(lo, cap1 + 1)
    diag = float(np.dot(e1[diag_rows], e2[ntot - diag_rows]))

    def ceiling_masses(e_own, p_other, n_own, n_other, k_other):
        # mass at own count N_own + ceil(k) with the other provider strictly
        # below N_other - ceil(k), and likewise for the floor level
        c_top = n_other - int(ceil(k_other)) - 1
        f_top = n_other - int(floor(k_other)) - 1
        c = e_own[n_own + int(ceil(k_other))] * p_other[c_top] if c_top >= 0 else 0.0
        d = e_own[n_own + int(floor(k_other))] * p_other[f_top] if f_top >= 0 else 0.0
        return c, d

    c1, d1 = ceiling_masses(e1, p2, sys.n1, sys.n2, k2)
    c2, d2 = ceiling_masses(e2, p1, sys.n2, sys.n1, k1)
    b1 = (diag + c1 + ((1.0 - fr2) * d1 if fr2 > 0.0 else 0.0)) / norm
    b2 = (diag + c2 + ((1.0 - fr1) * d2 if fr1 > 0.0 else 0.0)) / norm
    res = _result(sys, b1, b2)
    if check:
        _cross_check(sys, SharingPoint.bounded_overflow(k1, k2), res)
    return res


def _cross_check(sys: SystemConfig, pt: SharingPoint, closed: BlockingResult) -> None:
    engine = blocking_from_policy(sys, policy_from_sharing(sys, pt))
    err = max(abs(engine.b1 - closed.b1), abs(engine.b2 - closed.b2))
    if err > _CROSS_CHECK_TOL:
        raise NumericError(
            f"closed-form and general-engine blocking disagree by {err:.3e} at {pt}")


def blocking(sys: SystemConfig, pt: SharingPoint, check: bool = False) -> BlockingResult:
    """Blocking probabilities for a sharing configuration of either model."""
    pt = _validate_point(sys, pt)
    if pt.model is SharingModel.PROBABILISTIC:
        return blocking_probabilistic(sys, pt.share1, pt.share2, check=check)
    return blocking_bounded_overflow(sys, pt.share1, pt.share2, check=check)
