"""Discrete-event simulation of the two-provider loss system.

Serves as the statistical oracle for the exact formulas and as the
holding-time insensitivity check: blocking probabilities must not depend
on the holding-time distribution beyond its mean.

Thanks to call repacking the state is just the pair of call counts, so a
replication is a single merged Poisson arrival stream, a departure-time
heap, and the state-dependent admission rule produced by
``policy_from_sharing``.  The event loop is JIT-compiled; randomness comes
from a splitmix64 counter stream, with per-replication substreams derived
from the master seed, so results are bit-reproducible for a given
configuration regardless of host or thread count.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit, uint64
from scipy.stats import t as student_t

from .errors import DomainError
from .exact import SharingPoint, SystemConfig, policy_from_sharing

__all__ = ["HoldingKind", "HoldingDist", "SimConfig", "SimResult", "simulate"]

_U53 = 1.0 / 9007199254740992.0  # 2^-53
_MEAN_TOL = 1e-12


class HoldingKind(enum.Enum):
    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"
    HYPEREXPONENTIAL = "hyperexponential"


@dataclass(frozen=True)
class HoldingDist:
    """Holding-time distribution of one provider.

    Exponential and deterministic take their mean directly from the
    provider's service rate.  The hyperexponential mixes Exp(rate1) with
    probability ``p`` and Exp(rate2) otherwise; its parameters must
    reproduce the provider's mean holding time exactly.
    """

    kind: HoldingKind = HoldingKind.EXPONENTIAL
    p: float = 0.0
    rate1: float = 0.0
    rate2: float = 0.0

    @classmethod
    def exponential(cls) -> "HoldingDist":
        return cls(HoldingKind.EXPONENTIAL)

    @classmethod
    def deterministic(cls) -> "HoldingDist":
        return cls(HoldingKind.DETERMINISTIC)

    @classmethod
    def hyperexponential(cls, p: float, rate1: float, rate2: float) -> "HoldingDist":
        if not (0.0 < p < 1.0):
            raise DomainError(f"mixing probability must lie in (0, 1), got {p}")
        if rate1 <= 0.0 or rate2 <= 0.0:
            raise DomainError("hyperexponential rates must be positive")
        return cls(HoldingKind.HYPEREXPONENTIAL, p, rate1, rate2)

    def mean(self, mu: float) -> float:
        if self.kind is HoldingKind.HYPEREXPONENTIAL:
            return self.p / self.rate1 + (1.0 - self.p) / self.rate2
        return 1.0 / mu

    def _encode(self, mu: float) -> tuple[int, float, float, float]:
        if self.kind is HoldingKind.EXPONENTIAL:
            return 0, mu, 0.0, 0.0
        if self.kind is HoldingKind.DETERMINISTIC:
            return 1, 1.0 / mu, 0.0, 0.0
        if abs(self.mean(mu) - 1.0 / mu) > _MEAN_TOL / mu:
            raise DomainError(
                f"hyperexponential mean {self.mean(mu)} does not match the "
                f"provider's mean holding time {1.0 / mu}")
        return 2, self.p, self.rate1, self.rate2


@dataclass(frozen=True)
class SimConfig:
    """Run lengths, replication count, seed, and holding-time choices."""

    seed: int = 0
    warmup_arrivals: int = 10_000
    measured_arrivals: int = 100_000
    replications: int = 10
    holding1: HoldingDist = field(default_factory=HoldingDist.exponential)
    holding2: HoldingDist = field(default_factory=HoldingDist.exponential)

    def __post_init__(self):
        if self.measured_arrivals < 10_000:
            raise DomainError("need at least 1e4 measured arrivals")
        if self.replications < 5:
            raise DomainError("need at least 5 replications")
        if self.warmup_arrivals < 0:
            raise DomainError("warmup must be nonnegative")


@dataclass(frozen=True)
class SimResult:
    """Blocking estimates with 99% confidence half-widths.

    Estimates are means over replications; half-widths use the Student-t
    quantile on the replication means.  ``rep_estimates`` holds the raw
    (b1, b2, b_overall) triple of every replication.  All fields except
    ``wall_time_s`` are bit-reproducible for a given seed and config.
    """

    b1: float
    b2: float
    b_overall: float
    ci99_b1: float
    ci99_b2: float
    ci99_overall: float
    events: int
    wall_time_s: float
    rep_estimates: tuple[tuple[float, float, float], ...]

    def statistical_fields(self):
        """Everything except the wall clock, for reproducibility checks."""
        return (self.b1, self.b2, self.b_overall, self.ci99_b1, self.ci99_b2,
                self.ci99_overall, self.events, self.rep_estimates)


@njit(cache=True)
def _u01(seed, ctr):
    # splitmix64: output j of the stream with start `seed`
    z = (seed + ctr * uint64(0x9E3779B97F4A7C15)) & uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> uint64(30))) * uint64(0xBF58476D1CE4E5B9)) & uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> uint64(27))) * uint64(0x94D049BB133111EB)) & uint64(0xFFFFFFFFFFFFFFFF)
    z = z ^ (z >> uint64(31))
    return (z >> uint64(11)) * _U53


@njit(cache=True)
def _run_replication(seed, n_warm, n_meas, lam1, lam2, acc1, acc2, cap,
                     kind1, h1a, h1b, h1c, kind2, h2a, h2b, h2c):
    """One replication; returns per-provider arrival/blocked counts.

    acc1/acc2 are the admission probabilities for provider-1/provider-2
    arrivals indexed by that provider's own call count; the total-capacity
    block is applied unconditionally.
    """
    heap_t = np.empty(cap + 1, dtype=np.float64)
    heap_p = np.empty(cap + 1, dtype=np.int8)
    heap_n = 0

    lam = lam1 + lam2
    p_first = lam1 / lam
    n1 = 0
    n2 = 0
    arrivals = 0
    total = n_warm + n_meas
    arr1 = 0
    blk1 = 0
    arr2 = 0
    blk2 = 0
    events = 0
    max1 = 0
    max2 = 0
    ctr = uint64(0)

    ctr += uint64(1)
    t_arr = -math.log(1.0 - _u01(seed, ctr)) / lam

    while arrivals < total:
        if heap_n > 0 and heap_t[0] <= t_arr:
            # departure: pop the heap root
            prov = heap_p[0]
            heap_n -= 1
            heap_t[0] = heap_t[heap_n]
            heap_p[0] = heap_p[heap_n]
            i = 0
            while True:
                left = 2 * i + 1
                right = left + 1
                small = i
                if left < heap_n and heap_t[left] < heap_t[small]:
                    small = left
                if right < heap_n and heap_t[right] < heap_t[small]:
                    small = right
                if small == i:
                    break
                heap_t[i], heap_t[small] = heap_t[small], heap_t[i]
                heap_p[i], heap_p[small] = heap_p[small], heap_p[i]
                i = small
            if prov == 1:
                n1 -= 1
            else:
                n2 -= 1
            events += 1
            continue

        # arrival from the merged Poisson stream
        ctr += uint64(1)
        prov = 1 if _u01(seed, ctr) < p_first else 2
        arrivals += 1
        measured = arrivals > n_warm

        admitted = False
        if n1 + n2 < cap:
            q = acc1[n1] if prov == 1 else acc2[n2]
            if q >= 1.0:
                admitted = True
            elif q > 0.0:
                ctr += uint64(1)
                admitted = _u01(seed, ctr) < q

        if admitted:
            if prov == 1:
                kind, ha, hb, hc = kind1, h1a, h1b, h1c
            else:
                kind, ha, hb, hc = kind2, h2a, h2b, h2c
            if kind == 0:
                ctr += uint64(1)
                hold = -math.log(1.0 - _u01(seed, ctr)) / ha
            elif kind == 1:
                hold = ha
            else:
                ctr += uint64(1)
                rate = hb if _u01(seed, ctr) < ha else hc
                ctr += uint64(1)
                hold = -math.log(1.0 - _u01(seed, ctr)) / rate
            # push the departure
            i = heap_n
            heap_t[i] = t_arr + hold
            heap_p[i] = prov
            heap_n += 1
            while i > 0:
                parent = (i - 1) // 2
                if heap_t[parent] <= heap_t[i]:
                    break
                heap_t[i], heap_t[parent] = heap_t[parent], heap_t[i]
                heap_p[i], heap_p[parent] = heap_p[parent], heap_p[i]
                i = parent
            if prov == 1:
                n1 += 1
                if n1 > max1:
                    max1 = n1
            else:
                n2 += 1
                if n2 > max2:
                    max2 = n2

        if measured:
            if prov == 1:
                arr1 += 1
                if not admitted:
                    blk1 += 1
            else:
                arr2 += 1
                if not admitted:
                    blk2 += 1
        events += 1
        ctr += uint64(1)
        t_arr = t_arr - math.log(1.0 - _u01(seed, ctr)) / lam

    return arr1, blk1, arr2, blk2, events, max1, max2


def _substream_seed(master: int, rep: int) -> np.uint64:
    # splitmix64 mix of the (rep+1)-th lattice point; Python ints make the
    # 64-bit wraparound explicit
    mask = 0xFFFFFFFFFFFFFFFF
    z = ((master & mask) + (rep + 1) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return np.uint64(z ^ (z >> 31))


def simulate(sys: SystemConfig, pt: SharingPoint, cfg: SimConfig,
             _return_max_counts: bool = False):
    """Estimate blocking probabilities by independent replications.

    Admission follows ``policy_from_sharing`` exactly; warmup arrivals are
    discarded; each replication runs on its own substream of the master
    seed and replications are aggregated in index order.
    """
    pol = policy_from_sharing(sys, pt)
    acc1 = np.asarray(pol.accept2, dtype=np.float64)  # provider-1 arrivals
    acc2 = np.asarray(pol.accept1, dtype=np.float64)  # provider-2 arrivals
    kind1, h1a, h1b, h1c = cfg.holding1._encode(sys.mu1)
    kind2, h2a, h2b, h2c = cfg.holding2._encode(sys.mu2)

    start = time.perf_counter()
    estimates = []
    events = 0
    max_counts = []
    for rep in range(cfg.replications):
        seed = _substream_seed(cfg.seed, rep)
        arr1, blk1, arr2, blk2, ev, mx1, mx2 = _run_replication(
            seed, cfg.warmup_arrivals, cfg.measured_arrivals,
            sys.lambda1, sys.lambda2, acc1, acc2, sys.total_servers,
            kind1, h1a, h1b, h1c, kind2, h2a, h2b, h2c)
        estimates.append((blk1 / max(arr1, 1), blk2 / max(arr2, 1),
                          (blk1 + blk2) / (arr1 + arr2)))
        events += ev
        max_counts.append((mx1, mx2))
    wall = time.perf_counter() - start

    arr = np.asarray(estimates)
    means = arr.mean(axis=0)
    quantile = float(student_t.ppf(0.995, cfg.replications - 1))
    halfwidths = quantile * arr.std(axis=0, ddof=1) / math.sqrt(cfg.replications)

    result = SimResult(
        b1=float(means[0]), b2=float(means[1]), b_overall=float(means[2]),
        ci99_b1=float(halfwidths[0]), ci99_b2=float(halfwidths[1]),
        ci99_overall=float(halfwidths[2]),
        events=int(events), wall_time_s=wall,
        rep_estimates=tuple(tuple(row) for row in estimates),
    )
    if _return_max_counts:
        return result, max_counts
    return result
