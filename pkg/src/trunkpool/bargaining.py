"""Bargaining over the Pareto frontier of sharing configurations.

The two providers must agree on a point of the Pareto frontier; failing
to agree leaves them at the no-pooling disagreement point.  Utilities are
the negated blocking probabilities (linear concepts) or the log-ratio of
standalone to achieved blocking (logarithmic variants).

Concepts:

* NBS / LogNBS  - maximize the product of utility gains.  The utility set
  is not convex, so uniqueness is not guaranteed; the solver scans a dense
  grid along the boundary sweep, refines every local maximum by
  golden-section search, returns the global best, and reports any other
  local maxima whose objective ties the best within 1e-12.
* KSBS / LogKSBS - the unique frontier point where the ratio of utility
  gains equals the ratio at the ideal points (each provider's best
  achievable utility, attained when it shares nothing and the other
  shares everything).  The gain ratio is strictly decreasing along the
  clockwise sweep, so bisection applies; that monotonicity is verified on
  101 points before solving.
* ES / LogES   - equal utility gains; same bisection with ratio constant 1.
  With matched standalone blocking the solution is full pooling exactly,
  and the solver returns that corner without iterating.
* US           - minimize overall blocking over the frontier closure.  With
  equal holding rates the solution is a frontier endpoint in closed form;
  otherwise a numeric minimization is used and flagged as such.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .erlang import erlang_b
from .errors import BracketError, DomainError
from .exact import (
    BlockingResult,
    SharingModel,
    SharingPoint,
    SystemConfig,
    blocking,
)
from .pareto import (
    FrontierCase,
    ParetoFrontier,
    blocking_normalized,
    compute_frontier,
    sweep_point,
    sweep_xy,
)

__all__ = [
    "Concept",
    "BargainingOutcome",
    "nash",
    "kalai_smorodinsky",
    "egalitarian",
    "utilitarian",
    "log_variants",
    "solve",
]

_GRID_POINTS = 2001
_RATIO_RESIDUAL_TOL = 1e-9
_TIE_TOL = 1e-12
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# standalone blocking values closer than this (relatively) are treated as
# matched, placing ES/LogES at full pooling exactly
_MATCHED_REL_TOL = 1e-9


class Concept(enum.Enum):
    NBS = "nbs"
    KSBS = "ksbs"
    ES = "es"
    US = "us"
    LOG_NBS = "lognbs"
    LOG_KSBS = "logksbs"
    LOG_ES = "loges"


@dataclass(frozen=True)
class BargainingOutcome:
    """A chosen sharing configuration with solver diagnostics.

    ``residual`` is the normalized ratio residual for the bisection-based
    concepts, the final bracket width in t for the search-based ones, and
    zero for closed-form placements.  ``near_ties`` lists other grid-local
    maxima whose refined objective is within 1e-12 of the best (NBS
    variants only); a nonempty list signals practical multimodality.
    """

    concept: Concept
    point: SharingPoint
    blocking: BlockingResult
    iterations: int
    residual: float
    near_ties: tuple[SharingPoint, ...] = ()
    numeric_fallback: bool = False


def _standalone(sys: SystemConfig) -> tuple[float, float]:
    return erlang_b(sys.n1, sys.a1), erlang_b(sys.n2, sys.a2)


def _gains(sys: SystemConfig, model: SharingModel, s1: float, s2: float,
           log_scale: bool):
    """Utility gains (u1(t), u2(t)) along the sweep."""

    def u(t: float) -> tuple[float, float]:
        res = blocking_normalized(sys, model, *sweep_xy(t))
        if log_scale:
            return math.log(s1 / res.b1), math.log(s2 / res.b2)
        return s1 - res.b1, s2 - res.b2

    return u


def _ideal_ratio(sys: SystemConfig, model: SharingModel, s1: float, s2: float,
                 log_scale: bool) -> float:
    """Ratio of the providers' maximal gains.

    Provider 1 is best off at (0, 1) (it shares nothing, provider 2 shares
    everything); provider 2 at (1, 0).
    """
    best1 = blocking_normalized(sys, model, 0.0, 1.0).b1
    best2 = blocking_normalized(sys, model, 1.0, 0.0).b2
    if log_scale:
        return math.log(s1 / best1) / math.log(s2 / best2)
    return (s1 - best1) / (s2 - best2)


def _verify_ratio_decreasing(u, frontier: ParetoFrontier) -> None:
    """Guard: f(t) = u1/u2 must be decreasing along the frontier sweep.

    f is strictly decreasing in exact arithmetic, but on frontier segments
    where one provider's extra capacity is effectively never used the
    blocking probabilities saturate below double resolution and f goes
    locally flat (e.g. a small provider facing a cap far above its load).
    Only a relative increase beyond 1e-9 is treated as a violation; that
    still catches any genuine monotonicity bug upstream.
    """
    t_lo, t_hi = frontier.t_interval()
    ts = t_lo + (np.arange(101) + 0.5) * (t_hi - t_lo) / 101.0
    prev = math.inf
    for t in ts:
        u1, u2 = u(float(t))
        if u2 <= 0.0:   # pragma: no cover - interior points have u2 > 0
            raise BracketError("utility gain of provider 2 vanished inside the frontier")
        f = u1 / u2
        if f - prev > 1e-9 * max(1.0, abs(prev)):
            raise BracketError(
                f"gain ratio increases along the sweep at t = {t} (f = {f})")
        prev = f


def _bisect_ratio(sys: SystemConfig, model: SharingModel, u, ratio: float,
                  frontier: ParetoFrontier) -> tuple[float, int, float]:
    """Unique t on the frontier where u1(t) = ratio * u2(t).

    g(t) = u1 - ratio*u2 is strictly decreasing along the whole sweep, and
    the frontier endpoints bracket its root by construction.
    """
    lo, hi = frontier.t_interval()

    def g(t):
        u1, u2 = u(t)
        return u1 - ratio * u2

    glo = g(lo)
    ghi = g(hi)
    if not (glo > 0.0 > ghi):
        raise BracketError(
            f"gain difference does not bracket on [{lo}, {hi}]: "
            f"g = ({glo:.3e}, {ghi:.3e})")

    iterations = 0
    t = 0.5 * (lo + hi)
    for _ in range(200):
        t = 0.5 * (lo + hi)
        if t == lo or t == hi:
            break
        u1, u2 = u(t)
        iterations += 1
        if u2 > 0.0 and abs(u1 / (ratio * u2) - 1.0) <= _RATIO_RESIDUAL_TOL:
            break
        if u1 - ratio * u2 > 0.0:
            lo = t
        else:
            hi = t
    u1, u2 = u(t)
    residual = abs(u1 / (ratio * u2) - 1.0) if u2 > 0.0 else math.inf
    return t, iterations, residual


def _outcome_at_t(sys: SystemConfig, model: SharingModel, concept: Concept,
                  t: float, iterations: int, residual: float,
                  near_ties=(), numeric_fallback=False) -> BargainingOutcome:
    pt = sweep_point(sys, model, t)
    return BargainingOutcome(concept=concept, point=pt,
                             blocking=blocking(sys, pt),
                             iterations=iterations, residual=residual,
                             near_ties=tuple(near_ties),
                             numeric_fallback=numeric_fallback)


def _golden_max(obj, lo: float, hi: float, tol: float = 1e-12,
                max_iter: int = 120) -> tuple[float, float, int, float]:
    """Golden-section maximization on [lo, hi].

    Returns (t, obj(t), iterations, final bracket width).
    """
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc = obj(c)
    fd = obj(d)
    iterations = 2
    while hi - lo > tol and iterations < max_iter:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = obj(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = obj(d)
        iterations += 1
    t = c if fc > fd else d
    return t, max(fc, fd), iterations, hi - lo


def _grid_refine_max(obj, lo: float, hi: float):
    """Dense grid plus golden-section refinement of every local maximum.

    Returns (best_t, best_value, ties, iterations, bracket_width) where
    ties are the refined (t, value) pairs of other local maxima within
    _TIE_TOL of the best value.
    """
    ts = np.linspace(lo, hi, _GRID_POINTS)
    vals = np.array([obj(float(t)) for t in ts])

    candidates = []
    for i in range(len(ts)):
        if vals[i] <= 0.0:
            continue
        left = vals[i - 1] if i > 0 else -math.inf
        right = vals[i + 1] if i + 1 < len(ts) else -math.inf
        # strict on the left so a plateau (objective flat at double
        # resolution, e.g. a saturated frontier segment) yields one
        # candidate instead of one per grid point
        if vals[i] > left and vals[i] >= right:
            candidates.append(i)
    if not candidates:
        # no configuration improves both providers anywhere on the grid;
        # the non-emptiness of the QoS-stable set rules this out
        raise BracketError("objective vanished on the entire sweep grid")

    refined = []
    iterations = len(ts)
    for i in candidates:
        a = ts[max(i - 1, 0)]
        b = ts[min(i + 1, len(ts) - 1)]
        t_star, v_star, it, final_width = _golden_max(obj, float(a), float(b))
        iterations += it
        refined.append((t_star, v_star, final_width))

    refined.sort(key=lambda r: r[1], reverse=True)
    best_t, best_v, width = refined[0]
    ties = [(t, v) for t, v, _ in refined[1:] if best_v - v <= _TIE_TOL
            and abs(t - best_t) > 1e-9]
    return best_t, best_v, ties, iterations, width


def nash(sys: SystemConfig, model: SharingModel) -> BargainingOutcome:
    """Nash bargaining solution: maximize the product of utility gains.

    Every maximizer lies on the boundary sweep, so the search is
    one-dimensional.  Uniqueness is not asserted; near-tied local maxima
    are reported through ``near_ties``.
    """
    return _nash_impl(sys, model, Concept.NBS, log_scale=False)


def _nash_impl(sys: SystemConfig, model: SharingModel, concept: Concept,
               log_scale: bool) -> BargainingOutcome:
    s1, s2 = _standalone(sys)
    u = _gains(sys, model, s1, s2, log_scale)

    def obj(t: float) -> float:
        u1, u2 = u(t)
        return max(u1, 0.0) * max(u2, 0.0)

    best_t, _, ties, iterations, width = _grid_refine_max(obj, 0.0, 2.0)
    tie_points = tuple(sweep_point(sys, model, t) for t, _ in ties)
    return _outcome_at_t(sys, model, concept, best_t, iterations, width,
                         near_ties=tie_points)


def kalai_smorodinsky(sys: SystemConfig, model: SharingModel) -> BargainingOutcome:
    """Kalai-Smorodinsky solution: gain ratio equal to the ideal-point ratio."""
    return _ratio_impl(sys, model, Concept.KSBS, log_scale=False)


def egalitarian(sys: SystemConfig, model: SharingModel) -> BargainingOutcome:
    """Egalitarian solution: both providers gain equally."""
    return _ratio_impl(sys, model, Concept.ES, log_scale=False)


def _matched_standalone(s1: float, s2: float) -> bool:
    return abs(s1 - s2) <= _MATCHED_REL_TOL * max(s1, s2)


def _ratio_impl(sys: SystemConfig, model: SharingModel, concept: Concept,
                log_scale: bool) -> BargainingOutcome:
    s1, s2 = _standalone(sys)
    equal_split = concept in (Concept.ES, Concept.LOG_ES)
    if equal_split and _matched_standalone(s1, s2):
        # matched standalone blocking puts the equal-gain point at full
        # pooling exactly: B1 = B2 there, and nowhere else on the frontier
        u = _gains(sys, model, s1, s2, log_scale)
        u1, u2 = u(1.0)
        residual = abs(u1 / u2 - 1.0) if u2 != 0.0 else 0.0
        return _outcome_at_t(sys, model, concept, 1.0, 0, residual)

    frontier = compute_frontier(sys, model)
    u = _gains(sys, model, s1, s2, log_scale)
    ratio = 1.0 if equal_split else _ideal_ratio(sys, model, s1, s2, log_scale)
    _verify_ratio_decreasing(u, frontier)
    t, iterations, residual = _bisect_ratio(sys, model, u, ratio, frontier)
    return _outcome_at_t(sys, model, concept, t, iterations, residual)


def utilitarian(sys: SystemConfig, model: SharingModel) -> BargainingOutcome:
    """Utilitarian solution: minimize overall blocking over the frontier closure.

    With equal holding rates the optimum is known in closed form: full
    pooling when both providers benefit from it, otherwise the frontier
    endpoint where the less congested provider is pushed back to exactly
    its standalone blocking.  With unequal holding rates no closed form is
    available and a numeric minimization is performed and flagged.
    """
    frontier = compute_frontier(sys, model)
    if sys.mu1 == sys.mu2:
        if frontier.case is FrontierCase.BOTH_BENEFIT:
            t = 1.0
        elif frontier.case is FrontierCase.ONLY_P1_BENEFITS:
            t = 2.0 - frontier.thresholds[1]   # (1, x2_high)
        else:
            t = frontier.thresholds[1]         # (x1_high, 1)
        return _outcome_at_t(sys, model, Concept.US, t, 0, 0.0)

    t_lo, t_hi = frontier.t_interval()

    def neg_overall(t: float) -> float:
        return -blocking_normalized(sys, model, *sweep_xy(t)).b_overall

    ts = np.linspace(t_lo, t_hi, _GRID_POINTS)
    vals = np.array([neg_overall(float(t)) for t in ts])
    i = int(np.argmax(vals))
    a = float(ts[max(i - 1, 0)])
    b = float(ts[min(i + 1, len(ts) - 1)])
    t_star, _, iterations, width = _golden_max(neg_overall, a, b)
    return _outcome_at_t(sys, model, Concept.US, t_star,
                         iterations + len(ts), width,
                         numeric_fallback=True)


def log_variants(sys: SystemConfig, model: SharingModel,
                 concept: Concept) -> BargainingOutcome:
    """Logarithmic-utility variants of NBS, KSBS, and ES."""
    if concept is Concept.LOG_NBS:
        return _nash_impl(sys, model, concept, log_scale=True)
    if concept in (Concept.LOG_KSBS, Concept.LOG_ES):
        return _ratio_impl(sys, model, concept, log_scale=True)
    raise DomainError(f"{concept} is not a logarithmic variant")


def solve(sys: SystemConfig, model: SharingModel,
          concept: Concept) -> BargainingOutcome:
    """Dispatch a bargaining concept to its solver."""
    if concept is Concept.NBS:
        return nash(sys, model)
    if concept is Concept.KSBS:
        return kalai_smorodinsky(sys, model)
    if concept is Concept.ES:
        return egalitarian(sys, model)
    if concept is Concept.US:
        return utilitarian(sys, model)
    return log_variants(sys, model, concept)
