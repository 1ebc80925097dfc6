"""Single-system Erlang-B kernel.

Blocking probability of an M/M/N/N loss system, its inverse (offered load
from a target blocking probability), and the square-root staffing (QED)
approximation for a single provider.  Everything here is a pure function of
its arguments and safe to call concurrently.
"""

from __future__ import annotations

import math

from .errors import BracketError, DomainError

__all__ = [
    "erlang_b",
    "invert_erlang_b",
    "erlang_b_qed",
    "normal_pdf",
    "normal_cdf",
    "normal_sf",
    "mills_ratio",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Beyond |z| = 40 the normal cdf saturates to 0/1 at double precision.
_CDF_CLIP = 40.0


def normal_pdf(z: float) -> float:
    """Standard normal density."""
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def normal_cdf(z: float) -> float:
    """Standard normal cdf via erfc, avoiding cancellation in the tails."""
    z = min(max(z, -_CDF_CLIP), _CDF_CLIP)
    return 0.5 * math.erfc(-z / _SQRT2)


def normal_sf(z: float) -> float:
    """Upper tail 1 - cdf(z), computed directly from erfc."""
    z = min(max(z, -_CDF_CLIP), _CDF_CLIP)
    return 0.5 * math.erfc(z / _SQRT2)


def mills_ratio(z: float) -> float:
    """pdf(z) / sf(z), stable for large positive z where both factors underflow."""
    if z < 30.0:
        return normal_pdf(z) / normal_sf(z)
    # Asymptotic expansion of the reciprocal Mills ratio; relative error
    # below 1e-10 for z >= 30.
    zi2 = 1.0 / (z * z)
    return z / (1.0 - zi2 * (1.0 - zi2 * (3.0 - 15.0 * zi2)))


def erlang_b(servers: int, load: float) -> float:
    """Blocking probability E(N, a) of an M/M/N/N system.

    Uses the standard recurrence E(0, a) = 1,
    E(n, a) = a E(n-1, a) / (n + a E(n-1, a)), which is numerically stable
    for server counts well beyond 1e5 (the direct factorial sum overflows
    near N = 170).

    Args:
        servers: number of servers N, a nonnegative integer.
        load: offered load a in Erlangs, strictly positive.
    """
    if load <= 0.0 or not math.isfinite(load):
        raise DomainError(f"offered load must be positive and finite, got {load}")
    n = int(servers)
    if n != servers or n < 0:
        raise DomainError(f"server count must be a nonnegative integer, got {servers}")
    e = 1.0
    for k in range(1, n + 1):
        e = load * e / (k + load * e)
    return e


def invert_erlang_b(servers: int, target: float, rel_tol: float = 1e-12,
                    max_iter: int = 200) -> float:
    """Offered load a such that erlang_b(servers, a) equals `target`.

    Exploits strict monotonicity of E(N, .) in the load: bisection on
    [1e-9, a_hi], with a_hi doubled until it over-shoots the target.
    Terminates when the blocking value matches to `rel_tol` relative error.

    Args:
        servers: number of servers, at least 1.
        target: desired blocking probability, strictly inside (0, 1).
    """
    if not (0.0 < target < 1.0):
        raise DomainError(f"target blocking must lie in (0, 1), got {target}")
    n = int(servers)
    if n != servers or n < 1:
        raise DomainError(f"server count must be a positive integer, got {servers}")

    lo = 1e-9
    hi = max(1.0, float(n))
    guard = 0
    while erlang_b(n, hi) <= target:
        hi *= 2.0
        guard += 1
        if guard > 200:  # pragma: no cover - E(N, a) -> 1 as a -> inf
            raise BracketError("could not bracket the target blocking probability")

    load = 0.5 * (lo + hi)
    for _ in range(max_iter):
        value = erlang_b(n, load)
        if abs(value - target) <= rel_tol * target:
            break
        if value < target:
            lo = load
        else:
            hi = load
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        load = mid
    return load


def erlang_b_qed(servers: int, margin: float) -> float:
    """Square-root staffing approximation of the Erlang-B blocking probability.

    For a system staffed at a = N + margin * sqrt(N), the blocking
    probability behaves like pdf(margin) / (sqrt(N) (1 - cdf(margin)))
    as N grows.  Exact scaling: quadrupling N at fixed margin halves the value.
    """
    n = int(servers)
    if n != servers or n < 1:
        raise DomainError(f"server count must be a positive integer, got {servers}")
    return mills_ratio(margin) / math.sqrt(n)
