"""Scenario files: JSON documents describing a system to analyze.

A scenario names the two providers' server counts and holding rates, and
gives each provider's workload either as an arrival rate or as a target
standalone blocking probability (from which the offered load is recovered
by inverting the Erlang-B formula).  Optionally it carries a sharing
model, a sharing point, and simulation settings.

All probabilities are plain numbers in [0, 1]; percentage notation is
accepted only as a string with an explicit percent sign ("6%"), which
removes any factor-of-100 ambiguity.  Any parse or validation problem
rejects the whole file with a field-path (or line/column) diagnostic.

Example::

    {
      "system": {"n1": 100, "n2": 100,
                 "standalone_b1": "6%", "standalone_b2": 0.01,
                 "mu1": 1.0, "mu2": 1.0},
      "model": "bo",
      "point": {"k1": 100, "k2": 5.5},
      "sim": {"seed": 7, "replications": 10,
              "holding2": {"kind": "deterministic"}}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from .erlang import invert_erlang_b
from .errors import DomainError, ScenarioError
from .exact import SharingModel, SharingPoint, SystemConfig

if TYPE_CHECKING:  # pragma: no cover
    from .simulate import SimConfig

__all__ = ["Scenario", "load_scenario", "parse_scenario"]


@dataclass(frozen=True)
class Scenario:
    system: SystemConfig
    model: SharingModel | None = None
    point: SharingPoint | None = None
    sim: "SimConfig | None" = None


def _fail(path: str, message: str):
    raise ScenarioError(f"{path}: {message}")


def _require_keys(obj: dict, path: str, required=(), optional=()):
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            _fail(f"{path}.{key}", "unknown field")
    for key in required:
        if key not in obj:
            _fail(f"{path}.{key}", "missing required field")


def _number(obj: dict, path: str, key: str, kind=float):
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{path}.{key}", f"expected number, got {value!r}")
    return kind(value)


def _probability(obj: dict, path: str, key: str) -> float:
    """A probability: a number in [0, 1], or a string like '6%'."""
    value = obj[key]
    where = f"{path}.{key}"
    if isinstance(value, str):
        text = value.strip()
        if not text.endswith("%"):
            _fail(where, f"string values need an explicit percent suffix, got {value!r}")
        try:
            prob = float(text[:-1]) / 100.0
        except ValueError:
            _fail(where, f"cannot parse percentage {value!r}")
    elif isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(where, f"expected probability or percent string, got {value!r}")
    else:
        prob = float(value)
    if not 0.0 <= prob <= 1.0:
        _fail(where, f"probability {prob} outside [0, 1]")
    return prob


def _parse_system(obj, path="system") -> SystemConfig:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    _require_keys(obj, path, required=("n1", "n2", "mu1", "mu2"),
                  optional=("lambda1", "lambda2", "standalone_b1", "standalone_b2"))
    n1 = _number(obj, path, "n1", int)
    n2 = _number(obj, path, "n2", int)
    mu1 = _number(obj, path, "mu1")
    mu2 = _number(obj, path, "mu2")

    def workload(idx, servers, mu):
        rate_key, block_key = f"lambda{idx}", f"standalone_b{idx}"
        has_rate = rate_key in obj
        has_block = block_key in obj
        if has_rate == has_block:
            _fail(f"{path}", f"give exactly one of {rate_key} or {block_key}")
        if has_rate:
            return _number(obj, path, rate_key)
        target = _probability(obj, path, block_key)
        if not 0.0 < target < 1.0:
            _fail(f"{path}.{block_key}", "standalone blocking must lie strictly in (0, 1)")
        return invert_erlang_b(servers, target) * mu

    lam1 = workload(1, n1, mu1)
    lam2 = workload(2, n2, mu2)
    try:
        return SystemConfig(n1, n2, lam1, lam2, mu1, mu2)
    except DomainError as exc:
        _fail(path, str(exc))


def _parse_model(value, path="model") -> SharingModel:
    if value == "prob":
        return SharingModel.PROBABILISTIC
    if value == "bo":
        return SharingModel.BOUNDED_OVERFLOW
    _fail(path, f"expected 'prob' or 'bo', got {value!r}")


def _parse_point(obj, system: SystemConfig, path="point") -> SharingPoint:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    keys = set(obj)
    if keys == {"x1", "x2"}:
        x1 = _probability(obj, path, "x1")
        x2 = _probability(obj, path, "x2")
        return SharingPoint.probabilistic(x1, x2)
    if keys == {"k1", "k2"}:
        k1 = _number(obj, path, "k1")
        k2 = _number(obj, path, "k2")
        if not (0.0 <= k1 <= system.n1 and 0.0 <= k2 <= system.n2):
            _fail(path, f"caps ({k1}, {k2}) outside [0,{system.n1}] x [0,{system.n2}]")
        return SharingPoint.bounded_overflow(k1, k2)
    _fail(path, "expected exactly the fields x1,x2 (probabilistic) or k1,k2 (bounded overflow)")


def _parse_holding(obj, path):
    from .simulate import HoldingDist, HoldingKind

    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if "kind" not in obj:
        _fail(f"{path}.kind", "missing required field")
    kind = obj["kind"]
    if kind == HoldingKind.EXPONENTIAL.value:
        _require_keys(obj, path, required=("kind",))
        return HoldingDist.exponential()
    if kind == HoldingKind.DETERMINISTIC.value:
        _require_keys(obj, path, required=("kind",))
        return HoldingDist.deterministic()
    if kind == HoldingKind.HYPEREXPONENTIAL.value:
        _require_keys(obj, path, required=("kind", "p", "rate1", "rate2"))
        try:
            return HoldingDist.hyperexponential(
                _number(obj, path, "p"), _number(obj, path, "rate1"),
                _number(obj, path, "rate2"))
        except DomainError as exc:
            _fail(path, str(exc))
    _fail(f"{path}.kind",
          "expected 'exponential', 'deterministic', or 'hyperexponential'")


def _parse_sim(obj, path="sim") -> "SimConfig":
    # imported lazily so scenarios without simulation settings never pay
    # for the JIT toolchain import
    from .simulate import SimConfig

    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    _require_keys(obj, path, optional=(
        "seed", "warmup_arrivals", "measured_arrivals", "replications",
        "holding1", "holding2"))
    kwargs = {}
    for key in ("seed", "warmup_arrivals", "measured_arrivals", "replications"):
        if key in obj:
            kwargs[key] = _number(obj, path, key, int)
    for key in ("holding1", "holding2"):
        if key in obj:
            kwargs[key] = _parse_holding(obj[key], f"{path}.{key}")
    try:
        return SimConfig(**kwargs)
    except DomainError as exc:
        _fail(path, str(exc))


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario JSON text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("top level: expected an object")
    _require_keys(doc, "scenario", required=("system",),
                  optional=("model", "point", "sim"))
    system = _parse_system(doc["system"])
    model = _parse_model(doc["model"]) if "model" in doc else None
    point = _parse_point(doc["point"], system) if "point" in doc else None
    sim = _parse_sim(doc["sim"]) if "sim" in doc else None
    if model is not None and point is not None and point.model is not model:
        raise ScenarioError(
            "point: sharing point fields do not match the declared model "
            f"('{model.value}')")
    return Scenario(system=system, model=model, point=point, sim=sim)


def load_scenario(path: str | Path) -> Scenario:
    """Read and parse a scenario file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror or exc}") from exc
    return parse_scenario(text)
