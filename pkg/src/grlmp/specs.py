"""JSON distribution specs.

    {"family": "univariate", "op": {"op": "multiplication"}, "c": 1, "b": 2}
    {"family": "univariate", ..., "truncated": true}
    {"family": "bivariate", "op": ..., "lambda1": 1, "lambda2": 1, "lambda12": 1, "b": 0}

``op`` may also be the bare builtin id. An optional ``test_hook`` object is
carried through untouched for verification negative controls.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Union

from .assoc_op import op_from_json
from .bivariate import BivariateGrlmp
from .errors import DomainError
from .univariate import GrlmpDistribution, TruncatedGrlmp

Distribution = Union[GrlmpDistribution, TruncatedGrlmp, BivariateGrlmp]

_KEYS = {
    "univariate": {"family", "op", "c", "b", "truncated", "test_hook"},
    "bivariate": {"family", "op", "lambda1", "lambda2", "lambda12", "b", "truncated", "test_hook"},
}
_REQUIRED = {
    "univariate": {"op", "c", "b"},
    "bivariate": {"op", "lambda1", "lambda2", "lambda12", "b"},
}


def _number(spec: dict, key: str) -> float:
    val = spec[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise DomainError(f"{key!r} must be a finite number")
    return float(val)


def validate(spec: Any) -> dict[str, Any]:
    if not isinstance(spec, dict):
        raise DomainError("spec must be a JSON object")
    family = spec.get("family")
    if family not in _KEYS:
        raise DomainError("spec 'family' must be 'univariate' or 'bivariate'")
    unknown = set(spec) - _KEYS[family]
    if unknown:
        raise DomainError(f"unknown spec keys: {sorted(unknown)}")
    missing = _REQUIRED[family] - set(spec)
    if missing:
        raise DomainError(f"missing spec keys: {sorted(missing)}")
    if not isinstance(spec.get("truncated", False), bool):
        raise DomainError("'truncated' must be a boolean")
    return spec


def from_json(spec: Any) -> Distribution:
    spec = validate(spec)
    op = op_from_json(spec["op"])
    if spec["family"] == "univariate":
        d = GrlmpDistribution(op, _number(spec, "c"), _number(spec, "b"))
        return TruncatedGrlmp(d) if spec.get("truncated") else d
    return BivariateGrlmp(
        op,
        _number(spec, "lambda1"),
        _number(spec, "lambda2"),
        _number(spec, "lambda12"),
        _number(spec, "b"),
    )


def load(path: str | Path) -> tuple[dict[str, Any], Distribution]:
    try:
        spec = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON in {path}: {exc.msg}") from exc
    return spec, from_json(spec)
