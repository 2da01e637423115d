"""Reducible associative operations x * y = g^-1(g(x) + g(y)).

An operation is carried by its strictly increasing generator ``g``. The four
operations behind the built-in distribution families are available through
:func:`builtin`; user-defined generators are accepted directly by
:class:`AssocOp` and are certified numerically before a distribution may use
them.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError, RangeError

__all__ = [
    "BUILTIN_IDS",
    "AssocOp",
    "AxiomReport",
    "SupportInterval",
    "builtin",
    "certification_grid",
    "certify_axioms",
    "combine",
    "g_prime_fallback",
    "op_from_json",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]

BUILTIN_IDS = ("addition", "multiplication", "shifted_multiplication", "neg_quadratic")


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _unwrap(arr: np.ndarray, scalar: bool):
    return float(arr) if scalar else arr


@dataclass(frozen=True)
class SupportInterval:
    """Interval of the real line with independently open or closed ends."""

    lower: float
    upper: float
    lower_closed: bool = False
    upper_closed: bool = False

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise DomainError("interval endpoints must not be NaN")
        if not self.lower < self.upper:
            raise DomainError(f"empty interval ({self.lower}, {self.upper})")
        # infinite ends are always open
        if math.isinf(self.lower) and self.lower_closed:
            object.__setattr__(self, "lower_closed", False)
        if math.isinf(self.upper) and self.upper_closed:
            object.__setattr__(self, "upper_closed", False)

    def contains(self, x):
        arr, scalar = _as_array(x)
        lo = arr >= self.lower if self.lower_closed else arr > self.lower
        hi = arr <= self.upper if self.upper_closed else arr < self.upper
        out = lo & hi
        return bool(out) if scalar else out

    def interior_contains(self, x):
        arr, scalar = _as_array(x)
        out = (arr > self.lower) & (arr < self.upper)
        return bool(out) if scalar else out

    def __str__(self) -> str:
        left = "[" if self.lower_closed else "("
        right = "]" if self.upper_closed else ")"
        return f"{left}{self.lower:g}, {self.upper:g}{right}"


@dataclass(frozen=True)
class AssocOp:
    """Associative operation generated by ``g`` on the interval ``domain``.

    ``g`` must be continuous and strictly increasing on ``domain`` and vanish
    at ``identity``. ``g_prime`` is optional; without it derivatives come from
    :func:`g_prime_fallback`. ``certified`` marks operations whose axioms
    have already been checked (the built-ins and their rescalings).
    """

    name: str
    g: ArrayFn
    g_inv: ArrayFn
    identity: float
    domain: SupportInterval
    g_prime: ArrayFn | None = None
    certified: bool = field(default=False, compare=False)
    scale: float = 1.0

    def __post_init__(self):
        if not self.domain.contains(self.identity):
            raise DomainError(f"identity {self.identity} outside {self.domain}")
        if self.scale <= 0:
            raise DomainError("generator scale must be positive")

    # generator helpers -----------------------------------------------------

    @property
    def image(self) -> tuple[float, float]:
        """Endpoints of g over the domain (limits at infinite ends)."""
        ends = []
        for end, fallback in ((self.domain.lower, -math.inf), (self.domain.upper, math.inf)):
            with np.errstate(all="ignore"):
                val = float(self.g(np.asarray(end, dtype=float)))
            ends.append(fallback if math.isnan(val) else val)
        return ends[0], ends[1]

    def in_image(self, s):
        lo, hi = self.image
        arr = np.asarray(s, dtype=float)
        ok_lo = arr >= lo if self.domain.lower_closed else arr > lo
        ok_hi = arr <= hi if self.domain.upper_closed else arr < hi
        # the domain may be open at an end where g is infinite (log at 0)
        if math.isinf(lo):
            ok_lo = arr > lo
        if math.isinf(hi):
            ok_hi = arr < hi
        return ok_lo & ok_hi

    def derivative(self, x):
        """g'(x), analytic when available."""
        arr, scalar = _as_array(x)
        if self.g_prime is not None:
            return _unwrap(np.asarray(self.g_prime(arr), dtype=float), scalar)
        flat = np.array([g_prime_fallback(self, xi) for xi in arr.ravel()])
        return _unwrap(flat.reshape(arr.shape), scalar)

    def combine(self, x, y):
        return combine(self, x, y)

    def scaled(self, alpha: float) -> AssocOp:
        """Same operation generated by ``alpha * g``."""
        if not alpha > 0:
            raise DomainError("scale factor must be positive")
        g, g_inv, gp = self.g, self.g_inv, self.g_prime
        return dataclasses.replace(
            self,
            g=lambda x: alpha * g(x),
            g_inv=lambda s: g_inv(s / alpha),
            g_prime=None if gp is None else (lambda x: alpha * gp(x)),
            scale=self.scale * alpha,
        )

    def to_json(self) -> dict[str, Any]:
        if self.name not in BUILTIN_IDS:
            raise DomainError("custom operations are not serializable")
        out: dict[str, Any] = {"op": self.name}
        if self.domain != _builtin_domain(self.name):
            out["upper"] = self.domain.upper
        if self.scale != 1.0:
            out["scale"] = self.scale
        return out


def combine(op: AssocOp, x, y):
    """x * y = g^-1(g(x) + g(y)), elementwise."""
    xa, xs = _as_array(x)
    ya, ys = _as_array(y)
    if not np.all(op.domain.contains(xa)) or not np.all(op.domain.contains(ya)):
        raise DomainError(f"argument outside {op.domain}")
    gx = np.asarray(op.g(xa), dtype=float)
    gy = np.asarray(op.g(ya), dtype=float)
    s = gx + gy
    if not np.all(op.in_image(s)):
        raise RangeError(f"combined point leaves {op.domain}")
    with np.errstate(all="ignore"):
        out = np.asarray(op.g_inv(s), dtype=float)
    # the identity is exact, not a round trip through g and g^-1
    out = np.where(ya == op.identity, xa, out)
    out = np.where(xa == op.identity, ya, out)
    return _unwrap(out, xs and ys)


def g_prime_fallback(op: AssocOp, x: float) -> float:
    """Finite-difference derivative of the generator at ``x``.

    Central difference with step max(1e-6, 1e-6 |x|); one-sided when one
    neighbour falls outside the domain.
    """
    x = float(x)
    if not op.domain.contains(x):
        raise DomainError(f"{x} outside {op.domain}")
    h = max(1e-6, 1e-6 * abs(x))
    left = op.domain.contains(x - h)
    right = op.domain.contains(x + h)
    g = op.g
    if left and right:
        d = (float(g(np.float64(x + h))) - float(g(np.float64(x - h)))) / (2 * h)
    elif right:
        d = (float(g(np.float64(x + h))) - float(g(np.float64(x)))) / h
    elif left:
        d = (float(g(np.float64(x))) - float(g(np.float64(x - h)))) / h
    else:
        raise DomainError(f"no difference stencil fits at {x}")
    return d


# certification ---------------------------------------------------------------


@dataclass(frozen=True)
class AxiomReport:
    associativity: float
    identity: float
    commutativity: float
    monotone: bool
    injective: bool
    n_triples: int
    n_skipped: int

    def passed(self, tol: float = 1e-9) -> bool:
        return (
            self.monotone
            and self.injective
            and self.associativity <= tol
            and self.identity <= tol
            and self.commutativity <= tol
        )


def certification_grid(domain: SupportInterval, identity: float, n: int) -> np.ndarray:
    """Interior grid: geometric towards infinite ends, uniform otherwise."""
    lo, hi = domain.lower, domain.upper
    if math.isinf(lo) and math.isinf(hi):
        # odd integers about the identity keep addition exact
        return identity + np.linspace(-(n - 1), n - 1, n)
    if math.isinf(hi):
        return lo + np.geomspace(1e-2, 1e2, n)
    if math.isinf(lo):
        return hi - np.geomspace(1e-2, 1e2, n)[::-1]
    return lo + (hi - lo) * np.arange(1, n + 1) / (n + 1)


def _rel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return np.abs(a - b) / scale


def certify_axioms(op: AssocOp, grid_size: int) -> AxiomReport:
    """Check associativity, identity, commutativity and monotonicity on a grid.

    Residuals are relative, |lhs - rhs| / max(1, |lhs|, |rhs|). Triples whose
    combinations leave the domain are skipped and counted.
    """
    if grid_size < 3:
        raise DomainError("grid_size must be at least 3")
    pts = certification_grid(op.domain, op.identity, grid_size)
    pts = pts[op.domain.interior_contains(pts)]
    if pts.size < 3:
        raise DomainError(f"degenerate domain {op.domain}")

    gp = np.asarray(op.g(pts), dtype=float)
    monotone = bool(np.all(np.diff(gp) > 0))
    if not monotone:
        # the image of g, and with it every combine, is meaningless
        return AxiomReport(math.inf, math.inf, math.inf, False, False, 0, grid_size**3)

    x, y, z = np.meshgrid(pts, pts, pts, indexing="ij")
    x, y, z = x.ravel(), y.ravel(), z.ravel()
    gx, gy, gz = (np.asarray(op.g(v), dtype=float) for v in (x, y, z))
    ok = op.in_image(gx + gy) & op.in_image(gy + gz) & op.in_image(gx + gy + gz)
    x, y, z = x[ok], y[ok], z[ok]
    n_skipped = int((~ok).sum())

    if x.size:
        left = combine(op, combine(op, x, y), z)
        right = combine(op, x, combine(op, y, z))
        assoc = float(_rel(left, right).max())
        comm = float(_rel(combine(op, x, y), combine(op, y, x)).max())
    else:
        assoc = comm = 0.0
    ident = float(_rel(combine(op, pts, op.identity), pts).max())

    # reducibility surrogate: y -> x * y stays injective along the grid
    injective = True
    for xi in pts:
        ys = pts[op.in_image(op.g(xi) + gp)]
        if ys.size > 1:
            vals = combine(op, np.full(ys.shape, xi), ys)
            injective &= bool(np.all(np.diff(vals) > 0))

    return AxiomReport(assoc, ident, comm, monotone, injective, int(x.size), n_skipped)


# built-in catalog --------------------------------------------------------------


def _builtin_domain(op_id: str) -> SupportInterval:
    if op_id == "addition":
        return SupportInterval(-math.inf, math.inf)
    if op_id == "multiplication":
        return SupportInterval(0.0, math.inf)
    if op_id == "shifted_multiplication":
        return SupportInterval(-1.0, math.inf)
    if op_id == "neg_quadratic":
        return SupportInterval(-math.inf, 0.0, upper_closed=True)
    raise DomainError(f"unknown operation {op_id!r}; expected one of {BUILTIN_IDS}")


def _neg_sqrt(s):
    return -np.sqrt(-s)


_GENERATORS: dict[str, tuple[ArrayFn, ArrayFn, ArrayFn, float]] = {
    "addition": (lambda x: x * 1.0, lambda s: s * 1.0, np.ones_like, 0.0),
    "multiplication": (np.log, np.exp, np.reciprocal, 1.0),
    "shifted_multiplication": (np.log1p, np.expm1, lambda x: 1.0 / (1.0 + x), 0.0),
    # negative root keeps (-inf, 0] closed under the operation
    "neg_quadratic": (lambda x: -np.square(x), _neg_sqrt, lambda x: -2.0 * x, 0.0),
}


def builtin(op_id: str, upper: float | None = None) -> AssocOp:
    """One of the four catalog operations.

    ``upper`` optionally truncates the interval to end (closed) at ``upper``.
    """
    domain = _builtin_domain(op_id)
    if upper is not None:
        upper = float(upper)
        if not domain.lower < upper <= domain.upper:
            raise DomainError(f"upper={upper} outside {domain}")
        domain = SupportInterval(domain.lower, upper, domain.lower_closed, True)
    g, g_inv, gp, ident = _GENERATORS[op_id]
    return AssocOp(op_id, g, g_inv, ident, domain, gp, certified=True)


def op_from_json(obj: str | dict[str, Any]) -> AssocOp:
    if isinstance(obj, str):
        obj = {"op": obj}
    if not isinstance(obj, dict) or "op" not in obj:
        raise DomainError("operation spec must be an object with an 'op' key")
    if obj["op"] == "custom":
        raise DomainError("custom generators are only available programmatically")
    op = builtin(obj["op"], obj.get("upper"))
    if "scale" in obj:
        op = op.scaled(float(obj["scale"]))
    return op
