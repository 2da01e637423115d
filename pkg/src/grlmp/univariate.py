"""Univariate family F(x) = exp(c (g(x) - g(b))) and its truncated variant."""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from typing import Any

import numpy as np

from .assoc_op import AssocOp, certify_axioms, combine
from .errors import DomainError

__all__ = [
    "EXAMPLES",
    "GrlmpDistribution",
    "GrlmpResidual",
    "TruncatedGrlmp",
    "grlmp_residual",
    "open_uniforms",
    "require_certified",
    "standard_grid",
]


def require_certified(op: AssocOp) -> None:
    if op.certified:
        return
    report = certify_axioms(op, 10)
    if not report.passed():
        raise DomainError(f"operation {op.name!r} failed axiom certification: {report}")


def open_uniforms(rng: np.random.Generator, size) -> np.ndarray:
    """Uniforms strictly inside (0, 1).

    Draws are midpoints of the 2**53 equal cells of [0, 1), so neither 0
    nor 1 can occur.
    """
    k = rng.integers(0, 2**53, size=size, dtype=np.int64)
    return (k + 0.5) * 2.0**-53


def _check_n(n: int) -> None:
    if int(n) != n or n < 1:
        raise DomainError("n must be >= 1")


@dataclass(frozen=True)
class GrlmpDistribution:
    """Distribution with F(x) = exp(c (g(x) - g(b))) on (inf A, b).

    ``c`` is the rate in generator space and ``b`` the finite upper endpoint.
    """

    op: AssocOp
    c: float
    b: float

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise DomainError(f"rate c must be positive and finite, got {self.c}")
        if not self.op.domain.contains(self.b):
            raise DomainError(f"b={self.b} outside {self.op.domain}")
        gb = float(self.op.g(np.float64(self.b)))
        if not math.isfinite(gb):
            raise DomainError(f"g(b) is not finite at b={self.b}")
        require_certified(self.op)

    @property
    def lower(self) -> float:
        return self.op.domain.lower

    @property
    def g_b(self) -> float:
        return float(self.op.g(np.float64(self.b)))

    def _inside(self, x: np.ndarray) -> np.ndarray:
        return (x > self.lower) & (x < self.b)

    def log_cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= self.b, 0.0, -np.inf)
        inside = self._inside(x)
        out[inside] = self.c * (np.asarray(self.op.g(x[inside])) - self.g_b)
        return out if out.ndim else float(out)

    def cdf(self, x):
        out = np.exp(self.log_cdf(x))
        return out if np.ndim(out) else float(out)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = self._inside(x)
        xi = x[inside]
        out[inside] = self.c * np.asarray(self.op.derivative(xi)) * np.exp(
            self.c * (np.asarray(self.op.g(xi)) - self.g_b)
        )
        return out if out.ndim else float(out)

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(~(p > 0)) or np.any(p > 1):
            raise DomainError("p out of range")
        with np.errstate(all="ignore"):
            out = np.asarray(self.op.g_inv(self.g_b + np.log(p) / self.c), dtype=float)
        out = np.where(p == 1.0, self.b, out)
        return out if out.ndim else float(out)

    def reversed_hazard(self, x):
        """f(x) / F(x), which equals c g'(x) on the open support."""
        x = np.asarray(x, dtype=float)
        if not np.all(self._inside(x)):
            raise DomainError(f"reversed hazard needs x in ({self.lower}, {self.b})")
        out = self.c * np.asarray(self.op.derivative(x), dtype=float)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n draws by inverse transform; uniforms come from :func:`open_uniforms`."""
        _check_n(n)
        return self.quantile(open_uniforms(rng, n))

    def exponentiate(self, alpha: float) -> GrlmpDistribution:
        """The law with CDF F**alpha; its reversed hazard is alpha times ours."""
        if not alpha > 0:
            raise DomainError("alpha must be positive")
        return dataclasses.replace(self, c=alpha * self.c)

    def truncated(self) -> TruncatedGrlmp:
        return TruncatedGrlmp(self)

    def to_json(self) -> dict[str, Any]:
        return {"family": "univariate", "op": self.op.to_json(), "c": self.c, "b": self.b}


@dataclass(frozen=True)
class TruncatedGrlmp:
    """``base`` restricted to [e, b): the mass below the identity e sits at e."""

    base: GrlmpDistribution

    def __post_init__(self):
        op = self.base.op
        if not op.identity > op.domain.lower:
            raise DomainError("identity must lie above the lower end of the interval")
        if not op.identity < self.base.b:
            raise DomainError("b must exceed the identity element")

    @property
    def identity(self) -> float:
        return self.base.op.identity

    @property
    def atom_mass(self) -> float:
        return math.exp(-self.base.c * self.base.g_b)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < self.identity, 0.0, self.base.cdf(np.maximum(x, self.identity)))
        out = np.where(x == self.identity, self.atom_mass, out)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        _check_n(n)
        u = open_uniforms(rng, n)
        out = np.full(n, self.identity)
        cont = u > self.atom_mass
        out[cont] = self.base.quantile(u[cont])
        return out

    def to_json(self) -> dict[str, Any]:
        return {**self.base.to_json(), "truncated": True}


@dataclass(frozen=True)
class GrlmpResidual:
    max_abs: float
    argmax_point: tuple[float, float]


def _validated_pairs(d: GrlmpDistribution, grid: Iterable) -> tuple[np.ndarray, np.ndarray]:
    pairs = np.asarray(list(grid), dtype=float).reshape(-1, 2)
    x, t = pairs[:, 0], pairs[:, 1]
    e = d.op.identity
    if not e > d.lower:
        raise DomainError("identity must exceed the lower end of the support")
    bad = ~((x > d.lower) & (x < d.b) & (t >= e) & (t <= d.b))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"pair {tuple(pairs[i])} violates lower < x < b, e <= t <= b")
    xt = combine(d.op, x, t)
    if np.any(xt > d.b):
        i = int(np.flatnonzero(xt > d.b)[0])
        raise DomainError(f"pair {tuple(pairs[i])} has x * t > b")
    return x, t


def standard_grid(d: GrlmpDistribution, n: int = 30) -> list[tuple[float, float]]:
    """n x n valid (x, t) pairs for the functional-equation residual.

    t runs over [e, b]; for each t, x is placed at generator distances
    s_j in (0, 5/c] below g(b) - g(t), so x * t < b always.
    """
    op, e, b = d.op, d.op.identity, d.b
    ts = np.linspace(e, b, n)
    g_lo = op.image[0]
    pairs = []
    for t in ts:
        top = d.g_b - float(op.g(np.float64(t)))
        s = np.linspace(1.0, n, n) * (5.0 / d.c) / n
        if math.isfinite(g_lo):
            s = np.minimum(s, 0.999 * (top - g_lo))
        xs = np.asarray(op.g_inv(top - s), dtype=float)
        xs = xs[(xs > d.lower) & (xs < b)]
        pairs.extend((float(x), float(t)) for x in xs)
    return pairs


def grlmp_residual(
    d: GrlmpDistribution,
    grid: Iterable,
    cdf: Callable | None = None,
    cdf_combined: Callable | None = None,
) -> GrlmpResidual:
    """Largest |F(x) F(t) - F(x * t) F(e)| over the grid.

    ``cdf`` replaces F everywhere; ``cdf_combined`` replaces it only at x * t
    (a hook for negative controls). Pairs outside the constraint set raise.
    """
    x, t = _validated_pairs(d, grid)
    F = cdf or d.cdf
    Fxt = cdf_combined or F
    e = d.op.identity
    lhs = np.asarray(F(x)) * np.asarray(F(t))
    rhs = np.asarray(Fxt(combine(d.op, x, t))) * F(e)
    res = np.abs(lhs - rhs)
    i = int(np.argmax(res))
    return GrlmpResidual(float(res[i]), (float(x[i]), float(t[i])))


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    op_id: str
    operation: str
    identity: float
    generator: str
    cdf: str
    constraints: str
    default_b: float

    def build(self, c: float = 1.0, b: float | None = None) -> GrlmpDistribution:
        from .assoc_op import builtin

        return GrlmpDistribution(builtin(self.op_id), c, self.default_b if b is None else b)


EXAMPLES = (
    CatalogEntry(
        "reversed generalized Pareto (type 3 extreme value)", "addition", "x + y", 0.0,
        "g(x) = x", "exp[c(x − b)]", "x < b, c > 0", 0.0,
    ),
    CatalogEntry(
        "power function", "multiplication", "xy", 1.0,
        "g(x) = log x", "(x/b)^c", "0 ≤ x < b, c > 0", 2.0,
    ),
    CatalogEntry(
        "power function on (−1, b)", "shifted_multiplication", "x + y + xy", 0.0,
        "g(x) = log(x + 1)", "((x+1)/(b+1))^c", "−1 ≤ x < b, c > 0", 1.0,
    ),
    CatalogEntry(
        "reflected Weibull", "neg_quadratic", "−√(x² + y²)", 0.0,
        "g(x) = −x²", "e^{−cx²}", "x < 0, c > 0", 0.0,
    ),
)
