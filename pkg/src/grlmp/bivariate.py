"""Bivariate family

    F(x1, x2) = exp(l1 s1 + l2 s2 + l12 min(s1, s2)),   s_i = g(x_i) - g(b),

the law of X1 = max(U, W), X2 = max(V, W) for independent U, V, W from the
univariate family with rates l1, l2, l12. The common-shock term uses the
smaller of s1, s2: W must lie below both coordinates. Writing it with the
larger one gives a function that still solves the diagonal functional
equation but assigns negative mass to small rectangles near (b, b).

Also here: the split of the truncated law into atoms, a diagonal singular
part and an absolutely continuous part.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import assoc_op
from .assoc_op import AssocOp, combine
from .errors import DomainError, QuadratureError
from .univariate import GrlmpDistribution, open_uniforms, require_certified

__all__ = [
    "BivariateGrlmp",
    "DecompositionReport",
    "QuadratureConfig",
    "ResidualReport",
    "BIVARIATE_CATALOG",
    "decompose",
    "direct_extension_residual",
    "gbrlmp_residual",
    "standard_triples",
    "table1_catalog",
]


@dataclass(frozen=True)
class BivariateGrlmp:
    op: AssocOp
    lambda1: float
    lambda2: float
    lambda12: float
    b: float

    def __post_init__(self):
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise DomainError("lambda1 and lambda2 must be positive")
        if not self.lambda12 >= 0:
            raise DomainError("lambda12 must be nonnegative")
        if not all(math.isfinite(v) for v in (self.lambda1, self.lambda2, self.lambda12)):
            raise DomainError("rates must be finite")
        if not self.op.domain.contains(self.b):
            raise DomainError(f"b={self.b} outside {self.op.domain}")
        if not math.isfinite(self.g_b):
            raise DomainError(f"g(b) is not finite at b={self.b}")
        require_certified(self.op)

    @property
    def k(self) -> float:
        return self.lambda1 + self.lambda2 + self.lambda12

    @property
    def lower(self) -> float:
        return self.op.domain.lower

    @property
    def g_b(self) -> float:
        return float(self.op.g(np.float64(self.b)))

    def _s(self, x: np.ndarray) -> np.ndarray:
        """g(min(x, b)) - g(b), with -inf at or below the lower end."""
        x = np.minimum(x, self.b)
        out = np.full(x.shape, -np.inf)
        ok = x > self.lower
        out[ok] = np.asarray(self.op.g(x[ok]), dtype=float) - self.g_b
        return out

    def joint_cdf(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        s1, s2 = self._s(np.array(x1)), self._s(np.array(x2))
        with np.errstate(invalid="ignore"):
            expo = self.lambda1 * s1 + self.lambda2 * s2 + self.lambda12 * np.minimum(s1, s2)
        out = np.where(np.isneginf(s1) | np.isneginf(s2), 0.0, np.exp(expo))
        return out if out.ndim else float(out)

    def marginal(self, which: int) -> GrlmpDistribution:
        if which == 1:
            c = self.lambda1 + self.lambda12
        elif which == 2:
            c = self.lambda2 + self.lambda12
        else:
            raise DomainError("which must be 1 or 2")
        return GrlmpDistribution(self.op, c, self.b)

    def max_distribution(self) -> GrlmpDistribution:
        """Law of max(X1, X2): same family with rate l1 + l2 + l12."""
        return GrlmpDistribution(self.op, self.k, self.b)

    def tie_probability(self) -> float:
        return self.lambda12 / self.k

    def is_independent(self) -> bool:
        return self.lambda12 == 0

    def sample_pairs(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """(n, 2) array of (max(U, W), max(V, W)).

        U, V, W are independent with rates l1, l2, l12. When l12 == 0 there
        is no W and the pair is (U, V). Ties copy W into both columns, so
        they are bit-identical.
        """
        if int(n) != n or n < 1:
            raise DomainError("n must be >= 1")
        u = open_uniforms(rng, (n, 3))
        U = GrlmpDistribution(self.op, self.lambda1, self.b).quantile(u[:, 0])
        V = GrlmpDistribution(self.op, self.lambda2, self.b).quantile(u[:, 1])
        if self.lambda12 > 0:
            W = GrlmpDistribution(self.op, self.lambda12, self.b).quantile(u[:, 2])
            U, V = np.maximum(U, W), np.maximum(V, W)
        return np.column_stack([U, V])

    def _ac_density_s(self, s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
        """Density of (g(X1) - g(b), g(X2) - g(b)) off the diagonal."""
        l1, l2, l12 = self.lambda1, self.lambda2, self.lambda12
        below = s1 < s2
        return np.where(
            below,
            (l1 + l12) * l2 * np.exp((l1 + l12) * s1 + l2 * s2),
            (l2 + l12) * l1 * np.exp((l2 + l12) * s2 + l1 * s1),
        )

    def ac_density(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        inside = (x1 > self.lower) & (x1 < self.b) & (x2 > self.lower) & (x2 < self.b)
        if not np.all(inside):
            raise DomainError("ac_density needs both coordinates in the open support")
        if np.any(x1 == x2):
            raise DomainError("ac_density is undefined on the diagonal")
        s1 = np.asarray(self.op.g(x1), dtype=float) - self.g_b
        s2 = np.asarray(self.op.g(x2), dtype=float) - self.g_b
        dens = self._ac_density_s(s1, s2)
        out = dens * np.asarray(self.op.derivative(x1)) * np.asarray(self.op.derivative(x2))
        return out if out.ndim else float(out)

    def to_json(self) -> dict[str, Any]:
        return {
            "family": "bivariate",
            "op": self.op.to_json(),
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "lambda12": self.lambda12,
            "b": self.b,
        }


# functional-equation residuals ----------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    max_abs: float
    argmax_point: tuple[float, ...]


def _check_increment_domain(d: BivariateGrlmp, xs: np.ndarray, ts: np.ndarray) -> None:
    e = d.op.identity
    if not e > d.lower:
        raise DomainError("identity must exceed the lower end of the support")
    ok = np.all((xs > d.lower) & (xs < d.b), axis=1) & np.all((ts >= e) & (ts <= d.b), axis=1)
    if not ok.all():
        i = int(np.flatnonzero(~ok)[0])
        raise DomainError(f"point {i} violates lower < x_i < b, e <= t_i <= b")
    comb = combine(d.op, xs, ts)
    over = np.any(comb > d.b, axis=1)
    if over.any():
        raise DomainError(f"point {int(np.flatnonzero(over)[0])} has x_i * t_i > b")


def _report(res: np.ndarray, pts: np.ndarray) -> ResidualReport:
    i = int(np.argmax(res))
    return ResidualReport(float(res[i]), tuple(float(v) for v in pts[i]))


def direct_extension_residual(
    d: BivariateGrlmp,
    grid: Iterable,
    cdf: Callable | None = None,
    cdf_combined: Callable | None = None,
) -> ResidualReport:
    """Largest |F(x1*t1, x2*t2) F(e, e) - F(x1, x2) F(t1, t2)| over (x1, x2, t1, t2)."""
    pts = np.asarray(list(grid), dtype=float).reshape(-1, 4)
    xs, ts = pts[:, :2], pts[:, 2:]
    _check_increment_domain(d, xs, ts)
    F = cdf or d.joint_cdf
    Fc = cdf_combined or F
    e = d.op.identity
    comb = combine(d.op, xs, ts)
    lhs = np.asarray(Fc(comb[:, 0], comb[:, 1])) * F(e, e)
    rhs = np.asarray(F(xs[:, 0], xs[:, 1])) * np.asarray(F(ts[:, 0], ts[:, 1]))
    return _report(np.abs(lhs - rhs), pts)


def gbrlmp_residual(
    d: BivariateGrlmp,
    grid: Iterable,
    cdf: Callable | None = None,
    cdf_combined: Callable | None = None,
) -> ResidualReport:
    """Largest |F(x1*t, x2*t) F(e, e) - F(x1, x2) F(t, t)| over (x1, x2, t)."""
    pts = np.asarray(list(grid), dtype=float).reshape(-1, 3)
    quad = np.column_stack([pts[:, 0], pts[:, 1], pts[:, 2], pts[:, 2]])
    rep = direct_extension_residual(d, quad, cdf, cdf_combined)
    return ResidualReport(rep.max_abs, rep.argmax_point[:3])


def standard_triples(d: BivariateGrlmp, n: int = 8) -> list[tuple[float, float, float]]:
    """Valid (x1, x2, t) triples: n values of t on [e, b], an n x n block of x each."""
    op, e = d.op, d.op.identity
    g_lo = op.image[0]
    out = []
    for t in np.linspace(e, d.b, n):
        top = d.g_b - float(op.g(np.float64(t)))
        s = np.linspace(1.0, n, n) * (4.0 / d.k) / n
        if math.isfinite(g_lo):
            s = np.minimum(s, 0.999 * (top - g_lo))
        xs = np.asarray(op.g_inv(top - s), dtype=float)
        xs = xs[(xs > d.lower) & (xs < d.b)]
        out.extend((float(a), float(c), float(t)) for a in xs for c in xs)
    return out


# decomposition of the truncated law -------------------------------------------


@dataclass(frozen=True)
class QuadratureConfig:
    nodes: int = 64
    tol: float = 1e-10


@dataclass
class DecompositionReport:
    """Masses of the truncated law on [e, b)^2.

    ``atom_masses`` is keyed by location: (e, e) is the point atom; (e, b)
    and (b, e) carry the masses of the boundary segments {x1 = e < x2} and
    {x2 = e < x1}.
    """

    atom_masses: dict[tuple[float, float], float]
    singular_mass: float
    ac_mass: float
    quadrature_error: float
    total: float = field(init=False)

    def __post_init__(self):
        self.total = sum(self.atom_masses.values()) + self.singular_mass + self.ac_mass

    def to_json(self) -> dict[str, Any]:
        return {
            "atom_masses": [
                {"location": list(loc), "mass": m} for loc, m in self.atom_masses.items()
            ],
            "singular_mass": self.singular_mass,
            "ac_mass": self.ac_mass,
            "quadrature_error": self.quadrature_error,
            "total": self.total,
        }


def _panels(B: float, k: float) -> np.ndarray:
    """Edges 0 > -1/k > -2/k > -4/k > ... down to -B.

    The density decays like exp(rate * s) with rates up to k, so panels
    widen geometrically away from the corner where the mass sits.
    """
    edges = [0.0]
    width = 1.0 / k
    while edges[-1] > -B:
        edges.append(max(-B, edges[-1] - width))
        if len(edges) > 2:
            width *= 2.0
    return np.asarray(edges)


def _triangle_mass(d: BivariateGrlmp, B: float, nodes: int) -> float:
    """Gauss-Legendre mass of (-B, 0)^2 off the diagonal, panel by panel."""
    z, w = leggauss(nodes)
    edges = _panels(B, d.k)
    hi, lo = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    # every panel's nodes, flattened; label marks the panel
    s = (lo[:, None] + half[:, None] * (z[None, :] + 1.0)).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    label = np.repeat(np.arange(lo.size), nodes)

    # distinct panels never touch the diagonal: plain tensor rule
    off = label[:, None] != label[None, :]
    dens = d._ac_density_s(s[:, None], s[None, :])
    total = float((ws[:, None] * np.where(off, dens * ws[None, :], 0.0)).sum(axis=1).sum())

    # a panel paired with itself splits into two triangles
    for a, h in zip(lo, half):
        outer = a + h * (z + 1.0)
        wo = h * w
        ih = 0.5 * (outer - a)
        inner = ih[:, None] * (z[None, :] + 1.0) + a
        wi = ih[:, None] * w[None, :]
        ow = np.broadcast_to(outer[:, None], inner.shape)
        total += float((wo * (wi * d._ac_density_s(inner, ow)).sum(axis=1)).sum())
        total += float((wo * (wi * d._ac_density_s(ow, inner)).sum(axis=1)).sum())
    return total


def decompose(d: BivariateGrlmp, config: QuadratureConfig = QuadratureConfig()) -> DecompositionReport:
    """Split the law of (max(X1, e), max(X2, e)) into its four parts.

    Point atom at (e, e): exp(-k g(b)). Boundary segments: P(X1 <= e < X2)
    and its mirror. Diagonal: (l12 / k)(1 - exp(-k g(b))). The rest comes
    from panelled quadrature of the density in generator coordinates,
    checked against a half-resolution rule.
    """
    e = d.op.identity
    if not (e > d.lower and e < d.b):
        raise DomainError("truncation needs lower < e < b")
    B = d.g_b  # g(b) - g(e) with g(e) = 0
    l1, l2, l12, k = d.lambda1, d.lambda2, d.lambda12, d.k
    point = math.exp(-k * B)
    edge1 = math.exp(-(l1 + l12) * B) * -math.expm1(-l2 * B)
    edge2 = math.exp(-(l2 + l12) * B) * -math.expm1(-l1 * B)
    singular = d.tie_probability() * -math.expm1(-k * B)

    ac = _triangle_mass(d, B, config.nodes)
    coarse = _triangle_mass(d, B, max(config.nodes // 2, 2))
    err = abs(ac - coarse)
    if err > config.tol:
        raise QuadratureError(
            f"ac mass changed by {err:.3e} between {config.nodes // 2} and {config.nodes} nodes"
        )
    atoms = {(e, e): point, (e, d.b): edge1, (d.b, e): edge2}
    return DecompositionReport(atoms, singular, ac, err)


# named bivariate families ------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    row: int
    name: str
    op_id: str
    identity: float
    generator: str
    cdf: str
    constraints: str
    default_b: float

    def build(self, lambda1: float, lambda2: float, lambda12: float, b: float | None = None) -> BivariateGrlmp:
        b = self.default_b if b is None else b
        return BivariateGrlmp(assoc_op.builtin(self.op_id), lambda1, lambda2, lambda12, b)


BIVARIATE_CATALOG = (
    CatalogEntry(
        1, "bivariate type 3 extreme value", "addition", 0.0, "g(x) = x, x ∈ (−∞, b), b < ∞",
        "exp[λ₁(x₁ − b) + λ₂(x₂ − b) + λ₁₂ min(x₁ − b, x₂ − b)]",
        "−∞ < xᵢ < b; λᵢ > 0, i = 1, 2; λ₁₂ ≥ 0", 0.0,
    ),
    CatalogEntry(
        2, "bivariate power function", "multiplication", 1.0, "g(x) = log x, x ∈ (0, b), b < ∞",
        "(x₁/b)^λ₁ (x₂/b)^λ₂ · exp(λ₁₂ min[log(x₁/b), log(x₂/b)])",
        "0 < xᵢ < b; λᵢ > 0, i = 1, 2; λ₁₂ ≥ 0", 2.0,
    ),
    CatalogEntry(
        3, "bivariate power function", "shifted_multiplication", 0.0,
        "g(x) = log(x + 1), x ∈ (−1, b), b < ∞",
        "((x₁+1)/(b+1))^λ₁ ((x₂+1)/(b+1))^λ₂ · exp(λ₁₂ min[log((x₁+1)/(b+1)), log((x₂+1)/(b+1))])",
        "−1 < xᵢ < b; λᵢ > 0, i = 1, 2; λ₁₂ ≥ 0", 1.0,
    ),
    CatalogEntry(
        4, "bivariate reflected Weibull", "neg_quadratic", 0.0, "g(x) = −x², x ∈ (−∞, 0)",
        "exp[−λ₁x₁² − λ₂x₂² + λ₁₂ min(−x₁², −x₂²)]",
        "−∞ < xᵢ < 0; λᵢ > 0, i = 1, 2; λ₁₂ ≥ 0", 0.0,
    ),
)


def table1_catalog() -> tuple[CatalogEntry, ...]:
    return BIVARIATE_CATALOG
