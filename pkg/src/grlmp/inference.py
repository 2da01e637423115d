"""Estimation and goodness-of-fit tools for both families."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import asdict, dataclass, field

import numpy as np

from .assoc_op import AssocOp
from .errors import DegenerateError, DomainError

__all__ = [
    "KS_CONSTANT_01",
    "BivariateFit",
    "KsReport",
    "UnivariateFit",
    "fit_bivariate",
    "fit_univariate",
    "ks_test",
    "log_likelihood",
    "numeric_mixed_partial",
]

log = logging.getLogger(__name__)

# asymptotic Kolmogorov critical value at alpha = 0.01
KS_CONSTANT_01 = 1.6276


@dataclass(frozen=True)
class UnivariateFit:
    c_hat: float
    b_hat: float
    log_likelihood: float
    n: int

    def to_json(self) -> dict:
        return {"family": "univariate", **asdict(self)}


@dataclass(frozen=True)
class BivariateFit:
    lambda1_hat: float
    lambda2_hat: float
    lambda12_hat: float
    k_hat: float
    tie_count: int
    n: int
    b_hat: float
    m1_hat: float
    m2_hat: float
    consistency_defect: float
    warnings: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        out = {"family": "bivariate", **asdict(self)}
        out["warnings"] = list(self.warnings)
        return out


@dataclass(frozen=True)
class KsReport:
    statistic: float
    n: int
    critical_value_01: float

    @property
    def passed(self) -> bool:
        return self.statistic < self.critical_value_01

    def to_json(self) -> dict:
        return {**asdict(self), "pass": self.passed}


def _g_gaps(data: np.ndarray, op: AssocOp, b: float) -> np.ndarray:
    gb = float(op.g(np.float64(b)))
    return gb - np.asarray(op.g(data), dtype=float)


def log_likelihood(c: float, data, op: AssocOp, b: float) -> float:
    """Log-likelihood of rate ``c`` (and endpoint ``b``) for i.i.d. data."""
    data = np.asarray(data, dtype=float)
    gaps = _g_gaps(data, op, b)
    return float(
        data.size * math.log(c)
        + np.log(np.asarray(op.derivative(data), dtype=float)).sum()
        - c * gaps.sum()
    )


def fit_univariate(data, op: AssocOp, b: float | str = "estimate") -> UnivariateFit:
    """Maximum likelihood for the rate, c_hat = n / sum(g(b) - g(x_i)).

    With ``b="estimate"`` the endpoint is the sample maximum, the boundary
    maximiser of the likelihood; its downward bias is left uncorrected.
    """
    data = np.asarray(data, dtype=float).ravel()
    n = data.size
    if n < 2:
        raise DegenerateError("need at least two observations")
    if not np.all(np.isfinite(data)) or not np.all(op.domain.contains(data)):
        raise DomainError(f"data outside {op.domain}")
    if b == "estimate":
        b_hat = float(data.max())
    else:
        b_hat = float(b)
        if np.any(data >= b_hat):
            raise DomainError(f"all data must lie strictly below b={b_hat}")
    c_hat = _rate(data, op, b_hat)
    # the maximum sits on the endpoint; its log-density term stays finite
    return UnivariateFit(c_hat, b_hat, log_likelihood(c_hat, data, op, b_hat), n)


def _ties(pairs: np.ndarray, tol: float) -> np.ndarray:
    if tol == 0:
        return pairs[:, 0] == pairs[:, 1]
    scale = np.maximum(1.0, np.abs(pairs).max(axis=1))
    return np.abs(pairs[:, 0] - pairs[:, 1]) <= tol * scale


def _rate(data: np.ndarray, op: AssocOp, b: float) -> float:
    total = float(_g_gaps(data, op, b).sum())
    if not total > 0:
        raise DegenerateError("all observations coincide with the endpoint")
    return data.size / total


def fit_bivariate(
    pairs, op: AssocOp, b: float | str = "estimate", tie_tolerance: float = 0.0
) -> BivariateFit:
    """Moment-style estimates of (l1, l2, l12).

    k from the pairwise maxima, l12 = k times the tie fraction, the marginal
    rates m_i from each column and l_i = max(0, m_i - l12).
    ``tie_tolerance`` is relative; 0 means exact equality. With
    ``b="estimate"`` both coordinates share the overall sample maximum.
    """
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise DomainError("pairs must have shape (n, 2)")
    n = pairs.shape[0]
    if n < 10:
        raise DegenerateError("need at least ten pairs")
    if tie_tolerance < 0:
        raise DomainError("tie_tolerance must be nonnegative")
    if not np.all(np.isfinite(pairs)) or not np.all(op.domain.contains(pairs)):
        raise DomainError(f"data outside {op.domain}")

    maxima = pairs.max(axis=1)
    b_hat = fit_univariate(maxima, op, b).b_hat
    k_hat = _rate(maxima, op, b_hat)
    m1 = _rate(pairs[:, 0], op, b_hat)
    m2 = _rate(pairs[:, 1], op, b_hat)
    tie_count = int(_ties(pairs, tie_tolerance).sum())
    l12 = k_hat * tie_count / n

    warnings = []
    l1, l2 = m1 - l12, m2 - l12
    for name, val in (("lambda1", l1), ("lambda2", l2)):
        if val < 0:
            msg = f"{name}_hat clamped at 0 (raw {val:.6g})"
            log.warning(msg)
            warnings.append(msg)
    l1, l2 = max(0.0, l1), max(0.0, l2)
    defect = abs(m1 + m2 - l12 - k_hat)
    log.info("bivariate fit consistency defect %.3g", defect)
    return BivariateFit(
        l1, l2, l12, l1 + l2 + l12, tie_count, n, b_hat, m1, m2, defect, tuple(warnings)
    )


def ks_test(data, cdf: Callable) -> KsReport:
    """One-sample Kolmogorov-Smirnov statistic against a continuous ``cdf``."""
    x = np.sort(np.asarray(data, dtype=float).ravel())
    n = x.size
    if n < 1:
        raise DomainError("ks_test needs at least one observation")
    if not np.all(np.isfinite(x)):
        raise DomainError("data must be finite")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    stat = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    return KsReport(stat, n, KS_CONSTANT_01 / math.sqrt(n))


def numeric_mixed_partial(
    F: Callable,
    x1: float,
    x2: float,
    h: float,
    support: tuple[float, float] | None = None,
) -> float:
    """Central four-point estimate of d^2 F / dx1 dx2.

    The stencil must stay off the diagonal (|x1 - x2| > 4h) and, when
    ``support`` is given, strictly inside it.
    """
    if not h > 0:
        raise DomainError("h must be positive")
    if not abs(x1 - x2) > 4 * h:
        raise DomainError("stencil straddles the diagonal")
    if support is not None:
        lo, hi = support
        if min(x1, x2) - h <= lo or max(x1, x2) + h >= hi:
            raise DomainError("stencil leaves the support")
    return (
        F(x1 + h, x2 + h) - F(x1 + h, x2 - h) - F(x1 - h, x2 + h) + F(x1 - h, x2 - h)
    ) / (4 * h * h)
