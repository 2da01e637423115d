"""Invariant suites run by ``grlmp verify``."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .bivariate import (
    BivariateGrlmp,
    decompose,
    direct_extension_residual,
    gbrlmp_residual,
    standard_triples,
)
from .inference import ks_test
from .specs import Distribution
from .univariate import GrlmpDistribution, TruncatedGrlmp, grlmp_residual, standard_grid

SUITES = ("grlmp", "gbrlmp", "ks", "max", "ties", "mass")

RESIDUAL_TOL = 1e-12
MASS_TOL = 1e-3


@dataclass(frozen=True)
class Check:
    name: str
    statistic: float
    threshold: float
    passed: bool
    relation: str = "<="

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "relation": self.relation,
            "pass": self.passed,
        }


def _le(name: str, stat: float, thr: float) -> Check:
    return Check(name, float(stat), float(thr), bool(stat <= thr))


def _corrupt_factor(hook: dict | None) -> float | None:
    if not hook:
        return None
    return float(hook.get("corrupt_cdf_constant", 1.0))


def _univariate_residual(name: str, d: GrlmpDistribution, factor: float | None) -> Check:
    wrong = None
    if factor is not None:
        wrong = dataclasses.replace(d, c=d.c * factor).cdf
    res = grlmp_residual(d, standard_grid(d), cdf_combined=wrong)
    return _le(name, res.max_abs, RESIDUAL_TOL)


def _tie_check(name: str, hits: int, n: int, p: float) -> Check:
    sigma = math.sqrt(p * (1 - p) / n)
    return _le(name, abs(hits / n - p), 3 * sigma)


def run_suites(
    d: Distribution,
    suites: tuple[str, ...] = SUITES,
    seed: int = 0,
    n: int = 20000,
    hook: dict | None = None,
) -> list[Check]:
    unknown = set(suites) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites: {sorted(unknown)}")
    factor = _corrupt_factor(hook)
    checks: list[Check] = []

    if isinstance(d, (GrlmpDistribution, TruncatedGrlmp)):
        base = d.base if isinstance(d, TruncatedGrlmp) else d
        if "grlmp" in suites:
            checks.append(_univariate_residual("grlmp_residual", base, factor))
        if "ks" in suites:
            x = d.sample(np.random.default_rng(seed), n)
            if isinstance(d, TruncatedGrlmp):
                m = d.atom_mass
                cont = x[x > d.identity]
                rep = ks_test(cont, lambda v: (base.cdf(v) - m) / (1 - m))
            else:
                rep = ks_test(x, base.cdf)
            checks.append(Check("ks_self", rep.statistic, rep.critical_value_01, rep.passed, "<"))
        if "ties" in suites and isinstance(d, TruncatedGrlmp):
            x = d.sample(np.random.default_rng(seed), n)
            checks.append(_tie_check("atom_fraction", int((x == d.identity).sum()), n, d.atom_mass))
        return checks

    assert isinstance(d, BivariateGrlmp)
    has_increments = d.op.identity > d.lower and d.op.identity < d.b
    if "grlmp" in suites:
        checks.append(_univariate_residual("grlmp_residual_marginal1", d.marginal(1), factor))
        checks.append(_univariate_residual("grlmp_residual_marginal2", d.marginal(2), factor))
        checks.append(_univariate_residual("grlmp_residual_max", d.max_distribution(), factor))
    if "gbrlmp" in suites:
        wrong = None
        if factor is not None:
            wrong = dataclasses.replace(
                d, lambda1=d.lambda1 * factor, lambda2=d.lambda2 * factor, lambda12=d.lambda12 * factor
            ).joint_cdf
        res = gbrlmp_residual(d, standard_triples(d), cdf_combined=wrong)
        checks.append(_le("gbrlmp_residual", res.max_abs, RESIDUAL_TOL))
        if has_increments and factor is None:
            probe = _direct_probe(d)
            rep = direct_extension_residual(d, [probe])
            if d.is_independent():
                checks.append(_le("direct_extension_residual", rep.max_abs, RESIDUAL_TOL))
            else:
                checks.append(
                    Check("direct_extension_residual", rep.max_abs, RESIDUAL_TOL,
                          rep.max_abs > RESIDUAL_TOL, ">")
                )
    if "ks" in suites or "max" in suites or "ties" in suites:
        pairs = d.sample_pairs(np.random.default_rng(seed), n)
        if "ks" in suites:
            for i in (1, 2):
                rep = ks_test(pairs[:, i - 1], d.marginal(i).cdf)
                checks.append(Check(f"ks_marginal{i}", rep.statistic, rep.critical_value_01, rep.passed, "<"))
        if "max" in suites:
            rep = ks_test(pairs.max(axis=1), d.max_distribution().cdf)
            checks.append(Check("ks_max", rep.statistic, rep.critical_value_01, rep.passed, "<"))
        if "ties" in suites:
            hits = int((pairs[:, 0] == pairs[:, 1]).sum())
            checks.append(_tie_check("tie_fraction", hits, n, d.tie_probability()))
    if "mass" in suites and has_increments:
        rep = decompose(d)
        checks.append(_le("mass_balance", abs(rep.total - 1.0), MASS_TOL))
    return checks


def _direct_probe(d: BivariateGrlmp) -> tuple[float, float, float, float]:
    """(x1, x2, t1, t2) with t1 != t2 where l12 > 0 breaks the product form."""
    op, gb = d.op, d.g_b
    # only x2 is shifted, so the max term no longer tracks the same coordinate
    x1 = float(op.g_inv(np.float64(0.25 * gb)))
    x2 = float(op.g_inv(np.float64(-0.5 / d.k)))
    t2 = float(op.g_inv(np.float64(0.5 * gb)))
    return x1, x2, op.identity, t2
