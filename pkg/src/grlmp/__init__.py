"""Distributions with the generalized reversed lack of memory property.

For an associative operation x * y = g^-1(g(x) + g(y)) with identity e, the
univariate laws satisfying F(x) F(t) = F(x * t) F(e) are
F(x) = exp(c (g(x) - g(b))); the bivariate laws satisfying the diagonal
version of that equation carry an extra common-shock term
l12 max(g(x1) - g(b), g(x2) - g(b)).
"""

from .assoc_op import AssocOp, AxiomReport, SupportInterval, builtin, certify_axioms, combine
from .bivariate import (
    BivariateGrlmp,
    DecompositionReport,
    QuadratureConfig,
    decompose,
    direct_extension_residual,
    gbrlmp_residual,
    table1_catalog,
)
from .errors import DegenerateError, DomainError, GrlmpError, QuadratureError, RangeError
from .inference import fit_bivariate, fit_univariate, ks_test, numeric_mixed_partial
from .univariate import GrlmpDistribution, TruncatedGrlmp, grlmp_residual

__version__ = "0.1.0"

__all__ = [
    "AssocOp",
    "AxiomReport",
    "BivariateGrlmp",
    "DecompositionReport",
    "DegenerateError",
    "DomainError",
    "GrlmpDistribution",
    "GrlmpError",
    "QuadratureConfig",
    "QuadratureError",
    "RangeError",
    "SupportInterval",
    "TruncatedGrlmp",
    "builtin",
    "certify_axioms",
    "combine",
    "decompose",
    "direct_extension_residual",
    "fit_bivariate",
    "fit_univariate",
    "gbrlmp_residual",
    "grlmp_residual",
    "ks_test",
    "numeric_mixed_partial",
    "table1_catalog",
]
