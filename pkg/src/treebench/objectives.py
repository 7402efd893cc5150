"""Leaf-additive objectives f(n, e) for binary classification trees.

Every objective scores a single leaf from its size ``n`` and its number of
misclassifications ``e`` under majority labeling; a tree's cost is the sum
over its leaves. Terms of the form 0*log(0) and 0/0 evaluate to zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from scipy.special import gammaln

__all__ = [
    "Concavity",
    "LeafStats",
    "ObjectiveKind",
    "ObjectiveParams",
    "concavity_class",
    "leaf_value",
    "leaf_values",
    "log_beta",
    "parse_kind",
]


class ObjectiveKind(str, enum.Enum):
    ACCURACY = "accuracy"
    GINI = "gini"
    SQRT_GINI = "sqrt-gini"
    ENTROPY = "entropy"
    MIN_ERROR = "min-error"
    BINOM_PESSIMISTIC = "binom"
    MDL_QUINLAN = "mdl-quinlan"
    MDL_MEHTA = "mdl-mehta"
    BAYES = "bayes"
    M_LOSS = "m-loss"
    L_LOSS = "l-loss"
    SMOOTHED_ACCURACY = "smoothed"

    def __str__(self) -> str:
        return self.value


class Concavity(str, enum.Enum):
    STRICTLY_CONCAVE = "strictly-concave"
    NON_CONCAVE = "non-concave"


_CONCAVE = frozenset({
    ObjectiveKind.GINI,
    ObjectiveKind.SQRT_GINI,
    ObjectiveKind.ENTROPY,
    ObjectiveKind.MDL_QUINLAN,
    ObjectiveKind.MDL_MEHTA,
    ObjectiveKind.BAYES,
})

# Kinds whose leaf values are integers whenever n and e are.
INTEGER_KINDS = frozenset({ObjectiveKind.ACCURACY})


def parse_kind(name: str | ObjectiveKind) -> ObjectiveKind:
    """Look up a kind by its stable lowercase name (``"gini"``, ``"m-loss"``, ...)."""
    if isinstance(name, ObjectiveKind):
        return name
    try:
        return ObjectiveKind(name.strip().lower())
    except ValueError:
        names = ", ".join(k.value for k in ObjectiveKind)
        raise ValueError(f"unknown objective {name!r}; expected one of: {names}") from None


def concavity_class(kind: ObjectiveKind) -> Concavity:
    if kind in _CONCAVE:
        return Concavity.STRICTLY_CONCAVE
    return Concavity.NON_CONCAVE


@dataclass(frozen=True)
class ObjectiveParams:
    """Constants used by the parameterized objectives.

    Attributes:
        alpha: confidence level of the binomial pessimistic error (C4.5 default).
        rho0, rho1: Beta prior of the Bayesian objective.
        x: Laplace smoothing count of the smoothed accuracy objective.
        class_count: number of classes; only binary problems are supported.
        mdl_quinlan_table1_base: encode the MDL (Quinlan) bound term in bits
            instead of nats, which reproduces the values printed in the
            literature for f(6, 2) and f(4, 2) + f(2, 0).
    """

    alpha: float = 0.25
    rho0: float = 2.5
    rho1: float = 2.5
    x: float = 0.0
    class_count: int = 2
    mdl_quinlan_table1_base: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.rho0 <= 0 or self.rho1 <= 0:
            raise ValueError(f"rho0 and rho1 must be positive, got {self.rho0}, {self.rho1}")
        if not self.x >= 0:
            raise ValueError(f"smoothing count x must be >= 0, got {self.x}")
        if self.class_count != 2:
            raise ValueError("only binary classification (class_count=2) is supported")

    @property
    def z_alpha(self) -> float:
        """Upper z-value of the normal distribution for confidence level ``alpha``."""
        return NormalDist().inv_cdf(1.0 - self.alpha)


DEFAULT_PARAMS = ObjectiveParams()


@dataclass(frozen=True)
class LeafStats:
    n: int
    e: int

    def __post_init__(self) -> None:
        if self.n < 0 or self.e < 0 or self.e > self.n - self.e:
            raise ValueError(f"invalid leaf stats (n={self.n}, e={self.e})")


def log_beta(a: float, b: float) -> float:
    """Natural log of the Beta function, ln B(a, b)."""
    if not (a > 0 and b > 0):
        raise ValueError(f"log_beta needs positive arguments, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _xlogy(x: float, y: float) -> float:
    return 0.0 if x == 0 or y == 0 else x * math.log(y)


def _log_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def leaf_value(kind: ObjectiveKind, params: ObjectiveParams, n: int, e: int) -> float:
    """Cost of a single leaf with ``n`` instances and ``e`` misclassifications.

    ``e`` may range over ``0..n``; the majority-labeling constraint ``e <= n/2``
    is the caller's concern (see :class:`LeafStats`).
    """
    if n < 0 or e < 0 or e > n:
        raise ValueError(f"invalid leaf counts (n={n}, e={e})")
    if n == 0:
        return 0.0
    k = params.class_count
    if kind is ObjectiveKind.ACCURACY:
        return float(e)
    if kind is ObjectiveKind.GINI:
        p0, p1 = e / n, (n - e) / n
        return n * (1.0 - p0 * p0 - p1 * p1)
    if kind is ObjectiveKind.SQRT_GINI:
        p0, p1 = e / n, (n - e) / n
        return n * math.sqrt(max(0.0, 1.0 - p0 * p0 - p1 * p1))
    if kind is ObjectiveKind.ENTROPY:
        h = 0.0
        for c in (e, n - e):
            if c:
                p = c / n
                h -= p * math.log2(p)
        return n / 2.0 * h
    if kind is ObjectiveKind.MIN_ERROR:
        return n * (e + k - 1) / (n + k)
    if kind is ObjectiveKind.BINOM_PESSIMISTIC:
        if e == 0:
            return n * (1.0 - math.exp(math.log(params.alpha) / n))
        if e == n:
            return float(e)
        z2 = params.z_alpha ** 2
        ep = e + 0.5
        upper = (ep + z2 / 2 + math.sqrt(z2 * (ep * (1 - ep / n) + z2 / 4))) / (n + z2)
        return upper * n
    if kind is ObjectiveKind.MDL_QUINLAN:
        b = (n + 1) // 2
        bound = math.log2(b + 1) if params.mdl_quinlan_table1_base else math.log(b + 1)
        return bound + _log_comb(n, e)
    if kind is ObjectiveKind.MDL_MEHTA:
        return (_xlogy(e, n / e if e else 0.0) + _xlogy(n - e, n / (n - e) if n - e else 0.0)
                + 0.5 * math.log(n / 2) + math.log(math.pi))
    if kind is ObjectiveKind.BAYES:
        return -(log_beta(e + params.rho0, n - e + params.rho1) - log_beta(params.rho0, params.rho1))
    if kind is ObjectiveKind.M_LOSS:
        return n * (1.0 / (1.0 - e / n) - 1.0) if e < n else math.inf
    if kind is ObjectiveKind.L_LOSS:
        r = e / n
        return n * (1.0 / math.sqrt(1.0 - r * r) - 1.0) if e < n else math.inf
    if kind is ObjectiveKind.SMOOTHED_ACCURACY:
        return n * (e + params.x) / (n + k * params.x)
    raise ValueError(f"unsupported objective {kind!r}")


def leaf_values(kind: ObjectiveKind, params: ObjectiveParams, n, e) -> np.ndarray:
    """Vectorized :func:`leaf_value` over integer arrays ``n`` and ``e`` (broadcast)."""
    n = np.asarray(n, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    n, e = np.broadcast_arrays(n, e)
    out = np.zeros(n.shape)
    live = n > 0
    nn, ee = n[live], e[live]
    k = params.class_count
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is ObjectiveKind.ACCURACY:
            v = ee.copy()
        elif kind in (ObjectiveKind.GINI, ObjectiveKind.SQRT_GINI):
            p0 = ee / nn
            g = np.maximum(0.0, 1.0 - p0 * p0 - (1 - p0) ** 2)
            v = nn * (g if kind is ObjectiveKind.GINI else np.sqrt(g))
        elif kind is ObjectiveKind.ENTROPY:
            p0 = ee / nn
            p1 = 1.0 - p0
            h = -(np.where(p0 > 0, p0 * np.log2(np.where(p0 > 0, p0, 1.0)), 0.0)
                  + np.where(p1 > 0, p1 * np.log2(np.where(p1 > 0, p1, 1.0)), 0.0))
            v = nn / 2.0 * h
        elif kind is ObjectiveKind.MIN_ERROR:
            v = nn * (ee + k - 1) / (nn + k)
        elif kind is ObjectiveKind.BINOM_PESSIMISTIC:
            z2 = params.z_alpha ** 2
            ep = ee + 0.5
            mid = nn * (ep + z2 / 2 + np.sqrt(z2 * (ep * (1 - ep / nn) + z2 / 4))) / (nn + z2)
            zero = nn * (1.0 - np.exp(math.log(params.alpha) / nn))
            v = np.where(ee == 0, zero, np.where(ee == nn, ee, mid))
        elif kind is ObjectiveKind.MDL_QUINLAN:
            b = np.floor((nn + 1) / 2)
            bound = np.log2(b + 1) if params.mdl_quinlan_table1_base else np.log(b + 1)
            v = bound + gammaln(nn + 1) - gammaln(ee + 1) - gammaln(nn - ee + 1)
        elif kind is ObjectiveKind.MDL_MEHTA:
            t0 = np.where(ee > 0, ee * np.log(nn / np.where(ee > 0, ee, 1.0)), 0.0)
            r = nn - ee
            t1 = np.where(r > 0, r * np.log(nn / np.where(r > 0, r, 1.0)), 0.0)
            v = t0 + t1 + 0.5 * np.log(nn / 2) + math.log(math.pi)
        elif kind is ObjectiveKind.BAYES:
            r0, r1 = params.rho0, params.rho1
            lb = gammaln(ee + r0) + gammaln(nn - ee + r1) - gammaln(nn + r0 + r1)
            v = -(lb - log_beta(r0, r1))
        elif kind is ObjectiveKind.M_LOSS:
            v = np.where(ee < nn, nn * (1.0 / (1.0 - ee / nn) - 1.0), np.inf)
        elif kind is ObjectiveKind.L_LOSS:
            r = ee / nn
            v = np.where(ee < nn, nn * (1.0 / np.sqrt(1.0 - r * r) - 1.0), np.inf)
        elif kind is ObjectiveKind.SMOOTHED_ACCURACY:
            v = nn * (ee + params.x) / (nn + k * params.x)
        else:
            raise ValueError(f"unsupported objective {kind!r}")
    out[live] = v
    return out
