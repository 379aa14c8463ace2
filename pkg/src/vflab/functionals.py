"""The catalog of Varadhan functionals.

A FunctionalHandle wraps an evaluator F -> L(F) together with capability
claims (maximal, convex, sigma-continuous).  Claims are declarations, not
certifications; the axioms module is the certifier.  Four built-ins:

  log_integral  L(F) = log int e^F dnu        convex, not maximal
  sup_form      L(F) = L0 + max(F - I)        maximal and convex
  ldp_term      L(F) = (1/n) log int e^{nF}   one term of an LDP sequence
  tail_limsup   L(F) = limsup of F at +inf    maximal, not sigma-continuous

The last one lives on half-line functions with a declared tail value; that
is the smallest class on which the limsup is computable from finite data.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .errors import AllInfiniteRate, SpaceMismatch, ValidationError
from .space import (
    BoundedFunction,
    FiniteSpace,
    ProbabilityMeasure,
    RateFunction,
    _freeze,
    _require_same_space,
)


class FunctionalHandle:
    """An evaluator for one functional plus its declared properties.

    evaluate is deterministic: the same input vector gives bit-identical
    output.  base_value caches L(0).  gradient, when present, maps function
    values to the exact derivative dL/dF as a weight vector (the tilted
    measure for the log-integral family).
    """

    __slots__ = (
        "name",
        "space",
        "claims_maximal",
        "claims_convex",
        "claims_sigma_continuous",
        "base_value",
        "gradient",
        "_fn",
    )

    def __init__(
        self,
        name: str,
        space,
        fn: Callable,
        *,
        claims_maximal: bool,
        claims_convex: bool,
        claims_sigma_continuous: bool,
        gradient: Callable | None = None,
    ):
        self.name = name
        self.space = space
        self._fn = fn
        self.claims_maximal = bool(claims_maximal)
        self.claims_convex = bool(claims_convex)
        self.claims_sigma_continuous = bool(claims_sigma_continuous)
        self.gradient = gradient
        self.base_value = float(fn(space.zero_function()))

    def evaluate(self, F) -> float:
        return float(self._fn(F))

    __call__ = evaluate

    def __repr__(self):
        return f"FunctionalHandle({self.name!r} on {self.space!r})"


# ---------------------------------------------------------------------------
# half-line domain for the limsup example


DEFAULT_TAIL_GRID = np.linspace(0.0, 10.0, 513)


class TailDomain:
    """A finite grid on [0, inf) plus the point at infinity, implicitly.

    Functions on it are TailFunction: grid samples plus a declared constant
    value beyond the last grid point.
    """

    __slots__ = ("grid",)

    def __init__(self, grid_coords=None):
        coords = DEFAULT_TAIL_GRID if grid_coords is None else np.array(grid_coords, float)
        if np.any(np.diff(coords) <= 0) or coords[0] < 0:
            raise ValidationError("tail grid must be increasing and nonnegative")
        self.grid = FiniteSpace.from_line(coords)

    @property
    def point_ids(self):
        return self.grid.point_ids

    @property
    def coords(self):
        return self.grid.coords

    def __len__(self):
        return len(self.grid)

    def __eq__(self, other):
        if not isinstance(other, TailDomain):
            return NotImplemented
        return self.grid == other.grid

    def __hash__(self):
        return hash(self.grid)

    def __repr__(self):
        return f"TailDomain({len(self.grid)} grid points)"

    def function(self, values, tail_value: float) -> "TailFunction":
        return TailFunction(self.grid.function(values), float(tail_value), self)

    def zero_function(self) -> "TailFunction":
        return self.function(np.zeros(len(self.grid)), 0.0)

    def constant_function(self, c: float) -> "TailFunction":
        return self.function(np.full(len(self.grid), float(c)), c)

    def pit_function(self, index: int, depth: float) -> "TailFunction":
        # the pit drops to -depth beyond the grid as well; only then does the
        # limsup see it
        return TailFunction(self.grid.pit_function(index, depth), -float(depth), self)

    def sample_function(self, rng: np.random.Generator, low: float, high: float) -> "TailFunction":
        # grid values first, tail draw last; checks rely on this order
        vals = rng.uniform(low, high, len(self.grid))
        return self.function(vals, float(rng.uniform(low, high)))

    def ramp(self, scale: float) -> "TailFunction":
        """min(1, x/scale): the classical escaping-to-infinity witness."""
        return self.function(np.minimum(1.0, self.grid.coords / float(scale)), 1.0)


class TailFunction:
    """Grid samples on the half-line plus the declared limit at infinity."""

    __slots__ = ("grid_values", "tail_value", "space")

    def __init__(self, grid_values: BoundedFunction, tail_value: float, domain: TailDomain):
        if grid_values.space is not domain.grid and grid_values.space != domain.grid:
            raise SpaceMismatch("grid values do not live on the domain's grid")
        if not np.isfinite(tail_value):
            raise ValidationError("tail value must be finite")
        self.grid_values = grid_values
        self.tail_value = float(tail_value)
        self.space = domain

    @property
    def values(self) -> np.ndarray:
        return self.grid_values.values

    def __repr__(self):
        return f"TailFunction(tail={self.tail_value})"

    def shifted(self, c: float) -> "TailFunction":
        return TailFunction(self.grid_values.shifted(c), self.tail_value + float(c), self.space)

    def scaled(self, a: float) -> "TailFunction":
        return TailFunction(self.grid_values.scaled(a), self.tail_value * float(a), self.space)

    def plus(self, other: "TailFunction") -> "TailFunction":
        _require_same_space(self, other)
        return TailFunction(
            self.grid_values.plus(other.grid_values),
            self.tail_value + other.tail_value,
            self.space,
        )

    def pointwise_max(self, other: "TailFunction") -> "TailFunction":
        _require_same_space(self, other)
        return TailFunction(
            self.grid_values.pointwise_max(other.grid_values),
            max(self.tail_value, other.tail_value),
            self.space,
        )

    def sup_distance(self, other: "TailFunction") -> float:
        _require_same_space(self, other)
        # the sup over [0, inf) sees the tail gap too
        return max(
            self.grid_values.sup_distance(other.grid_values),
            abs(self.tail_value - other.tail_value),
        )

    def inf_minus(self, other: "TailFunction") -> float:
        _require_same_space(self, other)
        return min(
            self.grid_values.inf_minus(other.grid_values),
            self.tail_value - other.tail_value,
        )


# ---------------------------------------------------------------------------
# the four built-ins


def _coerce_measure(nu, space):
    """Accept a ProbabilityMeasure or raw finite nonnegative weights.

    Raw weights are not normalized: log_integral over a non-probability
    finite measure is well defined (its base value is log of the mass) and
    the const-preservation check relies on being able to build one.
    """
    if isinstance(nu, ProbabilityMeasure):
        weights = nu.weights
        log_weights = nu.log_weights
    else:
        arr = np.array(nu, dtype=float)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise ValidationError("weights must be a finite 1-d vector")
        if np.any(arr < 0):
            raise ValidationError("weights must be nonnegative")
        if arr.sum() == 0.0:
            raise ValidationError("weights must carry positive mass")
        weights = _freeze(arr)
        with np.errstate(divide="ignore"):
            log_weights = np.log(arr)
    if space is None:
        space = FiniteSpace.default(len(weights))
    elif len(space) != len(weights):
        raise SpaceMismatch("measure length does not match the space")
    return weights, log_weights, space


def log_integral(nu, space: FiniteSpace | None = None) -> FunctionalHandle:
    """L(F) = log int e^F dnu, the convex non-maximal example.

    Stabilized through log-sum-exp; zero weights drop out as -inf log
    weights.  The exact gradient at F is the exponentially tilted measure,
    exposed for the conjugate ascent.
    """
    weights, log_weights, space = _coerce_measure(nu, space)

    def fn(F):
        return logsumexp(F.values + log_weights)

    def grad(values: np.ndarray) -> np.ndarray:
        z = values + log_weights
        return np.exp(z - logsumexp(z))

    return FunctionalHandle(
        "log_integral",
        space,
        fn,
        claims_maximal=False,
        claims_convex=True,
        claims_sigma_continuous=True,
        gradient=grad,
    )


def sup_form(I: RateFunction, L0: float = 0.0) -> FunctionalHandle:
    """L(F) = L0 + sup over points of (F - I), the variational representation.

    Entries with I = inf never contribute; a rate that is infinite
    everywhere is rejected because the functional would be -inf identically.
    """
    finite = I.finite_mask()
    if not finite.any():
        raise AllInfiniteRate("sup_form needs at least one finite rate entry")
    idx = np.nonzero(finite)[0]
    rates = I.values[idx]
    L0 = float(L0)

    def fn(F):
        return L0 + float(np.max(F.values[idx] - rates))

    return FunctionalHandle(
        "sup_form",
        I.space,
        fn,
        claims_maximal=True,
        claims_convex=True,
        claims_sigma_continuous=True,
    )


def ldp_term(mu, n: int, space: FiniteSpace | None = None) -> FunctionalHandle:
    """L(F) = (1/n) log int e^{nF} dmu, the nth term of an LDP sequence.

    At n = 1 this is log_integral(mu) exactly, bit for bit.
    """
    if n < 1 or int(n) != n:
        raise ValidationError("n must be a positive integer")
    n = int(n)
    weights, log_weights, space = _coerce_measure(mu, space)

    def fn(F):
        return logsumexp(n * F.values + log_weights) / n

    def grad(values: np.ndarray) -> np.ndarray:
        z = n * values + log_weights
        return np.exp(z - logsumexp(z))

    return FunctionalHandle(
        f"ldp_term(n={n})",
        space,
        fn,
        claims_maximal=False,
        claims_convex=True,
        claims_sigma_continuous=True,
        gradient=grad,
    )


def tail_limsup(domain: TailDomain | None = None) -> FunctionalHandle:
    """L(F) = limsup of F at infinity = the declared tail value.

    Monotone, translation-equivariant and maximal, but not
    sigma-continuous: functions can sink to zero pointwise while their
    tails stay up.
    """
    domain = domain or TailDomain()

    def fn(F):
        return F.tail_value

    return FunctionalHandle(
        "tail_limsup",
        domain,
        fn,
        claims_maximal=True,
        claims_convex=True,
        claims_sigma_continuous=False,
    )


__all__ = [
    "FunctionalHandle",
    "TailDomain",
    "TailFunction",
    "DEFAULT_TAIL_GRID",
    "log_integral",
    "sup_form",
    "ldp_term",
    "tail_limsup",
]
