"""Rate functions from functionals and back: the dual formula machinery.

The dual formula I(x) = L(0) + sup_F (F(x) - L(F)) is realized with the
one-parameter pit family: pits are 0 at x and -M elsewhere.  Translation
pins F(x) = 0 without loss, and monotonicity makes deeper pits dominate,
so -L(pit_{x,M}) climbs to the sup as M grows.  On a finite space that
limit is exact.

reconstruct is the reverse direction L0 + max(F - I), and the
representation gap between a functional and its own reconstruction
measures how far it sits from sup form: zero for maximal
sigma-continuous functionals, strictly positive otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllInfiniteRate, ValidationError
from .space import BoundedFunction, RateFunction

# values in (-1e-12, 0) coming out of the L(0) cancellation collapse to 0.0
# so RateFunction's nonnegativity accepts them
_NEGATIVE_CLAMP = 1e-12


def _default_depths() -> tuple[float, ...]:
    return tuple(float(2**k) for k in range(0, 41))


@dataclass(frozen=True)
class PitSchedule:
    """Doubling depth schedule with stall and divergence detection knobs.

    stall_tolerance ends a point early once the increment drops below it;
    divergence_slope declares I(x) = inf when the value still grows at
    least that fast per unit depth at the final depth.
    """

    depths: tuple[float, ...] = None
    stall_tolerance: float = 1e-10
    divergence_slope: float = 0.5

    def __post_init__(self):
        depths = self.depths if self.depths is not None else _default_depths()
        depths = tuple(float(d) for d in depths)
        if not depths or any(d <= 0 for d in depths):
            raise ValidationError("depths must be positive")
        if any(b <= a for a, b in zip(depths, depths[1:])):
            raise ValidationError("depths must be strictly increasing")
        if self.stall_tolerance <= 0 or self.divergence_slope <= 0:
            raise ValidationError("tolerances must be positive")
        object.__setattr__(self, "depths", depths)

    def capped(self, cmax: float) -> "PitSchedule":
        """Restrict to depths <= 2**cmax."""
        cap = 2.0**float(cmax)
        kept = tuple(d for d in self.depths if d <= cap)
        if not kept:
            raise ValidationError("depth cap removes the whole schedule")
        return PitSchedule(kept, self.stall_tolerance, self.divergence_slope)


@dataclass(frozen=True)
class PointConvergence:
    """How the pit limit went at one point."""

    point: str
    depth: float
    increment: float
    divergent: bool


@dataclass(frozen=True)
class DualReport:
    """Computed rate, the split-off L(0), and per-point convergence data."""

    rate: RateFunction
    base_value: float
    per_point_convergence: tuple[PointConvergence, ...]


def pit_values(L, index: int, sched: PitSchedule | None = None) -> list[float]:
    """The raw sequence -L(pit_{x,M}) over the whole schedule, no early exit.

    Diagnostic hook: for a Varadhan functional this sequence is
    nondecreasing, and tests assert exactly that.
    """
    sched = sched or PitSchedule()
    domain = L.space
    return [-L.evaluate(domain.pit_function(index, d)) for d in sched.depths]


def _dual_point(L, index: int, sched: PitSchedule) -> tuple[float, PointConvergence]:
    domain = L.space
    label = domain.point_ids[index]
    depths = sched.depths
    prev = -L.evaluate(domain.pit_function(index, depths[0]))
    depth = depths[0]
    increment = 0.0
    divergent = False
    stalled = len(depths) == 1
    for k in range(1, len(depths)):
        cur = -L.evaluate(domain.pit_function(index, depths[k]))
        increment = cur - prev
        depth = depths[k]
        prev = cur
        if increment <= sched.stall_tolerance:
            stalled = True
            break
    if not stalled:
        step = depths[-1] - depths[-2]
        divergent = increment >= sched.divergence_slope * step
    if divergent:
        value = math.inf
    else:
        value = L.base_value + prev
        if -_NEGATIVE_CLAMP < value < 0.0:
            value = 0.0
    return value, PointConvergence(label, float(depth), float(increment), divergent)


def dual_rate_at(L, point, sched: PitSchedule | None = None) -> float:
    """Rate at one point: L(0) + lim over depths of -L(pit).

    Returns inf when the pit values keep climbing at the divergence slope
    through the final depth.  Single-point spaces give exactly 0.
    """
    sched = sched or PitSchedule()
    # resolve through the underlying finite grid so labels and ints both work
    index = _grid_space(L.space).index_of(point)
    value, _ = _dual_point(L, index, sched)
    return value


def _grid_space(domain):
    # TailDomain exposes its finite grid; FiniteSpace is its own grid
    return getattr(domain, "grid", domain)


def dual_rate(L, sched: PitSchedule | None = None) -> DualReport:
    """Apply the pit limit at every point and assemble the report.

    The transform works with L - L(0) internally, so base_value carries
    L(0) and the rate is exactly the dual of the normalized functional.
    """
    sched = sched or PitSchedule()
    space = _grid_space(L.space)
    values = np.empty(len(space))
    convergence = []
    for i in range(len(space)):
        value, conv = _dual_point(L, i, sched)
        values[i] = value
        convergence.append(conv)
    return DualReport(
        rate=RateFunction(values, space),
        base_value=float(L.base_value),
        per_point_convergence=tuple(convergence),
    )


def reconstruct(rate: RateFunction, L0: float, F: BoundedFunction) -> float:
    """L0 + max over points of (F - rate), infinite rate entries excluded."""
    finite = rate.finite_mask()
    if not finite.any():
        raise AllInfiniteRate("cannot reconstruct from an all-infinite rate")
    if F.space is not rate.space and F.space != rate.space:
        raise ValidationError("rate and function live on different spaces")
    return float(L0) + float(np.max(F.values[finite] - rate.values[finite]))


def representation_gap(
    L,
    F: BoundedFunction,
    sched: PitSchedule | None = None,
    *,
    dual: DualReport | None = None,
) -> float:
    """L(F) minus its own sup-form reconstruction; >= -1e-9 always.

    Passing a precomputed DualReport amortizes the pit transform when
    probing many functions against one functional.
    """
    report = dual or dual_rate(L, sched)
    return L.evaluate(F) - reconstruct(report.rate, report.base_value, F)


@dataclass(frozen=True)
class SublevelSet:
    """Points with rate <= a, plus their diameter under the space metric."""

    labels: tuple[str, ...]
    indices: tuple[int, ...]
    diameter: float
    level: float


def sublevel_set(rate: RateFunction, a: float) -> SublevelSet:
    """The closed sublevel set {x : rate(x) <= a} with its diameter.

    Empty and singleton sets have diameter 0; the boundary rate = a is
    included.
    """
    if a <= 0:
        raise ValidationError("sublevel threshold must be positive")
    idx = np.nonzero(rate.values <= a)[0]
    labels = tuple(rate.space.point_ids[int(i)] for i in idx)
    return SublevelSet(
        labels=labels,
        indices=tuple(int(i) for i in idx),
        diameter=rate.space.subset_diameter(idx),
        level=float(a),
    )


__all__ = [
    "PitSchedule",
    "PointConvergence",
    "DualReport",
    "SublevelSet",
    "pit_values",
    "dual_rate_at",
    "dual_rate",
    "reconstruct",
    "representation_gap",
    "sublevel_set",
]
