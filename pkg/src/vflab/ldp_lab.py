"""Desk-scale large-deviations experiments on Bernoulli empirical means.

The Cramer instance is fully oracle-checkable: Binomial(n, p)/n measures
on the grid {k/n}, the analytic rate x log(x/p) + (1-x) log((1-x)/(1-p)),
and per-n functional values whose limit the lab extrapolates.

Weight construction is hybrid.  Log weights come from log-gamma and are
good deep into the tails; linear weights take an exact big-integer anchor
at the mode (p has an exact binary representation, so the modal
probability is a rational with power-of-two denominator, correctly
rounded to one float) and spread outward by the two-term recurrence.
That keeps the weight sum within a few ulp of 1 up to n = 2^16, which
pure log-gamma exponentiation does not.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammaln, logsumexp

from .duality import sublevel_set
from .errors import (
    InvalidP,
    InvariantViolation,
    ParseError,
    ScheduleTooShort,
    ValidationError,
)
from .space import STRUCTURAL_TOL, FiniteSpace, ProbabilityMeasure, RateFunction

REFERENCE_GRID = np.linspace(0.0, 1.0, 1025)


@dataclass(frozen=True)
class SequenceEntry:
    """One scale of the sequence: n, its grid space, and the measure."""

    n: int
    space: FiniteSpace
    measure: ProbabilityMeasure


@dataclass(frozen=True)
class MeasureSequence:
    """Measures mu_n indexed by strictly increasing n."""

    description: str
    entries: tuple[SequenceEntry, ...]

    def __post_init__(self):
        ns = [e.n for e in self.entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise InvariantViolation("entries must have strictly increasing n")
        if any(len(e.measure) != len(e.space) for e in self.entries):
            raise InvariantViolation("measure length must match its space")

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class FitOptions:
    """Extrapolation knobs for estimate_limit."""

    fit_fraction: float = 0.5
    residual_tolerance: float = 1e-3
    final_step_tolerance: float = 1e-2


@dataclass(frozen=True)
class LimitReport:
    """Per-n values, the a + b log(n)/n extrapolation, and its quality."""

    terms: tuple[tuple[int, float], ...]
    extrapolated: float
    converged: bool
    fit_slope: float


class GridFunction:
    """Piecewise-linear interpolant on [0, 1], the continuum test function.

    Callable on scalars or arrays; evaluation at grid atoms k/n is plain
    linear interpolation from the reference nodes.
    """

    __slots__ = ("xs", "ys")

    def __init__(self, ys, xs=None):
        ys = np.array(ys, dtype=float)
        xs = REFERENCE_GRID if xs is None else np.array(xs, dtype=float)
        if len(xs) != len(ys) or len(xs) < 2:
            raise ValidationError("grid function needs matching xs/ys, at least two nodes")
        if np.any(np.diff(xs) <= 0):
            raise ValidationError("grid nodes must be strictly increasing")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValidationError("grid function nodes must be finite")
        self.xs = xs
        self.ys = ys

    @classmethod
    def from_callable(cls, fn, xs=None) -> "GridFunction":
        xs = REFERENCE_GRID if xs is None else np.array(xs, dtype=float)
        return cls(np.array([fn(x) for x in xs], dtype=float), xs)

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)


def binomial_weights(n: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact-anchor linear weights and log-gamma log weights for Binomial(n, p).

    Returns (weights, log_weights) over k = 0..n.
    """
    if not 0.0 < p < 1.0:
        raise InvalidP(f"p must lie strictly between 0 and 1, got {p}")
    n = int(n)
    if n < 1:
        raise ValidationError("n must be a positive integer")

    k = np.arange(n + 1)
    log_w = (
        gammaln(n + 1.0)
        - gammaln(k + 1.0)
        - gammaln(n - k + 1.0)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )

    # exact rational anchor at the mode: p = P / 2^s exactly in binary
    P, den = float(p).as_integer_ratio()
    s = den.bit_length() - 1
    Q = den - P
    k0 = min(n, max(0, round(n * p)))
    numerator = math.comb(n, k0) * P**k0 * Q ** (n - k0)
    w = np.zeros(n + 1)
    w[k0] = numerator / (1 << (s * n))  # big-int division rounds correctly

    ratio = p / (1.0 - p)
    acc = w[k0]
    for i in range(k0, n):
        acc = acc * (n - i) / (i + 1) * ratio
        w[i + 1] = acc
        if acc == 0.0:
            break
    acc = w[k0]
    for i in range(k0, 0, -1):
        acc = acc * i / (n - i + 1) / ratio
        w[i - 1] = acc
        if acc == 0.0:
            break
    return w, log_w


def cramer_grid_space(n: int) -> FiniteSpace:
    coords = np.arange(n + 1) / n
    return FiniteSpace.from_line(coords)


def cramer_sequence(p: float, schedule) -> MeasureSequence:
    """Binomial(n, p)/n on the grid {k/n} for each n in the schedule."""
    if not isinstance(p, (int, float)) or not 0.0 < float(p) < 1.0:
        raise InvalidP(f"p must lie strictly between 0 and 1, got {p!r}")
    ns = [int(n) for n in schedule]
    if not ns:
        raise ValidationError("schedule is empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise InvariantViolation("schedule must be strictly increasing")
    entries = []
    for n in ns:
        w, log_w = binomial_weights(n, float(p))
        entries.append(
            SequenceEntry(
                n=n,
                space=cramer_grid_space(n),
                measure=ProbabilityMeasure(w, log_weights=log_w),
            )
        )
    return MeasureSequence(description=f"bernoulli(p={float(p)!r}) empirical means", entries=tuple(entries))


def cramer_rate(p: float):
    """The analytic rate x log(x/p) + (1-x) log((1-x)/(1-p)), vectorized.

    Finite at the endpoints: I(0) = -log(1-p), I(1) = -log(p).
    """
    if not 0.0 < p < 1.0:
        raise InvalidP(f"p must lie strictly between 0 and 1, got {p}")

    def rate(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            left = np.where(x > 0, x * (np.log(x) - math.log(p)), 0.0)
            right = np.where(x < 1, (1 - x) * (np.log1p(-x) - math.log1p(-p)), 0.0)
        return left + right

    return rate


def ldp_value(entry: SequenceEntry, F) -> float:
    """(1/n) log int e^{nF} dmu_n straight from the stored log weights."""
    coords = entry.space.coords
    if coords is None:
        raise ValidationError("continuum functions need a line space with coordinates")
    f_at_atoms = np.asarray(F(coords), dtype=float)
    return float(logsumexp(entry.n * f_at_atoms + entry.measure.log_weights) / entry.n)


def estimate_limit(seq: MeasureSequence, F, opts: FitOptions | None = None) -> LimitReport:
    """Extrapolate the per-n values to n = infinity.

    Least-squares fit value(n) ~ a + b log(n)/n over the last half of the
    schedule; converged means the fit residual is below 1e-3 and the last
    two terms differ by at most 1e-2.
    """
    opts = opts or FitOptions()
    if len(seq) < 3:
        raise ScheduleTooShort("need at least three schedule entries to extrapolate")
    terms = [(e.n, ldp_value(e, F)) for e in seq.entries]
    count = max(2, math.ceil(len(terms) * opts.fit_fraction))
    tail = terms[-count:]
    ns = np.array([t[0] for t in tail], dtype=float)
    ys = np.array([t[1] for t in tail])
    design = np.column_stack([np.ones_like(ns), np.log(ns) / ns])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    residual = float(np.max(np.abs(design @ coef - ys)))
    final_step = abs(terms[-1][1] - terms[-2][1])
    converged = residual <= opts.residual_tolerance and final_step <= opts.final_step_tolerance
    return LimitReport(
        terms=tuple((int(n), float(v)) for n, v in terms),
        extrapolated=float(coef[0]),
        converged=bool(converged),
        fit_slope=float(coef[1]),
    )


def empirical_rate(entry: SequenceEntry) -> RateFunction:
    """I_n(x) = -(1/n) log mu_n({x}), read off the stored log weights."""
    values = -entry.measure.log_weights / entry.n
    # float cancellation can leave a -1e-17 at near-certain atoms
    return RateFunction(np.maximum(values, 0.0), entry.space)


def empirical_rate_at(entry: SequenceEntry, x: float) -> float:
    """Empirical rate at the grid atom nearest to x (ties toward the lower atom)."""
    coords = entry.space.coords
    i = int(np.argmin(np.abs(coords - float(x))))
    return float(empirical_rate(entry).values[i])


def tightness_scan(seq: MeasureSequence, a: float) -> tuple[tuple[int, float], ...]:
    """Diameter of {x : I_n(x) <= a} for every n in the sequence.

    The diagnostic is stabilization of the diameters under refinement, not
    compactness itself, which is automatic here.
    """
    if a <= 0:
        raise ValidationError("tightness threshold must be positive")
    out = []
    for entry in seq.entries:
        level = sublevel_set(empirical_rate(entry), a)
        out.append((entry.n, float(level.diameter)))
    return tuple(out)


INGEST_RENORM_TOL = 1e-6


def _entry_from_parts(n, points, weights, where: str) -> SequenceEntry:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ParseError(f"{where}: n must be a positive integer", field="n")
    try:
        pts = np.array([float(x) for x in points], dtype=float)
        w = np.array([float(x) for x in weights], dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{where}: points and weights must be numeric lists", field="points") from None
    if len(pts) == 0 or len(pts) != len(w):
        raise ParseError(f"{where}: points and weights must be nonempty and equal length", field="weights")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ParseError(f"{where}: weights must be finite and nonnegative", field="weights")
    total = float(w.sum())
    if abs(total - 1.0) <= STRUCTURAL_TOL:
        measure = ProbabilityMeasure(w)  # keep the stored bits for round-trips
    elif abs(total - 1.0) <= INGEST_RENORM_TOL:
        measure = ProbabilityMeasure(w / total, normalization=total)
    else:
        raise InvariantViolation(
            f"{where}: weights sum to {total!r}, outside the {INGEST_RENORM_TOL} ingest tolerance"
        )
    return SequenceEntry(n=int(n), space=FiniteSpace.from_line(pts), measure=measure)


def _ingest_json(text: str) -> MeasureSequence:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for key in ("description", "entries"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}", field=key)
    if not isinstance(doc["entries"], list):
        raise ParseError("entries must be a list", field="entries")
    entries = []
    for i, item in enumerate(doc["entries"]):
        where = f"entries[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where}: entry must be an object", field="entries")
        for key in ("n", "points", "weights"):
            if key not in item:
                raise ParseError(f"{where}: missing key {key!r}", field=key)
        entries.append(_entry_from_parts(item["n"], item["points"], item["weights"], where))
    return MeasureSequence(description=str(doc["description"]), entries=tuple(entries))


def _ingest_csv(text: str, description: str) -> MeasureSequence:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty CSV", line=1)
    if [c.strip().lower() for c in rows[0]] != ["n", "point", "weight"]:
        raise ParseError("expected header n,point,weight", line=1)
    order: list[int] = []
    groups: dict[int, list[tuple[float, float]]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise ParseError("expected three columns", line=lineno)
        try:
            n, pt, wt = int(row[0]), float(row[1]), float(row[2])
        except ValueError:
            raise ParseError("malformed row", line=lineno) from None
        if n not in groups:
            groups[n] = []
            order.append(n)
        groups[n].append((pt, wt))
    entries = [
        _entry_from_parts(n, [p for p, _ in groups[n]], [w for _, w in groups[n]], f"n={n}")
        for n in order
    ]
    return MeasureSequence(description=description, entries=tuple(entries))


def ingest_sequence(path) -> MeasureSequence:
    """Read a measure sequence from a JSON or CSV file.

    JSON: {"description": s, "entries": [{"n", "points", "weights"}]}.
    CSV: header n,point,weight with rows grouped by n (description falls
    back to the file stem).  Weight sums within 1e-12 of 1 are kept
    bit-exact; within 1e-6 they are renormalized; anything worse is an
    InvariantViolation, as is out-of-order n.
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc.strerror or exc}") from None
    if p.suffix.lower() == ".csv":
        return _ingest_csv(text, p.stem)
    return _ingest_json(text)


__all__ = [
    "REFERENCE_GRID",
    "INGEST_RENORM_TOL",
    "SequenceEntry",
    "MeasureSequence",
    "FitOptions",
    "LimitReport",
    "GridFunction",
    "binomial_weights",
    "cramer_sequence",
    "cramer_grid_space",
    "cramer_rate",
    "ldp_value",
    "estimate_limit",
    "empirical_rate",
    "empirical_rate_at",
    "tightness_scan",
    "ingest_sequence",
]
