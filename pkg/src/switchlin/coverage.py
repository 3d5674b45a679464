"""Coverage and necessity analysis for families of control laws.

A control coefficient with the factored form a(x) = c(x) phi_1(x) ...
phi_k(x), c nonvanishing, has a singularity set that is the union of the
factor zero sets S_i = {phi_i = 0}.  This module provides the numeric
evidence machinery around that structure:

* ``factor_check`` estimates the cofactor c(x) = a(x) / prod phi_i(x) by
  sampling and reports its spread, so a wrong or non-minimal factor list
  shows up as a large residual;
* ``pure_part_sample`` draws points from one component's pure part
  X_i = S_i minus the other components, where exactly one factor is zero;
* ``coverage_check`` samples a box (plus deterministic probes placed on
  each component and each pairwise intersection) and reports every state
  at which no supplied law is valid;
* ``necessity_witness`` deterministically searches the declared
  singularity sets for a state where every supplied law's coefficient
  vanishes, demonstrating that the given subset of laws cannot cover the
  state space;
* ``transversality_report`` stacks factor differentials at given points
  and reports their ranks.

Validity is margin-based: a law covers a state when every declared factor
exceeds the margin in magnitude.  Because zeros of transcendental factors
(e.g. cos x3 at x3 = pi/2) are only representable to rounding error,
magnitudes at or below ``ZERO_FLOOR`` count as zero even at margin 0.

All sampling is seeded and all searches are grid-based, so every function
here is deterministic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import brentq

from .controllers import LawDescriptor
from .expr import Bindings, Real, ScalarField, state_indices
from .geometry import SingularityFactor, transversality_rank

__all__ = [
    "CoverageReport",
    "FactorCheck",
    "SamplingError",
    "TransversalityRecord",
    "Witness",
    "coverage_check",
    "factor_check",
    "necessity_witness",
    "pure_part_sample",
    "transversality_report",
]

#: magnitudes at or below this count as an exact zero in validity checks
ZERO_FLOOR = 1e-12

#: clearance required from the other components when sampling a pure part
PURE_PART_CLEARANCE = 0.1

#: coefficient magnitude below which a law counts as failed in the
#: necessity search
NECESSITY_TOL = 1e-9

Box = Sequence[tuple[float, float]]


class SamplingError(RuntimeError):
    """A sampling routine could not find enough admissible points."""


# ---------------------------------------------------------------------------
# factorisation check


@dataclass(frozen=True)
class FactorCheck:
    """Cofactor estimate for a(x) = c(x) prod phi_i(x) over sampled points."""

    constant_estimate: float
    max_relative_residual: float
    samples: int


def factor_check(
    a: ScalarField,
    factors: Sequence[SingularityFactor],
    box: Box,
    n: int,
    params: Mapping[str, Real],
    seed: int = 0,
) -> FactorCheck:
    """Estimate c(x) = a(x) / prod phi_i(x) at n sampled points.

    Points too close to any factor's zero set are resampled (the quotient
    is ill-conditioned there).  The residual is the largest relative
    deviation of the pointwise quotients from their median; a residual far
    from zero means the quotient is not constant, i.e. the factor list
    does not exhaust the coefficient's state dependence.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if not factors:
        raise ValueError("need at least one factor")
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in box])
    highs = np.array([hi for _, hi in box])
    quotients: list[np.ndarray] = []
    accepted = 0
    attempts = 0
    while accepted < n:
        attempts += 1
        if attempts > 100:
            raise SamplingError(
                f"could not find {n} points clear of the factor zero sets"
            )
        batch = rng.uniform(lows, highs, size=(max(n, 1024), len(box)))
        magnitudes = np.column_stack(
            [np.abs(f.field.evaluate_many(params, batch)) for f in factors]
        )
        keep = np.min(magnitudes, axis=1) > 1e-8
        batch = batch[keep]
        if batch.size == 0:
            continue
        product = np.ones(len(batch))
        for f in factors:
            product *= f.field.evaluate_many(params, batch)
        quotients.append(a.evaluate_many(params, batch) / product)
        accepted += len(batch)
    values = np.concatenate(quotients)[:n]
    c = float(np.median(values))
    residual = float(np.max(np.abs(values - c)) / max(abs(c), 1e-300))
    return FactorCheck(constant_estimate=c, max_relative_residual=residual, samples=n)


# ---------------------------------------------------------------------------
# pure parts


def pure_part_sample(
    index: int,
    factors: Sequence[SingularityFactor],
    box: Box,
    n: int,
    params: Mapping[str, Real],
    seed: int = 0,
    clearance: float = PURE_PART_CLEARANCE,
) -> np.ndarray:
    """n points on the pure part X_index: phi_index = 0, |phi_j| > clearance.

    ``index`` is 1-based.  Coordinate factors are pinned to zero exactly;
    any other factor is solved to rounding error along a random line
    through the sampled point.  Raises SamplingError when 100 n attempts
    do not produce n admissible points.
    """
    if not 1 <= index <= len(factors):
        raise ValueError(f"factor index {index} out of range 1..{len(factors)}")
    target = factors[index - 1]
    others = [f for i, f in enumerate(factors, start=1) if i != index]
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in box])
    highs = np.array([hi for _, hi in box])
    dim = len(box)
    points = []
    attempts = 0
    while len(points) < n:
        attempts += 1
        if attempts > 100 * n:
            raise SamplingError(
                f"could not place {n} points on the pure part of "
                f"{target.label!r} within {100 * n} attempts"
            )
        point = rng.uniform(lows, highs)
        pinned = target.pinned_coordinate
        if pinned is not None:
            point[pinned - 1] = 0.0
        else:
            solved = _solve_on_line(target.field, point, rng.normal(size=dim), params)
            if solved is None:
                continue
            point = solved
        at_point = Bindings(params, tuple(point))
        if abs(target.field.evaluate(at_point)) > ZERO_FLOOR:
            continue
        if all(abs(f.field.evaluate(at_point)) > clearance for f in others):
            points.append(point)
    return np.array(points)


def _solve_on_line(
    field: ScalarField,
    base: np.ndarray,
    direction: np.ndarray,
    params: Mapping[str, Real],
    span: float = 8.0,
) -> np.ndarray | None:
    """Root of field along base + t * direction, t in [-span, span], or None."""
    norm = np.linalg.norm(direction)
    if norm == 0:
        return None
    direction = direction / norm

    def along(t: float) -> float:
        return field.evaluate(Bindings(params, tuple(base + t * direction)))

    ts = np.linspace(-span, span, 161)
    values = [along(t) for t in ts]
    for left, right, f_left, f_right in zip(ts, ts[1:], values, values[1:]):
        if f_left == 0.0:
            return base + left * direction
        if f_left * f_right < 0:
            root = brentq(along, left, right, xtol=1e-15, rtol=8.9e-16)
            return base + root * direction
    return None


# ---------------------------------------------------------------------------
# coverage check


@dataclass(frozen=True)
class Witness:
    """A state at which every supplied law's validity margin failed."""

    state: tuple[float, ...]
    coefficients: tuple[tuple[str, float], ...]  # (law name, coefficient value)


@dataclass(frozen=True)
class CoverageReport:
    sample_count: int
    probe_count: int
    margin: float
    witnesses: tuple[Witness, ...]
    witness_total: int
    law_fractions: tuple[tuple[str, float], ...]

    @property
    def complete(self) -> bool:
        return self.witness_total == 0

    def report_text(self) -> str:
        lines = [
            f"samples: {self.sample_count} (+ {self.probe_count} deterministic probes)",
            f"margin: {_fmt(self.margin)}",
        ]
        for name, fraction in self.law_fractions:
            lines.append(f"covered fraction, {name}: {_fmt(fraction)}")
        lines.append(f"witnesses: {self.witness_total}")
        if self.complete:
            lines.append("coverage complete")
        else:
            lines.append("coverage INCOMPLETE")
            for witness in self.witnesses[:10]:
                coeffs = ", ".join(f"{n}={_fmt(v)}" for n, v in witness.coefficients)
                lines.append(f"  witness {_fmt_state(witness.state)}  [{coeffs}]")
            if self.witness_total > 10:
                lines.append(f"  ... {self.witness_total - 10} more")
        return "\n".join(lines) + "\n"

    def witnesses_csv(self) -> str:
        lines = ["x1,x2,x3,x4,failed_laws"]
        for witness in self.witnesses:
            failed = ";".join(name for name, _ in witness.coefficients)
            lines.append(
                ",".join(_fmt(v) for v in witness.state) + f",{failed}"
            )
        return "\n".join(lines) + "\n"


def _fmt(value: float) -> str:
    if value == 0.0:
        value = 0.0  # normalise negative zero
    return f"{value:.9g}"


def _fmt_state(state: Sequence[float]) -> str:
    return "(" + ", ".join(_fmt(v) for v in state) + ")"


#: grid for the free coordinates of deterministic probes
_PROBE_GRID = (0.0, 1.0, -1.0)

#: cap on stored witnesses (the total is always reported exactly)
_WITNESS_CAP = 10_000


def coverage_check(
    laws: Sequence[LawDescriptor],
    box: Box,
    n: int,
    margin: float,
    params: Mapping[str, Real],
    seed: int = 0,
) -> CoverageReport:
    """Sample the box and probe the declared singularity sets for coverage gaps.

    A law covers a state when all of its declared factors exceed
    max(margin, ZERO_FLOOR) in magnitude; a law with no factors covers
    every state.  Witnesses are states covered by no law.  Probes are
    placed on every component and every pairwise intersection of the
    supplied laws' factors, so gaps of measure zero are found even though
    random samples almost never land on them.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if n < 0:
        raise ValueError("sample count must be non-negative")
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in box])
    highs = np.array([hi for _, hi in box])
    samples = rng.uniform(lows, highs, size=(n, len(box)))
    probes = _factor_probes([f for law in laws for f in law.factors], len(box))
    states = np.vstack([samples, probes]) if len(probes) else samples

    threshold = max(margin, ZERO_FLOOR)
    covered_any = np.zeros(len(states), dtype=bool)
    fractions = []
    covered_by = {}
    for law in laws:
        covered = np.ones(len(states), dtype=bool)
        for factor in law.factors:
            covered &= np.abs(factor.field.evaluate_many(params, states)) > threshold
        covered_by[law.name] = covered
        covered_any |= covered
        fractions.append((law.name, float(np.mean(covered)) if len(states) else 1.0))

    witness_states = states[~covered_any]
    witnesses = []
    for state in witness_states[:_WITNESS_CAP]:
        at_state = tuple(float(v) for v in state)
        coeffs = tuple((law.name, law.coefficient_value(at_state, params)) for law in laws)
        witnesses.append(Witness(state=at_state, coefficients=coeffs))
    return CoverageReport(
        sample_count=int(n),
        probe_count=len(probes),
        margin=margin,
        witnesses=tuple(witnesses),
        witness_total=int(len(witness_states)),
        law_fractions=tuple(fractions),
    )


def _factor_probes(factors: Sequence[SingularityFactor], dim: int) -> np.ndarray:
    """Deterministic points on each factor zero set and pairwise intersection."""
    unique: list[SingularityFactor] = []
    for factor in factors:
        if all(factor.field != u.field for u in unique):
            unique.append(factor)
    solutions = []
    for factor in unique:
        pinned = factor.pinned_coordinate
        if pinned is not None:
            solutions.append({pinned: (0.0,)})
            continue
        var = _single_variable(factor.field)
        if var is None:
            continue  # multi-variable factor: probed only via the grid
        roots = _axis_roots(factor.field, var)
        if roots:
            solutions.append({var: tuple(roots)})
    points: list[tuple[float, ...]] = []
    seen = set()
    for size in (1, 2):
        for combo in itertools.combinations(solutions, size):
            pins: dict[int, tuple[float, ...]] = {}
            ok = True
            for solution in combo:
                (var, roots), = solution.items()
                if var in pins:
                    ok = False
                    break
                pins[var] = roots
            if not ok:
                continue
            axes = [
                pins.get(i, _PROBE_GRID) for i in range(1, dim + 1)
            ]
            for point in itertools.product(*axes):
                if point not in seen:
                    seen.add(point)
                    points.append(point)
    return np.array(points) if points else np.empty((0, dim))


def _single_variable(field: ScalarField) -> int | None:
    found = state_indices(field.expr)
    if len(found) == 1:
        return next(iter(found))
    return None


def _axis_roots(
    field: ScalarField, var: int, span: float = math.pi, samples: int = 257
) -> list[float]:
    """Roots of a single-variable factor along its axis in [-span, span]."""
    base = np.zeros(field.dim)

    def along(t: float) -> float:
        point = base.copy()
        point[var - 1] = t
        return field.evaluate(Bindings({}, tuple(point)))

    try:
        ts = np.linspace(-span, span, samples)
        values = [along(t) for t in ts]
    except ArithmeticError:
        return []
    roots = []
    for left, right, f_left, f_right in zip(ts, ts[1:], values, values[1:]):
        if f_left == 0.0:
            roots.append(float(left))
        elif f_left * f_right < 0:
            roots.append(float(brentq(along, left, right, xtol=1e-15, rtol=8.9e-16)))
    if values[-1] == 0.0:
        roots.append(float(ts[-1]))
    return roots


# ---------------------------------------------------------------------------
# necessity witness search

#: candidate values for unpinned coordinates, largest magnitudes first so
#: pure-part clearance constraints are met early; 21 points over [-1, 1]
_AXIS_CANDIDATES = (0.0,) + tuple(
    sign * k / 10.0 for k in range(10, 0, -1) for sign in (1.0, -1.0)
)

#: extra probes for the beam-angle axis, where trig factors vanish
_X3_SPECIAL = (0.0, math.pi / 2, -math.pi / 2, math.pi / 4, -math.pi / 4)

_X3_AXIS_INDEX = 3


def necessity_witness(
    laws: Sequence[LawDescriptor],
    factors: Sequence[SingularityFactor] | None = None,
    params: Mapping[str, Real] | None = None,
    tol: float = NECESSITY_TOL,
) -> tuple[float, ...] | None:
    """Deterministic search for a state where every supplied law fails.

    The search walks the declared singularity structure: first the pure
    part of each coordinate factor (pinned to zero, with the remaining
    factors held clear of zero), then every intersection of two or more
    pinned factors, then a plain grid.  Coordinate grids run over [-1, 1]
    at 21 points per axis, plus beam-angle probes at 0, +-pi/4, +-pi/2.
    Returns the first state at which every law's coefficient magnitude is
    below ``tol``, or None.

    A law that declares no singularity factors is valid everywhere by
    declaration, so no witness can exist and the search is skipped.
    """
    laws = list(laws)
    if params is None:
        params = {}
    if not laws:
        return None
    if any(not law.factors for law in laws):
        return None
    if factors is None:
        collected: list[SingularityFactor] = []
        for law in laws:
            for factor in law.factors:
                if all(factor.field != c.field for c in collected):
                    collected.append(factor)
        factors = collected
    dim = laws[0].coefficient.dim

    def fails_everywhere(point: tuple[float, ...]) -> bool:
        return all(
            abs(law.coefficient_value(point, params)) < tol for law in laws
        )

    pinnable = [f for f in factors if f.pinned_coordinate is not None]

    # stage 1: pure parts of single coordinate factors
    for target in pinnable:
        others = [f for f in factors if f.field != target.field]
        witness = _grid_search(
            dim,
            pins={target.pinned_coordinate: 0.0},
            predicate=fails_everywhere,
            clear_factors=others,
            params=params,
        )
        if witness is not None:
            return witness

    # stage 2: intersections of two or more pinned factors
    for size in range(2, len(pinnable) + 1):
        for combo in itertools.combinations(pinnable, size):
            pins = {f.pinned_coordinate: 0.0 for f in combo}
            if len(pins) < size:
                continue
            witness = _grid_search(
                dim, pins=pins, predicate=fails_everywhere, clear_factors=(), params=params
            )
            if witness is not None:
                return witness

    # stage 3: unconstrained grid, for factor lists with nothing to pin
    return _grid_search(
        dim, pins={}, predicate=fails_everywhere, clear_factors=(), params=params
    )


def _grid_search(
    dim: int,
    pins: Mapping[int, float],
    predicate,
    clear_factors: Sequence[SingularityFactor],
    params: Mapping[str, Real],
) -> tuple[float, ...] | None:
    axes = []
    for i in range(1, dim + 1):
        if i in pins:
            axes.append((pins[i],))
        elif i == _X3_AXIS_INDEX:
            axes.append(
                _X3_SPECIAL + tuple(v for v in _AXIS_CANDIDATES if v != 0.0)
            )
        else:
            axes.append(_AXIS_CANDIDATES)
    for point in itertools.product(*axes):
        if clear_factors:
            at_point = Bindings(params, point)
            if any(
                abs(f.field.evaluate(at_point)) <= PURE_PART_CLEARANCE
                for f in clear_factors
            ):
                continue
        if predicate(point):
            return point
    return None


# ---------------------------------------------------------------------------
# transversality


@dataclass(frozen=True)
class TransversalityRecord:
    point: tuple[float, ...]
    rank: int


def transversality_report(
    factors_a: Sequence[SingularityFactor],
    factors_b: Sequence[SingularityFactor],
    points: Iterable[Sequence[float]],
    params: Mapping[str, Real],
) -> tuple[TransversalityRecord, ...]:
    """Rank of the stacked factor differentials of two laws at given points.

    The points are expected to lie on the relevant zero sets; full rank
    (the number of stacked factors) at a point means the hypersurfaces
    meet transversally there.
    """
    all_factors = list(factors_a) + list(factors_b)
    gradients = [f.field.gradient() for f in all_factors]
    records = []
    for point in points:
        at_point = Bindings(params, tuple(point))
        rows = [
            [component.evaluate(at_point) for component in gradient]
            for gradient in gradients
        ]
        records.append(
            TransversalityRecord(
                point=tuple(float(v) for v in point), rank=transversality_rank(rows)
            )
        )
    return tuple(records)
