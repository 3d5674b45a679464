"""Control laws, the tracking outer loop, and the supervisory switching rule.

Three laws, each of the form u = (-b_i(x) + v) / a_i(x):

====  =====  =======================  ==========================
law   order  coefficient a_i(x)       valid where
====  =====  =======================  ==========================
1     3      2 B x1 x4                x1 != 0 and x4 != 0
2     4      -B G cos(x3)             cos(x3) != 0
3     4      -B G                     everywhere
====  =====  =======================  ==========================

Law 1 inverts the exact third-order output chain; its coefficient vanishes
when the ball sits at the pivot (x1 = 0) or the beam is momentarily at
rest (x4 = 0).  Law 2 drops the centrifugal term B x1 x4^2 (higher order
near those sets) and inverts the resulting fourth-order chain written in
the approximate coordinates

    xi = (x1, x2, -B G sin x3, -B G x4 cos x3),

trading the old singularity for a new one at cos(x3) = 0, transverse to
the old.  Law 3 additionally freezes the coefficient at its value on the
operating manifold x1 = x4 = 0, giving a constant, nowhere-singular
coefficient a_3 = -B G with b_3 = 0; the supervisor only engages it where
|x1| and |x4| are small, so the frozen terms are small there.  A fourth
descriptor exposes the unfrozen g-modification coefficient
2 B x2 x4 - B G cos(x3); it is not used by the supervisor but lets the
coverage analysis exhibit how modified laws keep vanishing on the
singularity components they do not target.

The supervisor sigma(x) is memoryless: law 1 when |x1| > eps1 and
|x4| > eps4, law 3 when |x1| <= eps1 and |x4| <= eps4, law 2 otherwise.
The outer loop places all tracking-error poles at a single point p via
the binomial gains of (s - p)^order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .ballbeam import PlantParams
from .expr import Bindings, Real, ScalarField, parse
from .geometry import SingularityFactor

__all__ = [
    "GainSet",
    "LawDescriptor",
    "SingularControlError",
    "SwitchThresholds",
    "TrackingReference",
    "apply_law",
    "law1",
    "law2",
    "law3",
    "law_descriptor",
    "outer_loop_v",
    "pole_gains",
    "supervisor",
    "table_laws",
    "xi_coordinates",
]

#: coefficient magnitude below which a law refuses to divide; practical
#: guarding is the supervisor's job, this floor only stops 1/0
COEFFICIENT_FLOOR = 1e-300


class SingularControlError(ArithmeticError):
    """A control law was evaluated essentially on its singularity set."""

    def __init__(self, law_id: int, coefficient: float):
        super().__init__(
            f"law {law_id} coefficient {coefficient!r} is below the floor "
            f"{COEFFICIENT_FLOOR}"
        )
        self.law_id = law_id
        self.coefficient = coefficient


@dataclass(frozen=True)
class SwitchThresholds:
    """Switching thresholds on |x1| [m] and |x4| [rad/s]; strictly positive."""

    eps1: float
    eps4: float

    def __post_init__(self):
        if not (self.eps1 > 0 and self.eps4 > 0):
            raise ValueError("switching thresholds must be strictly positive")


def supervisor(x: Sequence[float], thresholds: SwitchThresholds) -> int:
    """Memoryless law selection; every state maps to exactly one of 1, 2, 3."""
    ball_out = abs(x[0]) > thresholds.eps1
    beam_moving = abs(x[3]) > thresholds.eps4
    if ball_out and beam_moving:
        return 1
    if not ball_out and not beam_moving:
        return 3
    return 2


@dataclass(frozen=True)
class TrackingReference:
    """Cosine reference y_d(t) = amplitude * cos(2 pi t / period) [m]."""

    amplitude: float
    period: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("reference amplitude must be non-negative")
        if not self.period > 0:
            raise ValueError("reference period must be positive")

    def derivative(self, t: float, order: int = 0) -> float:
        """Exact analytic derivative y_d^(order)(t) for order >= 0."""
        if order < 0:
            raise ValueError("derivative order must be non-negative")
        omega = 2.0 * math.pi / self.period
        scale = self.amplitude * omega**order
        phase = omega * t
        # d/dt cycles cos -> -sin -> -cos -> sin
        match order % 4:
            case 0:
                return scale * math.cos(phase)
            case 1:
                return -scale * math.sin(phase)
            case 2:
                return -scale * math.cos(phase)
            case _:
                return scale * math.sin(phase)

    def value(self, t: float) -> float:
        return self.derivative(t, 0)


@dataclass(frozen=True)
class GainSet:
    """Outer-loop gains: alphas[j] multiplies the j-th error derivative.

    These are the trailing coefficients of (s - pole)^order, so the
    closed-loop error dynamics put all ``order`` poles at ``pole``.
    """

    pole: float
    order: int
    alphas: tuple[float, ...]


def pole_gains(pole: float, multiplicity: int) -> GainSet:
    """Binomial expansion of (s - pole)^multiplicity, leading 1 excluded."""
    if not pole < 0:
        raise ValueError(f"pole must be strictly negative, got {pole!r}")
    if isinstance(multiplicity, bool) or not isinstance(multiplicity, int) or multiplicity < 1:
        raise ValueError(f"multiplicity must be a positive integer, got {multiplicity!r}")
    alphas = tuple(
        math.comb(multiplicity, j) * (-pole) ** (multiplicity - j)
        for j in range(multiplicity)
    )
    return GainSet(pole=pole, order=multiplicity, alphas=alphas)


# ---------------------------------------------------------------------------
# the laws, closed form


def law1(x: Sequence[float], v: float, p: PlantParams) -> float:
    """Exact input-output linearisation, u = (-B x2 x4^2 + B G x4 cos x3 + v) / (2 B x1 x4)."""
    x1, x2, x3, x4 = x
    a = 2.0 * p.B * x1 * x4
    if abs(a) < COEFFICIENT_FLOOR:
        raise SingularControlError(1, a)
    return (-p.B * x2 * x4 * x4 + p.B * p.G * x4 * math.cos(x3) + v) / a


def law2(x: Sequence[float], v: float, p: PlantParams) -> float:
    """Centrifugal-term-dropping law, u = (B G x4^2 sin x3 - v) / (B G cos x3)."""
    x1, x2, x3, x4 = x
    a = p.B * p.G * math.cos(x3)
    if abs(a) < COEFFICIENT_FLOOR:
        raise SingularControlError(2, a)
    return (p.B * p.G * x4 * x4 * math.sin(x3) - v) / a


def law3(x: Sequence[float], v: float, p: PlantParams) -> float:
    """Constant-coefficient law u = v / (-B G); defined everywhere."""
    return v / (-p.B * p.G)


def apply_law(law_id: int, x: Sequence[float], v: float, p: PlantParams) -> float:
    if law_id == 1:
        return law1(x, v, p)
    if law_id == 2:
        return law2(x, v, p)
    if law_id == 3:
        return law3(x, v, p)
    raise ValueError(f"unknown law id {law_id!r}")


def xi_coordinates(
    x: Sequence[float], p: PlantParams
) -> tuple[float, float, float, float]:
    """Approximate output-derivative coordinates (x1, x2, -BG sin x3, -BG x4 cos x3)."""
    x1, x2, x3, x4 = x
    bg = p.B * p.G
    return (x1, x2, -bg * math.sin(x3), -bg * x4 * math.cos(x3))


# ---------------------------------------------------------------------------
# symbolic law descriptors


@dataclass(frozen=True)
class LawDescriptor:
    """Symbolic description of one control law u = (-offset + v) / coefficient.

    ``factors`` lists the smooth factors whose simultaneous non-vanishing
    defines the validity domain; their zero sets are the law's declared
    singularity components.  A law with no factors is valid everywhere.
    """

    law_id: int
    name: str
    order: int
    coefficient: ScalarField
    offset: ScalarField
    factors: tuple[SingularityFactor, ...]

    def coefficient_value(self, x: Sequence[float], params: Mapping[str, Real]) -> float:
        return self.coefficient.evaluate(Bindings(params, tuple(x)))

    def offset_value(self, x: Sequence[float], params: Mapping[str, Real]) -> float:
        return self.offset.evaluate(Bindings(params, tuple(x)))

    def validity_margin(self, x: Sequence[float], params: Mapping[str, Real]) -> float:
        """min_i |phi_i(x)| over the declared factors; +inf when there are none."""
        at_x = Bindings(params, tuple(x))
        return min(
            (abs(f.field.evaluate(at_x)) for f in self.factors), default=math.inf
        )

    def control(self, x: Sequence[float], v: float, params: Mapping[str, Real]) -> float:
        a = self.coefficient_value(x, params)
        if abs(a) < COEFFICIENT_FLOOR:
            raise SingularControlError(self.law_id, a)
        return (-self.offset_value(x, params) + v) / a


def law_descriptor(law_id: int, *, g_modified: bool = False) -> LawDescriptor:
    """Build the symbolic descriptor for one law.

    ``g_modified=True`` selects the unfrozen variant of law 3 whose
    coefficient 2 B x2 x4 - B G cos(x3) retains its state dependence; it
    exists for coverage and transversality analysis, not for supervision.
    """
    if g_modified and law_id != 3:
        raise ValueError("only law 3 has a g-modified variant")
    if law_id == 1:
        return LawDescriptor(
            law_id=1,
            name="law1",
            order=3,
            coefficient=parse("2*B*x1*x4", 4),
            offset=parse("B*x2*x4^2 - B*G*x4*cos(x3)", 4),
            factors=(
                SingularityFactor(parse("x1", 4), "x1"),
                SingularityFactor(parse("x4", 4), "x4"),
            ),
        )
    if law_id == 2:
        return LawDescriptor(
            law_id=2,
            name="law2",
            order=4,
            coefficient=parse("-B*G*cos(x3)", 4),
            offset=parse("B*G*x4^2*sin(x3)", 4),
            factors=(SingularityFactor(parse("cos(x3)", 4), "cos(x3)"),),
        )
    if law_id == 3:
        if g_modified:
            coefficient = parse("2*B*x2*x4 - B*G*cos(x3)", 4)
            return LawDescriptor(
                law_id=3,
                name="law3g",
                order=4,
                coefficient=coefficient,
                offset=parse("0", 4),
                factors=(
                    SingularityFactor(coefficient, "2*B*x2*x4 - B*G*cos(x3)"),
                ),
            )
        return LawDescriptor(
            law_id=3,
            name="law3",
            order=4,
            coefficient=parse("-B*G", 4),
            offset=parse("0", 4),
            factors=(),
        )
    raise ValueError(f"unknown law id {law_id!r}")


def table_laws(alternate_law3: bool = False) -> tuple[LawDescriptor, ...]:
    """The three shipped laws; optionally with the g-modified law 3 variant."""
    return (
        law_descriptor(1),
        law_descriptor(2),
        law_descriptor(3, g_modified=alternate_law3),
    )


# ---------------------------------------------------------------------------
# outer loop


def outer_loop_v(
    x: Sequence[float],
    ref: TrackingReference,
    t: float,
    law: LawDescriptor,
    gains: GainSet,
    p: PlantParams,
) -> float:
    """Pole-placement virtual input v = y_d^(order) - sum_j alpha_j e^(j).

    For the order-3 law the error derivatives come from the exact chain
    (e, e', e'') = (x1 - y_d, x2 - y_d', L_f^2 h(x) - y_d''); the order-4
    laws use the approximate coordinates, e^(j) = xi_{j+1} - y_d^(j).
    """
    if gains.order != law.order:
        raise ValueError(
            f"gain order {gains.order} does not match law order {law.order}"
        )
    if law.order == 3:
        x1, x2, x3, x4 = x
        y_dd = p.B * (x1 * x4 * x4 - p.G * math.sin(x3))
        errors = (
            x1 - ref.derivative(t, 0),
            x2 - ref.derivative(t, 1),
            y_dd - ref.derivative(t, 2),
        )
    elif law.order == 4:
        xi = xi_coordinates(x, p)
        errors = tuple(xi[j] - ref.derivative(t, j) for j in range(4))
    else:
        raise ValueError(f"unsupported law order {law.order}")
    feedback = 0.0
    for alpha, error in zip(gains.alphas, errors):
        feedback += alpha * error
    return ref.derivative(t, law.order) - feedback
