import math

import mpmath
import numpy as np
import pytest

from switchlin.ballbeam import benchmark_plant, reduced_dynamics, symbolic_system
from switchlin.controllers import (
    GainSet,
    SingularControlError,
    SwitchThresholds,
    TrackingReference,
    apply_law,
    law1,
    law2,
    law3,
    law_descriptor,
    outer_loop_v,
    pole_gains,
    supervisor,
    table_laws,
    xi_coordinates,
)
from switchlin.geometry import derivative_chain
from switchlin.sim import rk4_step

TH = SwitchThresholds(eps1=0.05, eps4=0.08)


# ---------------------------------------------------------------------------
# supervisor


def test_supervisor_cases():
    assert supervisor((0.2, 0, 0, 0.5), TH) == 1
    assert supervisor((0.01, 0, 0, 0.01), TH) == 3
    assert supervisor((0.01, 0, 0, 0.5), TH) == 2
    assert supervisor((0.2, 0, 0, 0.01), TH) == 2


def test_supervisor_boundary_is_not_law1():
    # |x1| exactly at the threshold fails the strict inequality of case 1
    assert supervisor((0.05, 0, 0, 0.5), TH) == 2
    assert supervisor((0.2, 0, 0, 0.08), TH) == 2
    assert supervisor((0.05, 0, 0, 0.08), TH) == 3


def test_supervisor_partitions_state_space(rng):
    for x in rng.uniform(-1, 1, size=(500, 4)):
        law_id = supervisor(x, TH)
        assert law_id in (1, 2, 3)
        ball_out = abs(x[0]) > TH.eps1
        beam_moving = abs(x[3]) > TH.eps4
        expected = 1 if (ball_out and beam_moving) else 3 if (not ball_out and not beam_moving) else 2
        assert law_id == expected


def test_thresholds_must_be_positive():
    with pytest.raises(ValueError):
        SwitchThresholds(0.0, 0.1)
    with pytest.raises(ValueError):
        SwitchThresholds(0.1, -1.0)


# ---------------------------------------------------------------------------
# laws


def test_law1_mass_ratio_cancels():
    p = benchmark_plant()
    # (G * 0.5) / (2 * 0.2 * 0.5) with the cos term at angle zero
    assert law1((0.2, 0, 0, 0.5), 0.0, p) == pytest.approx(24.525, rel=1e-12)


def test_law1_zero_numerator():
    p = benchmark_plant()
    assert abs(law1((1.0, 0.0, math.pi / 2, 1.0), 0.0, p)) < 1e-12


def test_law1_singularity_guard():
    p = benchmark_plant()
    with pytest.raises(SingularControlError):
        law1((0.0, 0.0, 0.0, 1.0), 1.0, p)


def test_law2_constant_demand():
    p = benchmark_plant()
    expected = -7 / (5 * 9.81)
    assert law2((0, 0, 0, 0), 1.0, p) == pytest.approx(expected, rel=1e-12)


def test_law2_zero_numerator():
    p = benchmark_plant()
    assert law2((0, 0, 0, 1), 0.0, p) == 0.0


def test_law2_reduces_to_tangent():
    p = benchmark_plant()
    assert law2((0, 0, math.pi / 4, 1), 0.0, p) == pytest.approx(1.0, rel=1e-12)


def test_law3_constant_coefficient():
    p = benchmark_plant()
    assert law3((5.0, -2.0, 1.0, 3.0), 1.0, p) == pytest.approx(
        -7 / (5 * 9.81), rel=1e-12
    )
    assert law3((0, 0, 0, 0), 0.0, p) == 0.0


def test_law3_agrees_with_law2_at_origin(rng):
    p = benchmark_plant()
    for v in rng.uniform(-20, 20, size=20):
        assert law3((0, 0, 0, 0), float(v), p) == pytest.approx(
            law2((0, 0, 0, 0), float(v), p), rel=1e-14
        )


def test_apply_law_dispatch():
    p = benchmark_plant()
    x = (0.2, 0.1, 0.05, 0.5)
    assert apply_law(1, x, 0.3, p) == law1(x, 0.3, p)
    assert apply_law(3, x, 0.3, p) == law3(x, 0.3, p)
    with pytest.raises(ValueError):
        apply_law(4, x, 0.0, p)


def test_law1_exactness_through_symbolic_chain(plant, rng):
    # substituting law 1 into y^(3) = b(x) + a(x) u returns v
    chain = derivative_chain(symbolic_system(plant), 3)
    params = plant.symbol_values()
    count = 0
    while count < 1000:
        x = tuple(rng.uniform(-2, 2, size=4))
        if abs(2 * plant.B * x[0] * x[3]) < 0.01:
            continue
        v = float(rng.uniform(-10, 10))
        u = law1(x, v, plant)
        from switchlin.expr import Bindings

        at_x = Bindings(params, x)
        y3 = chain.b.evaluate(at_x) + chain.a.evaluate(at_x) * u
        assert abs(y3 - v) < 1e-10 * max(1.0, abs(v))
        count += 1


def test_law2_exactness_in_xi_dynamics(plant, rng):
    # xi4dot = BG x4^2 sin x3 - BG cos x3 * u equals v under law 2
    B, G = plant.B, plant.G
    count = 0
    while count < 1000:
        x = tuple(rng.uniform(-2, 2, size=4))
        if abs(math.cos(x[2])) < 0.1:
            continue
        v = float(rng.uniform(-10, 10))
        u = law2(x, v, plant)
        xi4dot = B * G * x[3] ** 2 * math.sin(x[2]) - B * G * math.cos(x[2]) * u
        assert abs(xi4dot - v) < 1e-10 * max(1.0, abs(v))
        count += 1


def test_selected_law_regularity(plant, rng):
    # wherever the supervisor picks a law, that law's coefficient is bounded
    # away from zero (for beam angles within 60 degrees)
    B, G = plant.B, plant.G
    for _ in range(1000):
        x = (
            float(rng.uniform(-1, 1)),
            float(rng.uniform(-1, 1)),
            float(rng.uniform(-math.pi / 3, math.pi / 3)),
            float(rng.uniform(-1, 1)),
        )
        law_id = supervisor(x, TH)
        if law_id == 1:
            assert abs(2 * B * x[0] * x[3]) >= 2 * B * TH.eps1 * TH.eps4
        elif law_id == 2:
            assert abs(B * G * math.cos(x[2])) >= B * G / 2
        else:
            assert abs(-B * G) == B * G


# ---------------------------------------------------------------------------
# coordinates


def test_xi_coordinates_at_origin(plant):
    assert xi_coordinates((0, 0, 0, 0), plant) == (0.0, 0.0, 0.0, 0.0)


def test_xi_coordinates_values(plant):
    xi = xi_coordinates((0.1, 0.2, 0.0, 1.0), plant)
    assert xi[0] == 0.1 and xi[1] == 0.2 and xi[2] == 0.0
    assert xi[3] == pytest.approx(-(5 / 7) * 9.81, rel=1e-12)


def test_xi3_at_vertical_beam(plant):
    xi = xi_coordinates((0, 0, math.pi / 2, 0), plant)
    assert xi[2] == pytest.approx(-(5 / 7) * 9.81, rel=1e-12)


# ---------------------------------------------------------------------------
# pole placement


def test_pole_gains_values():
    assert pole_gains(-4, 3).alphas == (64.0, 48.0, 12.0)
    assert pole_gains(-3, 4).alphas == (81.0, 108.0, 54.0, 12.0)
    assert pole_gains(-1, 3).alphas == (1.0, 3.0, 3.0)


def test_pole_gains_reject_unstable_pole():
    with pytest.raises(ValueError):
        pole_gains(0.0, 3)
    with pytest.raises(ValueError):
        pole_gains(2.0, 4)


def test_pole_gains_positive_for_negative_pole(rng):
    for _ in range(20):
        pole = float(rng.uniform(-6, -0.1))
        for multiplicity in (3, 4):
            gains = pole_gains(pole, multiplicity)
            assert all(a > 0 for a in gains.alphas)


def _companion_roots_highprec(gains: GainSet):
    # companion-matrix eigenvalues in extended precision: a repeated
    # (defective) root cannot be resolved to 1e-8 in double precision
    mpmath.mp.dps = 50
    n = gains.order
    companion = mpmath.zeros(n, n)
    for i in range(1, n):
        companion[i, i - 1] = 1
    for i in range(n):
        companion[i, n - 1] = -mpmath.mpf(gains.alphas[i])
    eigenvalues, _ = mpmath.eig(companion)
    return eigenvalues


@pytest.mark.parametrize("pole, multiplicity", [(-4.0, 3), (-3.0, 4), (-2.5, 3)])
def test_pole_gains_companion_roots(pole, multiplicity):
    gains = pole_gains(pole, multiplicity)
    for root in _companion_roots_highprec(gains):
        assert abs(root - pole) < 1e-8


# ---------------------------------------------------------------------------
# outer loop


def test_outer_loop_feedforward_when_on_reference(plant):
    ref = TrackingReference(0.4, 3.0)
    # construct states with zero error in the respective coordinates
    t = 0.0
    law = law_descriptor(1)
    gains = pole_gains(-4.0, 3)
    x3 = math.asin(-ref.derivative(t, 2) / (plant.B * plant.G))
    x = (ref.derivative(t, 0), ref.derivative(t, 1), x3, 0.0)
    v = outer_loop_v(x, ref, t, law, gains, plant)
    assert v == pytest.approx(ref.derivative(t, 3), abs=1e-9)

    law = law_descriptor(2)
    gains = pole_gains(-3.0, 4)
    t = 0.4
    x3 = math.asin(-ref.derivative(t, 2) / (plant.B * plant.G))
    x4 = -ref.derivative(t, 3) / (plant.B * plant.G * math.cos(x3))
    x = (ref.derivative(t, 0), ref.derivative(t, 1), x3, x4)
    v = outer_loop_v(x, ref, t, law, gains, plant)
    assert v == pytest.approx(ref.derivative(t, 4), abs=1e-9)


def test_outer_loop_hand_value(plant):
    # from rest at the origin against the cosine peak:
    # v = 0 - (64 * (-0.4) + 48 * 0 + 12 * 0.4 * (2 pi / 3)^2)
    ref = TrackingReference(0.4, 3.0)
    expected = 25.6 - 4.8 * (2 * math.pi / 3) ** 2
    v = outer_loop_v((0, 0, 0, 0), ref, 0.0, law_descriptor(1), pole_gains(-4.0, 3), plant)
    assert v == pytest.approx(expected, rel=1e-12)


def test_outer_loop_order_mismatch(plant):
    ref = TrackingReference(0.4, 3.0)
    with pytest.raises(ValueError):
        outer_loop_v((0, 0, 0, 0), ref, 0.0, law_descriptor(1), pole_gains(-3.0, 4), plant)


def test_tracking_reference_derivatives_are_exact():
    ref = TrackingReference(0.4, 3.0)
    w = 2 * math.pi / 3
    for t in (0.0, 0.3, 1.2):
        assert ref.value(t) == pytest.approx(0.4 * math.cos(w * t), rel=1e-15)
        assert ref.derivative(t, 1) == pytest.approx(-0.4 * w * math.sin(w * t), abs=1e-15)
        assert ref.derivative(t, 4) == pytest.approx(0.4 * w**4 * math.cos(w * t), rel=1e-14)
    step = 1e-6
    for order in range(4):
        numeric = (ref.derivative(0.7 + step, order) - ref.derivative(0.7 - step, order)) / (
            2 * step
        )
        assert numeric == pytest.approx(ref.derivative(0.7, order + 1), rel=1e-7, abs=1e-6)


def test_tracking_reference_validation():
    with pytest.raises(ValueError):
        TrackingReference(-0.1, 3.0)
    with pytest.raises(ValueError):
        TrackingReference(0.4, 0.0)


# ---------------------------------------------------------------------------
# law descriptors


def test_descriptors_match_closed_forms(plant, rng):
    params = plant.symbol_values()
    for law_id, law_fn in ((1, law1), (2, law2), (3, law3)):
        descriptor = law_descriptor(law_id)
        count = 0
        while count < 200:
            x = tuple(rng.uniform(-1.5, 1.5, size=4))
            if descriptor.validity_margin(x, params) < 0.05:
                continue
            v = float(rng.uniform(-5, 5))
            assert descriptor.control(x, v, params) == pytest.approx(
                law_fn(x, v, plant), rel=1e-12, abs=1e-12
            )
            count += 1


def test_descriptor_factor_labels():
    assert [f.label for f in law_descriptor(1).factors] == ["x1", "x4"]
    assert [f.label for f in law_descriptor(2).factors] == ["cos(x3)"]
    assert law_descriptor(3).factors == ()
    alt = law_descriptor(3, g_modified=True)
    assert len(alt.factors) == 1
    assert alt.name == "law3g"


def test_descriptor_validity_margin(plant):
    params = plant.symbol_values()
    assert law_descriptor(3).validity_margin((0, 0, 0, 0), params) == math.inf
    margin = law_descriptor(1).validity_margin((0.2, 0, 0, -0.5), params)
    assert margin == pytest.approx(0.2, rel=1e-12)


def test_g_modified_variant_only_for_law3():
    with pytest.raises(ValueError):
        law_descriptor(1, g_modified=True)


def test_table_laws_names():
    assert [d.name for d in table_laws()] == ["law1", "law2", "law3"]
    assert [d.name for d in table_laws(alternate_law3=True)] == ["law1", "law2", "law3g"]


# ---------------------------------------------------------------------------
# closed-loop output jerk under law 1


def test_law1_closed_loop_third_derivative(plant):
    # integrate with law 1 and constant v, then difference the recorded
    # output three times: the measured jerk must equal v
    v = 0.5
    h = 1e-3
    x = (0.3, 0.0, 0.0, 0.5)
    positions = []
    for _ in range(400):
        u = law1(x, v, plant)
        positions.append(x[0])
        # continuous feedback: recompute the law inside the step stages
        x = rk4_step(lambda s: reduced_dynamics(s, law1(s, v, plant), plant), x, h)
    y = np.array(positions)
    jerk = (-0.5 * y[:-4] + y[1:-3] - y[3:-1] + 0.5 * y[4:]) / h**3
    tail = jerk[50:]
    assert np.max(np.abs(tail - v)) < 1e-3
