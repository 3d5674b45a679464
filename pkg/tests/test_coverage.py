import math

import numpy as np
import pytest

from switchlin.controllers import law_descriptor, table_laws
from switchlin.coverage import (
    SamplingError,
    coverage_check,
    factor_check,
    necessity_witness,
    pure_part_sample,
    transversality_report,
)
from switchlin.expr import Bindings, parse
from switchlin.geometry import SingularityFactor

BOX = [(-1.0, 1.0)] * 4

F_X1 = SingularityFactor(parse("x1", 4), "x1")
F_X4 = SingularityFactor(parse("x4", 4), "x4")
F_COS = SingularityFactor(parse("cos(x3)", 4), "cos(x3)")


# ---------------------------------------------------------------------------
# factorisation check


def test_factor_check_recovers_constant_cofactor(params):
    a = parse("2*B*x1*x4", 4)
    result = factor_check(a, (F_X1, F_X4), BOX, 10_000, params)
    assert result.constant_estimate == pytest.approx(10 / 7, rel=1e-10)
    assert result.max_relative_residual < 1e-12


def test_factor_check_flags_nonminimal_factor_list(params):
    # a = x1^2 against the single factor x1 leaves a non-constant quotient
    a = parse("x1^2", 4)
    result = factor_check(a, (F_X1,), BOX, 2_000, params)
    assert result.max_relative_residual > 1.0


def test_factor_check_trig_factor(params):
    a = parse("-B*G*cos(x3)", 4)
    result = factor_check(a, (F_COS,), BOX, 5_000, params)
    assert result.constant_estimate == pytest.approx(-params["B"] * params["G"], rel=1e-10)
    assert result.max_relative_residual < 1e-10


def test_factor_check_deterministic(params):
    a = parse("2*B*x1*x4", 4)
    first = factor_check(a, (F_X1, F_X4), BOX, 500, params, seed=3)
    second = factor_check(a, (F_X1, F_X4), BOX, 500, params, seed=3)
    assert first == second


def test_factor_check_validation(params):
    with pytest.raises(ValueError):
        factor_check(parse("x1", 4), (), BOX, 10, params)
    with pytest.raises(ValueError):
        factor_check(parse("x1", 4), (F_X1,), BOX, 0, params)


# ---------------------------------------------------------------------------
# pure parts


def test_pure_part_sample_coordinate_factor(params):
    points = pure_part_sample(1, (F_X1, F_X4), BOX, 50, params)
    assert points.shape == (50, 4)
    assert np.all(points[:, 0] == 0.0)
    assert np.all(np.abs(points[:, 3]) > 0.1)


def test_pure_part_sample_second_factor(params):
    points = pure_part_sample(2, (F_X1, F_X4), BOX, 50, params)
    assert np.all(points[:, 3] == 0.0)
    assert np.all(np.abs(points[:, 0]) > 0.1)


def test_pure_parts_are_disjoint(params):
    x1_part = pure_part_sample(1, (F_X1, F_X4), BOX, 40, params)
    x4_part = pure_part_sample(2, (F_X1, F_X4), BOX, 40, params)
    # a point of X1 has x4 clear of zero, a point of X2 has x4 exactly zero
    assert np.all(np.abs(x1_part[:, 3]) > 0.1)
    assert np.all(x4_part[:, 3] == 0.0)


def test_pure_part_sample_root_solved_factor(params):
    # cos(x3) is not a bare coordinate: the sampler solves along a line
    points = pure_part_sample(1, (F_COS, F_X1), BOX, 25, params)
    residuals = np.abs(np.cos(points[:, 2]))
    assert np.max(residuals) < 1e-12
    assert np.all(np.abs(points[:, 0]) > 0.1)


def test_pure_part_sample_validation(params):
    with pytest.raises(ValueError):
        pure_part_sample(3, (F_X1, F_X4), BOX, 5, params)


def test_pure_part_sample_impossible_clearance(params):
    # requiring |x1| > 0.1 while pinning x1 = 0 with itself as the only
    # other factor cannot succeed
    with pytest.raises(SamplingError):
        pure_part_sample(1, (F_X1, F_X1), BOX, 3, params)


# ---------------------------------------------------------------------------
# coverage check


def test_coverage_complete_with_all_three_laws(params):
    report = coverage_check(table_laws(), BOX, 20_000, 0.0, params)
    assert report.complete
    assert report.witness_total == 0
    assert dict(report.law_fractions)["law3"] == 1.0
    assert "coverage complete" in report.report_text()


def test_coverage_law1_alone_fails_on_probes(params):
    report = coverage_check([law_descriptor(1)], BOX, 2_000, 0.0, params)
    assert not report.complete
    states = np.array([w.state for w in report.witnesses])
    assert np.all(np.isclose(states[:, 0], 0) | np.isclose(states[:, 3], 0))
    # every witness records the vanishing coefficient
    for witness in report.witnesses:
        assert abs(dict(witness.coefficients)["law1"]) < 1e-9


def test_coverage_laws_1_2_fail_on_joint_singularity(params):
    laws = [law_descriptor(1), law_descriptor(2)]
    report = coverage_check(laws, BOX, 2_000, 0.0, params)
    assert not report.complete
    hits = [
        w
        for w in report.witnesses
        if abs(w.state[0] * w.state[3]) < 1e-12 and abs(math.cos(w.state[2])) < 1e-9
    ]
    assert hits, "expected a probe on the intersection of both singular sets"
    # a state is a witness exactly when every law's validity margin fails
    for witness in report.witnesses:
        for law in laws:
            assert law.validity_margin(witness.state, params) <= 1e-12


def test_coverage_margin_widens_failures(params):
    strict = coverage_check(table_laws()[:2], BOX, 5_000, 0.0, params, seed=5)
    wide = coverage_check(table_laws()[:2], BOX, 5_000, 0.2, params, seed=5)
    assert wide.witness_total >= strict.witness_total
    assert wide.witness_total > 0


def test_coverage_validation(params):
    with pytest.raises(ValueError):
        coverage_check(table_laws(), BOX, -1, 0.0, params)
    with pytest.raises(ValueError):
        coverage_check(table_laws(), BOX, 10, -0.5, params)


def test_coverage_witness_csv_format(params):
    report = coverage_check([law_descriptor(1)], BOX, 100, 0.0, params)
    lines = report.witnesses_csv().splitlines()
    assert lines[0] == "x1,x2,x3,x4,failed_laws"
    assert len(lines) == len(report.witnesses) + 1
    assert all(line.endswith("law1") for line in lines[1:])


# ---------------------------------------------------------------------------
# necessity witnesses


def test_necessity_single_law(params):
    witness = necessity_witness([law_descriptor(1)], params=params)
    assert witness == (0.0, 0.0, 0.0, 1.0)
    assert abs(law_descriptor(1).coefficient_value(witness, params)) < 1e-9


def test_necessity_two_laws(params):
    laws = [law_descriptor(1), law_descriptor(2)]
    witness = necessity_witness(laws, params=params)
    assert witness is not None
    assert witness[0] * witness[3] == 0.0
    assert abs(math.cos(witness[2])) < 1e-9
    for law in laws:
        assert abs(law.coefficient_value(witness, params)) < 1e-9


def test_necessity_with_g_modified_law(params):
    laws = [law_descriptor(1), law_descriptor(3, g_modified=True)]
    witness = necessity_witness(laws, params=params)
    assert witness is not None
    for law in laws:
        assert abs(law.coefficient_value(witness, params)) < 1e-9


def test_necessity_every_strict_subset_has_a_witness(params):
    # the three state-dependent descriptors: laws 1, 2, and the g-modified
    # variant; every strict subset admits a common-failure state
    family = [law_descriptor(1), law_descriptor(2), law_descriptor(3, g_modified=True)]
    for mask in range(1, 7):  # proper nonempty subsets of a 3-element family
        subset = [law for i, law in enumerate(family) if mask & (1 << i)]
        witness = necessity_witness(subset, params=params)
        assert witness is not None, f"subset mask {mask}"
        for law in subset:
            assert abs(law.coefficient_value(witness, params)) < 1e-9


def test_necessity_none_for_nowhere_singular_family(params):
    # the shipped constant-coefficient law declares no singularity, so no
    # common-failure state can exist
    assert necessity_witness(table_laws(), params=params) is None
    assert necessity_witness([], params=params) is None


def test_necessity_is_deterministic(params):
    laws = [law_descriptor(1), law_descriptor(2)]
    assert necessity_witness(laws, params=params) == necessity_witness(laws, params=params)


# ---------------------------------------------------------------------------
# transversality report


def test_transversality_full_rank_on_joint_singularity(params):
    records = transversality_report(
        law_descriptor(1).factors,
        law_descriptor(2).factors,
        [(0.0, 1.0, math.pi / 2, 0.0)],
        params,
    )
    assert records[0].rank == 3


def test_transversality_identical_factors(params):
    records = transversality_report((F_X1,), (F_X1,), [(0.0, 0.0, 0.0, 0.0)], params)
    assert records[0].rank == 1


def test_transversality_independent_coordinates(params):
    records = transversality_report((F_X1,), (F_X4,), [(0.0, 0.0, 0.0, 0.0)], params)
    assert records[0].rank == 2


def test_transversality_many_points(params, rng):
    points = []
    for k in range(20):
        side = k % 2
        x3 = math.pi / 2 if k % 3 else -math.pi / 2
        point = [0.0, float(rng.uniform(-1, 1)), x3, 0.0]
        point[0 if side else 3] = float(rng.uniform(0.2, 1.0))
        points.append(tuple(point))
    records = transversality_report(
        law_descriptor(1).factors, law_descriptor(2).factors, points, params
    )
    assert all(record.rank == 3 for record in records)


# ---------------------------------------------------------------------------
# gradient sanity for declared factors


def test_factor_gradients_nonzero_on_zero_sets(params, rng):
    for factor, sampler_index, factors in (
        (F_X1, 1, (F_X1, F_X4)),
        (F_X4, 2, (F_X1, F_X4)),
    ):
        points = pure_part_sample(sampler_index, factors, BOX, 20, params, seed=9)
        gradient = factor.field.gradient()
        for point in points:
            at_point = Bindings(params, tuple(point))
            row = [g.evaluate(at_point) for g in gradient]
            assert np.linalg.norm(row) > 0.5
