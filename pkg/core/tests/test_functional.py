import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path so we can import core modules
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.exceptions import InfeasibleConstraintError, InvalidArgumentError
from core.forward import bump_profile, synth_data
from core.functional import (
    FunctionalParams,
    carleman_check,
    convexity_gap,
    cwf,
    cwf_field,
    evaluate_J,
    fit_carleman_constants,
    fit_convexity_constants,
    gradient_check,
    gradient_J,
    random_constrained_field,
    random_pair_in_ball,
    residual_L1,
    residual_L2,
    residual_split,
    run_verification,
    stratified_pairs,
)
from core.grid import Field, constrained_traces, d2_matrix, h2_norm, make_grid, make_k_grid, trapezoid_weights
from core.transform import (
    BoundaryMode,
    BoundarySet,
    FieldPair,
    LiftPair,
    boundary_from_data,
    build_lift,
    exact_chain,
    pair_traces,
)


def zero_lift(grid):
    return LiftPair(Field.zeros(grid), Field.zeros(grid))


def small_lift(grid):
    b = BoundarySet(0.02, -0.05, 0.01, 0.01, 0.03, -0.02, BoundaryMode.FORWARD_CONSISTENT, 0.1)
    return build_lift(b, grid)


class TestWeight:
    def test_values(self):
        assert cwf(0.0, 3.0) == 1.0
        assert cwf(1.0, 1.0) == pytest.approx(np.exp(-2.0))
        np.testing.assert_allclose(cwf(np.array([0.0, 0.5]), 2.0), [1.0, np.exp(-2.0)])

    def test_rejects_small_lambda(self):
        with pytest.raises(InvalidArgumentError, match="lambda"):
            cwf(0.0, 0.5)

    def test_field_on_grid(self):
        grid = make_grid(1.0, 11)
        weight = cwf_field(grid, 2.0)
        assert weight.grid is grid
        np.testing.assert_allclose(weight.values, np.exp(-4.0 * grid.nodes))


class TestResiduals:
    def test_linear_q(self):
        grid = make_grid(1.0, 21)
        fp = FieldPair(Field.from_function(grid, lambda z: z), Field.zeros(grid), 4.0, 1.0)
        params = FunctionalParams(lam=1.0, epsilon=1.0, k=4.0)
        np.testing.assert_allclose(residual_L1(fp, params).values, 4.5, atol=1e-9)
        np.testing.assert_allclose(residual_L2(fp, params).values, 4.5, atol=1e-9)

    def test_zero_pair(self):
        grid = make_grid(1.0, 21)
        fp = FieldPair(Field.zeros(grid), Field.zeros(grid), 2.0, 0.1)
        params = FunctionalParams(lam=2.0, epsilon=0.1, k=2.0)
        assert evaluate_J(fp, params) == 0.0
        assert np.all(gradient_J(fp, params).q.values == 0.0)

    def test_params_must_match_pair(self):
        grid = make_grid(1.0, 21)
        fp = FieldPair(Field.zeros(grid), Field.zeros(grid), 2.0, 0.1)
        with pytest.raises(InvalidArgumentError, match="does not match"):
            evaluate_J(fp, FunctionalParams(lam=2.0, epsilon=0.1, k=3.0))

    def test_residual_difference_is_viscosity_term(self):
        fp, _ = exact_chain(bump_profile(make_grid(1.0, 101)), 2.0, 0.1)
        split = residual_split(fp, FunctionalParams(lam=2.0, epsilon=0.1, k=2.0))
        np.testing.assert_allclose(
            (split.L2 - split.L1).values, split.viscosity.values,
            atol=1e-9 * max(1.0, np.max(np.abs(split.viscosity.values))),
        )

    def test_q_equation_residual_vanishes_with_refinement(self):
        errors = []
        for n in (51, 101, 201):
            sigma = bump_profile(make_grid(1.0, n))
            fp, _ = exact_chain(sigma, 2.0, 0.1)
            l1 = residual_L1(fp, FunctionalParams(lam=1.0, epsilon=0.1, k=2.0)).values
            errors.append(np.sqrt(trapezoid_weights(fp.grid) @ l1**2))
        assert errors[0] > errors[1] > errors[2]

    def test_exact_chain_sits_on_the_viscosity_floor(self):
        params = FunctionalParams(lam=2.0, epsilon=0.1, k=2.0)
        ratios = []
        for n in (101, 201, 401):
            fp, p = exact_chain(bump_profile(make_grid(1.0, n)), 2.0, 0.1)
            weights = trapezoid_weights(fp.grid) * cwf(fp.grid.nodes, 2.0)
            floor = float(weights @ (0.1 * (d2_matrix(fp.grid) @ p.values)) ** 2)
            ratios.append(evaluate_J(fp, params) / floor)
        assert abs(ratios[2] - 1.0) < abs(ratios[0] - 1.0)
        assert ratios[2] == pytest.approx(1.0, abs=0.25)

    def test_J_decreases_with_lambda(self):
        grid = make_grid(1.0, 41)
        fp = random_pair_in_ball(small_lift(grid), 1.0, 2.0, 0.1, np.random.default_rng(4))
        values = [evaluate_J(fp, FunctionalParams(lam=lam, epsilon=0.1, k=2.0)) for lam in (1.0, 2.0, 4.0)]
        assert values[0] > values[1] > values[2] > 0.0


class TestGradient:
    def test_matches_finite_differences(self):
        grid = make_grid(1.0, 51)
        rng = np.random.default_rng(11)
        fp = random_pair_in_ball(small_lift(grid), 2.0, 2.0, 0.1, rng)
        rows = gradient_check(fp, FunctionalParams(lam=2.0, epsilon=0.1, k=2.0), rng)
        assert rows.shape == (10, 4)
        assert np.max(rows[:, 3]) < 1e-5

    def test_l2_representation_matches_finite_differences(self):
        grid = make_grid(1.0, 51)
        rng = np.random.default_rng(12)
        fp = random_pair_in_ball(small_lift(grid), 2.0, 2.0, 0.1, rng)
        rows = gradient_check(fp, FunctionalParams(lam=2.0, epsilon=0.1, k=2.0), rng, representation="l2")
        assert np.max(rows[:, 3]) < 1e-5

    def test_gradient_lies_in_constrained_space(self):
        grid = make_grid(1.0, 51)
        fp = random_pair_in_ball(small_lift(grid), 2.0, 2.0, 0.1, np.random.default_rng(5))
        grad = gradient_J(fp, FunctionalParams(lam=2.0, epsilon=0.1, k=2.0))
        for component in (grad.q, grad.r):
            value0, slope0, slope_end = constrained_traces(component.values, grid)
            scale = max(1.0, h2_norm(component))
            assert value0 == 0.0
            assert abs(slope0) < 1e-8 * scale
            assert abs(slope_end) < 1e-8 * scale

    def test_unknown_representation(self):
        grid = make_grid(1.0, 21)
        fp = FieldPair(Field.zeros(grid), Field.zeros(grid), 2.0, 0.1)
        with pytest.raises(InvalidArgumentError, match="representation"):
            gradient_J(fp, FunctionalParams(lam=2.0, epsilon=0.1, k=2.0), "h1")


class TestConvexity:
    def test_identical_pairs_have_zero_gap(self):
        grid = make_grid(1.0, 41)
        fp = random_pair_in_ball(small_lift(grid), 1.0, 2.0, 0.1, np.random.default_rng(6))
        assert convexity_gap(fp, fp, FunctionalParams(lam=2.0, epsilon=0.1, k=2.0)) == (0.0, 0.0)

    def test_gap_from_the_exact_minimizer_is_J(self):
        grid = make_grid(1.0, 41)
        lift = zero_lift(grid)
        origin = lift.as_pair(2.0, 0.1)
        fp = random_pair_in_ball(lift, 1.0, 2.0, 0.1, np.random.default_rng(7))
        params = FunctionalParams(lam=2.0, epsilon=0.1, k=2.0)
        gap, distance = convexity_gap(origin, fp, params)
        assert gap == pytest.approx(evaluate_J(fp, params), rel=1e-12)
        assert gap > 0.0 and distance > 0.0

    def test_pairs_must_share_boundary_data(self):
        grid = make_grid(1.0, 41)
        fp1 = zero_lift(grid).as_pair(2.0, 0.1)
        fp2 = small_lift(grid).as_pair(2.0, 0.1)
        with pytest.raises(InvalidArgumentError, match="boundary data"):
            convexity_gap(fp1, fp2, FunctionalParams(lam=2.0, epsilon=0.1, k=2.0))

    def test_gaps_positive_in_a_small_ball(self):
        grid = make_grid(1.0, 41)
        fits, table = fit_convexity_constants(zero_lift(grid), 2.0, 0.1, 1e-6, [2.0], samples=20, seed=0)
        assert table.shape == (20, 5)
        assert fits[0].all_positive
        assert fits[0].C1 > 0.0

    def test_constants_are_reproducible_across_seeds_on_bump_lift(self):
        grid = make_grid(1.0, 201)
        data = synth_data(bump_profile(grid), make_k_grid(1.0, 3.0, 11))
        lift = build_lift(boundary_from_data(data, 2.0, 0.1), grid)
        fits = [
            fit_convexity_constants(lift, 2.0, 0.1, 50.0, [8.0], samples=100, seed=seed)[0][0]
            for seed in (0, 1, 2)
        ]
        assert all(fit.all_positive for fit in fits)
        constants = [fit.C1 for fit in fits]
        assert min(constants) > 0.0
        assert (max(constants) - min(constants)) / min(constants) <= 0.2
        assert all(fit.C1_min > 0.0 for fit in fits)

    def test_stratified_pairs_stay_in_the_ball(self):
        grid = make_grid(1.0, 41)
        lift = small_lift(grid)
        pairs = stratified_pairs(lift, 2.0, 2.0, 0.1, 10, seed=4)
        assert len(pairs) == 10
        for fp1, fp2 in pairs:
            for fp in (fp1, fp2):
                assert h2_norm(fp.q) + h2_norm(fp.r) <= 2.0 + 1e-9
                np.testing.assert_allclose(pair_traces(fp), pair_traces(lift.as_pair(2.0, 0.1)), atol=1e-9)
        again = stratified_pairs(lift, 2.0, 2.0, 0.1, 10, seed=4)
        np.testing.assert_array_equal(again[3][1].q.values, pairs[3][1].q.values)

    def test_ball_must_contain_the_lift(self):
        grid = make_grid(1.0, 41)
        with pytest.raises(InfeasibleConstraintError):
            random_pair_in_ball(small_lift(grid), 1e-6, 2.0, 0.1, np.random.default_rng(0))


class TestCarlemanEstimate:
    def test_quadratic(self):
        grid = make_grid(1.0, 101)
        terms = carleman_check(Field.from_function(grid, lambda z: z**2), 5.0)
        assert terms.lhs > 0.0 and terms.lower_term > 0.0
        assert 0.0 < terms.ratio < 1.0

    def test_zero_field(self):
        terms = carleman_check(Field.zeros(make_grid(1.0, 21)), 2.0)
        assert terms.lhs == 0.0
        assert np.isnan(terms.ratio)

    def test_requires_zero_traces_at_origin(self):
        with pytest.raises(InvalidArgumentError, match="vanish"):
            carleman_check(Field.constant(make_grid(1.0, 21), 1.0), 2.0)

    def test_fitted_constants_are_positive(self):
        constants, table = fit_carleman_constants(make_grid(1.0, 61), [2.0, 4.0, 8.0, 16.0], 20, seed=1)
        assert table.shape == (80, 6)
        assert all(0.0 < c < 1.0 for c in constants.values())

    def test_samples_do_not_depend_on_threads(self):
        grid = make_grid(1.0, 41)
        _, serial = fit_carleman_constants(grid, [2.0, 4.0], 5, seed=3, max_workers=1)
        _, threaded = fit_carleman_constants(grid, [2.0, 4.0], 5, seed=3, max_workers=2)
        np.testing.assert_array_equal(serial, threaded)


class TestRandomFields:
    def test_unit_norm_and_constraints(self):
        grid = make_grid(1.0, 51)
        u = random_constrained_field(grid, np.random.default_rng(0))
        assert h2_norm(u) == pytest.approx(1.0)
        assert u.values[0] == 0.0

    def test_pair_stays_in_ball(self):
        grid = make_grid(1.0, 51)
        lift = small_lift(grid)
        for seed in range(5):
            fp = random_pair_in_ball(lift, 1.0, 2.0, 0.1, np.random.default_rng(seed))
            assert fp.norm_sum() <= 1.0


def test_run_verification():
    grid = make_grid(1.0, 41)
    report = run_verification(
        zero_lift(grid), 2.0, 0.1, 1e-6, lambdas=[4.0, 2.0], carleman_lambdas=[2.0, 4.0],
        samples=5, seed=0, gradient_points=2,
    )
    assert report.lambda_tested == [2.0, 4.0]
    assert report.empirical_lambda1 == 2.0
    assert report.gradient_table.shape == (20, 5)
    summary = report.to_dict()
    assert set(summary["carleman_C0"]) == {"2.0", "4.0"}
    assert summary["samples"] == 5
