import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path so we can import core modules
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.exceptions import InvalidArgumentError, PhysicalityError
from core.forward import DataG, bump_profile, flat_profile, solve_forward_family, synth_data
from core.grid import Field, make_grid, make_k_grid
from core.transform import (
    BoundaryMode,
    BoundarySet,
    FieldPair,
    boundary_from_data,
    build_lift,
    chain_family,
    compare_boundary_modes,
    compute_p,
    compute_q,
    compute_r,
    exact_chain,
    lift_distance,
    pair_distance,
    pair_traces,
)


def constant_data(kg, g=-0.5, dg=0.0):
    n = kg.n_k
    return DataG(
        k_grid=kg,
        g_values=np.full(n, g),
        g_prime=np.full(n, dg),
        v0_values=1.0 / (2.0 * np.sqrt(kg.values)),
        v0_prime=np.zeros(n),
    )


class TestChain:
    def test_compute_p(self):
        grid = make_grid(1.0, 6)
        p = compute_p(Field.constant(grid, np.exp(2.0)), 2.0)
        np.testing.assert_allclose(p.values, 1.0)

    def test_compute_p_needs_positive_w(self):
        grid = make_grid(1.0, 6)
        with pytest.raises(PhysicalityError, match="positive"):
            compute_p(Field.constant(grid, 0.0), 1.0)

    def test_compute_q_exact_for_linear_k_dependence(self):
        grid = make_grid(1.0, 6)
        kg = make_k_grid(1.0, 2.0, 5)
        family = [Field.from_function(grid, lambda z, k=k: 3.0 * k * z + 1.0) for k in kg.values]
        for q in compute_q(family, kg):
            np.testing.assert_allclose(q.values, 3.0 * grid.nodes, atol=1e-12)

    def test_compute_q_needs_full_family(self):
        grid = make_grid(1.0, 6)
        with pytest.raises(InvalidArgumentError, match="3 k-samples"):
            compute_q([Field.zeros(grid)] * 2, make_k_grid(1.0, 2.0, 3))

    def test_compute_r(self):
        grid = make_grid(1.0, 6)
        r = compute_r(Field.constant(grid, 1.0), Field.constant(grid, 2.0), 0.1)
        np.testing.assert_allclose(r.values, 0.8)
        with pytest.raises(InvalidArgumentError, match="epsilon"):
            compute_r(Field.zeros(grid), Field.zeros(grid), 0.0)

    def test_pair_requires_positive_epsilon(self):
        grid = make_grid(1.0, 6)
        with pytest.raises(InvalidArgumentError, match="epsilon"):
            FieldPair(Field.zeros(grid), Field.zeros(grid), 1.0, -0.1)

    def test_exact_chain_recovers_p(self):
        sigma = bump_profile(make_grid(1.0, 81))
        fp, p = exact_chain(sigma, 2.0, 0.1)
        np.testing.assert_allclose((fp.q - fp.r).values / 0.1, p.values, atol=1e-12)

    def test_k_differences_converge_to_exact_chain(self):
        sigma = bump_profile(make_grid(1.0, 81))
        exact, _ = exact_chain(sigma, 2.0, 0.1)
        errors = []
        for half_width in (0.5, 0.25):
            kg = make_k_grid(2.0 - half_width, 2.0 + half_width, 3)
            pairs = chain_family(solve_forward_family(sigma, kg).slices, kg, 0.1)
            errors.append(np.max(np.abs(pairs[1].q.values - exact.q.values)))
        assert 3.0 < errors[0] / errors[1] < 5.0


class TestBoundarySets:
    def test_paper_literal_values(self):
        data = constant_data(make_k_grid(1.0, 3.0, 3))
        b = boundary_from_data(data, 1.0, 0.1, BoundaryMode.PAPER_LITERAL)
        assert b.q0 == 0.0 and b.qzZ == 0.0 and b.rzZ == 0.0
        assert b.r0 == -0.1
        assert b.qz0 == pytest.approx(-6.5)
        assert b.rz0 == pytest.approx(-6.8)

    def test_paper_literal_fixed_entries_are_enforced(self):
        with pytest.raises(InvalidArgumentError, match="q0"):
            BoundarySet(1.0, 0.0, 0.0, -0.1, 0.0, 0.0, BoundaryMode.PAPER_LITERAL, 0.1)

    def test_forward_consistent_flat_data_is_zero(self):
        data = synth_data(flat_profile(make_grid(1.0, 41)), make_k_grid(1.0, 3.0, 5))
        for k in data.k_grid.values:
            b = boundary_from_data(data, k, 0.1)
            np.testing.assert_allclose(b.as_array(), 0.0, atol=1e-12)

    def test_forward_consistent_matches_chain_traces(self):
        sigma = bump_profile(make_grid(1.0, 81))
        data = synth_data(sigma, make_k_grid(1.0, 3.0, 11))
        fp, p = exact_chain(sigma, 2.0, 0.1)
        b = boundary_from_data(data, 2.0, 0.1, "forward-consistent")
        assert b.r0 - b.q0 == pytest.approx(-0.1 * p.values[0], abs=1e-12)
        assert b.q0 == pytest.approx(fp.q.values[0], abs=1e-3)

    def test_mode_parsing(self):
        assert BoundaryMode.parse("paper-literal") is BoundaryMode.PAPER_LITERAL
        assert BoundaryMode.parse("closed-form") is BoundaryMode.PAPER_LITERAL
        assert BoundaryMode.parse(BoundaryMode.FORWARD_CONSISTENT) is BoundaryMode.FORWARD_CONSISTENT
        with pytest.raises(InvalidArgumentError, match="unknown boundary mode"):
            BoundaryMode.parse("exact")

    def test_k_must_be_on_grid(self):
        with pytest.raises(InvalidArgumentError, match="not a node"):
            boundary_from_data(constant_data(make_k_grid(1.0, 3.0, 3)), 1.5, 0.1)

    def test_nonpositive_trace_is_rejected(self):
        kg = make_k_grid(1.0, 3.0, 3)
        data = DataG(kg, np.full(3, -0.5), np.zeros(3), np.array([0.5, -0.1, 0.3]), np.zeros(3))
        with pytest.raises(PhysicalityError, match="positive"):
            boundary_from_data(data, 1.0, 0.1)

    def test_compare_modes_reports_differences(self):
        data = constant_data(make_k_grid(1.0, 3.0, 3))
        diff = compare_boundary_modes(data, 1.0, 0.1)
        assert set(diff) == {"q0", "qz0", "qzZ", "r0", "rz0", "rzZ"}
        assert diff["qzZ"] == 0.0
        assert diff["r0"] == pytest.approx(-0.1)


class TestLift:
    @pytest.fixture
    def grid(self):
        return make_grid(1.0, 51)

    def boundary(self, scale=1.0):
        return BoundarySet(
            0.3 * scale, -1.2 * scale, 0.4 * scale, -0.2 * scale, 0.7 * scale, -0.5 * scale,
            BoundaryMode.FORWARD_CONSISTENT, 0.1,
        )

    def test_lift_reproduces_boundary_values(self, grid):
        b = self.boundary()
        traces = pair_traces(build_lift(b, grid).as_pair(2.0, 0.1))
        assert traces[0] == b.q0
        assert traces[3] == b.r0
        np.testing.assert_allclose(traces, b.as_array(), atol=1e-10)

    def test_paper_literal_lift(self, grid):
        b = boundary_from_data(constant_data(make_k_grid(1.0, 3.0, 3)), 1.0, 0.1, "paper-literal")
        traces = pair_traces(build_lift(b, grid).as_pair(1.0, 0.1))
        np.testing.assert_allclose(traces, b.as_array(), atol=1e-9)

    def test_zero_boundary_gives_zero_lift(self, grid):
        lift = build_lift(BoundarySet(0, 0, 0, 0, 0, 0, BoundaryMode.FORWARD_CONSISTENT), grid)
        assert lift.norm_sum() == 0.0

    def test_lift_is_linear_in_the_data(self, grid):
        single = build_lift(self.boundary(), grid)
        double = build_lift(self.boundary(2.0), grid)
        np.testing.assert_allclose(double.F1.values, 2.0 * single.F1.values, atol=1e-12)
        assert lift_distance(double, single) == pytest.approx(single.norm_sum(), rel=1e-9)

    def test_pair_distance(self, grid):
        lift = build_lift(self.boundary(), grid)
        fp = lift.as_pair(2.0, 0.1)
        assert pair_distance(fp, fp) == 0.0
        assert pair_distance(fp, FieldPair(Field.zeros(grid), Field.zeros(grid), 2.0, 0.1)) == pytest.approx(
            lift.norm_sum()
        )
