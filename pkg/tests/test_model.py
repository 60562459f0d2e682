import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from manakov import (
    Boundary,
    DegenerateGrid,
    FieldState,
    InvalidRadius,
    NonDivisibleDomain,
    SolitonParams,
    cubic_nonlinearity,
    gaussian_initial_condition,
    h1_norm,
    l2_norm,
    make_grid,
    pauli_combination,
    smooth_cutoff,
    soliton_initial_condition,
    truncated_nonlinearity,
)
from manakov.model import SIGMA


class TestMakeGrid:
    def test_dirichlet_counts_interior_points(self):
        grid = make_grid(20.0, 0.4)
        assert grid.m == 99          # 2a/dx - 1
        assert grid.boundary is Boundary.DIRICHLET
        assert_allclose(grid.nodes[0], -20.0 + 0.4)
        assert_allclose(grid.nodes[-1], 20.0 - 0.4)

    def test_periodic_counts_all_left_endpoints(self):
        grid = make_grid(20.0, 0.4, Boundary.PERIODIC)
        assert grid.m == 100
        assert_allclose(grid.nodes[0], -20.0)
        assert_allclose(grid.nodes[-1], 20.0 - 0.4)

    def test_decimal_widths_survive_rounding(self):
        # 2*50/0.25 = 400 exactly, but 0.25 arithmetic must not reject 2*50.1/0.3
        assert make_grid(50.0, 0.25).m == 399
        assert make_grid(0.75, 0.05).m == 29

    def test_non_divisible_width_rejected(self):
        with pytest.raises(NonDivisibleDomain):
            make_grid(1.0, 0.3)

    def test_too_few_nodes_rejected(self):
        with pytest.raises(DegenerateGrid):
            make_grid(1.0, 1.0)
        with pytest.raises(DegenerateGrid):
            make_grid(-2.0, 0.5)
        with pytest.raises(DegenerateGrid):
            make_grid(1.0, -0.5)

    @given(st.integers(min_value=4, max_value=400))
    def test_node_spacing_uniform(self, cells):
        grid = make_grid(cells * 0.125 / 2.0, 0.125)
        assert_allclose(np.diff(grid.nodes), grid.dx, rtol=1e-12)


class TestFieldState:
    def test_shape_mismatch_rejected(self):
        grid = make_grid(2.0, 0.5)
        with pytest.raises(ValueError):
            FieldState(np.zeros((grid.m + 1, 2), dtype=complex), grid)

    def test_copy_is_independent(self):
        grid = make_grid(2.0, 0.5)
        state = FieldState(np.ones((grid.m, 2), dtype=complex), grid)
        clone = state.copy()
        clone.values[0, 0] = 5.0
        assert state.values[0, 0] == 1.0

    def test_density_sums_both_components(self):
        grid = make_grid(2.0, 0.5)
        values = np.zeros((grid.m, 2), dtype=complex)
        values[0] = (3.0, 4.0j)
        state = FieldState(values, grid)
        assert_allclose(state.density()[0], 25.0)


class TestSoliton:
    def test_value_at_origin(self):
        # node at x=0 exists for a=10, dx=0.5; all phases zero, sech(0)=1
        grid = make_grid(10.0, 0.5)
        state = soliton_initial_condition(grid)
        j = np.argmin(np.abs(grid.nodes))
        assert_allclose(grid.nodes[j], 0.0, atol=1e-14)
        assert_allclose(state.values[j], [math.cos(math.pi / 8), math.sin(math.pi / 8)],
                        rtol=1e-14)

    def test_l2_norm_value(self):
        # integral of sech^2 is 2, so the norm is sqrt(2)
        grid = make_grid(50.0, 0.05)
        assert abs(l2_norm(soliton_initial_condition(grid)) - math.sqrt(2.0)) < 1e-6

    def test_h1_norm_value(self):
        # integral of (sech')^2 is 2/3, so the norm is sqrt(8/3); the
        # centered-difference bias at dx=0.025 stays below 1e-4
        grid = make_grid(50.0, 0.025)
        assert abs(h1_norm(soliton_initial_condition(grid)) - math.sqrt(8.0 / 3.0)) < 1e-4

    def test_l2_error_bounded_by_dx_squared(self):
        for dx in (0.4, 0.2, 0.1):
            grid = make_grid(50.0, dx)
            err = abs(l2_norm(soliton_initial_condition(grid)) - math.sqrt(2.0))
            assert err <= dx * dx

    def test_amplitude_must_be_positive(self):
        with pytest.raises(ValueError):
            SolitonParams(eta=0.0)

    def test_carrier_and_polarization_parameters(self):
        grid = make_grid(10.0, 0.5)
        p = SolitonParams(alpha=0.3, tau=1.0, phi1=0.1, phi2=-0.2, kappa=0.7,
                          theta=1.1, eta=2.0)
        state = soliton_initial_condition(grid, p)
        x = grid.nodes
        envelope = 2.0 / np.cosh(2.0 * x)
        carrier = np.exp(-1j * 0.7 * (x - 1.0) + 0.3j)
        expected1 = math.cos(0.55) * np.exp(0.1j) * envelope * carrier
        expected2 = math.sin(0.55) * np.exp(-0.2j) * envelope * carrier
        assert_allclose(state.values[:, 0], expected1, rtol=1e-12, atol=1e-300)
        assert_allclose(state.values[:, 1], expected2, rtol=1e-12, atol=1e-300)

    def test_sech_tails_do_not_overflow(self):
        grid = make_grid(500.0, 0.5)
        state = soliton_initial_condition(grid)
        assert np.isfinite(state.values).all()


class TestNonlinearities:
    def test_cubic_matches_pointwise_formula(self, rng):
        grid = make_grid(5.0, 0.25)
        values = rng.standard_normal((grid.m, 2)) + 1j * rng.standard_normal((grid.m, 2))
        state = FieldState(values, grid)
        f = cubic_nonlinearity(state)
        dens = (np.abs(values) ** 2).sum(axis=1)
        assert_allclose(f.values, dens[:, None] * values, rtol=1e-14)

    def test_cubic_of_zero_is_zero(self):
        grid = make_grid(5.0, 0.25)
        state = FieldState(np.zeros((grid.m, 2), dtype=complex), grid)
        assert np.all(cubic_nonlinearity(state).values == 0.0)

    def test_truncated_requires_positive_radius(self):
        grid = make_grid(5.0, 0.25)
        state = FieldState(np.zeros((grid.m, 2), dtype=complex), grid)
        for radius in (0.0, -1.0):
            with pytest.raises(InvalidRadius):
                truncated_nonlinearity(state, radius, 1.0)

    def test_truncated_inactive_below_radius(self, rng):
        grid = make_grid(5.0, 0.25)
        values = rng.standard_normal((grid.m, 2)) * 0.1 + 0j
        state = FieldState(values, grid)
        full = cubic_nonlinearity(state)
        kept = truncated_nonlinearity(state, radius=10.0, h1_squared=5.0)
        assert np.array_equal(kept.values, full.values)

    def test_truncated_vanishes_beyond_twice_radius(self, rng):
        grid = make_grid(5.0, 0.25)
        values = rng.standard_normal((grid.m, 2)) + 0j
        state = FieldState(values, grid)
        gone = truncated_nonlinearity(state, radius=1.0, h1_squared=2.5)
        assert np.all(gone.values == 0.0)

    def test_truncated_scales_between(self, rng):
        grid = make_grid(5.0, 0.25)
        values = rng.standard_normal((grid.m, 2)) + 0j
        state = FieldState(values, grid)
        mid = truncated_nonlinearity(state, radius=1.0, h1_squared=1.5)
        assert_allclose(mid.values, 0.5 * cubic_nonlinearity(state).values, rtol=1e-12)


class TestSmoothCutoff:
    def test_plateau_and_support(self):
        assert smooth_cutoff(-3.0) == 1.0
        assert smooth_cutoff(0.0) == 1.0
        assert smooth_cutoff(1.0) == 1.0
        assert smooth_cutoff(2.0) == 0.0
        assert smooth_cutoff(7.5) == 0.0

    def test_midpoint_by_symmetry(self):
        assert smooth_cutoff(1.5) == 0.5

    def test_array_input(self):
        out = smooth_cutoff(np.array([0.5, 1.5, 3.0]))
        assert_allclose(out, [1.0, 0.5, 0.0])

    @given(st.floats(min_value=1.0, max_value=2.0), st.floats(min_value=0.0, max_value=1.0))
    def test_monotone_decreasing(self, x, step):
        y = min(x + step, 2.0)
        assert smooth_cutoff(x) >= smooth_cutoff(y) - 1e-15

    def test_values_within_unit_interval(self):
        xs = np.linspace(0.9, 2.1, 301)
        out = smooth_cutoff(xs)
        assert np.all(out >= 0.0) and np.all(out <= 1.0)


class TestPauli:
    def test_single_axis_selection(self):
        for k, axis in enumerate(np.eye(3)):
            assert np.array_equal(pauli_combination(axis), SIGMA[k])

    @given(st.lists(st.floats(min_value=-5, max_value=5), min_size=3, max_size=3))
    def test_hermitian_for_real_chi(self, chi):
        mat = pauli_combination(np.array(chi))
        assert_allclose(mat, mat.conj().T, atol=1e-12)

    @given(st.lists(st.floats(min_value=-5, max_value=5), min_size=3, max_size=3))
    def test_square_is_norm_squared_identity(self, chi):
        chi = np.array(chi)
        mat = pauli_combination(chi)
        assert_allclose(mat @ mat, (chi @ chi) * np.eye(2), atol=1e-10)

    def test_shape_validated(self):
        with pytest.raises(ValueError):
            pauli_combination(np.ones(4))


def test_gaussian_bump_is_smooth_and_polarized():
    grid = make_grid(8.0, 0.25)
    state = gaussian_initial_condition(grid, polarization=(1.0, 0.5j))
    peak = np.argmin(np.abs(grid.nodes))
    assert_allclose(state.values[peak], [1.0, 0.5j], atol=1e-8)
    assert abs(state.values[0, 0]) < 1e-10
