"""Tests for the one-step linear propagator, both backends."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from manakov.blocktridiag import to_dense
from manakov.errors import BackendBoundaryMismatch, ConfigError
from manakov.model import Boundary, FieldState, make_grid, pauli_combination
from manakov.observables import l2_norm
from manakov.propagator import (
    Backend,
    apply_cayley,
    apply_generator,
    assemble,
    compose_apply,
)


def fd_grid(a=8.0, dx=0.5):
    return make_grid(a, dx, Boundary.DIRICHLET)


def spec_grid(a=8.0, dx=0.5):
    return make_grid(a, dx, Boundary.PERIODIC)


def random_state(rng, grid):
    vals = rng.standard_normal((grid.m, 2)) + 1j * rng.standard_normal((grid.m, 2))
    return FieldState(vals, grid)


def smooth_state(grid):
    # Gaussian envelope well inside the domain so both boundary conditions
    # see the same (numerically zero) tails.
    x = grid.nodes
    env = np.exp(-(x**2))
    vals = np.empty((grid.m, 2), dtype=complex)
    vals[:, 0] = env * np.exp(0.7j * x)
    vals[:, 1] = 0.5 * env * np.exp(-0.3j * x)
    return FieldState(vals, grid)


class TestAssembleValidation:
    def test_nonpositive_step(self):
        with pytest.raises(ConfigError):
            assemble(fd_grid(), 0.0, 1.0, (0.1, 0.2, 0.3))

    def test_negative_gamma(self):
        with pytest.raises(ConfigError):
            assemble(fd_grid(), 0.01, -1.0, (0.1, 0.2, 0.3))

    def test_bad_chi_shape(self):
        with pytest.raises(ConfigError):
            assemble(fd_grid(), 0.01, 1.0, (0.1, 0.2))

    def test_fd_needs_dirichlet(self):
        with pytest.raises(BackendBoundaryMismatch):
            assemble(spec_grid(), 0.01, 1.0, (0.1, 0.2, 0.3), Backend.FD)

    def test_spectral_needs_periodic(self):
        with pytest.raises(BackendBoundaryMismatch):
            assemble(fd_grid(), 0.01, 1.0, (0.1, 0.2, 0.3), Backend.SPECTRAL)

    def test_operator_on_wrong_grid(self, rng):
        op = assemble(fd_grid(), 0.01, 1.0, (0.1, 0.2, 0.3))
        other = random_state(rng, fd_grid(a=4.0))
        with pytest.raises(ConfigError):
            apply_cayley(op, other)


class TestFdBlocks:
    def test_diagonal_block_of_a_plus(self):
        grid = fd_grid(a=2.0, dx=0.25)
        h = 0.01
        op = assemble(grid, h, 1.0, (0.0, 0.0, 0.0))
        expected = (1.0 + 1.0j * h / grid.dx**2) * np.eye(2)
        for k in range(grid.m):
            assert np.allclose(op.a_plus.diag[k], expected, rtol=0, atol=0)

    def test_off_diagonal_blocks(self):
        grid = fd_grid(a=2.0, dx=0.25)
        h, gamma = 0.01, 2.0
        chi = np.array([0.3, -0.4, 1.2])
        op = assemble(grid, h, gamma, chi)
        lap = h / grid.dx**2
        noise = math.sqrt(gamma * h) / (2.0 * grid.dx)
        pc = pauli_combination(chi)
        sub_half = -0.5j * lap * np.eye(2) - 0.5 * noise * pc
        sup_half = -0.5j * lap * np.eye(2) + 0.5 * noise * pc
        assert np.allclose(op.a_plus.sub[0], sub_half)
        assert np.allclose(op.a_plus.sup[0], sup_half)
        assert np.allclose(op.a_minus.sub[0], -sub_half)
        assert np.allclose(op.a_minus.sup[0], -sup_half)

    def test_a_plus_a_minus_mirror(self):
        grid = fd_grid(a=3.0, dx=0.5)
        op = assemble(grid, 0.02, 1.5, (0.1, 0.7, -0.2))
        dense_p = to_dense(op.a_plus)
        dense_m = to_dense(op.a_minus)
        eye = np.eye(2 * grid.m)
        # A_plus + A_minus = 2 Id exactly: H/2 cancels.
        assert np.array_equal(dense_p + dense_m, 2.0 * eye)


class TestGenerator:
    def test_anti_hermitian_fd(self, rng):
        grid = fd_grid()
        op = assemble(grid, 0.02, 1.3, (0.5, -0.1, 0.9))
        x = random_state(rng, grid)
        y = random_state(rng, grid)
        hx = apply_generator(op, x).values
        hy = apply_generator(op, y).values
        inner = np.vdot(y.values, hx) + np.vdot(hy, x.values)
        assert abs(inner) < 1e-12 * x.values.size

    def test_anti_hermitian_spectral(self, rng):
        grid = spec_grid()
        op = assemble(grid, 0.02, 1.3, (0.5, -0.1, 0.9), Backend.SPECTRAL)
        x = random_state(rng, grid)
        y = random_state(rng, grid)
        hx = apply_generator(op, x).values
        hy = apply_generator(op, y).values
        inner = np.vdot(y.values, hx) + np.vdot(hy, x.values)
        assert abs(inner) < 1e-12 * x.values.size

    def test_fd_generator_matches_stencils(self, rng):
        grid = fd_grid(a=4.0, dx=0.25)
        h, gamma = 0.01, 0.8
        chi = np.array([0.2, 0.5, -0.3])
        op = assemble(grid, h, gamma, chi)
        x = random_state(rng, grid)
        v = x.values
        # Direct stencil evaluation with zero Dirichlet ghosts.
        up = np.vstack([v[1:], np.zeros((1, 2), complex)])
        down = np.vstack([np.zeros((1, 2), complex), v[:-1]])
        d2 = (up - 2.0 * v + down) / grid.dx**2
        d1 = (up - down) / (2.0 * grid.dx)
        pc = pauli_combination(chi)
        want = -1.0j * h * d2 + math.sqrt(gamma * h) * (d1 @ pc.T)
        got = apply_generator(op, x).values
        assert np.allclose(got, want, atol=1e-12)

    def test_constant_field_is_killed_spectral(self):
        # xi = 0 mode: a constant field lies in the kernel of H.
        grid = spec_grid()
        op = assemble(grid, 0.05, 2.0, (0.3, 0.3, 0.3), Backend.SPECTRAL)
        vals = np.tile(np.array([1.0 + 2.0j, -0.5j]), (grid.m, 1))
        state = FieldState(vals, grid)
        out = apply_generator(op, state).values
        assert np.max(np.abs(out)) < 1e-13


class TestSpectralSymbol:
    def test_eigenvalues_at_each_frequency(self):
        grid = spec_grid(a=4.0, dx=0.5)
        h, gamma = 0.02, 1.7
        chi = np.array([0.6, -0.8, 0.0])
        op = assemble(grid, h, gamma, chi, Backend.SPECTRAL)
        chi_norm = np.linalg.norm(chi)
        want_plus = h * op.xi**2 + np.sqrt(gamma * h) * chi_norm * op.xi
        want_minus = h * op.xi**2 - np.sqrt(gamma * h) * chi_norm * op.xi
        assert np.allclose(op.lam_plus, want_plus)
        assert np.allclose(op.lam_minus, want_minus)

    def test_projectors_resolve_identity(self):
        op = assemble(spec_grid(), 0.01, 1.0, (0.1, 0.2, 0.3), Backend.SPECTRAL)
        assert np.allclose(op.proj_plus + op.proj_minus, np.eye(2))
        assert np.allclose(op.proj_plus @ op.proj_plus, op.proj_plus, atol=1e-15)
        assert np.allclose(op.proj_plus @ op.proj_minus, 0.0, atol=1e-15)

    def test_plane_wave_eigenvector(self):
        # chi along the z axis keeps components decoupled, so the first
        # component of a plane wave is an exact eigenvector of H.
        grid = spec_grid(a=4.0, dx=0.5)
        h, gamma = 0.02, 1.0
        chi = np.array([0.0, 0.0, 0.9])
        op = assemble(grid, h, gamma, chi, Backend.SPECTRAL)
        j = 3
        xi_j = op.xi[j]
        vals = np.zeros((grid.m, 2), complex)
        vals[:, 0] = np.exp(1.0j * xi_j * grid.nodes)
        out = apply_generator(op, FieldState(vals, grid)).values
        lam = h * xi_j**2 + math.sqrt(gamma * h) * 0.9 * xi_j
        assert np.allclose(out, 1.0j * lam * vals, atol=1e-12)


class TestCayleyUnitarity:
    @settings(max_examples=30)
    @given(
        seed=st.integers(0, 2**32 - 1),
        h=st.floats(1e-4, 0.5),
        gamma=st.floats(0.0, 4.0),
    )
    def test_fd_preserves_l2(self, seed, h, gamma):
        rng = np.random.default_rng(seed)
        grid = fd_grid(a=4.0, dx=0.5)
        chi = rng.standard_normal(3)
        op = assemble(grid, h, gamma, chi)
        state = random_state(rng, grid)
        before = l2_norm(state)
        after = l2_norm(apply_cayley(op, state))
        assert after == pytest.approx(before, rel=1e-12)

    @settings(max_examples=30)
    @given(
        seed=st.integers(0, 2**32 - 1),
        h=st.floats(1e-4, 0.5),
        gamma=st.floats(0.0, 4.0),
    )
    def test_spectral_preserves_l2(self, seed, h, gamma):
        rng = np.random.default_rng(seed)
        grid = spec_grid(a=4.0, dx=0.5)
        chi = rng.standard_normal(3)
        op = assemble(grid, h, gamma, chi, Backend.SPECTRAL)
        state = random_state(rng, grid)
        before = l2_norm(state)
        after = l2_norm(apply_cayley(op, state))
        assert after == pytest.approx(before, rel=1e-12)

    def test_cayley_solve_then_minus_consistent(self, rng):
        grid = fd_grid()
        op = assemble(grid, 0.01, 1.0, (0.2, 0.2, 0.2))
        x = random_state(rng, grid)
        direct = apply_cayley(op, x).values
        staged = op.solve_plus(op.apply_minus(x.values))
        assert np.allclose(direct, staged, atol=1e-13)

    def test_eigenvalue_two_maps_to_minus_i(self):
        # Scalar sanity for the Cayley map: (1 - i)/(1 + i) = -i.  Pick h so
        # the first nonzero frequency lands exactly on lam = 2.
        grid = spec_grid(a=4.0, dx=0.5)
        xi = 2.0 * math.pi * np.fft.fftfreq(grid.m, d=grid.dx)
        j = 1
        h = 2.0 / xi[j] ** 2
        op = assemble(grid, h, 0.0, (0.0, 0.0, 1.0), Backend.SPECTRAL)
        assert op.lam_plus[j] == pytest.approx(2.0, rel=1e-14)
        vals = np.zeros((grid.m, 2), complex)
        vals[:, 0] = np.exp(1.0j * xi[j] * grid.nodes)
        out = apply_cayley(op, FieldState(vals, grid)).values
        assert np.allclose(out, -1.0j * vals, atol=1e-12)


class TestComponentDecoupling:
    def test_gamma_zero_components_evolve_identically(self, rng):
        # With no noise, H = -i h D2 (x) I2 acts on each component alone.
        grid = fd_grid()
        op = assemble(grid, 0.03, 0.0, (0.4, 0.5, 0.6))
        comp = rng.standard_normal(grid.m) + 1j * rng.standard_normal(grid.m)
        vals = np.zeros((grid.m, 2), complex)
        vals[:, 0] = comp
        out0 = apply_cayley(op, FieldState(vals.copy(), grid)).values
        vals2 = np.zeros((grid.m, 2), complex)
        vals2[:, 1] = comp
        out1 = apply_cayley(op, FieldState(vals2, grid)).values
        assert np.allclose(out0[:, 0], out1[:, 1], atol=1e-13)
        assert np.max(np.abs(out0[:, 1])) < 1e-14
        assert np.max(np.abs(out1[:, 0])) < 1e-14


class TestBackendAgreement:
    def test_smooth_field_small_step(self):
        # Mutual oracle: FD and spectral move a compactly supported smooth
        # field the same way up to the spatial discretization error.
        a, dx = 10.0, 0.05
        h, gamma = 0.005, 1.0
        chi = np.array([0.3, -0.2, 0.5])
        gf = fd_grid(a, dx)
        gs = spec_grid(a, dx)
        sf = smooth_state(gf)
        ss = smooth_state(gs)
        out_f = apply_cayley(assemble(gf, h, gamma, chi), sf)
        out_s = apply_cayley(assemble(gs, h, gamma, chi, Backend.SPECTRAL), ss)
        # Compare on the shared interior nodes.
        interp = np.interp(gf.nodes, gs.nodes, out_s.values[:, 0].real)
        diff = np.max(np.abs(out_f.values[:, 0].real - interp))
        assert diff < 5e-4

    def test_generator_agreement_on_smooth_field(self):
        a, dx = 10.0, 0.05
        h, gamma = 0.01, 0.7
        chi = np.array([0.1, 0.8, -0.3])
        gf = fd_grid(a, dx)
        gs = spec_grid(a, dx)
        out_f = apply_generator(assemble(gf, h, gamma, chi), smooth_state(gf))
        out_s = apply_generator(
            assemble(gs, h, gamma, chi, Backend.SPECTRAL), smooth_state(gs)
        )
        interp = np.interp(gf.nodes, gs.nodes, out_s.values[:, 1].real)
        assert np.max(np.abs(out_f.values[:, 1].real - interp)) < 5e-4


class TestCompose:
    def test_empty_sequence_is_identity(self, rng):
        state = random_state(rng, fd_grid())
        out = compose_apply([], state)
        assert out is state

    def test_single_matches_apply(self, rng):
        grid = fd_grid()
        op = assemble(grid, 0.01, 1.0, (0.1, 0.1, 0.1))
        state = random_state(rng, grid)
        assert np.array_equal(
            compose_apply([op], state).values, apply_cayley(op, state).values
        )

    def test_hundred_steps_preserve_norm(self, rng):
        grid = fd_grid(a=4.0, dx=0.5)
        ops = [
            assemble(grid, 0.01, 1.0, rng.standard_normal(3)) for _ in range(100)
        ]
        state = random_state(rng, grid)
        out = compose_apply(ops, state)
        assert l2_norm(out) == pytest.approx(l2_norm(state), rel=1e-11)

    def test_mixed_backends_rejected(self, rng):
        gf = fd_grid(a=4.0, dx=0.5)
        op_f = assemble(gf, 0.01, 1.0, (0.1, 0.1, 0.1))
        gs = spec_grid(a=4.0, dx=0.5)
        op_s = assemble(gs, 0.01, 1.0, (0.1, 0.1, 0.1), Backend.SPECTRAL)
        state = random_state(rng, gf)
        with pytest.raises(ConfigError):
            compose_apply([op_f, op_s], state)

    def test_factorization_reused_across_applications(self, rng):
        grid = fd_grid()
        op = assemble(grid, 0.01, 1.0, (0.3, 0.2, 0.1))
        s1 = random_state(rng, grid)
        apply_cayley(op, s1)
        fact_first = op._fact_plus
        assert fact_first is not None
        apply_cayley(op, s1)
        assert op._fact_plus is fact_first
