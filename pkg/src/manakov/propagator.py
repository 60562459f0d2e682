"""Per-step random operator H and its Cayley-transform propagator U.

H = -i h D2 (x) I2 + sqrt(gamma h) (chi . sigma) (x) D1 is anti-hermitian in
the discrete L2 inner product, so U = (Id + H/2)^{-1} (Id - H/2) is exactly
unitary.  Two interchangeable backends:

* FD: centered differences on a Dirichlet grid (D2 = (1,-2,1)/dx^2,
  D1 = (-1,0,1)/(2 dx), zero ghosts); U is applied by a block-tridiagonal
  solve.
* Spectral: FFT on a periodic grid; per frequency xi the symbol
  S(xi) = h xi^2 I2 + xi sqrt(gamma h) (chi . sigma) is diagonalized by the
  projectors P_pm = (I2 pm chihat . sigma)/2 with eigenvalues
  lam_pm = h xi^2 pm xi sqrt(gamma h) |chi|, and H acts as i S(xi).

The two backends serve as mutual oracles: they must agree to the order of
the spatial discretization on smooth fields supported inside the domain.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .blocktridiag import BlockFactorization, BlockTridiagonalMatrix, factorize, matvec
from .errors import BackendBoundaryMismatch, ConfigError
from .model import Boundary, FieldState, Grid, IDENTITY2, pauli_combination


class Backend(enum.Enum):
    FD = "fd"
    SPECTRAL = "spectral"


@dataclass
class StepOperator:
    """Assembled one-step operator data; treat as immutable after assembly.

    The FD factorization is memoized on first use (it is part of applying
    the operator, not of its identity); do not share one instance across
    threads while it is being applied for the first time.
    """

    backend: Backend
    h: float
    gamma: float
    chi: np.ndarray
    grid: Grid
    # FD data
    a_plus: BlockTridiagonalMatrix | None = None
    a_minus: BlockTridiagonalMatrix | None = None
    _fact_plus: BlockFactorization | None = field(default=None, repr=False)
    # Spectral data
    xi: np.ndarray | None = None
    lam_plus: np.ndarray | None = None
    lam_minus: np.ndarray | None = None
    proj_plus: np.ndarray | None = None
    proj_minus: np.ndarray | None = None

    # -- array-level operations (hot path; FieldState wrappers below) --

    def _factorization(self) -> BlockFactorization:
        if self._fact_plus is None:
            self._fact_plus = factorize(self.a_plus)
        return self._fact_plus

    def _spectral_combine(self, values: np.ndarray, scalar_fn) -> np.ndarray:
        vhat = np.fft.fft(values, axis=0)
        wp = vhat @ self.proj_plus.T
        wm = vhat @ self.proj_minus.T
        out = scalar_fn(self.lam_plus)[:, None] * wp + scalar_fn(self.lam_minus)[:, None] * wm
        return np.fft.ifft(out, axis=0)

    def cayley(self, values: np.ndarray) -> np.ndarray:
        """U v = (Id + H/2)^{-1} (Id - H/2) v on a bare (m, 2) array."""
        if self.backend is Backend.FD:
            return self._factorization().solve(matvec(self.a_minus, values))
        return self._spectral_combine(values, lambda lam: (1.0 - 0.5j * lam) / (1.0 + 0.5j * lam))

    def solve_plus(self, values: np.ndarray) -> np.ndarray:
        """(Id + H/2)^{-1} v; the implicit half of the Cayley step."""
        if self.backend is Backend.FD:
            return self._factorization().solve(values)
        return self._spectral_combine(values, lambda lam: 1.0 / (1.0 + 0.5j * lam))

    def apply_minus(self, values: np.ndarray) -> np.ndarray:
        """(Id - H/2) v; the explicit half of the Cayley step."""
        if self.backend is Backend.FD:
            return matvec(self.a_minus, values)
        return self._spectral_combine(values, lambda lam: 1.0 - 0.5j * lam)

    def generator(self, values: np.ndarray) -> np.ndarray:
        """H v (exactly anti-hermitian in the discrete L2 product)."""
        if self.backend is Backend.FD:
            return matvec(self._h_matrix(), values)
        return self._spectral_combine(values, lambda lam: 1.0j * lam)

    def _h_matrix(self) -> BlockTridiagonalMatrix:
        # A_plus = Id + H/2 with identity added to imaginary-carrying blocks:
        # recovering H = 2 (A_plus - Id) is exact in floating point.
        diag = 2.0 * (self.a_plus.diag - IDENTITY2[None, :, :])
        return BlockTridiagonalMatrix(2.0 * self.a_plus.sub, diag, 2.0 * self.a_plus.sup)


def _assemble_fd(grid: Grid, h: float, gamma: float, chi: np.ndarray) -> StepOperator:
    m, dx = grid.m, grid.dx
    lap = h / (dx * dx)
    noise = math.sqrt(gamma * h) / (2.0 * dx)
    pc = pauli_combination(chi)
    # Halved blocks of H: diag of H is (2i h/dx^2) I2, off-diagonals are
    # -i h/dx^2 I2 -/+ sqrt(gamma h)/(2 dx) (chi.sigma).
    half_diag = 1.0j * lap * IDENTITY2
    half_sub = -0.5j * lap * IDENTITY2 - 0.5 * noise * pc
    half_sup = -0.5j * lap * IDENTITY2 + 0.5 * noise * pc
    a_plus = BlockTridiagonalMatrix(
        np.tile(half_sub, (m - 1, 1, 1)),
        np.tile(IDENTITY2 + half_diag, (m, 1, 1)),
        np.tile(half_sup, (m - 1, 1, 1)),
    )
    a_minus = BlockTridiagonalMatrix(
        np.tile(-half_sub, (m - 1, 1, 1)),
        np.tile(IDENTITY2 - half_diag, (m, 1, 1)),
        np.tile(-half_sup, (m - 1, 1, 1)),
    )
    return StepOperator(
        backend=Backend.FD, h=h, gamma=gamma, chi=chi, grid=grid,
        a_plus=a_plus, a_minus=a_minus,
    )


def _assemble_spectral(grid: Grid, h: float, gamma: float, chi: np.ndarray) -> StepOperator:
    xi = 2.0 * math.pi * np.fft.fftfreq(grid.m, d=grid.dx)
    chi_norm = float(np.linalg.norm(chi))
    if chi_norm > 0.0:
        chi_hat = chi / chi_norm
    else:
        chi_hat = np.array([0.0, 0.0, 1.0])
    pc_hat = pauli_combination(chi_hat)
    proj_plus = 0.5 * (IDENTITY2 + pc_hat)
    proj_minus = 0.5 * (IDENTITY2 - pc_hat)
    base = h * xi * xi
    deviation = math.sqrt(gamma * h) * chi_norm * xi
    return StepOperator(
        backend=Backend.SPECTRAL, h=h, gamma=gamma, chi=chi, grid=grid,
        xi=xi, lam_plus=base + deviation, lam_minus=base - deviation,
        proj_plus=proj_plus, proj_minus=proj_minus,
    )


def assemble(
    grid: Grid,
    h: float,
    gamma: float,
    chi,
    backend: Backend = Backend.FD,
) -> StepOperator:
    """Build the one-step operator for noise value chi over a step of size h."""
    if h <= 0:
        raise ConfigError(f"step size must be positive, got {h}")
    if gamma < 0:
        raise ConfigError(f"noise intensity gamma must be >= 0, got {gamma}")
    chi = np.asarray(chi, dtype=np.float64)
    if chi.shape != (3,):
        raise ConfigError(f"chi must be a 3-vector, got shape {chi.shape}")
    if backend is Backend.FD:
        if grid.boundary is not Boundary.DIRICHLET:
            raise BackendBoundaryMismatch("FD backend requires a Dirichlet grid")
        return _assemble_fd(grid, h, gamma, chi)
    if grid.boundary is not Boundary.PERIODIC:
        raise BackendBoundaryMismatch("spectral backend requires a periodic grid")
    return _assemble_spectral(grid, h, gamma, chi)


def _check_grid(op: StepOperator, state: FieldState) -> None:
    if op.grid != state.grid:
        raise ConfigError("operator and state live on different grids")


def apply_cayley(op: StepOperator, state: FieldState) -> FieldState:
    """One application of the unitary propagator U."""
    _check_grid(op, state)
    return FieldState(op.cayley(state.values), state.grid)


def apply_generator(op: StepOperator, state: FieldState) -> FieldState:
    """H applied to the state; used by structure checks, not time stepping."""
    _check_grid(op, state)
    return FieldState(op.generator(state.values), state.grid)


def compose_apply(ops, state: FieldState) -> FieldState:
    """Apply a sequence of step operators, first element first."""
    ops = list(ops)
    for op in ops:
        if op.grid != state.grid or op.backend is not ops[0].backend:
            raise ConfigError("compose_apply needs operators sharing grid and backend")
    out = state
    for op in ops:
        out = apply_cayley(op, out)
    return out
