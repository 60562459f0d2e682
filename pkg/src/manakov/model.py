"""Spatial grid, two-component field state, soliton data, nonlinear terms.

The continuous model is a coupled pair of nonlinear Schrodinger equations on
an interval [-a, a], driven through the group velocity by a three-component
white noise contracted against the Pauli matrices.  This module holds the
spatial objects only; time stepping lives in :mod:`manakov.integrators`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGrid, InvalidRadius, NonDivisibleDomain

# Pauli basis, contracted against the noise vector chi.
SIGMA = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ],
    dtype=np.complex128,
)

IDENTITY2 = np.eye(2, dtype=np.complex128)


class Boundary(enum.Enum):
    DIRICHLET = "dirichlet"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class Grid:
    """Uniform mesh on [-a, a].

    For Dirichlet boundaries the stored nodes are the m interior points
    -a + j*dx, j = 1..m; the endpoint values are pinned to zero and never
    stored.  For periodic boundaries the nodes are -a + j*dx, j = 0..m-1,
    and x = a is identified with x = -a.
    """

    a: float
    dx: float
    m: int
    boundary: Boundary = Boundary.DIRICHLET

    @property
    def nodes(self) -> np.ndarray:
        if self.boundary is Boundary.DIRICHLET:
            return -self.a + self.dx * np.arange(1, self.m + 1)
        return -self.a + self.dx * np.arange(self.m)


def make_grid(a: float, dx: float, boundary: Boundary = Boundary.DIRICHLET) -> Grid:
    """Build a grid, validating that dx divides the width 2a exactly.

    "Exactly" is taken up to 1e-9 relative slop so that widths like
    2*50/0.25 survive decimal-to-binary rounding.
    """
    if a <= 0 or dx <= 0:
        raise DegenerateGrid(f"need a > 0 and dx > 0, got a={a}, dx={dx}")
    ratio = 2.0 * a / dx
    n_cells = round(ratio)
    if n_cells == 0 or abs(ratio - n_cells) > 1e-9 * max(1.0, abs(ratio)):
        raise NonDivisibleDomain(f"2a = {2 * a} is not a multiple of dx = {dx}")
    if boundary is Boundary.DIRICHLET:
        m = n_cells - 1
    else:
        m = n_cells
    if m < 3:
        raise DegenerateGrid(f"only {m} nodes; need at least 3")
    return Grid(a=float(a), dx=float(dx), m=m, boundary=boundary)


@dataclass
class FieldState:
    """Complex two-component field sampled on a grid.

    values has shape (m, 2); column 0 and 1 are the two polarization
    components.
    """

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.m, 2):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.m}, 2)"
            )

    def copy(self) -> "FieldState":
        return FieldState(self.values.copy(), self.grid)

    def density(self) -> np.ndarray:
        """Pointwise total intensity |X1|^2 + |X2|^2, shape (m,)."""
        v = self.values
        return (v.real * v.real + v.imag * v.imag).sum(axis=1)


@dataclass(frozen=True)
class SolitonParams:
    """Parameters of the polarized sech soliton used as canonical data.

    eta is the amplitude, theta the polarization angle splitting power
    between the two components, kappa a carrier wavenumber, tau its offset,
    and alpha, phi1, phi2 global/per-component phases.
    """

    alpha: float = 0.0
    tau: float = 0.0
    phi1: float = 0.0
    phi2: float = 0.0
    kappa: float = 0.0
    theta: float = math.pi / 4.0
    eta: float = 1.0

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")


def _sech(z: np.ndarray) -> np.ndarray:
    # 2 e^{-|z|} / (1 + e^{-2|z|}) avoids overflow of cosh for large |z|.
    e = np.exp(-np.abs(z))
    return 2.0 * e / (1.0 + e * e)


def soliton_initial_condition(grid: Grid, params: SolitonParams | None = None) -> FieldState:
    """Sech soliton with unit-vector polarization set by the mixing angle.

    X_j = (cos(theta/2) e^{i phi1}, sin(theta/2) e^{i phi2})
          * eta sech(eta x_j) exp(-i kappa (x_j - tau) + i alpha)
    """
    p = params or SolitonParams()
    x = grid.nodes
    envelope = p.eta * _sech(p.eta * x)
    carrier = np.exp(-1j * p.kappa * (x - p.tau) + 1j * p.alpha)
    scalar = envelope * carrier
    pol = np.array(
        [
            math.cos(p.theta / 2.0) * np.exp(1j * p.phi1),
            math.sin(p.theta / 2.0) * np.exp(1j * p.phi2),
        ],
        dtype=np.complex128,
    )
    return FieldState(scalar[:, None] * pol[None, :], grid)


def gaussian_initial_condition(
    grid: Grid,
    width: float = 1.0,
    center: float = 0.0,
    polarization: tuple[complex, complex] = (1.0, 0.5j),
) -> FieldState:
    """Gaussian bump; smooth data for spatial-accuracy comparisons."""
    x = grid.nodes
    scalar = np.exp(-((x - center) ** 2) / (2.0 * width**2))
    pol = np.asarray(polarization, dtype=np.complex128)
    return FieldState(scalar[:, None] * pol[None, :], grid)


def cubic_nonlinearity(state: FieldState) -> FieldState:
    """F(X) = (|X1|^2 + |X2|^2) X, applied pointwise."""
    return FieldState(state.density()[:, None] * state.values, state.grid)


def _bump(s: np.ndarray) -> np.ndarray:
    """exp(-1/s) for s > 0, 0 otherwise; smooth on the whole line."""
    out = np.zeros_like(s, dtype=np.float64)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_cutoff(x) -> np.ndarray | float:
    """C-infinity plateau: 1 on (-inf, 1], 0 on [2, inf), monotone between.

    Built from the standard bump ratio g(2-x) / (g(2-x) + g(x-1)) with
    g(s) = exp(-1/s) for s > 0.  smooth_cutoff(1.5) == 0.5 by symmetry.
    """
    arr = np.asarray(x, dtype=np.float64)
    hi = _bump(2.0 - arr)
    lo = _bump(arr - 1.0)
    with np.errstate(invalid="ignore"):
        out = np.where(arr <= 1.0, 1.0, np.where(arr >= 2.0, 0.0, hi / (hi + lo)))
    if np.isscalar(x):
        return float(out)
    return out


def truncated_nonlinearity(state: FieldState, radius: float, h1_squared: float) -> FieldState:
    """Cubic term scaled by a smooth cutoff in the squared H1 norm.

    The caller supplies h1_squared (= squared H1 norm of the state) so this
    module stays independent of the norm conventions; the cutoff argument is
    h1_squared / radius, so the term is untouched while the squared norm
    stays below the radius and vanishes once it exceeds twice the radius.
    """
    if radius <= 0:
        raise InvalidRadius(f"truncation radius must be positive, got {radius}")
    theta = smooth_cutoff(h1_squared / radius)
    out = cubic_nonlinearity(state)
    out.values *= theta
    return out


def pauli_combination(chi: np.ndarray) -> np.ndarray:
    """sum_k chi_k sigma_k as a dense 2x2 complex matrix (Hermitian for real chi)."""
    chi = np.asarray(chi, dtype=np.float64)
    if chi.shape != (3,):
        raise ValueError(f"chi must have shape (3,), got {chi.shape}")
    return np.einsum("k,kij->ij", chi, SIGMA)
