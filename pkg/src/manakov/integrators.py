"""Five time-stepping schemes and the trajectory driver.

Per step n, every scheme uses the same unitary Cayley propagator U built
from that step's noise increment; they differ in how the cubic term enters:

* sexp    explicit exponential step  X' = U (X + i h F(X))
* modexp  exponential step with an implicit midpoint correction of F;
          conserves the discrete L2 norm to fixed-point tolerance
* cn      Crank-Nicolson: implicit average G = (|X|^2 + |X'|^2)(X + X')/4,
          solved by lagged fixed point with the matrix factored once
* lt      splitting: exact pointwise nonlinear flow, then the Cayley step
* relax   relaxation: auxiliary density Phi staggered at half steps makes
          the step a single linear solve that conserves L2 exactly

The driver runs one Brownian path at the path's own resolution, records
snapshots, and aborts loudly when the H1 norm leaves a configured bound.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .blocktridiag import BlockTridiagonalMatrix, factorize, matvec
from .errors import BlowUp, ConfigError, NoConvergence, NumericalFailure
from .model import FieldState, Grid, cubic_nonlinearity, smooth_cutoff
from .noise import BrownianPath, scaled_chi
from .observables import h1_norm, h1_norm_squared, l2_norm
from .propagator import Backend, StepOperator, assemble


class SchemeId(enum.Enum):
    SEXP = "sexp"
    MODEXP = "modexp"
    CN = "cn"
    LT = "lt"
    RELAX = "relax"


@dataclass(frozen=True)
class FixedPointConfig:
    """Inner-iteration control for the implicit schemes."""

    tol: float = 1e-12      # absolute, discrete L2
    max_iter: int = 50

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1:
            raise ConfigError(f"need tol > 0 and max_iter >= 1, got {self}")


@dataclass(frozen=True)
class Nonlinearity:
    """Configuration of the cubic term.

    kind "cubic" is the model's term; "truncated" scales it by a smooth
    cutoff in the squared H1 norm (radius 0 switches it off entirely);
    "off" removes it, reducing every scheme to the pure Cayley flow.
    """

    kind: str = "cubic"
    radius: float = math.inf

    def __post_init__(self):
        if self.kind not in ("cubic", "truncated", "off"):
            raise ConfigError(f"unknown nonlinearity kind {self.kind!r}")
        if self.radius < 0:
            raise ConfigError(f"radius must be >= 0, got {self.radius}")

    def density_scale(self, state: FieldState) -> float:
        """Scalar multiplying the density |X|^2 wherever F enters a scheme."""
        if self.kind == "off":
            return 0.0
        if self.kind == "cubic":
            return 1.0
        if self.radius == 0.0:
            return 0.0
        return float(smooth_cutoff(h1_norm_squared(state) / self.radius))

    def apply(self, state: FieldState) -> FieldState:
        scale = self.density_scale(state)
        if scale == 0.0:
            return FieldState(np.zeros_like(state.values), state.grid)
        out = cubic_nonlinearity(state)
        if scale != 1.0:
            out.values *= scale
        return out


CUBIC = Nonlinearity()
NO_NONLINEARITY = Nonlinearity(kind="off")


@dataclass
class TrajectoryState:
    """Mutable per-trajectory bookkeeping threaded through the steppers."""

    current: FieldState
    step_index: int = 0
    phi_prev: np.ndarray | None = None      # staggered density, relax only
    scheme: SchemeId = SchemeId.SEXP
    fp: FixedPointConfig = field(default_factory=FixedPointConfig)
    nonlinearity: Nonlinearity = CUBIC


def _l2(values: np.ndarray, dx: float) -> float:
    return math.sqrt(dx * float((values.real**2 + values.imag**2).sum()))


def nonlinear_phase_flow(values: np.ndarray, h: float, density_scale: float = 1.0) -> np.ndarray:
    """Exact flow of i dY + |Y|^2 Y dt = 0 over time h, pointwise.

    |Y| is conserved by the flow, so it is a pure phase rotation by the
    initial density: Y(h) = exp(i h |Y(0)|^2) Y(0).
    """
    v = np.asarray(values, dtype=np.complex128)
    density = (v.real**2 + v.imag**2).sum(axis=-1)
    return np.exp(1j * h * density_scale * density)[..., None] * v


def step_sexp(state: TrajectoryState, op: StepOperator, h: float) -> FieldState:
    """X' = U (X + i h F(X)); explicit, one solve per step on FD."""
    x = state.current
    f = state.nonlinearity.apply(x)
    return FieldState(op.cayley(x.values + 1j * h * f.values), x.grid)


def step_modexp(state: TrajectoryState, op: StepOperator, h: float) -> FieldState:
    """X' = U X + i h F*, F* = F(U X + i (h/2) F*) by fixed point."""
    x = state.current
    grid = x.grid
    v = op.cayley(x.values)
    v_state = FieldState(v, grid)
    f = state.nonlinearity.apply(v_state).values
    for _ in range(state.fp.max_iter):
        mid = FieldState(v + 0.5j * h * f, grid)
        f_next = state.nonlinearity.apply(mid).values
        residual = _l2(f_next - f, grid.dx)
        f = f_next
        if residual <= state.fp.tol:
            return FieldState(v + 1j * h * f, grid)
    raise NoConvergence(state.fp.max_iter, residual)


def step_cn(state: TrajectoryState, op: StepOperator, h: float) -> FieldState:
    """(Id + H/2) X' = (Id - H/2) X + i h G(X, X'), lagged fixed point.

    G(X, X') = (|X|^2 + |X'|^2)(X + X')/4; the matrix is iteration
    independent, so it is factored once.  The cutoff scale of a truncated
    nonlinearity is evaluated at the explicit state.
    """
    x = state.current
    grid = x.grid
    scale = state.nonlinearity.density_scale(x)
    rhs_linear = op.apply_minus(x.values)
    xv = x.values
    dens_n = (xv.real**2 + xv.imag**2).sum(axis=1)
    xk = xv
    for _ in range(state.fp.max_iter):
        dens_k = (xk.real**2 + xk.imag**2).sum(axis=1)
        g = (0.25 * scale) * ((dens_n + dens_k)[:, None] * (xv + xk))
        x_next = op.solve_plus(rhs_linear + 1j * h * g)
        residual = _l2(x_next - xk, grid.dx)
        xk = x_next
        if residual <= state.fp.tol:
            return FieldState(xk, grid)
    raise NoConvergence(state.fp.max_iter, residual)


def step_lt(state: TrajectoryState, op: StepOperator, h: float) -> FieldState:
    """Exact nonlinear phase flow, then the Cayley step."""
    x = state.current
    scale = state.nonlinearity.density_scale(x)
    bracket = nonlinear_phase_flow(x.values, h, scale)
    return FieldState(op.cayley(bracket), x.grid)


def step_relax(state: TrajectoryState, op: StepOperator, h: float) -> tuple[FieldState, np.ndarray]:
    """One linear solve with the staggered density folded into the matrix.

    Phi_next = 2 |X|^2 - Phi_prev; solve
    (Id + H/2 - i(h/2) Phi) X' = (Id - H/2 + i(h/2) Phi) X.
    H - i h Phi is anti-hermitian, so the step is exactly unitary.
    """
    if op.backend is not Backend.FD:
        raise ConfigError("the relaxation scheme needs the FD backend "
                          "(pointwise density does not diagonalize in frequency)")
    x = state.current
    scale = state.nonlinearity.density_scale(x)
    xv = x.values
    dens = (xv.real**2 + xv.imag**2).sum(axis=1)
    phi = 2.0 * scale * dens - state.phi_prev
    shift = 0.5j * h * phi
    diag_plus = op.a_plus.diag.copy()
    diag_plus[:, 0, 0] -= shift
    diag_plus[:, 1, 1] -= shift
    diag_minus = op.a_minus.diag.copy()
    diag_minus[:, 0, 0] += shift
    diag_minus[:, 1, 1] += shift
    m_plus = BlockTridiagonalMatrix(op.a_plus.sub, diag_plus, op.a_plus.sup)
    m_minus = BlockTridiagonalMatrix(op.a_minus.sub, diag_minus, op.a_minus.sup)
    x_next = factorize(m_plus).solve(matvec(m_minus, xv))
    return FieldState(x_next, x.grid), phi


@dataclass(frozen=True)
class Trajectory:
    """Snapshots and norm series recorded along one path."""

    grid: Grid
    scheme: SchemeId
    h: float
    n_steps: int
    times: np.ndarray           # (k,)
    states: np.ndarray          # (k, m, 2)
    l2_series: np.ndarray | None = None     # (n_steps + 1,) if recorded

    @property
    def final_state(self) -> FieldState:
        return FieldState(self.states[-1].copy(), self.grid)


def _snapshot_steps(snapshot_times, h: float, n_steps: int) -> list[int]:
    if snapshot_times is None:
        return [n_steps]
    steps = []
    for t in snapshot_times:
        n = round(t / h)
        if abs(n * h - t) > 1e-9 * max(1.0, abs(t)) or not 0 <= n <= n_steps:
            raise ConfigError(f"snapshot time {t} is not a step multiple within [0, {n_steps * h}]")
        steps.append(n)
    if len(set(steps)) != len(steps) or steps != sorted(steps):
        raise ConfigError("snapshot times must be strictly increasing")
    return steps


def run_trajectory(
    x0: FieldState,
    path: BrownianPath,
    scheme: SchemeId,
    *,
    gamma: float,
    backend: Backend = Backend.FD,
    fp: FixedPointConfig | None = None,
    nonlinearity: Nonlinearity = CUBIC,
    snapshot_times=None,
    blowup_threshold: float = 1e6,
    record_l2: bool = False,
) -> Trajectory:
    """Advance x0 through every increment of `path` at step h = path.h_fine.

    Deterministic given its inputs.  Numerical failures (no convergence,
    singular pivot, blow-up) propagate with the failing step index attached.
    """
    h = path.h_fine
    n_steps = path.n_fine
    state = TrajectoryState(
        current=x0.copy(),
        scheme=scheme,
        fp=fp or FixedPointConfig(),
        nonlinearity=nonlinearity,
    )
    if scheme is SchemeId.RELAX:
        state.phi_prev = nonlinearity.density_scale(x0) * x0.density()
    snap_steps = _snapshot_steps(snapshot_times, h, n_steps)
    snap_iter = iter(snap_steps)
    next_snap = next(snap_iter, None)
    times = []
    states = []
    l2_series = np.empty(n_steps + 1) if record_l2 else None
    if record_l2:
        l2_series[0] = l2_norm(state.current)
    if next_snap == 0:
        times.append(0.0)
        states.append(state.current.values.copy())
        next_snap = next(snap_iter, None)
    stepper = _STEPPERS[scheme]
    try:
        for n in range(n_steps):
            op = assemble(x0.grid, h, gamma, scaled_chi(path, n), backend)
            if scheme is SchemeId.RELAX:
                new_state, state.phi_prev = stepper(state, op, h)
            else:
                new_state = stepper(state, op, h)
            state.current = new_state
            state.step_index = n + 1
            h1 = h1_norm(new_state)
            if not math.isfinite(h1) or h1 > blowup_threshold:
                raise BlowUp(n + 1, h1)
            if record_l2:
                l2_series[n + 1] = l2_norm(new_state)
            if next_snap == n + 1:
                times.append((n + 1) * h)
                states.append(new_state.values.copy())
                next_snap = next(snap_iter, None)
    except NumericalFailure as failure:
        if failure.step_index is None:
            failure.step_index = state.step_index
        raise
    return Trajectory(
        grid=x0.grid,
        scheme=scheme,
        h=h,
        n_steps=n_steps,
        times=np.asarray(times, dtype=float),
        states=np.asarray(states, dtype=np.complex128),
        l2_series=l2_series,
    )


_STEPPERS = {
    SchemeId.SEXP: step_sexp,
    SchemeId.MODEXP: step_modexp,
    SchemeId.CN: step_cn,
    SchemeId.LT: step_lt,
    SchemeId.RELAX: step_relax,
}
