"""Discrete norms, intensities, and trajectory-vs-reference error reports.

Conventions (shared with the propagator's stencils): the discrete L2 norm is
the rectangle rule sqrt(dx * sum |X_j|^2); the H1 seminorm uses the same
centered first difference D1 = (-1, 0, 1)/(2 dx) with zero Dirichlet ghosts
(periodic wrap on periodic grids); H1 = sqrt(L2^2 + seminorm^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleTimelines
from .model import Boundary, FieldState


def l2_norm(state: FieldState) -> float:
    v = state.values
    total = float((v.real * v.real + v.imag * v.imag).sum())
    return math.sqrt(state.grid.dx * total)


def first_difference(state: FieldState) -> np.ndarray:
    """Centered D1 with the grid's ghost convention, shape (m, 2)."""
    v = state.values
    out = np.empty_like(v)
    if state.grid.boundary is Boundary.PERIODIC:
        out[:] = np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)
    else:
        out[1:-1] = v[2:] - v[:-2]
        out[0] = v[1]
        out[-1] = -v[-2]
    out *= 1.0 / (2.0 * state.grid.dx)
    return out


def h1_norm_squared(state: FieldState) -> float:
    d = first_difference(state)
    deriv = float((d.real * d.real + d.imag * d.imag).sum())
    v = state.values
    total = float((v.real * v.real + v.imag * v.imag).sum())
    return state.grid.dx * (total + deriv)


def h1_norm(state: FieldState) -> float:
    return math.sqrt(h1_norm_squared(state))


def intensities(state: FieldState) -> tuple[np.ndarray, np.ndarray]:
    """(|X1|^2, |X2|^2) pointwise, each shape (m,)."""
    v = state.values
    mag = v.real * v.real + v.imag * v.imag
    return mag[:, 0], mag[:, 1]


@dataclass(frozen=True)
class ErrorReport:
    """Error time series of a trajectory against a finer reference."""

    times: np.ndarray
    l2_errors: np.ndarray
    h1_errors: np.ndarray

    @property
    def l2_final(self) -> float:
        return float(self.l2_errors[-1])

    @property
    def h1_final(self) -> float:
        return float(self.h1_errors[-1])

    @property
    def l2_sup(self) -> float:
        return float(self.l2_errors.max())

    @property
    def h1_sup(self) -> float:
        return float(self.h1_errors.max())


def error_vs_reference(trajectory, reference) -> ErrorReport:
    """Compare snapshot states at shared times; both norms at every point.

    Every snapshot time of `trajectory` must appear among the reference's
    snapshot times (up to a quarter step of slop, so dyadic and decimal step
    sizes both match cleanly).
    """
    if trajectory.grid != reference.grid:
        raise IncompatibleTimelines("trajectory and reference use different grids")
    atol = 0.25 * min(trajectory.h, reference.h)
    idx = np.searchsorted(reference.times, trajectory.times)
    l2_errors = np.empty(len(trajectory.times))
    h1_errors = np.empty(len(trajectory.times))
    for k, t in enumerate(trajectory.times):
        candidates = [i for i in (idx[k] - 1, idx[k], idx[k] + 1) if 0 <= i < len(reference.times)]
        match = [i for i in candidates if abs(reference.times[i] - t) <= atol]
        if not match:
            raise IncompatibleTimelines(
                f"time {t} has no counterpart among reference times"
            )
        i = match[0]
        diff = FieldState(trajectory.states[k] - reference.states[i], trajectory.grid)
        l2_errors[k] = l2_norm(diff)
        h1_errors[k] = h1_norm(diff)
    return ErrorReport(times=np.asarray(trajectory.times, dtype=float),
                       l2_errors=l2_errors, h1_errors=h1_errors)
