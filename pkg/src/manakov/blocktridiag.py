"""Direct solver for complex 2x2-block tridiagonal systems.

Block Thomas elimination with explicit adjugate inverses of the 2x2 pivots
and no pivoting across block rows: the matrices built by the propagator are
identity plus a skew-hermitian perturbation, so pivots stay well away from
singular for the step sizes of interest.  A pivot with |det| below
PIVOT_FLOOR raises SingularPivot instead of continuing silently.

The inner loops are numba-compiled; factorizations can be reused across
right-hand sides (the implicit schemes solve with the same matrix several
times per step).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import SingularPivot

PIVOT_FLOOR = 1e-300


@dataclass(frozen=True)
class BlockTridiagonalMatrix:
    """Block rows [sub_{j-1}, diag_j, sup_j] of 2x2 complex blocks.

    Shapes: sub (m-1, 2, 2), diag (m, 2, 2), sup (m-1, 2, 2).
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sub", np.ascontiguousarray(self.sub, dtype=np.complex128))
        object.__setattr__(self, "diag", np.ascontiguousarray(self.diag, dtype=np.complex128))
        object.__setattr__(self, "sup", np.ascontiguousarray(self.sup, dtype=np.complex128))
        m = self.diag.shape[0]
        if self.diag.shape != (m, 2, 2) or m < 1:
            raise ValueError(f"diag must have shape (m, 2, 2), got {self.diag.shape}")
        if self.sub.shape != (m - 1, 2, 2) or self.sup.shape != (m - 1, 2, 2):
            raise ValueError(
                f"off-diagonals must have shape ({m - 1}, 2, 2), got "
                f"sub {self.sub.shape}, sup {self.sup.shape}"
            )

    @property
    def m(self) -> int:
        return self.diag.shape[0]


def invert2(block: np.ndarray) -> np.ndarray:
    """Adjugate-over-determinant inverse of one 2x2 block."""
    b = np.asarray(block, dtype=np.complex128)
    det = b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]
    if abs(det) < PIVOT_FLOOR:
        raise SingularPivot(f"2x2 block has |det| = {abs(det):.3e}")
    return np.array([[b[1, 1], -b[0, 1]], [-b[1, 0], b[0, 0]]], dtype=np.complex128) / det


@njit(cache=True)
def _factor_kernel(sub, diag, sup, cp, dinv):  # pragma: no cover - jitted
    m = diag.shape[0]
    p00 = diag[0, 0, 0]
    p01 = diag[0, 0, 1]
    p10 = diag[0, 1, 0]
    p11 = diag[0, 1, 1]
    for j in range(m):
        det = p00 * p11 - p01 * p10
        if abs(det) < PIVOT_FLOOR:
            return j
        i00 = p11 / det
        i01 = -p01 / det
        i10 = -p10 / det
        i11 = p00 / det
        dinv[j, 0, 0] = i00
        dinv[j, 0, 1] = i01
        dinv[j, 1, 0] = i10
        dinv[j, 1, 1] = i11
        if j < m - 1:
            s00 = sup[j, 0, 0]
            s01 = sup[j, 0, 1]
            s10 = sup[j, 1, 0]
            s11 = sup[j, 1, 1]
            c00 = i00 * s00 + i01 * s10
            c01 = i00 * s01 + i01 * s11
            c10 = i10 * s00 + i11 * s10
            c11 = i10 * s01 + i11 * s11
            cp[j, 0, 0] = c00
            cp[j, 0, 1] = c01
            cp[j, 1, 0] = c10
            cp[j, 1, 1] = c11
            b00 = sub[j, 0, 0]
            b01 = sub[j, 0, 1]
            b10 = sub[j, 1, 0]
            b11 = sub[j, 1, 1]
            p00 = diag[j + 1, 0, 0] - (b00 * c00 + b01 * c10)
            p01 = diag[j + 1, 0, 1] - (b00 * c01 + b01 * c11)
            p10 = diag[j + 1, 1, 0] - (b10 * c00 + b11 * c10)
            p11 = diag[j + 1, 1, 1] - (b10 * c01 + b11 * c11)
    return -1


@njit(cache=True)
def _solve_kernel(sub, cp, dinv, b, x):  # pragma: no cover - jitted
    m = dinv.shape[0]
    r0 = b[0, 0]
    r1 = b[0, 1]
    x[0, 0] = dinv[0, 0, 0] * r0 + dinv[0, 0, 1] * r1
    x[0, 1] = dinv[0, 1, 0] * r0 + dinv[0, 1, 1] * r1
    for j in range(1, m):
        r0 = b[j, 0] - (sub[j - 1, 0, 0] * x[j - 1, 0] + sub[j - 1, 0, 1] * x[j - 1, 1])
        r1 = b[j, 1] - (sub[j - 1, 1, 0] * x[j - 1, 0] + sub[j - 1, 1, 1] * x[j - 1, 1])
        x[j, 0] = dinv[j, 0, 0] * r0 + dinv[j, 0, 1] * r1
        x[j, 1] = dinv[j, 1, 0] * r0 + dinv[j, 1, 1] * r1
    for j in range(m - 2, -1, -1):
        x[j, 0] -= cp[j, 0, 0] * x[j + 1, 0] + cp[j, 0, 1] * x[j + 1, 1]
        x[j, 1] -= cp[j, 1, 0] * x[j + 1, 0] + cp[j, 1, 1] * x[j + 1, 1]


@njit(cache=True)
def _matvec_kernel(sub, diag, sup, x, y):  # pragma: no cover - jitted
    m = diag.shape[0]
    for j in range(m):
        a0 = diag[j, 0, 0] * x[j, 0] + diag[j, 0, 1] * x[j, 1]
        a1 = diag[j, 1, 0] * x[j, 0] + diag[j, 1, 1] * x[j, 1]
        if j > 0:
            a0 += sub[j - 1, 0, 0] * x[j - 1, 0] + sub[j - 1, 0, 1] * x[j - 1, 1]
            a1 += sub[j - 1, 1, 0] * x[j - 1, 0] + sub[j - 1, 1, 1] * x[j - 1, 1]
        if j < m - 1:
            a0 += sup[j, 0, 0] * x[j + 1, 0] + sup[j, 0, 1] * x[j + 1, 1]
            a1 += sup[j, 1, 0] * x[j + 1, 0] + sup[j, 1, 1] * x[j + 1, 1]
        y[j, 0] = a0
        y[j, 1] = a1


class BlockFactorization:
    """Reusable forward-elimination data for one matrix."""

    def __init__(self, matrix: BlockTridiagonalMatrix):
        m = matrix.m
        self._sub = matrix.sub
        self._cp = np.empty((max(m - 1, 1), 2, 2), dtype=np.complex128)
        self._dinv = np.empty((m, 2, 2), dtype=np.complex128)
        bad = _factor_kernel(matrix.sub, matrix.diag, matrix.sup, self._cp, self._dinv)
        if bad >= 0:
            raise SingularPivot(f"near-singular pivot at block row {bad}")

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.ascontiguousarray(b, dtype=np.complex128)
        if b.shape != (self._dinv.shape[0], 2):
            raise ValueError(f"rhs shape {b.shape} does not match ({self._dinv.shape[0]}, 2)")
        x = np.empty_like(b)
        _solve_kernel(self._sub, self._cp, self._dinv, b, x)
        return x


def factorize(matrix: BlockTridiagonalMatrix) -> BlockFactorization:
    return BlockFactorization(matrix)


def solve(matrix: BlockTridiagonalMatrix, b: np.ndarray) -> np.ndarray:
    """One-shot solve A x = b with b of shape (m, 2)."""
    return factorize(matrix).solve(b)


def matvec(matrix: BlockTridiagonalMatrix, x: np.ndarray) -> np.ndarray:
    """A @ x for x of shape (m, 2), with zero ghost values beyond both ends."""
    x = np.ascontiguousarray(x, dtype=np.complex128)
    if x.shape != (matrix.m, 2):
        raise ValueError(f"operand shape {x.shape} does not match ({matrix.m}, 2)")
    y = np.empty_like(x)
    _matvec_kernel(matrix.sub, matrix.diag, matrix.sup, x, y)
    return y


def to_dense(matrix: BlockTridiagonalMatrix) -> np.ndarray:
    """Dense (2m, 2m) equivalent; for small-instance oracles and debugging."""
    m = matrix.m
    dense = np.zeros((2 * m, 2 * m), dtype=np.complex128)
    for j in range(m):
        dense[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = matrix.diag[j]
        if j > 0:
            dense[2 * j : 2 * j + 2, 2 * j - 2 : 2 * j] = matrix.sub[j - 1]
        if j < m - 1:
            dense[2 * j : 2 * j + 2, 2 * j + 2 : 2 * j + 4] = matrix.sup[j]
    return dense
