"""Built-in verification suites behind `manakov selftest`.

Fast, randomized but seeded checks of the four load-bearing guarantees:
propagator unitarity, solver correctness against a dense oracle, Brownian
path coupling, and per-scheme L2 conservation behavior.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocktridiag import BlockTridiagonalMatrix, solve, to_dense
from .errors import ManakovError
from .experiments import ConservationConfig, run_conservation
from .integrators import SchemeId
from .model import Boundary, FieldState, make_grid
from .noise import NoiseConfig, coarsen, sample_path
from .observables import l2_norm
from .propagator import Backend, apply_cayley, assemble


@dataclass(frozen=True)
class SelftestReport:
    lines: tuple[str, ...]
    passed: int
    total: int


def _check_unitarity(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for backend, boundary in ((Backend.FD, Boundary.DIRICHLET),
                              (Backend.SPECTRAL, Boundary.PERIODIC)):
        grid = make_grid(8.0, 0.25, boundary)
        for _ in range(50):
            h = 10.0 ** rng.uniform(-4, -1)
            gamma = rng.uniform(0.0, 2.0)
            chi = rng.standard_normal(3)
            values = rng.standard_normal((grid.m, 2)) + 1j * rng.standard_normal((grid.m, 2))
            state = FieldState(values, grid)
            op = assemble(grid, h, gamma, chi, backend)
            ratio = l2_norm(apply_cayley(op, state)) / l2_norm(state)
            worst = max(worst, abs(ratio - 1.0))
    return worst <= 1e-12, f"max norm-ratio deviation {worst:.2e}"


def _random_system(rng: np.random.Generator, m: int) -> BlockTridiagonalMatrix:
    def blocks(count):
        return 0.3 * (rng.standard_normal((count, 2, 2))
                      + 1j * rng.standard_normal((count, 2, 2)))

    diag = blocks(m) + np.eye(2, dtype=np.complex128) * (2.0 + rng.uniform(0, 1))
    return BlockTridiagonalMatrix(blocks(m - 1), diag, blocks(m - 1))


def _check_solver(rng: np.random.Generator) -> tuple[bool, str]:
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 9))
        matrix = _random_system(rng, m)
        b = rng.standard_normal((m, 2)) + 1j * rng.standard_normal((m, 2))
        x = solve(matrix, b)
        x_dense = np.linalg.solve(to_dense(matrix), b.ravel()).reshape(m, 2)
        worst = max(worst, float(np.linalg.norm(x - x_dense) / np.linalg.norm(x_dense)))
    return worst <= 1e-10, f"max relative deviation from dense solve {worst:.2e}"


def _check_path_coupling(base_seed: int) -> tuple[bool, str]:
    path = sample_path(NoiseConfig(base_seed, 0), 256, 2.0**-8)
    factor = 2
    while factor <= 256:
        coarse = coarsen(path, factor)
        resummed = path.increments.reshape(-1, factor, 3)
        while resummed.shape[1] > 1:     # same pairwise order as coarsen
            resummed = resummed[:, 0::2] + resummed[:, 1::2]
        if not np.array_equal(resummed[:, 0], coarse.increments):
            return False, f"coarse increments diverge at factor {factor}"
        again = coarsen(coarsen(path, factor // 2), 2)
        if not np.array_equal(again.increments, coarse.increments):
            return False, f"dyadic composition diverges at factor {factor}"
        factor *= 2
    return True, "blockwise sums and dyadic composition exact for factors 2..256"


def _check_conservation(base_seed: int) -> tuple[bool, str]:
    cfg = ConservationConfig(a=10.0, dx=0.5, tfinal=0.12, h=0.004,
                             base_seed=base_seed)
    result = run_conservation(cfg)
    drift = result.drift
    ok = (
        drift[SchemeId.LT] <= 1e-10
        and drift[SchemeId.RELAX] <= 1e-10
        and drift[SchemeId.CN] <= 1e-8
        and drift[SchemeId.MODEXP] <= 1e-8
        and 0.0 < drift[SchemeId.SEXP] <= 1e-2
    )
    detail = ", ".join(f"{s.value} {drift[s]:.1e}" for s in cfg.schemes)
    return ok, f"relative L2 drift: {detail}"


def run_selftest(base_seed: int = 20260101) -> SelftestReport:
    rng = np.random.Generator(np.random.PCG64(base_seed))
    suites = (
        ("unitarity", lambda: _check_unitarity(rng)),
        ("solver-oracle", lambda: _check_solver(rng)),
        ("path-coupling", lambda: _check_path_coupling(base_seed)),
        ("conservation", lambda: _check_conservation(base_seed)),
    )
    lines = []
    passed = 0
    for name, check in suites:
        try:
            ok, detail = check()
        except ManakovError as err:
            ok, detail = False, f"raised {type(err).__name__}: {err}"
        passed += ok
        lines.append(f"selftest {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return SelftestReport(lines=tuple(lines), passed=passed, total=len(suites))
