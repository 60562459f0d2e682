"""Reproducible three-component Wiener increments with dyadic coarsening.

A convergence study runs every step size on the same Brownian path: the path
is sampled once at the finest resolution and coarser increments are exact
dyadic sums of fine ones.  Coarsening by 2^k is performed as k successive
pairwise halvings, so coarsen(coarsen(p, 2), 2) is bitwise identical to
coarsen(p, 4) by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadFactor

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

N_COMPONENTS = 3


def _splitmix64(z: int) -> int:
    """One round of the splitmix64 avalanche; full 64-bit mixing."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_seed(base_seed: int, sample_index: int) -> int:
    """Map (base_seed, sample_index) to a 64-bit generator seed.

    Two avalanche rounds decorrelate nearby inputs, so sample streams are
    independent of the order samples are drawn in.
    """
    if sample_index < 0:
        raise ValueError(f"sample_index must be >= 0, got {sample_index}")
    return _splitmix64(_splitmix64(base_seed & _MASK64) ^ ((sample_index + 1) & _MASK64))


@dataclass(frozen=True)
class NoiseConfig:
    base_seed: int
    sample_index: int = 0


@dataclass(frozen=True)
class BrownianPath:
    """Increments of a 3-component Brownian motion on a uniform time mesh.

    increments[n, k] = W_k((n+1) h_fine) - W_k(n h_fine).  The array is
    frozen (non-writeable) so paths can be shared between trajectories.
    """

    n_fine: int
    h_fine: float
    increments: np.ndarray

    def __post_init__(self):
        if self.increments.shape != (self.n_fine, N_COMPONENTS):
            raise ValueError(
                f"increments shape {self.increments.shape} does not match "
                f"({self.n_fine}, {N_COMPONENTS})"
            )
        self.increments.flags.writeable = False


def sample_path(cfg: NoiseConfig, n_fine: int, h_fine: float) -> BrownianPath:
    """Draw a path; a pure function of (cfg, n_fine, h_fine).

    Normal variates come from numpy's PCG64 + Generator.standard_normal
    (ziggurat); this pairing is fixed for the package, since regression
    values depend on the exact stream.
    """
    if n_fine < 1:
        raise ValueError(f"n_fine must be >= 1, got {n_fine}")
    if h_fine <= 0:
        raise ValueError(f"h_fine must be > 0, got {h_fine}")
    rng = np.random.Generator(np.random.PCG64(stream_seed(cfg.base_seed, cfg.sample_index)))
    increments = rng.standard_normal((n_fine, N_COMPONENTS)) * math.sqrt(h_fine)
    return BrownianPath(n_fine=n_fine, h_fine=float(h_fine), increments=increments)


def coarsen(path: BrownianPath, factor: int) -> BrownianPath:
    """Merge groups of `factor` consecutive increments (factor a power of two)."""
    if factor < 1 or (factor & (factor - 1)) != 0:
        raise BadFactor(f"factor must be a power of two >= 1, got {factor}")
    if path.n_fine % factor != 0:
        raise BadFactor(f"factor {factor} does not divide path length {path.n_fine}")
    if factor == 1:
        return path
    inc = path.increments
    h = path.h_fine
    while factor > 1:
        inc = inc[0::2] + inc[1::2]
        h = h * 2.0
        factor //= 2
    return BrownianPath(n_fine=inc.shape[0], h_fine=h, increments=inc)


def scaled_chi(path: BrownianPath, step: int) -> np.ndarray:
    """chi^n = increment / sqrt(h): the normalized noise entering the operator."""
    if not 0 <= step < path.n_fine:
        raise IndexError(f"step {step} out of range [0, {path.n_fine})")
    return path.increments[step] / math.sqrt(path.h_fine)


def save_path(path: BrownianPath, filename) -> None:
    """Dump a path as CSV (columns step, dW1, dW2, dW3), 17 significant digits."""
    with open(filename, "w", encoding="ascii") as f:
        f.write(f"# h_fine={path.h_fine!r}\n")
        f.write("step,dW1,dW2,dW3\n")
        for n in range(path.n_fine):
            row = ",".join(format(v, ".17g") for v in path.increments[n])
            f.write(f"{n},{row}\n")


def load_path(filename) -> BrownianPath:
    """Read back a path written by save_path, bit-exact."""
    with open(filename, "r", encoding="ascii") as f:
        header = f.readline().strip()
        if not header.startswith("# h_fine="):
            raise ValueError(f"{filename}: missing h_fine header line")
        h_fine = float(header.split("=", 1)[1])
        f.readline()  # column names
        rows = [line.strip().split(",") for line in f if line.strip()]
    increments = np.array([[float(c) for c in r[1:]] for r in rows], dtype=np.float64)
    return BrownianPath(n_fine=len(rows), h_fine=h_fine, increments=increments)
