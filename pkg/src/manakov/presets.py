"""Named, compiled-in experiment configurations.

Each subcommand owns a preset namespace.  The "desk" presets finish in
seconds to minutes on one machine and are the defaults everywhere; the
"full-*" presets are the full-scale benchmark runs (expect hours for
full-converge and full-bench).  The aliases paper-4.1 .. paper-4.4 are
stable alternative names for the same four full-scale configs.
"""
from __future__ import annotations

from .experiments import (
    ConservationConfig,
    ConvergenceStudyConfig,
    EvolutionConfig,
    WorkPrecisionConfig,
)
from .integrators import SchemeId

_FULL_EVOLVE = EvolutionConfig(
    a=50.0, dx=0.25, tfinal=3.0, h=3.0 / 625.0, gamma=1.0,
    scheme=SchemeId.SEXP, stride=5,
)

_FULL_CONVERGE = ConvergenceStudyConfig(
    a=50.0, dx=0.4, tfinal=1.0, gamma=1.0,
    coarse_exponents=(13, 14, 15, 16, 17, 18), ref_exponent=19, samples=250,
)

_FULL_BENCH = WorkPrecisionConfig(
    a=50.0, dx=0.2, tfinal=0.5, gamma=1.0,
    schemes=tuple(SchemeId),
    coarse_exponents=(7, 8, 9, 10, 11), ref_exponent=16, samples=500,
)

_FULL_CONSERVE = ConservationConfig(
    a=50.0, dx=0.25, tfinal=3.0, h=0.006, gamma=1.0, schemes=tuple(SchemeId),
)

EVOLVE = {
    "desk": EvolutionConfig(),
    "full-evolve": _FULL_EVOLVE,
    "paper-4.1": _FULL_EVOLVE,
}

CONVERGE = {
    "desk": ConvergenceStudyConfig(),
    "full-converge": _FULL_CONVERGE,
    "paper-4.2": _FULL_CONVERGE,
}

BENCH = {
    "desk": WorkPrecisionConfig(),
    "full-bench": _FULL_BENCH,
    "paper-4.3": _FULL_BENCH,
}

CONSERVE = {
    "desk": ConservationConfig(a=20.0, dx=0.4, tfinal=1.5, h=0.006),
    "full-conserve": _FULL_CONSERVE,
    "paper-4.4": _FULL_CONSERVE,
}
