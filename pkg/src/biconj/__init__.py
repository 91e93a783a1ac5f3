"""Discrete biconjugates, moment-LP envelopes and a tilt-uniqueness theorem checker."""

from .core import (
    INF,
    Axis,
    DiscreteMeasure,
    DualGridSpec,
    GridSpec,
    ImproperFunction,
    InvalidValue,
    SampledFunction,
    pettis_expectation,
    sublevel_set,
)
from .envelope import (
    concentration_check,
    envelope_all,
    envelope_lp,
    hull_envelope_1d,
    lsc_liminf_demo,
    minimizer_hull_check,
    originate,
    staircase,
)
from .funcdsl import EvalError, ParseError, parse, sample, to_text
from .simplex import Infeasible
from .theorem import (
    NotConvex,
    Tolerances,
    agreement_check,
    essential_strict_convexity,
    mj_identity_check,
    theorem_verdict,
    tilted_argmin,
    uniqueness_scan,
)
from .transform import (
    auto_dual_grid,
    biconjugate,
    conjugate,
    dom_subdiff_conjugate,
    fenchel_young_gap,
)

__all__ = [name for name in dir() if not name.startswith("_")]
