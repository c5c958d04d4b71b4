"""Column-by-column encoders and rate bounds for 2D forbidden-pattern constraints."""

from .constraint import (
    BUILTINS,
    Constraint,
    Pattern,
    builtin,
    contains,
    empty_constraint,
    is_mirror_symmetric,
    matches_at,
    parse_constraint,
    serialize_constraint,
)
from .pairgraph import PairGraph, build, density
from .spectral import build_counting_graph, spectral_radius, spectral_report, walk_count
from .subopt import max_min_outdegree, peel_to_threshold, rate_exact
from .codec import build_codebook, code_rate, decode, encode, verify

__version__ = "0.1.0"
