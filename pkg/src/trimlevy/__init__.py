"""Simulation and limit laws for trimmed Levy processes."""

from .measures import (
    Kind,
    LevyModel,
    NonIntegrableError,
    atomic_stable,
    centering_rho,
    gamma_subordinator,
    inverse_positive_tail,
    positive_tail,
    pure_stable,
    regular_variation_diagnostic,
    restricted_triplet,
    stable_limit_model,
    stable_subordinator,
    tempered_stable,
    truncated_exp_moment,
)
from .rng import RngStream
from .samplers import (
    OrderedJumpSample,
    TrimmedSample,
    gamma_sequence,
    ratio_vector,
    sample_ordered_jumps,
    sample_small_jump_remainder,
    sample_tie_correction,
    sample_trimmed,
)

__version__ = "0.1.0"
