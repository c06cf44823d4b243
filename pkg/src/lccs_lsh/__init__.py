"""Approximate nearest neighbor search by the longest circular co-substring
of LSH hash strings, backed by a circular shift array."""

from .csa import CircularShiftArray, MatchResult, build_csa, lccs_bruteforce, load_csa
from .families import (
    W_PRESETS,
    CrossPolytopeFamily,
    RandomProjectionFamily,
    cp_rho,
    estimate_p,
    family_params,
    make_family,
    rho,
    rp_collision_prob,
)
from .index import (
    IndexConfig,
    LccsIndex,
    QueryResult,
    build_index,
    extreme_value_cdf,
    lambda_theorem3,
    lccs_length_cdf,
    load_index,
    m_from_alpha,
)
from .multiprobe import MAX_GAP, AlternativeList, PerturbationVector, generate_perturbations, mp_query, score_lists

__version__ = "0.1.0"

__all__ = [
    "AlternativeList", "CircularShiftArray", "CrossPolytopeFamily", "IndexConfig", "LccsIndex", "MAX_GAP",
    "MatchResult", "PerturbationVector", "QueryResult", "RandomProjectionFamily", "W_PRESETS", "build_csa",
    "build_index", "cp_rho", "estimate_p", "extreme_value_cdf", "family_params", "generate_perturbations",
    "lambda_theorem3", "lccs_bruteforce", "lccs_length_cdf", "load_csa", "load_index", "m_from_alpha",
    "make_family", "mp_query", "rho", "rp_collision_prob", "score_lists",
]
