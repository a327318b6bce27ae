"""Classical simulation of lattice-based quantum search over subset lattices."""

from .coefficients import MapCoefficients, build_dense_map, solve_coefficients, svd_closest_unitary
from .lattice import ItemSet, LevelIndex, binomial, enumerate_level, level_size, overlap, rank_set, unrank
from .problems import (
    Problem,
    enumerate_solutions,
    generate_3sat,
    generate_unstructured,
    is_nogood,
    theory,
)
from .simulator import LevelState, PhasePolicy, TrialResult, run_ideal_map, run_trial

__all__ = [
    "ItemSet", "LevelIndex", "binomial", "enumerate_level", "level_size", "overlap", "rank_set", "unrank",
    "MapCoefficients", "build_dense_map", "solve_coefficients", "svd_closest_unitary",
    "Problem", "enumerate_solutions", "generate_3sat", "generate_unstructured", "is_nogood", "theory",
    "LevelState", "PhasePolicy", "TrialResult", "run_ideal_map", "run_trial",
]
