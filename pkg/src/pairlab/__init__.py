"""Simulation lab for uniform random (multi)graphs with a fixed subpower-law
degree sequence: pairing-model sampling, component exploration, and the
statistical diagnostics that go with them."""

__version__ = "0.1.0"

from .degree_model import (
    DegreeSequence,
    EmpiricalDistribution,
    OffspringLaw,
    build_subpower_sequence,
    empirical_distribution,
    molloy_reed_sum,
    nu,
    offspring_law,
    validate_subpower,
)
from .exploration import (
    ExplorationState,
    ExplorationTrace,
    explore_component,
    largest_component_via_exploration,
    start_exploration,
)
from .pairing import (
    ComponentReport,
    Pairing,
    PointSpace,
    count_loops,
    count_parallel_pairs,
    enumerate_pairings,
    project_components,
    sample_pairing,
    sample_simple_graph,
)
from .rng import substream

__all__ = [
    "DegreeSequence",
    "EmpiricalDistribution",
    "OffspringLaw",
    "build_subpower_sequence",
    "empirical_distribution",
    "molloy_reed_sum",
    "nu",
    "offspring_law",
    "validate_subpower",
    "ExplorationState",
    "ExplorationTrace",
    "explore_component",
    "largest_component_via_exploration",
    "start_exploration",
    "ComponentReport",
    "Pairing",
    "PointSpace",
    "count_loops",
    "count_parallel_pairs",
    "enumerate_pairings",
    "project_components",
    "sample_pairing",
    "sample_simple_graph",
    "substream",
    "__version__",
]
