"""Algebraic-connectivity maximisation for RIS-assisted UAV networks."""
from .scenario import RadioParams, Scenario, generate_random
from .graph import Graph, build_graph, laplacian, spectrum
from .candidates import CandidateLink, SelectionConstraints, enumerate_candidates, is_feasible
from .optimize import exhaustive, greedy_perturbation, random_baseline, relax_and_round

__all__ = [
    "RadioParams", "Scenario", "generate_random", "Graph", "build_graph", "laplacian",
    "spectrum", "CandidateLink", "SelectionConstraints", "enumerate_candidates",
    "is_feasible", "exhaustive", "greedy_perturbation", "random_baseline", "relax_and_round",
]
