"""Passive grasp stability analysis with hierarchically refined friction cones."""
from .cone import FrictionConeState, edge_length, init_cone, uniform_cone
from .encoding import QueryConfig
from .model import Contact, EquilibriumSolution, GraspFileError, GraspModel, load_grasp, save_grasp
from .queries import (QueryResult, ablation_no_mdp, check_stability, force_map,
                      max_disturbance, optimal_torques)
from .refinement import analyze

__all__ = [
    "Contact", "EquilibriumSolution", "FrictionConeState", "GraspFileError", "GraspModel",
    "QueryConfig", "QueryResult", "ablation_no_mdp", "analyze", "check_stability",
    "edge_length", "force_map", "init_cone", "load_grasp", "max_disturbance",
    "optimal_torques", "save_grasp", "uniform_cone",
]
