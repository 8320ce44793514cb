"""ELECTRE Tri-B sorting and ELECTRE Tree parameter elicitation."""

from .clustering import Clustering, kmeans, kmeans_run, kmeanspp_seed, order_clusters
from .core import (DecisionMatrix, ElectreTreeError, ElicitationSpec, ReferenceLabels,
                   TriBParameters, ValidationError, validate_parameters)
from .ensemble import (Ensemble, ModelRecord, VoteResult, build_ensemble, merge_parameters,
                       sample_model, vote_classify)
from .evolve import GaConfig, clip_chromosome, fitness_accuracy, ga_optimize
from .tri_b import assign, assign_optimistic, assign_pessimistic

__version__ = "0.1.0"

__all__ = [
    "Clustering", "DecisionMatrix", "ElectreTreeError", "ElicitationSpec", "Ensemble",
    "GaConfig", "ModelRecord", "ReferenceLabels", "TriBParameters", "ValidationError",
    "VoteResult", "assign", "assign_optimistic", "assign_pessimistic", "build_ensemble",
    "clip_chromosome", "fitness_accuracy", "ga_optimize", "kmeans", "kmeans_run",
    "kmeanspp_seed", "merge_parameters", "order_clusters", "sample_model",
    "validate_parameters", "vote_classify",
]
