"""Stochastic proximal gradient for edge-separable regularization on graphs,
driven by random simple paths."""
from .graph import EdgeWeights, Graph, GraphError, load_edge_list, node_distribution, sample_sbm
from .problems import Inpainting, LaplacianSystem, TrendFiltering, calibrate_lambda
from .regularizers import Kind, Regularizer
from .snake import SolverConfig, SolverTrace, StepSchedule, run

__version__ = "0.1.0"

__all__ = [
    "EdgeWeights", "Graph", "GraphError", "load_edge_list", "node_distribution", "sample_sbm",
    "Inpainting", "LaplacianSystem", "TrendFiltering", "calibrate_lambda",
    "Kind", "Regularizer", "SolverConfig", "SolverTrace", "StepSchedule", "run",
]
