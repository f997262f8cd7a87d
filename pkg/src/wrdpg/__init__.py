"""Weighted random dot product graphs: embedding, weight-law recovery and generation."""

from .asymptotics import CovarianceSpec, Ellipse, confidence_ellipse, sbm_covariance
from .discrete import DiscretePmf, chebyshev_vandermonde_solve, vandermonde_solve
from .generator import (
    EdgeWeightModel,
    FittedGraphModel,
    estimate_p0,
    fit_edge_model,
    fit_from_graph,
    generate_graph,
    make_rng,
    model_from_latent,
    replicate,
)
from .graph import WeightedGraph, hadamard_power, load_edge_list, save_edge_list
from .maxent import MaxEntDensity, dual_gradient, dual_objective, fit_maxent, maxent_discrete, sample_density
from .metrics import betweenness, compare_ensemble, geodesic_distances, weighted_degree
from .model import LatentSequence, SbmSpec, edge_moment_sequence, hankel_psd_check, sbm_latent_positions
from .spectral import Embedding, ase, embed_moments, procrustes_align, select_dimension

__version__ = "0.1.0"
