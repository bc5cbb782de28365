"""Diffusion-map clustering for data with few samples and many features."""
__version__ = "0.1.0"

from .baselines import GaussianKernelPCA, LinearEmbedding, PCA, kernel_pca_embed, pca_embed
from .clustering import (
    AgglomerativeClustering, Dendrogram, DiffusionSpectralClustering, KMeans, Partition,
    agglomerative, cut_dendrogram, kmeans, partitions_equal, spectral_threshold,
)
from .diffusion import (
    AffinityGraph, DiffusionEmbedding, DiffusionMap, EpsilonScan, choose_dim, diffusion_distance,
    diffusion_embed, epsilon_scan, gaussian_affinity, select_epsilon,
)
from .exceptions import (
    DMCError, DegenerateInputError, DegenerateSplitWarning, NoLinearRegionError, NumericalFailureError,
    ParseError, ValidationError, ZeroVarianceWarning,
)
from .io import load_matrix, save_matrix
from .linalg import EigenSystem, pairwise_sq_dists, sym_eig
from .preprocess import SignedLogTransformer, correlation_matrix, salient_mask, signed_log_normalize

__all__ = [
    "DMCError", "DegenerateInputError", "DegenerateSplitWarning", "NoLinearRegionError",
    "NumericalFailureError", "ParseError", "ValidationError", "ZeroVarianceWarning",
    "AffinityGraph", "AgglomerativeClustering", "Dendrogram", "DiffusionEmbedding", "DiffusionMap",
    "DiffusionSpectralClustering", "EigenSystem", "EpsilonScan", "GaussianKernelPCA", "KMeans",
    "LinearEmbedding", "PCA", "Partition", "SignedLogTransformer", "agglomerative", "choose_dim",
    "correlation_matrix", "cut_dendrogram", "diffusion_distance", "diffusion_embed", "epsilon_scan",
    "gaussian_affinity", "kernel_pca_embed", "kmeans", "load_matrix", "pairwise_sq_dists", "partitions_equal",
    "pca_embed", "salient_mask", "save_matrix", "select_epsilon", "signed_log_normalize", "spectral_threshold",
    "sym_eig",
]
