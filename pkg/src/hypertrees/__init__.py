"""Random k-dimensional hypertrees: exact homology, the determinantal measure,
its vertex-splitting couplings, and spectral gaps of random link graphs."""

from .simplicial_core import Complex, boundary_matrix, faces, hat_boundary, link, proj
from .exact_linalg import RatMatrix, determinant, rank, smith_normal_form
from .homology import homology_summary, reduced_homology, relative_homology
from .trees_forests import enumerate_trees, is_rooted_forest, is_tree, phi, phi_inverse
from .determinantal import (exclusion_prob, inclusion_prob, kalai_sum_verify, kernel_P, kernel_Q,
                            nu_mass, sample)
from .spectral import Graph, lambda2, sample_link_union

__all__ = [
    "Complex", "boundary_matrix", "faces", "hat_boundary", "link", "proj",
    "RatMatrix", "determinant", "rank", "smith_normal_form",
    "homology_summary", "reduced_homology", "relative_homology",
    "enumerate_trees", "is_rooted_forest", "is_tree", "phi", "phi_inverse",
    "exclusion_prob", "inclusion_prob", "kalai_sum_verify", "kernel_P", "kernel_Q", "nu_mass", "sample",
    "Graph", "lambda2", "sample_link_union",
]

__version__ = "0.1.0"
