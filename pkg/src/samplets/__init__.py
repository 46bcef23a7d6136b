"""Samplet bases on scattered data and local smoothness detection.

The typical pipeline is::

    ps = samplets.load_points("data.csv", dim=2)
    tree = samplets.build_tree(ps, samplets.default_leaf_capacity(2, 2))
    basis = samplets.build_basis(tree, ps, degree=2)
    coeffs = samplets.forward(basis, ps.values)
    chart = samplets.compute_exponents(basis, coeffs)

or simply ``samplets.analyze(ps, degree=2)``.
"""
from .basis import (FilterPair, SampletBasis, assemble_dense_transform,
                    build_basis, compute_filters, dump_filters, load_filters,
                    moment_matrix, monomial_exponents, samplet_weights)
from .pipeline import Analysis, analyze
from .pointset import (AxisBox, ParseError, PointSet, PointSetError,
                       ValidationError, bounding_box, image_to_points,
                       load_points, read_pgm, save_points, uniformity_stats,
                       write_pgm)
from .smoothness import (BranchRecord, SlopeFit, SmoothnessChart,
                         collect_branch_data, compute_exponents,
                         detect_smooth_branch, fit_branch_slope, save_chart,
                         save_mask, threshold_chart)
from .transform import CoefficientVector, forward, inverse
from .tree import (Cluster, ClusterTree, StructureError, build_tree,
                   build_tree_gridded, cluster_diameter, default_leaf_capacity,
                   num_monomials)

__version__ = "0.1.0"

__all__ = [
    "Analysis", "AxisBox", "BranchRecord", "Cluster", "ClusterTree",
    "CoefficientVector", "FilterPair", "ParseError", "PointSet",
    "PointSetError", "SampletBasis", "SlopeFit", "SmoothnessChart",
    "StructureError", "ValidationError", "analyze", "assemble_dense_transform",
    "bounding_box", "build_basis", "build_tree", "build_tree_gridded",
    "cluster_diameter", "collect_branch_data", "compute_exponents",
    "compute_filters", "default_leaf_capacity", "detect_smooth_branch",
    "dump_filters", "fit_branch_slope", "forward", "image_to_points",
    "inverse", "load_filters", "load_points", "moment_matrix",
    "monomial_exponents", "num_monomials", "read_pgm", "samplet_weights",
    "save_chart", "save_mask", "save_points", "threshold_chart",
    "uniformity_stats", "write_pgm",
]
