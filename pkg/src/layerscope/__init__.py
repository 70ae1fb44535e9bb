"""Layer points of multiparameter hierarchical clusterings, with a focus on
degree-Rips clusterings of finite metric spaces and their stability under
subsampling."""
from __future__ import annotations

__version__ = "0.1.0"

from .clustering import (ClusteringError, StepClustering, from_degree_rips, lesnick_clustering,
                         slice_clustering, truncate_below)
from .degree_rips import Clustering, clustering_at, lesnick_graph
from .gamma import GammaPoset, build_gamma, is_closed_below, layers
from .interleaving import (build_approximation, check_interleaving, induced_layer_diagram,
                           induced_map)
from .layer_points import (branch_points, global_layer_points, max_layer_point,
                           slice_layer_points)
from .metric import (FiniteMetricSpace, MetricError, Subsample, density_radius,
                     directional_hausdorff, load_metric_space, nearest_point_map,
                     phase_change_profile)
from .stability import (StabilityReport, check_k_positive_note, check_main_theorem,
                        check_param_bounds, check_smallparam, check_truncation_iso)

__all__ = [
    "Clustering",
    "ClusteringError",
    "FiniteMetricSpace",
    "GammaPoset",
    "MetricError",
    "StabilityReport",
    "StepClustering",
    "Subsample",
    "branch_points",
    "build_approximation",
    "build_gamma",
    "check_interleaving",
    "check_k_positive_note",
    "check_main_theorem",
    "check_param_bounds",
    "check_smallparam",
    "check_truncation_iso",
    "clustering_at",
    "density_radius",
    "directional_hausdorff",
    "from_degree_rips",
    "global_layer_points",
    "induced_layer_diagram",
    "induced_map",
    "is_closed_below",
    "layers",
    "lesnick_clustering",
    "lesnick_graph",
    "load_metric_space",
    "max_layer_point",
    "nearest_point_map",
    "phase_change_profile",
    "slice_clustering",
    "slice_layer_points",
    "truncate_below",
]
