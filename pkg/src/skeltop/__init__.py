"""skeltop: skeleton-topology losses, kernel inflation, and
segmentation/tracing metrics for 3D volumes and neuron traces."""

from .errors import (EmptyGraphError, GenerationError, ParseError,
                     SkeltopError, UndefinedMetricError, ValidationError)
from .inflate import (Kernel2D, Kernel3D, conv2d, conv3d, inflate_average,
                      inflate_center, read_tensor, write_tensor)
from .losses import (DeepSupervisionConfig, ScaleLoss, ce_loss,
                     default_scale_weights, dice_loss, total_loss)
from .segmetrics import (SegReport, evaluate_segmentation, hd95,
                         nearest_rank_percentile, precision_recall_f1)
from .skeleton import (ComponentPartition, SkeletonGraph,
                       connected_components, graph_from_skeleton,
                       graph_from_skeleton_bruteforce, mean_component_size,
                       skeletonize)
from .skeleton_loss import (SkeletonLossBreakdown, SkeletonLossWeights,
                            edge_discrepancy, node_discrepancy,
                            path_discrepancy, skeleton_loss)
from .swc import (Morphology, SwcRecord, load_swc, parse_swc, resample,
                  save_swc, write_swc)
from .synth import SynthSpec, generate_tree, rasterize
from .tracemetrics import TraceReport, dsa, esa, evaluate_trace, pds
from .volume import (BINARY, PROBABILITY, Volume3D, read_volume, surface_voxels,
                     threshold, write_volume)

__version__ = "0.1.0"

__all__ = [
    "BINARY", "PROBABILITY", "Volume3D", "read_volume", "write_volume",
    "threshold", "surface_voxels",
    "skeletonize", "SkeletonGraph", "ComponentPartition",
    "graph_from_skeleton", "graph_from_skeleton_bruteforce",
    "connected_components", "mean_component_size",
    "SkeletonLossWeights", "SkeletonLossBreakdown", "skeleton_loss",
    "node_discrepancy", "edge_discrepancy", "path_discrepancy",
    "dice_loss", "ce_loss", "total_loss", "ScaleLoss",
    "DeepSupervisionConfig", "default_scale_weights",
    "Kernel2D", "Kernel3D", "inflate_center", "inflate_average",
    "conv2d", "conv3d", "read_tensor", "write_tensor",
    "precision_recall_f1", "hd95", "nearest_rank_percentile",
    "SegReport", "evaluate_segmentation",
    "Morphology", "SwcRecord", "parse_swc", "write_swc", "load_swc",
    "save_swc", "resample",
    "esa", "dsa", "pds", "evaluate_trace", "TraceReport",
    "SynthSpec", "generate_tree", "rasterize",
    "SkeltopError", "ValidationError", "ParseError", "EmptyGraphError",
    "UndefinedMetricError", "GenerationError",
]
