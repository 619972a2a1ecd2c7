"""Region sampling for handwritten glyph recognition.

Centroid quad-tree zoning + longest-run features + classifier-accuracy
fitness, searched by an enhanced (roulette-guided, per-cardinality)
harmony search over the 16 level-2 image regions.
"""

from .classifier import ClassifierConfig, EvalReport, TrainedModel, evaluate, predict, train
from .config import ExperimentConfig, load_config
from .dataset import (BinaryImage, DatasetSplit, Sample, binarize, generate_synthetic,
                      load_manifest, normalize, split)
from .features import FULL_LENGTH, GLOBAL_LENGTH, assemble, directional_feature, longest_run
from .harmony import HSParams, optimize
from .partition import Region, RegionTree, build_tree, centroid, split4
from .pipeline import RunReport, render_region_map, run_pipeline
from .search import (FitnessContext, SelectionResult, basic_search, build_roulette,
                     enhanced_search, improvise_subset, region_fitness, spin)

__version__ = "0.1.0"

__all__ = [
    "BinaryImage", "ClassifierConfig", "DatasetSplit", "EvalReport", "ExperimentConfig",
    "FULL_LENGTH", "FitnessContext", "GLOBAL_LENGTH", "HSParams", "Region", "RegionTree",
    "RunReport", "Sample", "SelectionResult", "TrainedModel", "assemble", "basic_search",
    "binarize", "build_roulette", "build_tree", "centroid", "directional_feature",
    "enhanced_search", "evaluate", "generate_synthetic", "improvise_subset", "load_config",
    "load_manifest", "longest_run", "normalize", "optimize", "predict", "region_fitness",
    "render_region_map", "run_pipeline", "spin", "split", "split4", "train",
]
