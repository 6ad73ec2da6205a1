"""Projected-quantum-kernel features, spectral relabeling, and a small-data
classification benchmark.

The high-level pieces compose sklearn-style:

    PcaReducer(10)          # pixels -> 10 rescaled principal components
    PqkFeatureMap()         # components -> per-qubit Bloch-vector features
    SmallBinaryNet()        # tiny conv/dense binary classifier

and the kernel side (rbf_kernel, geometric_difference, relabel) builds the
label task that separates the two feature geometries. `run_experiment` wires
the whole benchmark together.
"""

from .config import ConfigError, ExperimentConfig, parse_config
from .data import (
    DataFormatError,
    LabeledImages,
    filter_binary,
    load_cifar10,
    load_mnist,
    subsample,
)
from .features import (
    CacheFormatError,
    EncodingConfig,
    PqkFeatureMap,
    PqkFeatureSet,
    WallParams,
    encode_state,
    extract_features,
    extract_features_batch,
    load_features,
    sample_wall,
    save_features,
)
from .kernels import (
    GeometricReport,
    KernelMatrix,
    RelabeledDataset,
    eigendecompose,
    geometric_difference,
    median_heuristic_gamma,
    rbf_kernel,
    relabel,
)
from .nn import ModelArch, ModelState, SmallBinaryNet, TrainResult, train
from .pca import PcaReducer
from .sweep import SweepRecord, emit_csv, emit_plot_data, run_experiment

__version__ = "0.1.0"

__all__ = [
    "CacheFormatError",
    "ConfigError",
    "DataFormatError",
    "EncodingConfig",
    "ExperimentConfig",
    "GeometricReport",
    "KernelMatrix",
    "LabeledImages",
    "ModelArch",
    "ModelState",
    "PcaReducer",
    "PqkFeatureMap",
    "PqkFeatureSet",
    "RelabeledDataset",
    "SmallBinaryNet",
    "SweepRecord",
    "TrainResult",
    "WallParams",
    "eigendecompose",
    "emit_csv",
    "emit_plot_data",
    "encode_state",
    "extract_features",
    "extract_features_batch",
    "filter_binary",
    "geometric_difference",
    "load_cifar10",
    "load_features",
    "load_mnist",
    "median_heuristic_gamma",
    "parse_config",
    "rbf_kernel",
    "relabel",
    "run_experiment",
    "sample_wall",
    "save_features",
    "subsample",
    "train",
]
