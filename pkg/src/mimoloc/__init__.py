"""Synthetic massive MIMO channels and fingerprint-based positioning.

The package simulates uplink SIMO/OFDM snapshots in a rectangular room via
an image-source multipath model, derives covariance / impulse-response /
raw fingerprints, trains small dense networks on them from scratch, and
fuses the two compact branches into one coordinate estimate.
"""

from .channel import (
    Dataset,
    Rays,
    SceneConfig,
    TrajectoryPlan,
    generate_dataset,
    multipath_rays,
    plan_positions,
    propagation_matrix,
    synth_snapshot,
)
from .fingerprint import (
    cir_fingerprint,
    covariance_fingerprint,
    fingerprint_matrix,
    normalize_dataset,
    raw_fingerprint,
    unpack_covariance,
)
from .neuralnet import (
    MlpModel,
    MlpSpec,
    TrainConfig,
    TrainingDiverged,
    build_spec,
    forward,
    init_model,
    lr_at_epoch,
    param_count,
    predict,
    train,
)
from .pipeline import (
    BranchRun,
    EvalReport,
    SplitPlan,
    error_correlation,
    evaluate,
    fuse,
    run_branches,
    run_experiment,
    spatial_correlation,
    split_indices,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "Rays", "SceneConfig", "TrajectoryPlan",
    "generate_dataset", "multipath_rays", "plan_positions",
    "propagation_matrix", "synth_snapshot",
    "cir_fingerprint", "covariance_fingerprint", "fingerprint_matrix",
    "normalize_dataset", "raw_fingerprint", "unpack_covariance",
    "MlpModel", "MlpSpec", "TrainConfig", "TrainingDiverged",
    "build_spec", "forward", "init_model", "lr_at_epoch", "param_count",
    "predict", "train",
    "BranchRun", "EvalReport", "SplitPlan",
    "error_correlation", "evaluate", "fuse", "run_branches",
    "run_experiment", "spatial_correlation", "split_indices",
]
