"""Experiment orchestration: train/test splitting, the parallel fingerprint
branches, coordinate fusion, error statistics, and the empirical spatial
correlation of the channel along a trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fingerprint as fp
from . import neuralnet as nn
from .channel import Dataset
from .numerics import make_rng, percentile

# fixed reporting order; fused first since it is the headline method
METHOD_ORDER = ("fused", "cov", "cir", "raw")

# per-branch offsets added to the experiment seed for weight init
_INIT_SEED_OFFSET = {"cov": 101, "cir": 202, "raw": 303}


@dataclass(frozen=True)
class SplitPlan:
    """How the snapshot set divides into train and test."""

    train_fraction: float
    strategy: str = "stride"    # "stride" or "random"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.strategy not in ("stride", "random"):
            raise ValueError(f"unknown split strategy {self.strategy!r}")


def split_indices(n_total: int, plan: SplitPlan,
                  min_train: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint, exhaustive train/test index arrays over range(n_total).

    stride keeps every floor(1/fraction)-th snapshot for training, giving
    uniform spatial coverage along a scan; random samples without replacement
    from the plan seed. min_train lets callers enforce a batch-size floor.
    """
    if n_total < 2:
        raise ValueError("need at least 2 snapshots to split")
    if plan.strategy == "stride":
        stride = int(1.0 / plan.train_fraction)
        train = np.arange(0, n_total, stride)
    else:
        rng = make_rng(plan.seed)
        n_train = int(round(n_total * plan.train_fraction))
        perm = rng.permutation(n_total)
        train = np.sort(perm[:n_train])
    mask = np.zeros(n_total, dtype=bool)
    mask[train] = True
    test = np.nonzero(~mask)[0]
    if len(train) < min_train:
        raise ValueError(
            f"train fraction too small: {len(train)} samples < required {min_train}")
    if len(test) < 1:
        raise ValueError("empty test set")
    return train, test


def split(dataset: Dataset, plan: SplitPlan, min_train: int = 1):
    return split_indices(dataset.n_snapshots, plan, min_train=min_train)


def fuse(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    """Componentwise average of two coordinate estimates (works batched)."""
    p1 = np.asarray(p1, dtype=np.float64)
    p2 = np.asarray(p2, dtype=np.float64)
    if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
        raise ValueError("non-finite coordinate estimate")
    return 0.5 * (p1 + p2)


def error_correlation(e1, e2) -> float:
    """Pearson correlation coefficient between two error sequences."""
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    if e1.shape != e2.shape or e1.ndim != 1 or len(e1) < 2:
        raise ValueError("need two equal-length sequences of at least 2 values")
    d1 = e1 - e1.mean()
    d2 = e2 - e2.mean()
    v1 = float(np.dot(d1, d1))
    v2 = float(np.dot(d2, d2))
    if v1 == 0.0 or v2 == 0.0:
        raise ValueError("degenerate errors: zero variance")
    return float(np.dot(d1, d2) / np.sqrt(v1 * v2))


def spatial_correlation(dataset: Dataset, trajectory_indices,
                        delta_grid) -> list[tuple[float, float]]:
    """|rho| of vectorized snapshots versus transmitter separation.

    For each requested separation, averages the normalized inner product
    h_x^H h_{x+off} over all start positions of one trajectory and takes the
    magnitude of that complex mean. Separations snap to the nearest whole
    sample offset of the trajectory's (uniform) spacing.
    """
    idx = np.asarray(trajectory_indices, dtype=np.int64)
    if idx.ndim != 1 or len(idx) < 2:
        raise ValueError("need at least 2 trajectory snapshots")
    pos = dataset.positions[idx]
    steps = np.linalg.norm(np.diff(pos, axis=0), axis=1)
    spacing = float(steps[0])
    if spacing <= 0 or not np.allclose(steps, spacing, rtol=1e-6):
        raise ValueError("trajectory is not uniformly spaced")

    h = dataset.ys[idx].reshape(len(idx), -1)
    norms2 = np.einsum("ij,ij->i", h.conj(), h).real
    out = []
    for delta in delta_grid:
        offset = int(round(float(delta) / spacing))
        if offset >= len(idx):
            raise ValueError(
                f"separation {delta} m exceeds trajectory extent "
                f"({(len(idx) - 1) * spacing:.4f} m)")
        if offset == 0:
            # self-correlation is identically 1
            out.append((float(delta), 1.0))
            continue
        a, b = h[:-offset], h[offset:]
        inner = np.einsum("ij,ij->i", a.conj(), b)
        ratios = inner / np.sqrt(norms2[:-offset] * norms2[offset:])
        out.append((float(delta), float(np.abs(ratios.mean()))))
    return out


@dataclass
class EvalReport:
    """Per-method positioning errors and their summary statistics."""

    methods: tuple[str, ...]
    errors: dict[str, np.ndarray]               # per test sample, m
    percentiles: dict[str, dict[int, float]]    # {50, 90, 95} per method
    rho: float | None                           # cov/cir branch error correlation
    cdf: dict[str, np.ndarray] = field(default_factory=dict)  # (101, 2) per method


def evaluate(truth: np.ndarray, predictions: dict[str, np.ndarray]) -> EvalReport:
    """Euclidean errors, percentiles, CDF tables, and branch correlation.

    predictions maps method name to (n, 2) estimates aligned with truth. The
    report orders methods fused, cov, cir, raw (present ones only); rho is the
    Pearson correlation of the cov and cir branch errors when both exist.
    """
    truth = np.asarray(truth, dtype=np.float64)
    methods = tuple(m for m in METHOD_ORDER if m in predictions)
    if set(predictions) - set(methods):
        raise ValueError(f"unknown methods: {set(predictions) - set(METHOD_ORDER)}")
    errors, pcts, cdf = {}, {}, {}
    for m in methods:
        pred = np.asarray(predictions[m], dtype=np.float64)
        if pred.shape != truth.shape:
            raise ValueError(f"{m} predictions misaligned with truth")
        e = np.linalg.norm(pred - truth, axis=1)
        errors[m] = e
        pcts[m] = {p: percentile(e, p / 100) for p in (50, 90, 95)}
        qs = np.arange(101)
        cdf[m] = np.column_stack([[percentile(e, q / 100) for q in qs], qs / 100])
    rho = None
    if "cov" in errors and "cir" in errors:
        rho = error_correlation(errors["cov"], errors["cir"])
    return EvalReport(methods=methods, errors=errors, percentiles=pcts,
                      rho=rho, cdf=cdf)


@dataclass
class BranchRun:
    """Everything produced by one training/prediction pass."""

    predictions: dict[str, np.ndarray]      # per kind, test-set estimates
    loss_history: dict[str, list[float]]
    models: dict[str, nn.MlpModel]
    train_idx: np.ndarray
    test_idx: np.ndarray


def run_branches(dataset: Dataset, plan: SplitPlan,
                 train_configs: dict[str, nn.TrainConfig],
                 l_bins: int = 10,
                 kinds: tuple[str, ...] = ("cov", "cir", "raw"),
                 literal_cov: bool = False,
                 standardize: bool = False,
                 seed: int = 0) -> BranchRun:
    """Train one network per fingerprint kind on a shared split.

    The dataset must already be power normalized. Each branch gets its own
    init stream (seed + per-kind offset); shuffling comes from its
    TrainConfig. Test labels are never touched.
    """
    t, m, n = dataset.dims
    min_train = max(train_configs[k].batch_size for k in kinds)
    train_idx, test_idx = split(dataset, plan, min_train=min_train)
    labels_train = dataset.positions[train_idx]

    predictions, histories, models = {}, {}, {}
    for kind in kinds:
        feats = fp.fingerprint_matrix(dataset, kind, l_bins=l_bins,
                                      literal_cov=literal_cov)
        if standardize:
            mean, std = fp.feature_stats(feats[train_idx])
            feats = fp.apply_standardize(feats, mean, std)
        cfg = train_configs[kind]
        spec = nn.build_spec(kind, m, n=n, l=l_bins,
                             seed=seed + _INIT_SEED_OFFSET[kind])
        model, history = nn.train(spec, cfg, feats[train_idx], labels_train)
        predictions[kind] = nn.predict(model, feats[test_idx])
        histories[kind] = history
        models[kind] = model
        del feats
    return BranchRun(predictions=predictions, loss_history=histories,
                     models=models, train_idx=train_idx, test_idx=test_idx)


def run_experiment(dataset: Dataset, plan: SplitPlan,
                   train_configs: dict[str, nn.TrainConfig],
                   l_bins: int = 10,
                   kinds: tuple[str, ...] = ("cov", "cir", "raw"),
                   literal_cov: bool = False,
                   standardize: bool = False,
                   seed: int = 0) -> tuple[float, BranchRun, EvalReport]:
    """normalize -> branches -> fuse -> evaluate, returning all artifacts."""
    normalized, alpha = fp.normalize_dataset(dataset)
    run = run_branches(normalized, plan, train_configs, l_bins=l_bins,
                       kinds=kinds, literal_cov=literal_cov,
                       standardize=standardize, seed=seed)
    preds = dict(run.predictions)
    if "cov" in preds and "cir" in preds:
        preds["fused"] = fuse(preds["cov"], preds["cir"])
    report = evaluate(normalized.positions[run.test_idx], preds)
    return alpha, run, report
