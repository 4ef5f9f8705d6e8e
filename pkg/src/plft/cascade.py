"""Multi-layer train/sample/merge orchestration.

Layer 1 trains on the known training entries alone.  After each of
layers 1..N-1, the sampler selects as many blank cells as the tensor
currently has entries, the freshly trained factors predict and clamp
their values, and the resulting synthetic set is merged to form the next
layer's input (so with abundant blanks the entry count doubles per
layer).  Layer N only trains.  Held-out validation cells are excluded
from sampling and scored against every layer's factors, and the layer
with the lowest validation RMSE is recorded alongside the final one.

Each layer's training seed is a pure function of (config seed, layer
number), so extending the cascade never perturbs earlier layers.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .adam_trainer import LayerResult, TrainConfig, train_layer
from .cp_model import FactorMatrices, predict
from .eval_metrics import evaluate
from .sampler import ValueBounds, generate_synthetic, select_targets
from .tensor_store import DatasetSplit


@dataclass
class CascadeConfig:
    """Depth, rank, per-layer training settings, and the master seed."""

    n_layers: int = 10
    rank: int = 20
    train: TrainConfig = field(default_factory=TrainConfig)
    select_best_by_validation: bool = True
    seed: int = 0
    warm_start: bool = False  # opt-in: seed layer n's factors from layer n-1

    def __post_init__(self):
        if not isinstance(self.n_layers, int) or self.n_layers < 1:
            raise ValueError(f"n_layers must be a positive integer, got {self.n_layers!r}")
        if not isinstance(self.rank, int) or self.rank < 1:
            raise ValueError(f"rank must be a positive integer, got {self.rank!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")


@dataclass
class LayerRecord:
    """One cascade layer's outcome: training result, sampling size, held-out scores."""

    layer: int  # 1-based
    result: LayerResult
    omega_size: int
    val_rmse: float | None
    val_mae: float | None


@dataclass
class CascadeResult:
    """Per-layer records plus the final and best-validated factor sets."""

    per_layer: list[LayerRecord]
    final_factors: FactorMatrices
    best_layer: int  # 1-based; lowest validation RMSE (final layer if no validation)

    def factors_for(self, use_best: bool) -> FactorMatrices:
        if use_best:
            return self.per_layer[self.best_layer - 1].result.factors
        return self.final_factors


def _subseed(seed: int, key: tuple) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])


def derive_layer_seed(seed: int, layer: int) -> int:
    """Training seed of 1-based ``layer`` under cascade seed ``seed``."""
    return _subseed(seed, (1, layer))


def derive_sampling_seed(seed: int, layer: int) -> int:
    """Target-selection seed used after 1-based ``layer``."""
    return _subseed(seed, (2, layer))


def run_cascade(cfg: CascadeConfig, split: DatasetSplit, trace_sink=None) -> CascadeResult:
    """Run the full N-layer pipeline on a dataset split.

    ``trace_sink``, if given, receives ``(layer, epoch, train_rmse)``
    records as training progresses.  Deterministic for equal inputs.
    """
    if len(split.train) == 0:
        raise ValueError("training tensor is empty")

    holdout_coords = [(e.i, e.j, e.k) for e in split.validation]
    holdout_coords += [(e.i, e.j, e.k) for e in split.test]

    current = split.train
    records: list[LayerRecord] = []
    prev_factors = None
    for layer in range(1, cfg.n_layers + 1):
        layer_cfg = replace(cfg.train, seed=derive_layer_seed(cfg.seed, layer))
        sink = None
        if trace_sink is not None:
            sink = lambda epoch, rmse, _layer=layer: trace_sink(_layer, epoch, rmse)
        start = prev_factors if cfg.warm_start else None
        result = train_layer(current, cfg.rank, layer_cfg,
                             start_factors=start, trace_sink=sink)
        prev_factors = result.factors

        if split.validation:
            metrics = evaluate(result.factors, split.validation)
            val_rmse, val_mae = metrics.rmse, metrics.mae
        else:
            val_rmse = val_mae = None

        omega_size = 0
        if layer < cfg.n_layers:
            bounds = ValueBounds(*current.value_bounds())
            plan = select_targets(
                current,
                count=len(current),
                seed=derive_sampling_seed(cfg.seed, layer),
                exclude=holdout_coords,
            )
            omega = generate_synthetic(result.factors, plan, bounds)
            current = current.merge_synthetic(omega)
            omega_size = len(omega)

        records.append(LayerRecord(
            layer=layer,
            result=result,
            omega_size=omega_size,
            val_rmse=val_rmse,
            val_mae=val_mae,
        ))

    if split.validation:
        best = min(records, key=lambda rec: (rec.val_rmse, rec.layer)).layer
    else:
        best = records[-1].layer
    return CascadeResult(
        per_layer=records,
        final_factors=records[-1].result.factors,
        best_layer=best,
    )


def predict_with(result: CascadeResult, i: int, j: int, k: int,
                 use_best: bool = False) -> float:
    """Predict one cell with the final (default) or best-validated factors."""
    return predict(result.factors_for(use_best), i, j, k)
