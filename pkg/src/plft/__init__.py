"""Cascaded latent factorization of sparse third-order tensors with
prediction sampling.

The pipeline: load or generate an incomplete link-weight tensor, train a
rank-R factorization per layer with per-element Adam, densify the tensor
between layers by predicting and clamping a batch of blank cells, and
score each layer on held-out data.
"""

from .adam_trainer import LayerResult, MomentState, TrainConfig, adam_update_element, train_layer
from .cascade import (
    CascadeConfig,
    CascadeResult,
    LayerRecord,
    derive_layer_seed,
    derive_sampling_seed,
    predict_with,
    run_cascade,
)
from .cp_model import (
    FactorMatrices,
    LossParams,
    entry_gradients,
    init_factors,
    load_factors,
    loss,
    predict,
    reconstruct_dense,
    save_factors,
)
from .eval_metrics import (
    GradCheckReport,
    MetricPair,
    WilcoxonReport,
    evaluate,
    finite_diff_gradient,
    run_gradient_check,
    wilcoxon_signed_rank,
)
from .sampler import SamplePlan, ValueBounds, activate, generate_synthetic, select_targets
from .synth_gen import SynthSpec, generate
from .tensor_store import (
    DatasetSplit,
    Entry,
    Origin,
    SparseTensor,
    TensorDims,
    load_coo,
    save_coo,
    split,
)

__version__ = "0.1.0"

__all__ = [
    "CascadeConfig",
    "CascadeResult",
    "DatasetSplit",
    "Entry",
    "FactorMatrices",
    "GradCheckReport",
    "LayerRecord",
    "LayerResult",
    "LossParams",
    "MetricPair",
    "MomentState",
    "Origin",
    "SamplePlan",
    "SparseTensor",
    "SynthSpec",
    "TensorDims",
    "TrainConfig",
    "ValueBounds",
    "WilcoxonReport",
    "activate",
    "adam_update_element",
    "derive_layer_seed",
    "derive_sampling_seed",
    "entry_gradients",
    "evaluate",
    "finite_diff_gradient",
    "generate",
    "generate_synthetic",
    "init_factors",
    "load_coo",
    "load_factors",
    "loss",
    "predict",
    "predict_with",
    "reconstruct_dense",
    "run_cascade",
    "run_gradient_check",
    "save_coo",
    "save_factors",
    "select_targets",
    "split",
    "train_layer",
    "wilcoxon_signed_rank",
]
