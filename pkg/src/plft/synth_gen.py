"""Reproducible synthetic benchmark tensors with known low-rank ground truth.

Every cell of the noiseless ground truth is a sum of ``true_rank``
products of three positive factor elements.  Elements are drawn uniform
on ((low/R)^(1/3), (high/R)^(1/3)], which keeps each noiseless cell
inside (low, high] exactly while preserving an exact rank-R zero-error
solution (no posthoc rescaling of values, which would raise the rank).
A seeded uniform mask keeps floor(density * cells) cells; optional
Gaussian noise perturbs only the observed values.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cp_model import FactorMatrices, predict
from .tensor_store import Entry, Origin, SparseTensor, TensorDims


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic tensor draw."""

    dims: TensorDims
    true_rank: int
    density: float
    noise_sigma: float = 0.0
    value_range: tuple = (0.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.true_rank, int) or self.true_rank < 1:
            raise ValueError(f"true_rank must be a positive integer, got {self.true_rank!r}")
        if not (0.0 < self.density <= 1.0):
            raise ValueError(f"density must lie in (0, 1], got {self.density!r}")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError(f"noise_sigma must be non-negative, got {self.noise_sigma!r}")
        low, high = self.value_range
        if not (0.0 <= low < high) or not math.isfinite(high):
            raise ValueError(f"value_range must satisfy 0 <= low < high, got {self.value_range!r}")
        if self.density * self.dims.n_cells < 3:
            raise ValueError(
                f"density {self.density} on {self.dims.n_cells} cells leaves fewer "
                "than 3 entries; nothing to split"
            )
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")


def generate(spec: SynthSpec):
    """Draw (observed tensor, ground-truth factors) for a spec.

    RNG consumption order is fixed (factors, then mask, then noise), so
    the pair is a pure function of the spec.  At ``noise_sigma == 0``
    every observed value equals the ground-truth prediction at its cell.
    """
    rng = np.random.default_rng(spec.seed)
    low, high = (float(v) for v in spec.value_range)
    lo_el = (low / spec.true_rank) ** (1.0 / 3.0)
    hi_el = (high / spec.true_rank) ** (1.0 / 3.0)

    def draw(n_rows):
        # (lo_el, hi_el]: strictly positive even when low == 0
        return hi_el - rng.uniform(0.0, hi_el - lo_el, size=(n_rows, spec.true_rank))

    dims = spec.dims
    truth = FactorMatrices(draw(dims.i_size), draw(dims.j_size), draw(dims.k_size))

    n_keep = int(math.floor(spec.density * dims.n_cells))
    flat = rng.permutation(dims.n_cells)[:n_keep]
    noise = rng.normal(0.0, spec.noise_sigma, size=n_keep)

    plane = dims.j_size * dims.k_size
    entries = []
    for cell, eps in zip(flat, noise):
        cell = int(cell)
        i, rem = divmod(cell, plane)
        j, k = divmod(rem, dims.k_size)
        value = predict(truth, i, j, k) + float(eps)
        entries.append(Entry(i, j, k, value, Origin.KNOWN))
    return SparseTensor(dims, entries), truth
