"""Prediction sampling: picking blank cells, predicting, clamping.

Targets are gathered by walking every (relation, row) pair of the tensor
in round-robin order, taking at most one blank cell per row visit, until
the requested count is reached or no selectable blank remains:

* a row with two or more present entries donates the floor-midpoint
  column of its leftmost adjacent present pair with gap >= 2 that has not
  yet been consumed ("a blank between two present cells");
* a row whose between-pairs are exhausted, or with fewer than two present
  entries, donates a seeded-uniform random blank column instead.

Selected coordinates are unique, never present in the tensor, and never
in the caller's exclusion set (used to fence off held-out cells).  The
predicted value for each target is passed through a bounds-activated
clamp before it becomes a synthetic entry.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cp_model import FactorMatrices, predict
from .tensor_store import Entry, Origin, SparseTensor


@dataclass(frozen=True)
class SamplePlan:
    """An ordered batch of blank-cell coordinates chosen for synthesis."""

    targets: tuple
    requested: int
    fulfilled: int

    def __post_init__(self):
        if self.fulfilled != len(self.targets):
            raise ValueError("fulfilled must equal the number of targets")
        if self.fulfilled > self.requested:
            raise ValueError("fulfilled cannot exceed requested")


@dataclass(frozen=True)
class ValueBounds:
    """Known-value range used by the activation clamp."""

    y_min: float
    y_max: float

    def __post_init__(self):
        if not (math.isfinite(self.y_min) and math.isfinite(self.y_max)):
            raise ValueError("bounds must be finite")
        if self.y_min > self.y_max:
            raise ValueError(f"y_min {self.y_min!r} exceeds y_max {self.y_max!r}")


class _RowState:
    """Per-(k, i) bookkeeping while a selection walk is in progress."""

    __slots__ = ("present", "pair_pos", "taken", "exhausted")

    def __init__(self, present_cols: list[int]):
        self.present = present_cols  # ascending
        self.pair_pos = 0  # next adjacent pair to consider
        self.taken: set[int] = set()  # columns already emitted from this row
        self.exhausted = False


def select_targets(tensor: SparseTensor, count: int, seed: int, exclude=()) -> SamplePlan:
    """Choose up to ``count`` blank coordinates, round-robin over rows.

    ``exclude`` is an optional collection of (i, j, k) coordinates that
    must never be selected (e.g. validation/test cells).  The plan falls
    short of ``count`` only when no selectable blank cell is left in the
    whole tensor.  Deterministic for a fixed (tensor, count, seed,
    exclude).
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    dims = tensor.dims
    excluded = {tuple(c) for c in exclude}
    rng = np.random.default_rng(seed)

    rows: dict[tuple[int, int], _RowState] = {}
    targets: list[tuple[int, int, int]] = []

    def row_state(k, i):
        st = rows.get((k, i))
        if st is None:
            st = _RowState(tensor.slice_row(k, i))
            rows[(k, i)] = st
        return st

    def try_midpoint(st, k, i):
        cols = st.present
        while st.pair_pos < len(cols) - 1:
            pos = st.pair_pos
            st.pair_pos += 1
            a, b = cols[pos], cols[pos + 1]
            if b - a >= 2:
                mid = (a + b) // 2
                if mid not in st.taken and (i, mid, k) not in excluded:
                    return mid
        return None

    def try_random(st, k, i):
        present = set(st.present)
        candidates = [
            j for j in range(dims.j_size)
            if j not in present and j not in st.taken and (i, j, k) not in excluded
        ]
        if not candidates:
            return None
        return int(candidates[rng.integers(len(candidates))])

    while len(targets) < count:
        progress = False
        for k in range(dims.k_size):
            for i in range(dims.i_size):
                if len(targets) >= count:
                    break
                st = row_state(k, i)
                if st.exhausted:
                    continue
                j = None
                if len(st.present) >= 2:
                    j = try_midpoint(st, k, i)
                if j is None:
                    j = try_random(st, k, i)
                if j is None:
                    st.exhausted = True
                    continue
                st.taken.add(j)
                targets.append((i, j, k))
                progress = True
            if len(targets) >= count:
                break
        if not progress:
            break  # every row is out of selectable blanks

    return SamplePlan(targets=tuple(targets), requested=count, fulfilled=len(targets))


def _sigmoid(z: float) -> float:
    # Overflow-safe logistic; exact 0.0/1.0 at the extreme tails.
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def activate(y_hat: float, bounds: ValueBounds) -> float:
    """Clamp a raw prediction into the vicinity of the known value range.

    Identity on [y_min, y_max]; below the range the output is
    y_min + sigmoid(y_hat), above it y_max * sigmoid(y_hat).  Always
    finite.
    """
    if not math.isfinite(y_hat):
        raise ValueError(f"prediction must be finite, got {y_hat!r}")
    if y_hat < bounds.y_min:
        return bounds.y_min + _sigmoid(y_hat)
    if y_hat > bounds.y_max:
        return bounds.y_max * _sigmoid(y_hat)
    return y_hat


def generate_synthetic(factors: FactorMatrices, plan: SamplePlan,
                       bounds: ValueBounds) -> list[Entry]:
    """Predict and clamp every planned target, in plan order."""
    omega = []
    for (i, j, k) in plan.targets:
        value = activate(predict(factors, i, j, k), bounds)
        omega.append(Entry(i, j, k, value, Origin.SYNTHETIC))
    return omega
