# Prediction sampling: choosing blanks, clamping predictions, densifying.
#
# The sampler walks every (relation, row) pair round-robin. A row with
# two or more present cells donates the midpoint of its leftmost wide
# gap; sparser rows donate a seeded random blank. Predictions for the
# chosen blanks pass through a bounds clamp before becoming synthetic
# entries.

import numpy as np

from plft import (
    Entry,
    SparseTensor,
    TensorDims,
    ValueBounds,
    activate,
    generate_synthetic,
    init_factors,
    select_targets,
)

# -- the "between two present cells" rule ------------------------------------
dims = TensorDims(2, 9, 1)
tensor = SparseTensor(dims, [
    Entry(0, 0, 0, 2.0), Entry(0, 4, 0, 3.0), Entry(0, 8, 0, 2.5),  # row 0
    Entry(1, 3, 0, 1.0),                                            # row 1
])
print("row 0 present columns:", tensor.slice_row(0, 0))
print("row 1 present columns:", tensor.slice_row(0, 1))

plan = select_targets(tensor, count=4, seed=0)
print("\nselected targets (i, j, k):")
for tgt in plan.targets:
    print("  ", tgt)
print("row-0 picks are gap midpoints; row-1 picks are seeded random blanks")

# -- the activation clamp -----------------------------------------------------
bounds = ValueBounds(1.0, 5.0)
print("\nactivation with bounds (1, 5):")
for y_hat in (3.0, 0.0, -10.0, 6.0, 20.0):
    print(f"  yhat {y_hat:>6}  ->  {activate(y_hat, bounds):.7f}")
print("inside the range the clamp is the identity; outside it lands near the bound")

# -- generating and merging a synthetic batch ---------------------------------
factors = init_factors(dims, rank=2, seed=1)
factors.u += 1.0  # push predictions away from zero so the clamp is visible
omega = generate_synthetic(factors, plan, bounds)
print("\nsynthetic entries:")
for e in omega:
    print(f"  ({e.i}, {e.j}, {e.k}) value {e.value:.4f} origin {e.origin.value}")

merged = tensor.merge_synthetic(omega)
print(f"\nentry count {len(tensor)} -> {len(merged)} after merge; "
      f"bounds still {merged.value_bounds()} (KNOWN only)")
