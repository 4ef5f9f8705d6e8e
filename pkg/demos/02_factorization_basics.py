# The rank-R factorization core: predictions, loss, analytic gradients.
#
# Three factor matrices U, S, T approximate the tensor entrywise as
# yhat_ijk = sum_r u_ir * s_jr * t_kr. The training loss adds an
# alpha-weighted term for synthetic entries and an entry-coupled
# L2 penalty on the visited factor rows.

import numpy as np

from plft import (
    Entry,
    LossParams,
    Origin,
    TensorDims,
    entry_gradients,
    finite_diff_gradient,
    init_factors,
    loss,
    predict,
    reconstruct_dense,
)

dims = TensorDims(3, 3, 2)
factors = init_factors(dims, rank=2, seed=7)
print("U shape:", factors.u.shape, "| elements in (0, 0.1]:",
      bool((factors.u > 0).all() and (factors.u <= 0.1).all()))

# -- predictions and the dense oracle agree exactly --------------------------
dense = reconstruct_dense(factors)
agree = all(
    dense[i, j, k] == predict(factors, i, j, k)
    for i in range(3) for j in range(3) for k in range(2)
)
print("dense reconstruction matches predict on every cell:", agree)

# -- the loss on known vs synthetic entries ----------------------------------
known = [Entry(0, 0, 0, 0.5)]
synthetic = [Entry(1, 1, 1, 0.5, Origin.SYNTHETIC)]
params = LossParams(lam=0.01, alpha=1.5)
print("\nloss with known only:      ", loss(factors, known, [], params))
print("loss with synthetic added: ", loss(factors, known, synthetic, params))

# -- analytic gradients vs central finite differences ------------------------
entry = Entry(2, 1, 0, 0.8)
analytic = entry_gradients(factors, entry, params)
numeric = finite_diff_gradient(factors, entry, params, h=1e-5)
worst = max(
    float(np.max(np.abs(np.asarray(a) - n)))
    for a, n in zip(analytic, numeric)
)
print(f"\ngradient check: max |analytic - numeric| = {worst:.3e}")
print("grad wrt u row:", np.round(analytic[0], 6))
