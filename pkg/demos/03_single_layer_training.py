# Training one layer with per-element Adam.
#
# Each epoch makes three passes over the present entries in a shuffled
# order: U rows first, then T, then S, with the other two matrices held
# fixed. Every factor element keeps its own Adam moments and update
# counter. Training stops when the train RMSE moves less than `tol`
# between epochs, or at the epoch cap.

from plft import SynthSpec, TensorDims, TrainConfig, evaluate, generate, split, train_layer

# a low-rank tensor with 3% of cells observed and link weights in (1, 5]
spec = SynthSpec(dims=TensorDims(30, 30, 2), true_rank=3, density=0.1,
                 noise_sigma=0.01, value_range=(1.0, 5.0), seed=5)
observed, truth = generate(spec)
ds = split(observed, (0.8, 0.1, 0.1), seed=5)
print(f"training on {len(ds.train)} entries "
      f"({observed.density():.1%} of {spec.dims.n_cells} cells observed)")

cfg = TrainConfig(seed=5)  # production defaults: eta 1e-3, lambda 0.01, tol 1e-5
result = train_layer(ds.train, rank=6, cfg=cfg)

trace = result.train_rmse_trace
print(f"\nstopped after {result.epochs_run} epochs (converged={result.converged})")
marks = sorted({1, 2, 5, 10, 25, 50, 100, 200, result.epochs_run})
for epoch in marks:
    if epoch <= result.epochs_run:
        print(f"  epoch {epoch:>4}: train RMSE {trace[epoch - 1]:.5f}")

val = evaluate(result.factors, ds.validation)
test = evaluate(result.factors, ds.test)
print(f"\nvalidation RMSE {val.rmse:.4f}  MAE {val.mae:.4f}  (n={val.n})")
print(f"test       RMSE {test.rmse:.4f}  MAE {test.mae:.4f}  (n={test.n})")
