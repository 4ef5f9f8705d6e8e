# The full cascade: train, sample, merge, repeat - and why it helps.
#
# Layers 1..N-1 each add as many clamped predictions as the tensor
# currently has entries (doubling it while blanks last); layer N only
# trains. Held-out cells are fenced off from sampling and scored against
# every layer. Deeper layers see denser tensors: they converge in fewer
# epochs and generalize better, up to a depth where stale synthetic
# values stop helping - which is why the best layer is tracked.

from plft import (
    CascadeConfig,
    SynthSpec,
    TensorDims,
    TrainConfig,
    evaluate,
    generate,
    run_cascade,
    split,
    wilcoxon_signed_rank,
)

spec = SynthSpec(dims=TensorDims(40, 40, 3), true_rank=5, density=0.03,
                 noise_sigma=0.01, value_range=(1.0, 5.0), seed=0)
observed, _ = generate(spec)
ds = split(observed, (0.8, 0.1, 0.1), seed=0)
print(f"observed {len(observed)} of {spec.dims.n_cells} cells "
      f"({observed.density():.2%}); train/val/test = "
      f"{len(ds.train)}/{len(ds.validation)}/{len(ds.test)}")

cfg = CascadeConfig(n_layers=5, rank=8, train=TrainConfig(seed=0), seed=0)
result = run_cascade(cfg, ds)

print("\nlayer  omega  epochs  val_rmse  val_mae")
for rec in result.per_layer:
    print(f"{rec.layer:>5}  {rec.omega_size:>5}  {rec.result.epochs_run:>6}  "
          f"{rec.val_rmse:>8.4f}  {rec.val_mae:>7.4f}")
print(f"best layer by validation RMSE: {result.best_layer}")

final = evaluate(result.final_factors, ds.test)
best = evaluate(result.factors_for(use_best=True), ds.test)
print(f"\ntest RMSE: final layer {final.rmse:.4f}, best layer {best.rmse:.4f}")

# -- is the cascade significantly better than a single layer? -----------------
# Pair RMSE and MAE across five seeds and run the exact signed-rank test.
deep_metrics, shallow_metrics = [], []
for seed in range(5):
    s = SynthSpec(dims=TensorDims(40, 40, 3), true_rank=5, density=0.03,
                  noise_sigma=0.01, value_range=(1.0, 5.0), seed=seed)
    obs, _ = generate(s)
    d = split(obs, (0.8, 0.1, 0.1), seed=seed)
    deep = run_cascade(CascadeConfig(n_layers=3, rank=8,
                                     train=TrainConfig(seed=seed), seed=seed), d)
    shallow = run_cascade(CascadeConfig(n_layers=1, rank=8,
                                        train=TrainConfig(seed=seed), seed=seed), d)
    md = evaluate(deep.final_factors, d.test)
    ms = evaluate(shallow.final_factors, d.test)
    deep_metrics += [md.rmse, md.mae]
    shallow_metrics += [ms.rmse, ms.mae]

rep = wilcoxon_signed_rank(shallow_metrics, deep_metrics)
print(f"\nWilcoxon on paired RMSE/MAE over 5 seeds (shallow vs deep): "
      f"w+={rep.w_plus:g} w-={rep.w_minus:g} p={rep.p_value:g}")
print("w+ counts the pairs where the single layer had the larger error")
