"""Command-line front end.

Subcommands: ``train`` (load a COO tensor, split, run the cascade, write
CSV traces + factors + manifest), ``synth`` (generate a benchmark tensor
with ground truth), ``gradcheck`` (analytic-vs-numeric gradient suite),
and ``eval`` (RMSE/MAE of a factor file on a holdout, or an exact
Wilcoxon signed-rank comparison of two metric lists).

Every source of randomness takes a mandatory ``--seed``; repeating a
command with identical flags reproduces its CSV outputs byte for byte.
Exit codes: 0 success, 1 runtime/data failure, 2 usage error.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .adam_trainer import TrainConfig
from .cascade import CascadeConfig, run_cascade
from .cp_model import load_factors, save_factors
from .eval_metrics import evaluate, run_gradient_check, wilcoxon_signed_rank
from .synth_gen import SynthSpec, generate
from .tensor_store import TensorDims, load_coo, save_coo, split

GRADCHECK_TOLERANCE = 1e-4


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed_value(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be non-negative, got {value}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {value}")
    return value


def _nonneg_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {value}")
    return value


def _beta_value(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (0.0 <= value < 1.0):
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1), got {value}")
    return value


def _density_value(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (0.0 < value <= 1.0):
        raise argparse.ArgumentTypeError(f"density must lie in (0, 1], got {value}")
    return value


def _dims_value(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected I,J,K with 3 parts, got {text!r}")
    try:
        i, j, k = (int(p) for p in parts)
        return TensorDims(i, j, k)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}: {exc}") from None


def _split_value(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected A,B,C with 3 parts, got {text!r}")
    try:
        ratios = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric split ratio in {text!r}") from None
    if any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise argparse.ArgumentTypeError(
            f"split ratios must be non-negative and sum to 1, got {text!r}"
        )
    return ratios


def _range_value(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LOW,HIGH, got {text!r}")
    try:
        low, high = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric range bound in {text!r}") from None
    if not (0.0 <= low < high):
        raise argparse.ArgumentTypeError(f"range must satisfy 0 <= low < high, got {text!r}")
    return (low, high)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plft",
        description="Cascaded latent tensor factorization with prediction sampling.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run the cascade on a COO dataset")
    p_train.add_argument("--data", required=True, help="input COO text file")
    p_train.add_argument("--dims", required=True, type=_dims_value, metavar="I,J,K")
    p_train.add_argument("--rank", type=_positive_int, default=20)
    p_train.add_argument("--layers", type=_positive_int, default=10)
    p_train.add_argument("--alpha", type=_nonneg_float, default=1.5)
    p_train.add_argument("--lambda", dest="lam", type=_nonneg_float, default=0.01)
    p_train.add_argument("--eta", type=_positive_float, default=0.001)
    p_train.add_argument("--beta1", type=_beta_value, default=0.9)
    p_train.add_argument("--beta2", type=_beta_value, default=0.999)
    p_train.add_argument("--tau", type=_positive_float, default=1e-8)
    p_train.add_argument("--epochs", type=_positive_int, default=1000)
    p_train.add_argument("--tol", type=_positive_float, default=1e-5)
    p_train.add_argument("--seed", required=True, type=_seed_value)
    p_train.add_argument("--split", type=_split_value, default=(0.8, 0.1, 0.1),
                         metavar="A,B,C", help="train,validation,test ratios")
    p_train.add_argument("--nonneg", action="store_true",
                         help="clamp factors at zero after each update")
    p_train.add_argument("--warm-start", action="store_true",
                         help="start each layer from the previous layer's factors")
    p_train.add_argument("--use-best-layer", action="store_true",
                         help="report/serialize the lowest-validation-RMSE layer "
                              "instead of the final one")
    p_train.add_argument("--out-dir", default=".", help="output directory (created if absent)")
    p_train.set_defaults(func=cmd_train)

    p_synth = sub.add_parser("synth", help="generate a synthetic benchmark tensor")
    p_synth.add_argument("--dims", required=True, type=_dims_value, metavar="I,J,K")
    p_synth.add_argument("--rank", type=_positive_int, default=5,
                         help="ground-truth rank")
    p_synth.add_argument("--density", required=True, type=_density_value)
    p_synth.add_argument("--noise", type=_nonneg_float, default=0.0)
    p_synth.add_argument("--range", dest="value_range", type=_range_value,
                         default=(0.0, 1.0), metavar="LOW,HIGH")
    p_synth.add_argument("--seed", required=True, type=_seed_value)
    p_synth.add_argument("--out", required=True, help="output COO file")
    p_synth.add_argument("--factors-out", default=None,
                         help="ground-truth factor file (default: OUT.factors)")
    p_synth.set_defaults(func=cmd_synth)

    p_grad = sub.add_parser("gradcheck", help="verify analytic gradients numerically")
    p_grad.add_argument("--instances", type=_positive_int, default=20)
    p_grad.add_argument("--seed", required=True, type=_seed_value)
    p_grad.set_defaults(func=cmd_gradcheck)

    p_eval = sub.add_parser("eval", help="score factors on a holdout, or compare metric lists")
    p_eval.add_argument("--factors", help="factor file to evaluate")
    p_eval.add_argument("--holdout", help="holdout COO file")
    p_eval.add_argument("--wilcoxon", nargs=2, metavar=("LIST_A", "LIST_B"),
                        help="two files of newline-separated paired metric values")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def cmd_train(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    tensor = load_coo(args.data, args.dims)
    dataset = split(tensor, args.split, args.seed)

    train_cfg = TrainConfig(
        eta=args.eta, beta1=args.beta1, beta2=args.beta2, tau=args.tau,
        lam=args.lam, alpha=args.alpha, max_epochs=args.epochs, tol=args.tol,
        seed=args.seed, nonneg=args.nonneg,
    )
    cfg = CascadeConfig(
        n_layers=args.layers, rank=args.rank, train=train_cfg,
        select_best_by_validation=args.use_best_layer, seed=args.seed,
        warm_start=args.warm_start,
    )

    epoch_rows = []
    result = run_cascade(
        cfg, dataset,
        trace_sink=lambda layer, epoch, rmse: epoch_rows.append((layer, epoch, _fmt(rmse))),
    )

    epochs_csv = out_dir / "epochs.csv"
    layers_csv = out_dir / "layers.csv"
    factors_path = out_dir / "factors.txt"
    manifest_path = out_dir / "manifest.json"

    _write_csv(epochs_csv, ["layer", "epoch", "train_rmse"], epoch_rows)
    _write_csv(
        layers_csv,
        ["layer", "omega_size", "val_rmse", "val_mae", "epochs_to_converge"],
        [
            (rec.layer, rec.omega_size, _fmt(rec.val_rmse), _fmt(rec.val_mae),
             rec.result.epochs_run)
            for rec in result.per_layer
        ],
    )

    chosen_layer = result.best_layer if args.use_best_layer else result.per_layer[-1].layer
    chosen = result.factors_for(args.use_best_layer)
    save_factors(chosen, factors_path)

    manifest = {
        "command": "train",
        "version": __version__,
        "inputs": {"data": str(args.data)},
        "outputs": {
            "epochs_csv": str(epochs_csv),
            "layers_csv": str(layers_csv),
            "factors": str(factors_path),
            "manifest": str(manifest_path),
        },
        "config": {
            "dims": [args.dims.i_size, args.dims.j_size, args.dims.k_size],
            "split": list(args.split),
            "rank": args.rank,
            "layers": args.layers,
            "alpha": args.alpha,
            "lambda": args.lam,
            "eta": args.eta,
            "beta1": args.beta1,
            "beta2": args.beta2,
            "tau": args.tau,
            "epochs": args.epochs,
            "tol": args.tol,
            "seed": args.seed,
            "nonneg": args.nonneg,
            "warm_start": args.warm_start,
            "use_best_layer": args.use_best_layer,
            "out_dir": str(out_dir),
        },
        "result": {
            "best_layer": result.best_layer,
            "serialized_layer": chosen_layer,
        },
    }
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if dataset.test:
        metrics = evaluate(chosen, dataset.test)
        print(f"layer={chosen_layer} test_rmse={metrics.rmse!r} test_mae={metrics.mae!r}")
    else:
        print(f"layer={chosen_layer} (empty test split: no test metrics)")
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(
        dims=args.dims, true_rank=args.rank, density=args.density,
        noise_sigma=args.noise, value_range=args.value_range, seed=args.seed,
    )
    observed, truth = generate(spec)
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    factors_out = Path(args.factors_out) if args.factors_out else out.with_name(out.name + ".factors")
    save_coo(observed, out)
    save_factors(truth, factors_out)

    manifest = {
        "command": "synth",
        "version": __version__,
        "outputs": {"coo": str(out), "factors": str(factors_out)},
        "config": {
            "dims": [args.dims.i_size, args.dims.j_size, args.dims.k_size],
            "rank": args.rank,
            "density": args.density,
            "noise": args.noise,
            "range": list(args.value_range),
            "seed": args.seed,
        },
    }
    manifest_path = out.with_name(out.name + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(observed)} entries to {out} (ground truth: {factors_out})")
    return 0


def cmd_gradcheck(args) -> int:
    report = run_gradient_check(instances=args.instances, seed=args.seed)
    print(
        f"instances={report.n_instances} comparisons={report.n_comparisons} "
        f"max_rel_error={report.max_rel_error:.6g}"
    )
    return 0 if report.max_rel_error < GRADCHECK_TOLERANCE else 1


def _read_metric_list(path):
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                values.append(float(stripped))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric value {stripped!r}") from None
    return values


def cmd_eval(args) -> int:
    wilcoxon_mode = args.wilcoxon is not None
    metric_mode = args.factors is not None or args.holdout is not None
    if wilcoxon_mode == metric_mode:
        _usage_error("eval needs either --factors with --holdout, or --wilcoxon")
    if wilcoxon_mode:
        a = _read_metric_list(args.wilcoxon[0])
        b = _read_metric_list(args.wilcoxon[1])
        report = wilcoxon_signed_rank(a, b)
        print(f"w+={report.w_plus:g} w-={report.w_minus:g} p={report.p_value:g}")
        return 0
    if args.factors is None or args.holdout is None:
        _usage_error("eval metric mode needs both --factors and --holdout")
    factors = load_factors(args.factors)
    holdout = load_coo(args.holdout, factors.dims)
    metrics = evaluate(factors, holdout.entries())
    print(f"rmse={metrics.rmse!r} mae={metrics.mae!r} n={metrics.n}")
    return 0


def _usage_error(message: str):
    print(f"usage error: {message}", file=sys.stderr)
    raise SystemExit(2)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())
