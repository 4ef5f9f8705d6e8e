"""Held-out accuracy metrics, the exact Wilcoxon signed-rank test, and
numerical gradient verification.

RMSE/MAE are computed with exact summation, so they are independent of
holdout ordering.  The Wilcoxon p-value is exact: the null distribution
of the positive rank sum is enumerated by dynamic programming over
doubled ranks (average ranks for tied magnitudes stay integral after
doubling), never by normal approximation.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import cp_model
from .cp_model import FactorMatrices, LossParams, predict
from .tensor_store import Entry, Origin, TensorDims


@dataclass(frozen=True)
class MetricPair:
    """RMSE and MAE over a held-out entry list of size n."""

    rmse: float
    mae: float
    n: int


@dataclass(frozen=True)
class WilcoxonReport:
    """Signed-rank sums, exact two-sided p, and the nonzero-pair count."""

    w_plus: float
    w_minus: float
    p_value: float
    n_effective: int


def evaluate(factors: FactorMatrices, holdout) -> MetricPair:
    """RMSE and MAE of the model's predictions on held-out entries."""
    holdout = list(holdout)
    if not holdout:
        raise ValueError("holdout set is empty")
    sq = []
    ab = []
    for e in holdout:
        d = e.value - predict(factors, e.i, e.j, e.k)
        sq.append(d * d)
        ab.append(abs(d))
    n = len(holdout)
    return MetricPair(
        rmse=math.sqrt(math.fsum(sq) / n),
        mae=math.fsum(ab) / n,
        n=n,
    )


def _average_ranks(magnitudes: np.ndarray) -> np.ndarray:
    """Ranks 1..n of |d| with ties sharing the average of their positions."""
    order = np.argsort(magnitudes, kind="stable")
    ranks = np.empty(len(magnitudes), dtype=np.float64)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and magnitudes[order[end + 1]] == magnitudes[order[pos]]:
            end += 1
        avg = (pos + end) / 2.0 + 1.0
        for idx in range(pos, end + 1):
            ranks[order[idx]] = avg
        pos = end + 1
    return ranks


def _rank_sum_counts(doubled_ranks) -> np.ndarray:
    """counts[s] = number of sign assignments whose positive doubled-rank sum is s."""
    total = int(sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=object)  # exact big-int arithmetic
    counts[0] = 1
    for dr in doubled_ranks:
        dr = int(dr)
        shifted = np.zeros_like(counts)
        shifted[dr:] = counts[:total + 1 - dr]
        counts = counts + shifted
    return counts


def wilcoxon_signed_rank(a, b) -> WilcoxonReport:
    """Exact two-sided Wilcoxon signed-rank test on paired samples.

    Differences d_i = a_i - b_i; zero differences are dropped; tied
    magnitudes receive average ranks.  w_plus sums the ranks of positive
    differences.  The p-value is the exact probability, under random
    signs, of a positive rank sum at least as extreme as the observed one
    on either side: P(W >= max(w+, w-)) + P(W <= min(w+, w-)), capped at 1.
    """
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    if len(a) != len(b):
        raise ValueError(f"paired lists differ in length: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("paired lists are empty")
    diffs = [x - y for x, y in zip(a, b)]
    nonzero = [d for d in diffs if d != 0.0]
    n_eff = len(nonzero)
    if n_eff == 0:
        raise ValueError("all differences are zero; the test is undefined")

    mags = np.array([abs(d) for d in nonzero])
    ranks = _average_ranks(mags)
    w_plus = float(sum(r for d, r in zip(nonzero, ranks) if d > 0))
    w_minus = float(sum(r for d, r in zip(nonzero, ranks) if d < 0))

    doubled = np.rint(2.0 * ranks).astype(np.int64)
    counts = _rank_sum_counts(doubled)
    big2 = int(round(2.0 * max(w_plus, w_minus)))
    small2 = int(round(2.0 * min(w_plus, w_minus)))
    n_ge_big = int(sum(counts[big2:]))
    n_le_small = int(sum(counts[:small2 + 1]))
    # int/int division is correctly rounded, so the p-value is exact
    p = min(1.0, (n_ge_big + n_le_small) / (2 ** n_eff))
    return WilcoxonReport(w_plus=w_plus, w_minus=w_minus, p_value=p, n_effective=n_eff)


def finite_diff_gradient(factors: FactorMatrices, entry: Entry, params: LossParams,
                         h: float = 1e-5):
    """Central-difference gradients of one entry's loss term.

    Perturbs each element of the entry's three factor rows in turn and
    differences the single-entry loss; the independent check for
    ``entry_gradients``.  Returns three length-R vectors.
    """
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h!r}")
    if entry.origin is Origin.SYNTHETIC:
        known, synthetic = [], [entry]
    else:
        known, synthetic = [entry], []

    def single_loss(f):
        return cp_model.loss(f, known, synthetic, params)

    work = factors.copy()
    rows = {"u": entry.i, "s": entry.j, "t": entry.k}
    grads = []
    for name in ("u", "s", "t"):
        matrix = getattr(work, name)
        row = rows[name]
        if not (0 <= row < matrix.shape[0]):
            raise IndexError(f"{name} index {row} out of range")
        g = np.empty(work.rank)
        for r in range(work.rank):
            orig = matrix[row, r]
            matrix[row, r] = orig + h
            up = single_loss(work)
            matrix[row, r] = orig - h
            down = single_loss(work)
            matrix[row, r] = orig
            g[r] = (up - down) / (2.0 * h)
        grads.append(g)
    return tuple(grads)


@dataclass(frozen=True)
class GradCheckReport:
    """Worst relative deviation between analytic and numeric gradients."""

    max_rel_error: float
    n_instances: int
    n_comparisons: int


def run_gradient_check(instances: int = 20, seed: int = 0, h: float = 1e-5,
                       grad_fn=None) -> GradCheckReport:
    """Randomized analytic-vs-numeric gradient comparison suite.

    Each instance draws dims up to 6x6x3, rank up to 4, factor elements
    uniform in (0, 1), a random entry value in [0, 1), and cycles lambda
    through {0, 0.01}, alpha through {1.0, 1.5}, and the entry origin
    through known/synthetic.  Reports the maximum elementwise relative
    error across all instances.
    """
    if instances < 1:
        raise ValueError(f"instances must be positive, got {instances}")
    if grad_fn is None:
        grad_fn = cp_model.entry_gradients
    rng = np.random.default_rng(seed)
    lams = (0.0, 0.01)
    alphas = (1.0, 1.5)
    worst = 0.0
    n_cmp = 0
    for inst in range(instances):
        dims = TensorDims(
            int(rng.integers(2, 7)), int(rng.integers(2, 7)), int(rng.integers(1, 4))
        )
        rank = int(rng.integers(1, 5))
        factors = FactorMatrices(
            rng.uniform(0.0, 1.0, (dims.i_size, rank)),
            rng.uniform(0.0, 1.0, (dims.j_size, rank)),
            rng.uniform(0.0, 1.0, (dims.k_size, rank)),
        )
        params = LossParams(lam=lams[inst % 2], alpha=alphas[(inst // 2) % 2])
        origin = Origin.KNOWN if (inst // 4) % 2 == 0 else Origin.SYNTHETIC
        entry = Entry(
            int(rng.integers(dims.i_size)),
            int(rng.integers(dims.j_size)),
            int(rng.integers(dims.k_size)),
            float(rng.uniform(0.0, 1.0)),
            origin,
        )
        analytic = grad_fn(factors, entry, params)
        numeric = finite_diff_gradient(factors, entry, params, h=h)
        for ga, gn in zip(analytic, numeric):
            scale = np.maximum(np.maximum(np.abs(ga), np.abs(gn)), 1e-10)
            rel = np.abs(np.asarray(ga) - gn) / scale
            worst = max(worst, float(rel.max()))
            n_cmp += len(rel)
    return GradCheckReport(max_rel_error=worst, n_instances=instances, n_comparisons=n_cmp)
