"""Rank-R latent factorization core.

Three factor matrices U (|I| x R), S (|J| x R), T (|K| x R) approximate a
third-order tensor entrywise as

    yhat_ijk = sum_r u_ir * s_jr * t_kr

i.e. a sum of R rank-one tensors, each the outer product of one column
from each matrix.  Everything here follows one canonical summation rule:
the r-sum is accumulated in ascending r with (u*s)*t multiplication
order, so ``predict``, ``reconstruct_dense``, the loss, and the training
kernels all agree bit-for-bit on the same inputs.

The training objective over a known set and a synthetic set is

    sum_known (y - yhat)^2  +  alpha * sum_synth (y - yhat)^2
      + lambda * sum_over_visited_entries sum_r (u_ir^2 + s_jr^2 + t_kr^2)

with the regularizer accumulated once per visited entry (entry-coupled:
a row visited by many entries is penalized once per visit).
"""

import math
from dataclasses import dataclass

import numpy as np

from .tensor_store import Entry, Origin, TensorDims

INIT_SCALE = 0.1  # uniform init range (0, INIT_SCALE]

FACTOR_FILE_MAGIC = "PLFT-FACTORS"
FACTOR_FILE_VERSION = "v1"


@dataclass
class FactorMatrices:
    """U, S, T factor matrices of a shared rank R (float64, C-order)."""

    u: np.ndarray
    s: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        self.u = np.ascontiguousarray(self.u, dtype=np.float64)
        self.s = np.ascontiguousarray(self.s, dtype=np.float64)
        self.t = np.ascontiguousarray(self.t, dtype=np.float64)
        if self.u.ndim != 2 or self.s.ndim != 2 or self.t.ndim != 2:
            raise ValueError("factor matrices must be 2-D")
        if not (self.u.shape[1] == self.s.shape[1] == self.t.shape[1]):
            raise ValueError(
                f"rank mismatch: {self.u.shape[1]}, {self.s.shape[1]}, {self.t.shape[1]}"
            )
        if self.u.shape[1] < 1:
            raise ValueError("rank must be at least 1")

    @property
    def rank(self) -> int:
        return self.u.shape[1]

    @property
    def dims(self) -> TensorDims:
        return TensorDims(self.u.shape[0], self.s.shape[0], self.t.shape[0])

    def copy(self) -> "FactorMatrices":
        return FactorMatrices(self.u.copy(), self.s.copy(), self.t.copy())


@dataclass(frozen=True)
class LossParams:
    """Regularization strength and synthetic-entry weight."""

    lam: float = 0.01
    alpha: float = 1.5

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam!r}")
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha!r}")


def init_factors(dims: TensorDims, rank: int, seed: int) -> FactorMatrices:
    """Draw all factor elements i.i.d. uniform from (0, 0.1].

    U, S, T are filled in that order from a single generator, so the
    result is a pure function of (dims, rank, seed).
    """
    if rank < 1:
        raise ValueError(f"rank must be at least 1, got {rank}")
    rng = np.random.default_rng(seed)

    def draw(n_rows):
        # uniform(0, c) is [0, c); flipping gives the half-open (0, c].
        return INIT_SCALE - rng.uniform(0.0, INIT_SCALE, size=(n_rows, rank))

    return FactorMatrices(draw(dims.i_size), draw(dims.j_size), draw(dims.k_size))


def _check_indices(factors: FactorMatrices, i: int, j: int, k: int) -> None:
    if not (0 <= i < factors.u.shape[0]):
        raise IndexError(f"i index {i} out of range")
    if not (0 <= j < factors.s.shape[0]):
        raise IndexError(f"j index {j} out of range")
    if not (0 <= k < factors.t.shape[0]):
        raise IndexError(f"k index {k} out of range")


def predict(factors: FactorMatrices, i: int, j: int, k: int) -> float:
    """Predicted value yhat_ijk (canonical ascending-r accumulation)."""
    _check_indices(factors, i, j, k)
    u, s, t = factors.u, factors.s, factors.t
    acc = 0.0
    for r in range(factors.rank):
        acc += u[i, r] * s[j, r] * t[k, r]
    return float(acc)


def reconstruct_dense(factors: FactorMatrices, max_cells: int = 1_000_000) -> np.ndarray:
    """Full dense reconstruction; a small-scale test oracle.

    Accumulates one rank-one outer product per r in ascending order, so
    every cell matches ``predict`` exactly.  Refuses tensors larger than
    ``max_cells`` cells.
    """
    dims = factors.dims
    if dims.n_cells > max_cells:
        raise ValueError(
            f"dense reconstruction of {dims.n_cells} cells exceeds cap {max_cells}"
        )
    out = np.zeros((dims.i_size, dims.j_size, dims.k_size))
    for r in range(factors.rank):
        layer = np.multiply.outer(
            np.multiply.outer(factors.u[:, r], factors.s[:, r]), factors.t[:, r]
        )
        out += layer
    return out


def _entry_loss(factors: FactorMatrices, entry: Entry, weight: float, lam: float) -> float:
    rho = entry.value - predict(factors, entry.i, entry.j, entry.k)
    reg = 0.0
    if lam != 0.0:
        u_row = factors.u[entry.i]
        s_row = factors.s[entry.j]
        t_row = factors.t[entry.k]
        reg = lam * (
            float(np.dot(u_row, u_row))
            + float(np.dot(s_row, s_row))
            + float(np.dot(t_row, t_row))
        )
    return weight * (rho * rho) + reg


def loss(factors: FactorMatrices, known, synthetic, params: LossParams) -> float:
    """Total squared-error objective over a known set and a synthetic set.

    Membership is taken from the argument lists (entry origins are not
    consulted): known residuals weigh 1, synthetic residuals weigh
    ``params.alpha``, and the lambda term is added once per visited entry
    for both sets.  Accumulated with exact summation, so the result is
    independent of entry order.
    """
    terms = [_entry_loss(factors, e, 1.0, params.lam) for e in known]
    terms += [_entry_loss(factors, e, params.alpha, params.lam) for e in synthetic]
    return math.fsum(terms)


def entry_gradients(factors: FactorMatrices, entry: Entry, params: LossParams):
    """Analytic gradients of one entry's loss term.

    With residual rho = y - yhat and weight w (1 for KNOWN, alpha for
    SYNTHETIC, read from the entry's origin):

        d/du_ir = -2 w rho s_jr t_kr + 2 lambda u_ir

    and symmetrically for s_jr and t_kr.  Returns three length-R vectors
    (grad_u, grad_s, grad_t).
    """
    i, j, k = entry.i, entry.j, entry.k
    _check_indices(factors, i, j, k)
    w = params.alpha if entry.origin is Origin.SYNTHETIC else 1.0
    rho = entry.value - predict(factors, i, j, k)
    lam = params.lam
    u_row, s_row, t_row = factors.u[i], factors.s[j], factors.t[k]
    grad_u = -2.0 * w * rho * s_row * t_row + 2.0 * lam * u_row
    grad_s = -2.0 * w * rho * u_row * t_row + 2.0 * lam * s_row
    grad_t = -2.0 * w * rho * u_row * s_row + 2.0 * lam * t_row
    return grad_u, grad_s, grad_t


def save_factors(factors: FactorMatrices, path) -> None:
    """Serialize factors as text: header, then U, S, T rows in order.

    Header line: ``PLFT-FACTORS v1 <i_size> <j_size> <k_size> <R>``.
    Each following line is one matrix row, space-separated with 17
    significant digits (lossless float64 round-trip).
    """
    dims = factors.dims
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"{FACTOR_FILE_MAGIC} {FACTOR_FILE_VERSION} "
            f"{dims.i_size} {dims.j_size} {dims.k_size} {factors.rank}\n"
        )
        for matrix in (factors.u, factors.s, factors.t):
            for row in matrix:
                fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def load_factors(path) -> FactorMatrices:
    """Read a factor file produced by ``save_factors``."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[0] != FACTOR_FILE_MAGIC or header[1] != FACTOR_FILE_VERSION:
            raise ValueError(f"{path}: not a {FACTOR_FILE_MAGIC} {FACTOR_FILE_VERSION} file")
        try:
            i_size, j_size, k_size, rank = (int(tok) for tok in header[2:])
        except ValueError:
            raise ValueError(f"{path}: malformed header {header!r}") from None
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rows.append([float(tok) for tok in line.split()])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric row") from None
    expected = i_size + j_size + k_size
    if len(rows) != expected:
        raise ValueError(f"{path}: expected {expected} matrix rows, got {len(rows)}")
    if any(len(row) != rank for row in rows):
        raise ValueError(f"{path}: row width differs from rank {rank}")
    u = np.array(rows[:i_size])
    s = np.array(rows[i_size:i_size + j_size])
    t = np.array(rows[i_size + j_size:])
    return FactorMatrices(u, s, t)
