"""Single-layer training: per-element Adam over alternating factor passes.

Each epoch walks every present entry three times in one per-epoch shuffled
order: the first pass updates only U rows, the second only T rows, the
third only S rows, holding the other two matrices fixed.  An entry visit
updates all R elements of the active factor row through Adam, where each
element keeps its own moment estimates and its own update counter x for
the 1 - beta^x bias correction.

Synthetic entries contribute gradients scaled by alpha; known entries by
1.  The lambda term is applied identically to both.

Training stops at ``max_epochs`` or as soon as the training RMSE moves by
less than ``tol`` between consecutive epochs.  All randomness (init and
shuffles) derives from the config seed, so equal inputs give bit-identical
results.  The inner passes are numba-compiled: the update arithmetic is
written once in ``_adam_element`` and mirrors ``adam_update_element``
expression by expression.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .cp_model import FactorMatrices, init_factors
from .tensor_store import Origin, SparseTensor


@dataclass
class TrainConfig:
    """Hyperparameters of one layer's Adam run (defaults are the production settings)."""

    eta: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    tau: float = 1e-8
    lam: float = 0.01
    alpha: float = 1.5
    max_epochs: int = 1000
    tol: float = 1e-5
    seed: int = 0
    nonneg: bool = False  # opt-in clamp of factors at zero after each update

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f"eta must be positive, got {self.eta!r}")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not (0.0 <= b < 1.0):
                raise ValueError(f"{name} must lie in [0, 1), got {b!r}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau!r}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lam must be non-negative, got {self.lam!r}")
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise ValueError(f"alpha must be non-negative, got {self.alpha!r}")
        if not isinstance(self.max_epochs, int) or self.max_epochs < 1:
            raise ValueError(f"max_epochs must be a positive integer, got {self.max_epochs!r}")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")


@dataclass
class MomentState:
    """Adam first/second moments and per-element update counters, one set per matrix."""

    m_u: np.ndarray
    v_u: np.ndarray
    m_s: np.ndarray
    v_s: np.ndarray
    m_t: np.ndarray
    v_t: np.ndarray
    x_u: np.ndarray
    x_s: np.ndarray
    x_t: np.ndarray

    @classmethod
    def zeros(cls, factors: FactorMatrices) -> "MomentState":
        def z(a):
            return np.zeros_like(a)

        def c(a):
            return np.zeros(a.shape, dtype=np.int64)

        return cls(
            m_u=z(factors.u), v_u=z(factors.u),
            m_s=z(factors.s), v_s=z(factors.s),
            m_t=z(factors.t), v_t=z(factors.t),
            x_u=c(factors.u), x_s=c(factors.s), x_t=c(factors.t),
        )


@dataclass
class LayerResult:
    """Outcome of one layer's training run."""

    factors: FactorMatrices
    epochs_run: int
    train_rmse_trace: list[float] = field(default_factory=list)
    converged: bool = False


def adam_update_element(theta, grad, m_prev, v_prev, x, cfg: TrainConfig):
    """One Adam step of a single scalar parameter.

    Returns (theta_new, m_new, v_new) where

        m_new = beta1 m_prev + (1 - beta1) grad
        v_new = beta2 v_prev + (1 - beta2) grad^2
        theta_new = theta - eta * mhat / (sqrt(vhat) + tau)

    with mhat = m_new / (1 - beta1^x) and vhat = v_new / (1 - beta2^x).
    ``x`` is this element's 1-based update count.
    """
    if x < 1:
        raise ValueError(f"update count x must be >= 1, got {x!r}")
    for name, val in (("theta", theta), ("grad", grad), ("m_prev", m_prev), ("v_prev", v_prev)):
        if not math.isfinite(val):
            raise ValueError(f"{name} must be finite, got {val!r}")
    m_new = cfg.beta1 * m_prev + (1.0 - cfg.beta1) * grad
    v_new = cfg.beta2 * v_prev + (1.0 - cfg.beta2) * (grad * grad)
    m_hat = m_new / (1.0 - cfg.beta1 ** float(x))
    v_hat = v_new / (1.0 - cfg.beta2 ** float(x))
    theta_new = theta - cfg.eta * m_hat / (math.sqrt(v_hat) + cfg.tau)
    return theta_new, m_new, v_new


@njit(cache=True, inline="always")
def _adam_element(theta, grad, m, v, cnt, row, r, eta, beta1, beta2, tau):
    # Must stay expression-for-expression identical to adam_update_element.
    x = cnt[row, r] + 1
    cnt[row, r] = x
    m_new = beta1 * m[row, r] + (1.0 - beta1) * grad
    v_new = beta2 * v[row, r] + (1.0 - beta2) * (grad * grad)
    m[row, r] = m_new
    v[row, r] = v_new
    m_hat = m_new / (1.0 - beta1 ** np.float64(x))
    v_hat = v_new / (1.0 - beta2 ** np.float64(x))
    return theta - eta * m_hat / (np.sqrt(v_hat) + tau)


@njit(cache=True)
def _adam_pass(which, u, s, t, ii, jj, kk, yy, ww, order,
               m, v, cnt, eta, beta1, beta2, tau, lam, nonneg):
    # which: 0 updates U, 1 updates T, 2 updates S; (m, v, cnt) belong to
    # the updated matrix.  yhat uses the canonical ascending-r (u*s)*t order.
    rank = u.shape[1]
    for idx in range(order.shape[0]):
        e = order[idx]
        i = ii[e]
        j = jj[e]
        k = kk[e]
        yhat = 0.0
        for r in range(rank):
            yhat += u[i, r] * s[j, r] * t[k, r]
        rho = yy[e] - yhat
        w = ww[e]
        if which == 0:
            for r in range(rank):
                g = -2.0 * w * rho * s[j, r] * t[k, r] + 2.0 * lam * u[i, r]
                new = _adam_element(u[i, r], g, m, v, cnt, i, r, eta, beta1, beta2, tau)
                if nonneg and new < 0.0:
                    new = 0.0
                u[i, r] = new
        elif which == 1:
            for r in range(rank):
                g = -2.0 * w * rho * u[i, r] * s[j, r] + 2.0 * lam * t[k, r]
                new = _adam_element(t[k, r], g, m, v, cnt, k, r, eta, beta1, beta2, tau)
                if nonneg and new < 0.0:
                    new = 0.0
                t[k, r] = new
        else:
            for r in range(rank):
                g = -2.0 * w * rho * u[i, r] * t[k, r] + 2.0 * lam * s[j, r]
                new = _adam_element(s[j, r], g, m, v, cnt, j, r, eta, beta1, beta2, tau)
                if nonneg and new < 0.0:
                    new = 0.0
                s[j, r] = new


@njit(cache=True)
def _train_rmse(u, s, t, ii, jj, kk, yy):
    n = ii.shape[0]
    rank = u.shape[1]
    acc = 0.0
    for e in range(n):
        i = ii[e]
        j = jj[e]
        k = kk[e]
        yhat = 0.0
        for r in range(rank):
            yhat += u[i, r] * s[j, r] * t[k, r]
        d = yy[e] - yhat
        acc += d * d
    return np.sqrt(acc / n)


def _entry_arrays(tensor: SparseTensor, alpha: float):
    entries = tensor.entries()
    n = len(entries)
    ii = np.empty(n, dtype=np.int64)
    jj = np.empty(n, dtype=np.int64)
    kk = np.empty(n, dtype=np.int64)
    yy = np.empty(n, dtype=np.float64)
    ww = np.empty(n, dtype=np.float64)
    for idx, e in enumerate(entries):
        ii[idx] = e.i
        jj[idx] = e.j
        kk[idx] = e.k
        yy[idx] = e.value
        ww[idx] = alpha if e.origin is Origin.SYNTHETIC else 1.0
    return ii, jj, kk, yy, ww


def train_layer(tensor: SparseTensor, rank: int, cfg: TrainConfig,
                start_factors: FactorMatrices | None = None,
                trace_sink=None) -> LayerResult:
    """Train one layer's factor matrices on the tensor's present entries.

    Factors start from a fresh uniform init seeded by ``cfg.seed`` (or
    from a copy of ``start_factors`` when warm-starting); moments always
    start at zero.  ``trace_sink``, if given, receives ``(epoch, rmse)``
    after every epoch, 1-based.
    """
    if len(tensor) == 0:
        raise ValueError("cannot train on an empty tensor")
    if rank < 1:
        raise ValueError(f"rank must be at least 1, got {rank}")

    ss = np.random.SeedSequence(cfg.seed)
    init_seed, shuffle_seed = (int(x) for x in ss.generate_state(2, np.uint64))
    if start_factors is not None:
        if start_factors.dims != tensor.dims or start_factors.rank != rank:
            raise ValueError("start_factors shape does not match tensor dims and rank")
        factors = start_factors.copy()
    else:
        factors = init_factors(tensor.dims, rank, init_seed)
    moments = MomentState.zeros(factors)
    shuffle_rng = np.random.default_rng(shuffle_seed)

    ii, jj, kk, yy, ww = _entry_arrays(tensor, cfg.alpha)
    u, s, t = factors.u, factors.s, factors.t
    args = (cfg.eta, cfg.beta1, cfg.beta2, cfg.tau, cfg.lam, cfg.nonneg)

    trace: list[float] = []
    converged = False
    epochs_run = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(len(ii))
        _adam_pass(0, u, s, t, ii, jj, kk, yy, ww, order,
                   moments.m_u, moments.v_u, moments.x_u, *args)
        _adam_pass(1, u, s, t, ii, jj, kk, yy, ww, order,
                   moments.m_t, moments.v_t, moments.x_t, *args)
        _adam_pass(2, u, s, t, ii, jj, kk, yy, ww, order,
                   moments.m_s, moments.v_s, moments.x_s, *args)
        rmse = float(_train_rmse(u, s, t, ii, jj, kk, yy))
        trace.append(rmse)
        epochs_run = epoch
        if trace_sink is not None:
            trace_sink(epoch, rmse)
        if epoch >= 2 and abs(trace[-1] - trace[-2]) < cfg.tol:
            converged = True
            break

    return LayerResult(
        factors=factors,
        epochs_run=epochs_run,
        train_rmse_trace=trace,
        converged=converged,
    )
