"""Exact (O(N^2)) symmetric t-SNE, used as the Euclidean baseline.

Optimization follows the reference t-SNE recipe: momentum 0.5 then 0.8,
early exaggeration of P, per-parameter gains, and a tiny Gaussian start.
"""

from dataclasses import asdict, dataclass
import math

import numpy as np

from ._random import STREAM_TSNE_INIT, make_rng
from .affinity import CalibrationResult, _points, calibrate_rows
from .errors import DomainError, NumericError
from .optimizer import EmbeddingRun, kl_cost


@dataclass
class GaussianCalibration:
    sigmas: np.ndarray
    achieved_perplexity: np.ndarray
    converged: np.ndarray

    @classmethod
    def from_precisions(cls, calib: CalibrationResult):
        # precision beta_i = 1 / (2 sigma_i^2)
        return cls(np.sqrt(0.5 / calib.kappas), calib.achieved_perplexity, calib.converged)


def squared_distances(x):
    sq = (x * x).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def gaussian_conditionals(data, sigmas):
    """Row i is p_{.|i} proportional to exp(-|x_i - x_j|^2 / 2 sigma_i^2), zero at i."""
    x = _points(data)
    sigmas = np.asarray(sigmas, dtype=float)
    logits = -squared_distances(x) / (2.0 * sigmas[:, None] ** 2)
    np.fill_diagonal(logits, -np.inf)
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)


def calibrate_sigmas(data, perplexity):
    x = _points(data)
    calib = calibrate_rows(-squared_distances(x), perplexity)
    return GaussianCalibration.from_precisions(calib)


def tsne_joint_p(data, perplexity, sigmas=None):
    """Symmetrized Gaussian affinities; ``sigmas`` overrides calibration."""
    x = _points(data)
    n = x.shape[0]
    if n < 2:
        raise DomainError(f"need at least 2 points, got {n}")
    if sigmas is None:
        sigmas = calibrate_sigmas(x, perplexity).sigmas
    cond = gaussian_conditionals(x, sigmas)
    p = (cond + cond.T) / (2.0 * n)
    np.fill_diagonal(p, 0.0)
    return p


def _student_weights(Y):
    w = 1.0 / (1.0 + squared_distances(Y))
    np.fill_diagonal(w, 0.0)
    return w


def _weights_and_kl(P, Y, p_log_p):
    # ln q_ij = -ln(1 + d_ij^2) - ln sum W, and sum P = 1
    d2 = squared_distances(Y)
    W = 1.0 / (1.0 + d2)
    np.fill_diagonal(W, 0.0)
    total = W.sum()
    kl = p_log_p + float(np.vdot(P, np.log1p(d2))) + math.log(total)
    return W, W / total, max(kl, 0.0)


def tsne_joint_q(Y):
    """Student-t (one degree of freedom) joint affinities of the map points."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] < 2:
        raise DomainError(f"need at least 2 points, got {Y.shape[0]}")
    w = _student_weights(Y)
    return w / w.sum()


def tsne_gradient(P, Y, Q=None, W=None):
    """dKL/dy_i = 4 sum_j (p_ij - q_ij)(y_i - y_j) / (1 + |y_i - y_j|^2)."""
    Y = np.asarray(Y, dtype=float)
    if W is None:
        W = _student_weights(Y)
    if Q is None:
        Q = W / W.sum()
    M = (P - Q) * W
    return 4.0 * (M.sum(axis=1)[:, None] * Y - M @ Y)


@dataclass
class TsneConfig:
    target_dim: int = 2
    perplexity: float = 40.0
    iterations: int = 1000
    learning_rate: float = 500.0
    initial_momentum: float = 0.5
    final_momentum: float = 0.8
    momentum_switch: int = 250
    exaggeration: float = 4.0
    exaggeration_iters: int = 50
    min_gain: float = 0.01
    init_std: float = 1e-4
    seed: int = 0

    def validate(self):
        if self.target_dim < 1:
            raise DomainError(f"target_dim must be >= 1, got {self.target_dim}")
        if self.iterations < 0:
            raise DomainError(f"iterations must be >= 0, got {self.iterations}")
        if not self.learning_rate > 0:
            raise DomainError(f"learning_rate must be positive, got {self.learning_rate}")

    def to_dict(self):
        return asdict(self)


def initial_embedding(n, config):
    rng = make_rng(config.seed, STREAM_TSNE_INIT)
    return config.init_std * rng.standard_normal((n, config.target_dim))


def tsne_run(data, config=None, P=None):
    """Embed ``data`` with t-SNE; returns an EmbeddingRun with planar rows."""
    config = config or TsneConfig()
    config.validate()
    x = _points(data)
    n = x.shape[0]
    if P is None:
        P = tsne_joint_p(x, config.perplexity)

    Y0 = initial_embedding(n, config)
    Y = Y0.copy()
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    trace = []
    nz = P[P > 0]
    p_log_p = float(np.sum(nz * np.log(nz)))
    W = _student_weights(Y)
    Q = W / W.sum()
    kl = kl_cost(P, Q)
    initial_kl = kl
    for t in range(config.iterations):
        trace.append(kl)
        P_eff = P * config.exaggeration if t < config.exaggeration_iters else P
        momentum = config.initial_momentum if t < config.momentum_switch else config.final_momentum
        grad = tsne_gradient(P_eff, Y, Q, W)
        same_sign = (grad > 0) == (update > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, config.min_gain, out=gains)
        update = momentum * update - config.learning_rate * gains * grad
        Y = Y + update
        Y -= Y.mean(axis=0)
        W, Q, kl = _weights_and_kl(P, Y, p_log_p)
        if not math.isfinite(kl):
            raise NumericError(f"t-SNE KL became non-finite at iteration {t}")

    return EmbeddingRun(
        method="tsne",
        config=config,
        Y=Y,
        initial_Y=Y0,
        loss_trace=np.asarray(trace),
        initial_kl=initial_kl,
        final_kl=kl,
        P=P,
        max_norm_error=None,
        iterations_run=len(trace),
    )
