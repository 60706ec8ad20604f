"""vMF-SNE: gradient ascent on sum_ij p_ij ln q_ij over points on a sphere.

Each update y_i + eta * grad_i leaves the sphere; rows are renormalized after
every step. Q depends only on directions, so this retraction keeps the
objective well defined and the output unit-norm.
"""

from dataclasses import asdict, dataclass, field
import math

import numpy as np

from ._random import STREAM_VMF_INIT, STREAM_VMF_STEP, make_rng
from .affinity import calibrate_kappas, joint_p, joint_q
from .errors import DomainError, NumericError
from .vmf import as_unit, sample_uniform_sphere

# magnitude of the seeded nudge applied to a row that lands on the origin
_ZERO_NUDGE = 1e-8


def kl_cost(P, Q):
    """KL(P || Q) over off-diagonal entries, with 0 ln(0/q) = 0.

    Returns ``inf`` when some p > 0 meets q == 0.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.shape != Q.shape:
        raise DomainError(f"shape mismatch: {P.shape} vs {Q.shape}")
    mask = P > 0
    np.fill_diagonal(mask, False)
    p = P[mask]
    q = Q[mask]
    if np.any(q <= 0):
        return math.inf
    return max(float(np.sum(p * (np.log(p) - np.log(q)))), 0.0)


def objective(P, Y, kappa):
    """kappa * sum_ij p_ij y_i.y_j - ln Z, the quantity gradient ascent climbs."""
    G = kappa * (Y @ Y.T)
    np.fill_diagonal(G, -np.inf)
    m = G.max()
    log_z = m + math.log(np.exp(G - m).sum())
    np.fill_diagonal(G, 0.0)
    return float(np.sum(P * G)) - log_z


def _q_and_kl(P, Y, kappa, p_log_p):
    """joint_q(Y, kappa) and KL(P || Q) from one exponentiation.

    KL = sum p ln p - (kappa sum_ij p_ij y_i.y_j - ln Z), using sum P = 1.
    """
    G = kappa * (Y @ Y.T)
    np.fill_diagonal(G, -np.inf)
    m = G.max()
    E = np.exp(G - m)
    z = E.sum()
    np.fill_diagonal(G, 0.0)
    kl = p_log_p - (float(np.vdot(P, G)) - m - math.log(z))
    return E / z, max(kl, 0.0)


def gradient(P, Q, Y, kappa):
    """Euclidean gradient of the objective: row k is 2 kappa sum_i (p_ik - q_ik) y_i."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if P.shape != Q.shape or P.shape[0] != Y.shape[0]:
        raise DomainError("P, Q and Y disagree on the number of points")
    return 2.0 * kappa * ((P - Q).T @ Y)


def step(Y, grad, eta, rng=None):
    """Ascend by ``eta * grad`` and renormalize each row back onto the sphere."""
    Y = np.asarray(Y, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if Y.shape != grad.shape:
        raise DomainError(f"shape mismatch: {Y.shape} vs {grad.shape}")
    out = Y + eta * grad
    norms = np.linalg.norm(out, axis=1)
    zero = norms == 0.0
    if zero.any():
        if rng is None:
            rng = make_rng(0, STREAM_VMF_STEP)
        nudge = rng.standard_normal((int(zero.sum()), Y.shape[1]))
        nudge *= _ZERO_NUDGE / np.linalg.norm(nudge, axis=1, keepdims=True)
        out[zero] = nudge
        norms = np.linalg.norm(out, axis=1)
    return out / norms[:, None]


@dataclass
class VmfSneConfig:
    target_dim: int = 3
    perplexity: float = 40.0
    embed_kappa: float = 2.0
    iterations: int = 1000
    # None means auto_learning_rate(N)
    learning_rate: float | None = None
    seed: int = 0
    early_stop: bool = False

    def validate(self):
        if self.target_dim < 2:
            raise DomainError(f"target_dim must be >= 2, got {self.target_dim}")
        if not self.embed_kappa > 0:
            raise DomainError(f"embed_kappa must be positive, got {self.embed_kappa}")
        if self.iterations < 0:
            raise DomainError(f"iterations must be >= 0, got {self.iterations}")
        if self.learning_rate is not None and not self.learning_rate >= 0:
            raise DomainError(f"learning_rate must be non-negative, got {self.learning_rate}")

    def to_dict(self):
        return asdict(self)


@dataclass
class EmbeddingRun:
    """Outcome of one embedding.

    ``loss_trace[t]`` is KL(P || Q) at the embedding entering iteration t;
    ``final_kl`` is measured after the last update. ``initial_Y`` is the seeded
    starting point.
    """

    method: str
    config: object
    Y: np.ndarray
    initial_Y: np.ndarray
    loss_trace: np.ndarray
    initial_kl: float
    final_kl: float
    P: np.ndarray = field(repr=False)
    calibration: object = field(default=None, repr=False)
    max_norm_error: float = 0.0
    iterations_run: int = 0

    @property
    def spherical(self):
        return self.method == "vmf"


def auto_learning_rate(n):
    """Default step size N / 8.

    The gradient shrinks like 1/N because P and Q each sum to one, so the
    largest stable step grows with N; N / 8 stays monotone from N=50 to 800.
    """
    return n / 8.0


def initial_embedding(n, config):
    return sample_uniform_sphere(config.target_dim, n, (config.seed, STREAM_VMF_INIT))


def run(data, config=None, P=None, callback=None):
    """Embed unit-norm ``data`` (array or Dataset) with vMF-SNE.

    ``P`` may be supplied to skip calibration. ``callback(t, Y, kl)`` is
    called after each update.
    """
    config = config or VmfSneConfig()
    config.validate()
    x = as_unit(getattr(data, "points", data), "data rows", atol=1e-6)
    n = x.shape[0]

    calib = None
    if P is None:
        calib = calibrate_kappas(x, config.perplexity)
        P = joint_p(x, calib)

    kappa = config.embed_kappa
    eta = auto_learning_rate(n) if config.learning_rate is None else config.learning_rate
    step_rng = make_rng(config.seed, STREAM_VMF_STEP)
    Y0 = initial_embedding(n, config)
    Y = Y0.copy()
    trace = []
    norm_err = float(np.max(np.abs(np.linalg.norm(Y, axis=1) - 1.0)))
    nz = P[P > 0]
    p_log_p = float(np.sum(nz * np.log(nz)))
    Q = joint_q(Y, kappa)
    kl = kl_cost(P, Q)
    initial_kl = kl
    calm = 0
    for t in range(config.iterations):
        trace.append(kl)
        Y = step(Y, gradient(P, Q, Y, kappa), eta, step_rng)
        norm_err = max(norm_err, float(np.max(np.abs(np.linalg.norm(Y, axis=1) - 1.0))))
        Q, new_kl = _q_and_kl(P, Y, kappa, p_log_p)
        if not math.isfinite(new_kl):
            raise NumericError(f"KL became non-finite at iteration {t}")
        if callback is not None:
            callback(t, Y, new_kl)
        calm = calm + 1 if abs(new_kl - kl) < 1e-9 else 0
        kl = new_kl
        if config.early_stop and calm >= 50:
            break

    return EmbeddingRun(
        method="vmf",
        config=config,
        Y=Y,
        initial_Y=Y0,
        loss_trace=np.asarray(trace),
        initial_kl=initial_kl,
        final_kl=kl,
        P=P,
        calibration=calib,
        max_norm_error=norm_err,
        iterations_run=len(trace),
    )
