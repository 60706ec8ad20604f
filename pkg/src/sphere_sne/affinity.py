"""Pairwise affinities on the sphere.

High-dimensional side: per-point vMF conditionals p_{j|i} with each
concentration kappa_i tuned so the row hits a target perplexity, then
symmetrized into a joint distribution. Low-dimensional side: one shared
concentration over all ordered pairs.

The vMF normalizer C_d(kappa_i) is common to every term of a row and cancels,
so rows are plain softmaxes of kappa_i * x_i.x_j.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError
from .vmf import as_unit

KAPPA_BRACKET = (1e-4, 1e6)
MAX_BISECTIONS = 100
# each expansion widens the bracket by this factor on the failing side
_EXPAND_FACTOR = 1e3
_MAX_EXPANSIONS = 5


def _points(data):
    return np.asarray(getattr(data, "points", data), dtype=float)


def _softmax_rows(logits):
    """Row softmax of an (m, n) array; -inf logits get zero weight."""
    m = logits.max(axis=1, keepdims=True)
    e = np.exp(logits - m)
    return e / e.sum(axis=1, keepdims=True)


def conditional_row(i, data, kappa_i):
    """p_{.|i}: length-N probabilities with a zero at ``i``."""
    x = _points(data)
    n = x.shape[0]
    if n < 2:
        raise DomainError(f"need at least 2 points, got {n}")
    if not kappa_i > 0:
        raise DomainError(f"kappa_i must be positive, got {kappa_i}")
    sims = x @ x[i]
    mask = np.arange(n) != i
    row = np.zeros(n)
    row[mask] = _softmax_rows((kappa_i * sims[mask])[None, :])[0]
    return row


def conditional_matrix(sims, kappas):
    """All conditionals at once: row i is p_{.|i} given the Gram matrix ``sims``."""
    logits = kappas[:, None] * sims
    np.fill_diagonal(logits, -np.inf)
    return _softmax_rows(logits)


def row_perplexity(row, atol=1e-9):
    """2 ** H(row) with H in bits; zero entries contribute nothing."""
    row = np.asarray(row, dtype=float)
    if np.any(row < 0) or abs(row.sum() - 1.0) > atol:
        raise DomainError("row must be a probability vector")
    nz = row[row > 0]
    return float(2.0 ** (-(nz * np.log2(nz)).sum()))


def _log_perplexity(sims_rows, kappas, offdiag):
    """Natural-log perplexity of each conditional row (entropy in nats)."""
    logits = np.where(offdiag, kappas[:, None] * sims_rows, -np.inf)
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    e = np.exp(shifted)
    z = e.sum(axis=1)
    with np.errstate(invalid="ignore"):
        weighted = np.where(offdiag, e * shifted, 0.0).sum(axis=1)
    return np.log(z) - weighted / z


@dataclass
class CalibrationResult:
    kappas: np.ndarray
    achieved_perplexity: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    target: float

    @property
    def n_flagged(self):
        return int((~self.converged).sum())


def calibrate_kappas(data, target_perplexity, tol=1e-5, bracket=KAPPA_BRACKET,
                     max_iter=MAX_BISECTIONS):
    """Find kappa_i per point so each conditional row has the target perplexity.

    Bisection on log kappa; perplexity is non-increasing in kappa. Points whose
    row cannot reach the target (flat rows, or a target above N-1) are flagged
    in ``converged`` and keep their best-effort kappa. Flat rows get the
    geometric midpoint of ``bracket``.
    """
    x = _points(data)
    return calibrate_rows(x @ x.T, target_perplexity, tol, bracket, max_iter)


def calibrate_rows(sims, target_perplexity, tol=1e-5, bracket=KAPPA_BRACKET,
                   max_iter=MAX_BISECTIONS):
    """Per-row precision search for softmax(precision_i * sims[i, j]), j != i."""
    n = sims.shape[0]
    target = float(target_perplexity)
    if n < 2:
        raise DomainError(f"need at least 2 points, got {n}")
    if not 1.0 < target < n:
        raise DomainError(f"perplexity must lie in (1, {n}), got {target}")

    log_target = math.log(target)
    lo = np.full(n, math.log(bracket[0]))
    hi = np.full(n, math.log(bracket[1]))
    offdiag = ~np.eye(n, dtype=bool)

    off = np.where(offdiag, sims, np.nan)
    flat = (np.nanmax(off, axis=1) - np.nanmin(off, axis=1)) <= 1e-12

    # widen the bracket until it straddles the target, where that is possible
    step = math.log(_EXPAND_FACTOR)
    for _ in range(_MAX_EXPANSIONS):
        too_low = ~flat & (_log_perplexity(sims, np.exp(lo), offdiag) < log_target)
        too_high = ~flat & (_log_perplexity(sims, np.exp(hi), offdiag) > log_target)
        if not (too_low.any() or too_high.any()):
            break
        lo[too_low] -= step
        hi[too_high] += step

    log_k = 0.5 * (lo + hi)
    iterations = np.zeros(n, dtype=int)
    active = ~flat
    err = np.full(n, np.inf)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        lp = _log_perplexity(sims[idx], np.exp(log_k[idx]), offdiag[idx])
        err[idx] = np.abs(np.expm1(lp - log_target))
        iterations[idx] += 1
        done = err[idx] <= tol
        # perplexity too high -> kappa too small -> move lo up
        up = lp > log_target
        lo[idx] = np.where(up & ~done, log_k[idx], lo[idx])
        hi[idx] = np.where(~up & ~done, log_k[idx], hi[idx])
        keep = ~done
        log_k[idx[keep]] = 0.5 * (lo[idx[keep]] + hi[idx[keep]])
        active[idx[done]] = False

    log_k[flat] = 0.5 * (math.log(bracket[0]) + math.log(bracket[1]))
    kappas = np.exp(log_k)
    achieved = np.exp(_log_perplexity(sims, kappas, offdiag))
    converged = ~flat & (np.abs(achieved - target) / target <= max(tol, 1e-4))
    return CalibrationResult(kappas, achieved, iterations, converged, target)


def joint_p(data, calib):
    """Symmetric joint P = (p_{i|j} + p_{j|i}) / 2N; sums to 1, zero diagonal."""
    x = _points(data)
    kappas = calib.kappas if isinstance(calib, CalibrationResult) else np.asarray(calib, float)
    n = x.shape[0]
    if kappas.shape != (n,):
        raise DomainError(f"calibration has {kappas.shape[0]} points, data has {n}")
    cond = conditional_matrix(x @ x.T, kappas)
    p = (cond + cond.T) / (2.0 * n)
    np.fill_diagonal(p, 0.0)
    return p


def vmf_joint_p(data, perplexity, **kwargs):
    """Calibrate and build P in one call; returns (P, CalibrationResult)."""
    calib = calibrate_kappas(data, perplexity, **kwargs)
    return joint_p(data, calib), calib


def joint_q(Y, kappa):
    """Low-dimensional joint Q with a shared concentration ``kappa``."""
    Y = as_unit(Y, "embedding rows", atol=1e-6)
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    logits = kappa * (Y @ Y.T)
    np.fill_diagonal(logits, -np.inf)
    e = np.exp(logits - logits.max())
    return e / e.sum()


def check_affinity(M, atol=1e-9):
    """Raise DomainError unless ``M`` is a valid joint affinity matrix."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"affinity must be square, got shape {M.shape}")
    if np.any(np.diag(M) != 0):
        raise DomainError("affinity diagonal must be zero")
    if np.any(M < 0):
        raise DomainError("affinity entries must be non-negative")
    if not np.allclose(M, M.T, rtol=0, atol=atol):
        raise DomainError("affinity must be symmetric")
    if abs(M.sum() - 1.0) > atol:
        raise DomainError(f"affinity must sum to 1, sums to {M.sum()!r}")
