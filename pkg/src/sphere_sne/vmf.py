"""Von Mises-Fisher density, normalization and sampling on S^{d-1}.

The normalization constant involves I_nu(kappa) with nu = d/2 - 1, which
overflows/underflows in double precision long before the density itself
becomes extreme (d=50 with kappa in the hundreds already does). All Bessel
work is therefore done on log I_nu directly.
"""

from dataclasses import dataclass
import math

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import gammaln, logsumexp

from ._random import STREAM_UNIFORM, STREAM_VMF, make_rng
from .errors import DomainError

LOG_2PI = math.log(2.0 * math.pi)

# Series below nu + _SWITCH, uniform expansion above. At nu ~ 0 the expansion
# cannot do better than ~exp(-2x), so the switch sits well past x = 10.
_SWITCH = 30.0
_N_DEBYE = 14


def _debye_polynomials(n_terms):
    # u_{k+1}(p) = p^2 (1 - p^2) u_k'(p) / 2 + (1/8) int_0^p (1 - 5 t^2) u_k(t) dt
    p = Polynomial([0.0, 1.0])
    polys = [Polynomial([1.0])]
    for _ in range(n_terms - 1):
        u = polys[-1]
        nxt = 0.5 * p**2 * (1 - p**2) * u.deriv() + ((1 - 5 * p**2) * u).integ() / 8.0
        polys.append(nxt)
    return polys


_DEBYE = _debye_polynomials(_N_DEBYE)
# coefficient lists trimmed to exact length so the power of p is the index
_DEBYE_COEFS = [np.trim_zeros(u.coef, "b") for u in _DEBYE]


def _log_iv_series(nu, x):
    n_terms = int(x) + 60
    k = np.arange(n_terms, dtype=float)
    terms = (2 * k + nu) * math.log(x / 2.0) - gammaln(k + 1) - gammaln(k + nu + 1)
    return float(logsumexp(terms))


def _log_iv_uniform(nu, x):
    # Debye's uniform expansion of I_nu(nu z), rewritten in r = sqrt(nu^2 + x^2)
    # so that it stays defined at nu = 0. u_k(p)/nu^k = sum_j c_kj nu^(j-k) t^j.
    r = math.hypot(nu, x)
    t = 1.0 / r
    total = 0.0
    for k, coefs in enumerate(_DEBYE_COEFS):
        term = 0.0
        for j in range(k, len(coefs)):
            c = coefs[j]
            if c != 0.0:
                term += c * nu ** (j - k) * t**j
        total += term
    lead = r + nu * math.log(x / (nu + r)) - 0.5 * LOG_2PI - 0.5 * math.log(r)
    return lead + math.log(total)


def log_bessel_iv(nu, x):
    """Natural log of the modified Bessel function of the first kind I_nu(x).

    Power series for ``x < nu + 30``, uniform asymptotic expansion otherwise.
    Requires ``nu >= 0`` and ``x > 0``.
    """
    nu = float(nu)
    x = float(x)
    if nu < 0:
        raise DomainError(f"order must be non-negative, got {nu}")
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"argument must be positive and finite, got {x}")
    if x < nu + _SWITCH:
        return _log_iv_series(nu, x)
    return _log_iv_uniform(nu, x)


def _check(d, kappa):
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d}")
    if not kappa > 0 or not math.isfinite(kappa):
        raise DomainError(f"kappa must be positive and finite, got {kappa}")


def log_norm_const(d, kappa):
    """ln C_d(kappa) for the vMF density on the unit sphere in R^d."""
    _check(d, kappa)
    nu = d / 2.0 - 1.0
    return nu * math.log(kappa) - (d / 2.0) * LOG_2PI - log_bessel_iv(nu, kappa)


def mean_resultant_length(d, kappa):
    """A_d(kappa) = I_{d/2}(kappa) / I_{d/2-1}(kappa), the mean of mu.x under vMF."""
    _check(d, kappa)
    return math.exp(log_bessel_iv(d / 2.0, kappa) - log_bessel_iv(d / 2.0 - 1.0, kappa))


def as_unit(x, name="x", atol=1e-9):
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(norms - 1.0) > atol):
        raise DomainError(f"{name} must have unit norm (max deviation {np.max(np.abs(norms - 1.0)):.3g})")
    return x


def log_density(x, mu, kappa):
    """Log vMF density at ``x`` (a unit vector, or rows of unit vectors)."""
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if x.shape[-1] != mu.shape[-1]:
        raise DomainError(f"dimension mismatch: x has {x.shape[-1]}, mu has {mu.shape[-1]}")
    d = mu.shape[-1]
    return log_norm_const(d, kappa) + kappa * (x @ mu)


@dataclass(frozen=True)
class VmfParams:
    mu: np.ndarray
    kappa: float

    def __post_init__(self):
        mu = as_unit(np.array(self.mu, dtype=float), "mu")
        if mu.ndim != 1:
            raise DomainError("mu must be a single vector")
        _check(mu.shape[0], self.kappa)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def dim(self):
        return self.mu.shape[0]

    def log_norm_const(self):
        return log_norm_const(self.dim, self.kappa)

    def log_density(self, x):
        return log_density(x, self.mu, self.kappa)

    def sample(self, n, seed):
        return sample_vmf(self.mu, self.kappa, n, seed)


def _wood_weights(kappa, d, n, rng):
    """Draw w = mu.x for n samples by Wood's rejection scheme."""
    m1 = d - 1.0
    # b = (-2k + sqrt(4k^2 + m1^2)) / m1, in a form without cancellation
    b = m1 / (2.0 * kappa + math.sqrt(4.0 * kappa**2 + m1**2))
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + m1 * math.log(4.0 * b / (1.0 + b) ** 2)

    w_out = np.empty(n)
    one_minus_w_out = np.empty(n)
    filled = 0
    while filled < n:
        need = n - filled
        m = max(2 * need, 64)
        z = rng.beta(m1 / 2.0, m1 / 2.0, size=m)
        u = rng.uniform(size=m)
        denom = 1.0 - (1.0 - b) * z
        w = (1.0 - (1.0 + b) * z) / denom
        one_minus_w = 2.0 * b * z / denom
        with np.errstate(divide="ignore"):
            accept = kappa * w + m1 * np.log1p(-x0 * w) - c >= np.log(u)
        idx = np.flatnonzero(accept)[:need]
        w_out[filled:filled + idx.size] = w[idx]
        one_minus_w_out[filled:filled + idx.size] = one_minus_w[idx]
        filled += idx.size
    return w_out, one_minus_w_out


def _householder_to(mu, pts):
    """Apply the reflection that maps e_1 to ``mu`` to each row of ``pts``."""
    v = -mu.copy()
    v[0] += 1.0
    vv = v @ v
    if vv == 0.0:
        return pts
    return pts - np.outer(pts @ v, v) * (2.0 / vv)


def sample_vmf(mu, kappa, n, seed):
    """Draw ``n`` i.i.d. samples from vMF(mu, kappa); returns an (n, d) array."""
    mu = as_unit(np.array(mu, dtype=float), "mu")
    d = mu.shape[0]
    _check(d, kappa)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = make_rng(seed, STREAM_VMF)
    w, one_minus_w = _wood_weights(float(kappa), d, n, rng)
    v = rng.standard_normal((n, d - 1))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    radial = np.sqrt(one_minus_w * (1.0 + w))
    pts = np.empty((n, d))
    pts[:, 0] = w
    pts[:, 1:] = radial[:, None] * v
    pts = _householder_to(mu, pts)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def sample_uniform_sphere(d, n, seed):
    """``n`` points uniform on S^{d-1}: normalized isotropic Gaussian draws."""
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    rng = make_rng(seed, STREAM_UNIFORM)
    g = rng.standard_normal((n, int(d)))
    return g / np.linalg.norm(g, axis=1, keepdims=True)
