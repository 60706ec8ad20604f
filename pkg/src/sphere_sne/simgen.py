"""Clustered spherical test data.

Cluster centers share one random base direction and differ by sign flips on
random subsets of coordinates, which keeps them on the sphere and roughly
orthogonal to each other in high dimension. Points are vMF draws around the
centers.
"""

from dataclasses import asdict, dataclass

import numpy as np

from ._random import STREAM_CENTERS, STREAM_CLUSTER, make_rng, seed_key
from .errors import DomainError, GenerationError
from .vmf import sample_uniform_sphere, sample_vmf

MAX_REDRAWS = 1000


@dataclass(frozen=True)
class SimSpec:
    d: int = 50
    k: int = 4
    n_total: int = 800
    gen_kappa: float = 15.0
    min_separation: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"d must be >= 2, got {self.d}")
        if self.k < 1:
            raise DomainError(f"k must be >= 1, got {self.k}")
        if self.n_total < self.k:
            raise DomainError(f"n_total ({self.n_total}) must be >= k ({self.k})")
        if not self.gen_kappa > 0:
            raise DomainError(f"gen_kappa must be positive, got {self.gen_kappa}")
        if not -1.0 <= self.min_separation <= 1.0:
            raise DomainError(f"min_separation must lie in [-1, 1], got {self.min_separation}")

    def to_dict(self):
        return asdict(self)


@dataclass
class Dataset:
    points: np.ndarray
    labels: np.ndarray = None
    centers: np.ndarray = None
    spec: SimSpec = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (self.points.shape[0],):
                raise DomainError("labels must have one entry per point")
            if self.labels.size and self.labels.min() < 0:
                raise DomainError("labels must be non-negative")

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def n_clusters(self):
        if self.labels is None:
            return 0
        return int(self.labels.max()) + 1 if self.labels.size else 0


def cluster_sizes(n_total, k):
    base, extra = divmod(n_total, k)
    return [base + (1 if c < extra else 0) for c in range(k)]


def generate_centers(spec):
    """k unit centers: a uniform base direction and sign-flipped copies of it."""
    rng = make_rng(spec.seed, STREAM_CENTERS)
    base = sample_uniform_sphere(spec.d, 1, seed_key(spec.seed, STREAM_CENTERS))[0]
    centers = [base]
    patterns = [np.zeros(spec.d, dtype=bool)]
    redraws = 0
    while len(centers) < spec.k:
        flips = rng.random(spec.d) < 0.5
        cand = np.where(flips, -base, base)
        duplicate = any(np.array_equal(flips, p) for p in patterns)
        if duplicate or max(float(c @ cand) for c in centers) > spec.min_separation:
            redraws += 1
            if redraws > MAX_REDRAWS:
                raise GenerationError(
                    f"could not place {spec.k} centers with pairwise dot <= "
                    f"{spec.min_separation} after {MAX_REDRAWS} redraws ({spec})")
            continue
        centers.append(cand)
        patterns.append(flips)
    return np.vstack(centers)


def generate_dataset(spec):
    """Balanced vMF clusters around ``generate_centers(spec)``."""
    centers = generate_centers(spec)
    sizes = cluster_sizes(spec.n_total, spec.k)
    points = []
    labels = []
    for c, size in enumerate(sizes):
        if size == 0:
            continue
        points.append(sample_vmf(centers[c], spec.gen_kappa, size, seed_key(spec.seed, STREAM_CLUSTER, c)))
        labels.append(np.full(size, c))
    return Dataset(np.vstack(points), np.concatenate(labels), centers, spec)
