"""Cluster-preservation scores for an embedding with known labels.

Each true cluster gets an image in the embedding (the mean of its embedded
points, projected back to the sphere for spherical embeddings). Points are
classified to the nearest image; the confusion proportions, per-cluster
entropies (nats) and accuracy summarize how well clusters survived.

Two entropy conventions are reported. ``mean_entropy`` normalizes each
confusion row by the number of points assigned to that cluster, so a perfect
classification scores 0. ``mean_entropy_total`` normalizes by the total
number of points and averages over all k clusters; a perfect classification
of k balanced clusters then scores ln(k)/k (0.3466 for k=4, 0.1733 for k=16).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


def _labels(labels, n):
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (n,):
        raise DomainError(f"expected {n} labels, got shape {labels.shape}")
    if labels.size and labels.min() < 0:
        raise DomainError("labels must be non-negative")
    return labels


def _embedding(run):
    return np.asarray(getattr(run, "Y", run), dtype=float)


def _is_spherical(run, spherical):
    if spherical is not None:
        return spherical
    return bool(getattr(run, "spherical", False))


def center_images(run, labels, spherical=None, k=None):
    """Per-cluster mean of the embedded points, shape (k, dim).

    Spherical means are renormalized; a cluster whose mean vanishes (e.g. two
    antipodal points) has no direction and raises DomainError.
    """
    Y = _embedding(run)
    labels = _labels(labels, Y.shape[0])
    spherical = _is_spherical(run, spherical)
    k = int(labels.max()) + 1 if k is None else k
    images = np.empty((k, Y.shape[1]))
    for c in range(k):
        members = Y[labels == c]
        if members.shape[0] == 0:
            raise DomainError(f"cluster {c} has no points")
        m = members.mean(axis=0)
        if spherical:
            norm = np.linalg.norm(m)
            if norm <= 1e-12:
                raise DomainError(f"cluster {c} has a vanishing mean direction")
            m = m / norm
        images[c] = m
    return images


def classify(run, images, spherical=None):
    """Nearest image per point: max cosine (sphere) or min distance (plane).

    ``argmax``/``argmin`` return the first extremum, so ties go to the lowest
    cluster index.
    """
    Y = _embedding(run)
    images = np.asarray(images, dtype=float)
    if _is_spherical(run, spherical):
        return np.argmax(Y @ images.T, axis=1)
    d2 = ((Y[:, None, :] - images[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


@dataclass
class EvalReport:
    confusion: np.ndarray
    counts: np.ndarray
    per_cluster_entropy: np.ndarray
    mean_entropy: float
    accuracy: float
    center_images: np.ndarray
    empty_clusters: list = field(default_factory=list)
    mean_entropy_total: float = float("nan")

    def to_dict(self):
        # NaN marks clusters nobody was assigned to; JSON gets null instead
        ent = [None if np.isnan(h) else float(h) for h in self.per_cluster_entropy]
        return {
            "accuracy": float(self.accuracy),
            "mean_entropy": float(self.mean_entropy),
            "mean_entropy_total": float(self.mean_entropy_total),
            "per_cluster_entropy": ent,
            "confusion": self.confusion.tolist(),
            "counts": self.counts.tolist(),
            "empty_clusters": list(self.empty_clusters),
            "center_images": self.center_images.tolist(),
        }


def entropy_rows(confusion):
    """-sum_j c_ij ln c_ij per row (0 ln 0 = 0)."""
    c = np.asarray(confusion, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(c > 0, c * np.log(c), 0.0)
    return -terms.sum(axis=1)


def evaluate(run, labels, spherical=None):
    """Accuracy and confusion entropy of nearest-image classification.

    ``confusion[i, j]`` is the share of points assigned to cluster i whose
    true cluster is j. Clusters with no assigned points get NaN entropy,
    are listed in ``empty_clusters`` and do not enter the mean.
    """
    labels = np.asarray(getattr(labels, "labels", labels))
    Y = _embedding(run)
    labels = _labels(labels, Y.shape[0])
    k = int(labels.max()) + 1
    images = center_images(run, labels, spherical, k)
    assigned = classify(run, images, spherical)

    counts = np.zeros((k, k), dtype=int)
    np.add.at(counts, (assigned, labels), 1)
    row_tot = counts.sum(axis=1)
    empty = [int(i) for i in np.flatnonzero(row_tot == 0)]
    confusion = np.zeros((k, k))
    nonempty = row_tot > 0
    confusion[nonempty] = counts[nonempty] / row_tot[nonempty, None]

    ent = entropy_rows(confusion)
    ent[~nonempty] = np.nan
    mean_ent = float(ent[nonempty].mean())
    ent_total = float(entropy_rows(counts / counts.sum()).mean())
    acc = float(np.mean(assigned == labels))
    return EvalReport(confusion, counts, ent, mean_ent, acc, images, empty, ent_total)
