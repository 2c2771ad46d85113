"""Fusion, k-means, self-supervised belief updates, and the clustering loss."""

from dataclasses import dataclass

import numpy as np

from .metrics import nmi
from .nncore import Tensor, concat
from .nncore.tensor import _wrap

_BELIEF_FLOOR = 1e-12


@dataclass(frozen=True)
class Beliefs:
    """Per-view trust weights in (0, 1]; the best view always carries 1."""

    b: tuple
    rho: float

    @classmethod
    def initial(cls, num_views, rho):
        return cls(b=(1.0,) * num_views, rho=float(rho))


@dataclass(frozen=True)
class SoftAssignment:
    """Student's-t cluster responsibilities (rows on the simplex) and the
    constant centroids they were computed against."""

    q: Tensor
    centroids: np.ndarray


@dataclass(frozen=True)
class ClusterResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float


def fuse(embeddings, beliefs):
    """Concatenate the views' embeddings, each scaled by its belief.

    Accepts Tensors (keeps gradients) or plain arrays; view order follows the
    dataset order.
    """
    b = beliefs.b if isinstance(beliefs, Beliefs) else tuple(beliefs)
    if len(b) != len(embeddings):
        raise ValueError(f"{len(embeddings)} embeddings but {len(b)} beliefs")
    if any(isinstance(z, Tensor) for z in embeddings):
        return concat([_wrap(z) * bv for z, bv in zip(embeddings, b)], axis=1)
    return np.concatenate(
        [np.asarray(z) * bv for z, bv in zip(embeddings, b)], axis=1
    )


def _point_d2(z, z_sq, idx):
    d2 = z_sq + z_sq[idx] - 2.0 * (z @ z[idx])
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeans_pp_init(z, c, rng, z_sq):
    """Distance-squared seeding via inverse-cdf draws; degenerate weights fall
    back to the lowest unchosen index so duplicates cannot stall the draw."""
    n = z.shape[0]
    chosen = np.empty(c, dtype=int)
    chosen[0] = rng.integers(n)
    d2 = _point_d2(z, z_sq, chosen[0])
    for j in range(1, c):
        total = float(d2.sum())
        if total > 0.0:
            cdf = np.cumsum(d2)
            idx = min(
                int(np.searchsorted(cdf, rng.random() * total, side="right")),
                n - 1,
            )
        else:
            mask = np.ones(n, dtype=bool)
            mask[chosen[:j]] = False
            free = np.flatnonzero(mask)
            idx = int(free[0]) if free.size else 0
        chosen[j] = idx
        np.minimum(d2, _point_d2(z, z_sq, idx), out=d2)
    return z[chosen].copy()


def _assign(z, z_sq, centroids):
    d2 = z_sq[:, None] + (centroids * centroids).sum(axis=1) - 2.0 * (z @ centroids.T)
    np.maximum(d2, 0.0, out=d2)
    return d2.argmin(axis=1), d2.min(axis=1)


def _lloyd(z, centroids, max_iter, tol, z_sq):
    n, c = z.shape[0], centroids.shape[0]
    prev_inertia = np.inf
    for _ in range(max_iter):
        labels, fit = _assign(z, z_sq, centroids)
        counts = np.bincount(labels, minlength=c)
        for j in np.flatnonzero(counts == 0):
            # deterministic rescue: hand the cluster the worst-fit point
            stray = int(fit.argmax())
            labels[stray] = j
            fit[stray] = 0.0
            counts = np.bincount(labels, minlength=c)
        inertia = float(fit.sum())
        members = np.zeros((c, n))
        members[labels, np.arange(n)] = 1.0
        centroids = (members @ z) / counts[:, None]
        if prev_inertia - inertia <= tol * max(abs(prev_inertia), 1e-12):
            break
        prev_inertia = inertia
    labels, fit = _assign(z, z_sq, centroids)
    return labels, centroids, float(fit.sum())


def kmeans(z, c, seed=0, restarts=10, max_iter=300, tol=1e-6):
    """Best-inertia k-means over seeded ++ restarts; deterministic given seed."""
    z = np.asarray(z, dtype=np.float64)
    n = z.shape[0]
    if c > n:
        raise ValueError(f"cannot form {c} clusters from {n} points")
    if c <= 0:
        raise ValueError("cluster count must be positive")
    z_sq = (z * z).sum(axis=1)
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.default_rng(child)
        centroids = _kmeans_pp_init(z, c, rng, z_sq)
        labels, centroids, inertia = _lloyd(z, centroids, max_iter, tol, z_sq)
        if best is None or inertia < best.inertia:
            best = ClusterResult(labels=labels, centroids=centroids, inertia=inertia)
    return best


def update_beliefs(pseudo_labels, view_labels, rho):
    """Score each view by agreement of its own clustering with the pseudo
    labels, then normalize by the best score and soften with exponent rho."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    scores = np.array([nmi(pseudo_labels, labels) for labels in view_labels])
    top = scores.max()
    if top <= 0.0:
        b = np.ones(len(view_labels))
    else:
        b = np.maximum((scores / top) ** rho, _BELIEF_FLOOR)
    return Beliefs(b=tuple(float(v) for v in b), rho=float(rho))


def soft_assignment(z, centroids):
    """Student's-t responsibilities (one degree of freedom) of each row of z
    toward constant centroids."""
    centroids = np.asarray(centroids, dtype=np.float64)
    z = _wrap(z)
    z_sq = (z * z).sum(axis=1, keepdims=True)
    d2 = z_sq - 2.0 * (z @ centroids.T) + (centroids * centroids).sum(axis=1)
    kernel = (1.0 + d2) ** -1.0
    q = kernel / kernel.sum(axis=1, keepdims=True)
    return SoftAssignment(q=q, centroids=centroids)


def target_distribution(q):
    """Sharpen soft assignments: square, normalize by cluster mass, then
    re-normalize each row."""
    q = np.asarray(q, dtype=np.float64)
    weight = q ** 2 / q.sum(axis=0, keepdims=True)
    return weight / weight.sum(axis=1, keepdims=True)


def clustering_loss(p_global, q_views, q_global):
    """KL from the constant global target to each view's soft assignment and
    to the global one.  Gradients flow through the Q's only."""
    p = np.asarray(p_global, dtype=np.float64)
    # 0 log 0 = 0: zero-probability targets contribute nothing
    log_p = np.log(np.where(p > 0.0, p, 1.0))

    def kl(q):
        q = q.q if isinstance(q, SoftAssignment) else _wrap(q)
        return (p * (log_p - q.log())).sum()

    loss = kl(q_global)
    for q in q_views:
        loss = loss + kl(q)
    return loss
