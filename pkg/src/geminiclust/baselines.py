"""Classic baselines the experiments compare against."""

from __future__ import annotations

import numpy as np

from .core import as_data_matrix
from .errors import ConfigError


def _plus_plus_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # k-means++ seeding: each new centre drawn with probability
    # proportional to the squared distance to the closest chosen centre.
    n = x.shape[0]
    centres = np.empty((k, x.shape[1]))
    centres[0] = x[rng.integers(n)]
    d2 = np.sum((x - centres[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centres[j:] = x[rng.integers(n, size=k - j)]
            break
        centres[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centres[j]) ** 2, axis=1))
    return centres


def kmeans(x, k: int, seed: int = 0, n_init: int = 10, max_iter: int = 300, tol: float = 1e-7):
    """Lloyd's algorithm with k-means++ restarts; returns (labels, inertia).

    The best of ``n_init`` seeded restarts by inertia wins; empty
    clusters are re-seeded on the point farthest from its centre.
    """
    x = as_data_matrix(x)
    if not 1 <= k <= x.shape[0]:
        raise ConfigError(f"k must lie in [1, {x.shape[0]}]")
    streams = np.random.SeedSequence(seed).spawn(n_init)
    best_labels, best_inertia = None, np.inf
    for ss in streams:
        rng = np.random.default_rng(ss)
        centres = _plus_plus_init(x, k, rng)
        labels = np.zeros(x.shape[0], dtype=np.int64)
        for _ in range(max_iter):
            d2 = ((x[:, None, :] - centres[None, :, :]) ** 2).sum(axis=2)
            labels = d2.argmin(axis=1)
            new_centres = centres.copy()
            closest = d2[np.arange(x.shape[0]), labels]
            for j in range(k):
                members = labels == j
                if members.any():
                    new_centres[j] = x[members].mean(axis=0)
                else:
                    new_centres[j] = x[closest.argmax()]
                    closest[closest.argmax()] = 0.0
            shift = np.max(np.abs(new_centres - centres))
            centres = new_centres
            if shift <= tol:
                break
        d2 = ((x[:, None, :] - centres[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        inertia = float(d2[np.arange(x.shape[0]), labels].sum())
        if inertia < best_inertia:
            best_inertia, best_labels = inertia, labels
    return best_labels, best_inertia
