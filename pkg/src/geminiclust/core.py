"""Simplex arithmetic shared by every clustering objective.

Conventions
-----------
- A *soft assignment* is an ``N x K`` row-stochastic float64 matrix ``P``
  with ``P[i, k]`` the probability of sample ``i`` belonging to cluster
  ``k``.  Rows must sum to 1 within ``ROW_SUM_TOL``; ``K >= 2``.
- The *cluster marginal* ``pi`` is the column mean of ``P`` (the plug-in
  batch estimate of the cluster proportions).  No averaging across
  batches is performed.
- *Cluster weights* ``m^k`` are the column of ``P`` self-normalised to
  sum one; they are the importance weights placing one Dirac per sample
  when a cluster-conditional data distribution is approximated.

All functions are pure and never mutate their inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, EmptyCluster

ROW_SUM_TOL = 1e-9
# Below this mass a cluster (or a sample weight) is treated as dead.
MASS_EPS = 1e-12


def as_data_matrix(x) -> np.ndarray:
    """Validate and return an ``N x D`` float64 data matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise DimensionMismatch(f"expected a 2-D data matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data matrix contains NaN or Inf entries")
    return x


def as_soft_assignment(p) -> np.ndarray:
    """Validate and return an ``N x K`` row-stochastic float64 matrix."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] < 2:
        raise DimensionMismatch(
            f"soft assignment must be 2-D with K >= 2 columns, got shape {p.shape}"
        )
    if not np.all(np.isfinite(p)):
        raise ValueError("soft assignment contains NaN or Inf entries")
    if p.min() < -ROW_SUM_TOL or p.max() > 1.0 + ROW_SUM_TOL:
        raise ValueError("soft assignment entries must lie in [0, 1]")
    row_sums = p.sum(axis=1)
    if np.max(np.abs(row_sums - 1.0)) > ROW_SUM_TOL:
        raise ValueError("soft assignment rows must sum to 1 within 1e-9")
    return p


def as_label_vector(labels) -> np.ndarray:
    """Validate and return a 1-D integer label vector."""
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DimensionMismatch(f"labels must be 1-D, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        rounded = np.rint(labels).astype(np.int64)
        if not np.allclose(labels, rounded):
            raise ValueError("labels must be integers")
        labels = rounded
    if labels.size and labels.min() < 0:
        raise ValueError("labels must be nonnegative")
    return labels.astype(np.int64)


def marginal(p) -> np.ndarray:
    """Cluster proportions as the column mean of a soft assignment."""
    p = as_soft_assignment(p)
    return p.mean(axis=0)


def cluster_weights(p, k: int) -> np.ndarray:
    """Self-normalised importance weights of cluster ``k``.

    Raises
    ------
    EmptyCluster
        If column ``k`` carries less than ``MASS_EPS`` total mass; the
        cluster is dead and callers should drop its terms instead.
    """
    p = as_soft_assignment(p)
    if not 0 <= k < p.shape[1]:
        raise DimensionMismatch(f"cluster index {k} out of range for K={p.shape[1]}")
    column = p[:, k]
    total = column.sum()
    if total < MASS_EPS:
        raise EmptyCluster(f"cluster {k} has total mass {total:.3e}")
    return column / total


def hard_labels(p) -> np.ndarray:
    """Row argmax of a soft assignment; ties go to the lowest index."""
    p = as_soft_assignment(p)
    return np.argmax(p, axis=1).astype(np.int64)


def nonempty_clusters(p) -> int:
    """Number of clusters that win the argmax of at least one row."""
    return int(np.unique(hard_labels(p)).size)
