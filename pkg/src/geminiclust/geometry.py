"""Kernel and distance matrices carrying the data-space geometry.

A ``GeometryMatrix`` is an ``N x N`` symmetric matrix tagged either
``"kernel"`` (positive semidefinite, checked statistically through
Rayleigh quotients on random unit vectors) or ``"distance"``
(nonnegative, zero diagonal).  The hop-count distance builds a sparse
neighbourhood graph by thresholding Euclidean distances at a quantile
of the off-diagonal entries, then runs one breadth-first search per
node; pairs in different components get the sentinel value ``N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._accel import jit_kernel
from .core import as_data_matrix
from .errors import DimensionMismatch, NotADistance, NotAKernel

SYMMETRY_TOL = 1e-9
RAYLEIGH_TOL = 1e-8
DEFAULT_NEIGHBOR_QUANTILE = 0.05

KERNEL_KINDS = ("linear_kernel", "gaussian_kernel", "precomputed")
DISTANCE_KINDS = ("euclidean_distance", "shortest_path", "precomputed")


@dataclass(frozen=True)
class GeometrySpec:
    """Recipe for building a geometry matrix from a data matrix.

    ``kind`` is one of ``linear_kernel``, ``gaussian_kernel``,
    ``euclidean_distance``, ``shortest_path`` or ``precomputed``.
    """

    kind: str
    bandwidth: float = 1.0
    quantile: float = DEFAULT_NEIGHBOR_QUANTILE
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in set(KERNEL_KINDS) | set(DISTANCE_KINDS):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "gaussian_kernel" and not self.bandwidth > 0:
            raise ValueError("gaussian bandwidth must be positive")
        if self.kind == "shortest_path" and not 0.0 < self.quantile < 1.0:
            raise ValueError("neighbour quantile must lie in (0, 1)")
        if self.kind == "precomputed":
            if self.matrix is None:
                raise ValueError("precomputed geometry needs a matrix")
            m = np.asarray(self.matrix, dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionMismatch(
                    f"precomputed geometry must be square, got shape {m.shape}"
                )
            object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class GeometryMatrix:
    """Symmetric ``N x N`` matrix tagged as kernel or distance."""

    values: np.ndarray
    tag: str  # "kernel" | "distance"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionMismatch(f"geometry matrix must be square, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("geometry matrix contains NaN or Inf")
        if np.max(np.abs(v - v.T), initial=0.0) > SYMMETRY_TOL:
            raise ValueError("geometry matrix must be symmetric within 1e-9")
        if self.tag == "kernel":
            _check_psd_spot(v)
        elif self.tag == "distance":
            if v.min(initial=0.0) < 0:
                raise ValueError("distance matrix must be nonnegative")
            if np.max(np.abs(np.diag(v)), initial=0.0) > SYMMETRY_TOL:
                raise ValueError("distance matrix must have a zero diagonal")
        else:
            raise ValueError(f"unknown geometry tag {self.tag!r}")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def require_kernel(self) -> np.ndarray:
        if self.tag != "kernel":
            raise NotAKernel("a kernel-tagged geometry matrix is required")
        return self.values

    def require_distance(self) -> np.ndarray:
        if self.tag != "distance":
            raise NotADistance("a distance-tagged geometry matrix is required")
        return self.values

    def take(self, idx: np.ndarray) -> "GeometryMatrix":
        """Sub-matrix on rows/columns ``idx`` (keeps the tag)."""
        sub = self.values[np.ix_(idx, idx)]
        return GeometryMatrix(sub, self.tag)


def _check_psd_spot(v: np.ndarray, n_vectors: int = 16) -> None:
    # Statistical PSD check: Rayleigh quotients on seeded random unit
    # vectors.  Keeps construction O(N^2) instead of an eigendecomposition.
    rng = np.random.default_rng(0)
    n = v.shape[0]
    for _ in range(n_vectors):
        z = rng.standard_normal(n)
        z /= np.linalg.norm(z)
        if float(z @ v @ z) < -RAYLEIGH_TOL:
            raise ValueError("kernel matrix fails the random Rayleigh PSD check")


def squared_distances(x: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, exact zero diagonal."""
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    d2 = 0.5 * (d2 + d2.T)
    np.fill_diagonal(d2, 0.0)
    return d2


def build_kernel(x, spec: GeometrySpec) -> GeometryMatrix:
    """Build a kernel matrix (``linear_kernel``, ``gaussian_kernel`` or
    ``precomputed``) from the data matrix ``x``."""
    x = as_data_matrix(x)
    if spec.kind == "linear_kernel":
        g = x @ x.T
        g = 0.5 * (g + g.T)
        return GeometryMatrix(g, "kernel")
    if spec.kind == "gaussian_kernel":
        d2 = squared_distances(x)
        g = np.exp(-d2 / (2.0 * spec.bandwidth**2))
        np.fill_diagonal(g, 1.0)
        return GeometryMatrix(g, "kernel")
    if spec.kind == "precomputed":
        _check_precomputed_shape(spec, x.shape[0])
        return GeometryMatrix(spec.matrix, "kernel")
    raise ValueError(f"{spec.kind!r} is not a kernel kind")


def build_distance(x, spec: GeometrySpec) -> GeometryMatrix:
    """Build a distance matrix (``euclidean_distance``, ``shortest_path``
    or ``precomputed``) from the data matrix ``x``."""
    x = as_data_matrix(x)
    if spec.kind == "euclidean_distance":
        d = np.sqrt(squared_distances(x))
        return GeometryMatrix(d, "distance")
    if spec.kind == "shortest_path":
        return shortest_path_distance(x, spec.quantile)
    if spec.kind == "precomputed":
        _check_precomputed_shape(spec, x.shape[0])
        return GeometryMatrix(spec.matrix, "distance")
    raise ValueError(f"{spec.kind!r} is not a distance kind")


def _check_precomputed_shape(spec: GeometrySpec, n: int) -> None:
    if spec.matrix.shape[0] != n:
        raise DimensionMismatch(
            f"precomputed matrix is {spec.matrix.shape[0]}x{spec.matrix.shape[1]} "
            f"but the data has {n} rows"
        )


# ----------------------------------------------------------------------
# Hop-count (all-pairs shortest path) distance
# ----------------------------------------------------------------------


def _bfs_all_pairs(indptr, indices, n, out):
    # One BFS per source over a CSR adjacency; out[i, j] = hop count,
    # n when j is unreachable from i.  Plain nopython-subset Python so
    # the same body runs jitted or interpreted.
    queue = np.empty(n, dtype=np.int64)
    for source in range(n):
        dist = out[source]
        for j in range(n):
            dist[j] = -1
        dist[source] = 0
        queue[0] = source
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u]
            for p in range(indptr[u], indptr[u + 1]):
                v = indices[p]
                if dist[v] < 0:
                    dist[v] = du + 1
                    queue[tail] = v
                    tail += 1
        for j in range(n):
            if dist[j] < 0:
                dist[j] = n
    return out


_bfs_all_pairs_jit = jit_kernel(_bfs_all_pairs)


def neighbor_threshold(distances: np.ndarray, quantile: float) -> float:
    """Quantile of the off-diagonal pairwise distances.

    Linear interpolation between order statistics; the zero diagonal is
    excluded so it cannot bias the threshold downward.
    """
    n = distances.shape[0]
    off = distances[~np.eye(n, dtype=bool)]
    return float(np.quantile(off, quantile))


def shortest_path_distance(x, quantile: float = DEFAULT_NEIGHBOR_QUANTILE) -> GeometryMatrix:
    """Hop-count distance on the quantile-thresholded neighbour graph.

    Two samples are adjacent when their Euclidean distance is at most
    the given quantile of all off-diagonal distances.  The returned
    entries are BFS hop counts; unreachable pairs get the sentinel ``N``.
    """
    x = as_data_matrix(x)
    n = x.shape[0]
    if n < 2:
        raise DimensionMismatch("shortest-path distance needs at least 2 samples")
    if not 0.0 < quantile < 1.0:
        raise ValueError("quantile must lie in (0, 1)")
    d = np.sqrt(squared_distances(x))
    eps = neighbor_threshold(d, quantile)
    adj = (d <= eps) & ~np.eye(n, dtype=bool)
    hops = _hop_matrix(adj)
    return GeometryMatrix(hops.astype(np.float64), "distance")


def _hop_matrix(adj: np.ndarray) -> np.ndarray:
    n = adj.shape[0]
    counts = adj.sum(axis=1)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.flatnonzero(adj.ravel()).astype(np.int64) % n if n else np.empty(0, np.int64)
    # Row-major flatnonzero already orders neighbours by row then column.
    out = np.empty((n, n), dtype=np.int64)
    return _bfs_all_pairs_jit(indptr, indices, n, out)


def hop_matrix_numpy(adj: np.ndarray) -> np.ndarray:
    """Vectorised frontier-sweep BFS; reference path for the jitted kernel."""
    n = adj.shape[0]
    dist = np.full((n, n), n, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    frontier = np.eye(n, dtype=bool)
    reached = frontier.copy()
    for step in range(1, n):
        frontier = (frontier @ adj) & ~reached
        if not frontier.any():
            break
        dist[frontier] = step
        reached |= frontier
    return dist


def load_geometry_csv(path, tag: str) -> GeometryMatrix:
    """Load a precomputed square matrix from a header-free CSV file."""
    values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if values.shape[0] != values.shape[1]:
        raise DimensionMismatch(
            f"geometry CSV must be square, got shape {values.shape}"
        )
    return GeometryMatrix(values, tag)
