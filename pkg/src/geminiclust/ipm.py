"""Geometry-aware clustering objectives: MMD and Wasserstein.

Notation: ``P`` is the ``N x K`` soft assignment, ``pi`` its column mean,
``u_k = P[:, k] / pi_k`` the posterior ratio for cluster ``k`` and
``m^k`` the self-normalised column (one importance weight per sample).

MMD with kernel matrix ``Kм`` uses the plug-in quadratic forms over all
``N^2`` ordered sample pairs:

- ova   sum_k pi_k sqrt(q_k),        q_k  = (u_k - 1)' Kм (u_k - 1) / N^2
- ovo   sum_{a,b} pi_a pi_b sqrt(q_ab),  q_ab = (u_a - u_b)' Kм (u_a - u_b) / N^2

``q_k`` is exactly the squared MMD between the cluster's weighted Dirac
measure and the uniform empirical measure, so it is clamped at zero only
to absorb rounding.

Wasserstein with ground distance ``D`` runs one exact transport solve per
cluster (ova, against the uniform weights) or per unordered cluster pair
(ovo); identical pairs contribute zero.  Gradients go through the optimal
dual potentials (envelope theorem) and through the normalisation
``d m_i / d P[j,k] = (1[i=j] - m_i) / sum_l P[l,k]``; potentials are
centred to mean zero first, which fixes their additive gauge without
changing the result.

Clusters whose marginal falls below ``MASS_EPS`` contribute zero value
and zero gradient everywhere, so a training run may empty clusters
without numerical failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import MASS_EPS, as_soft_assignment
from .errors import DimensionMismatch, EmptyCluster
from .geometry import GeometryMatrix
from .transport import solve_emd

OVA = "ova"
OVO = "ovo"

_Q_FLOOR = 1e-12


def _check_mode(mode: str) -> str:
    if mode not in (OVA, OVO):
        raise ValueError(f"mode must be 'ova' or 'ovo', got {mode!r}")
    return mode


def _prepare(p, geom: GeometryMatrix, want: str):
    p = as_soft_assignment(p)
    values = geom.require_kernel() if want == "kernel" else geom.require_distance()
    if values.shape[0] != p.shape[0]:
        raise DimensionMismatch(
            f"geometry is {values.shape[0]}x{values.shape[0]} but P has {p.shape[0]} rows"
        )
    pi = p.mean(axis=0)
    active = pi >= MASS_EPS
    if not active.any():
        raise EmptyCluster("every cluster is empty")
    return p, values, pi, active


# ----------------------------------------------------------------------
# MMD
# ----------------------------------------------------------------------


def _mmd_terms(p, kernel, pi, active):
    """Kernel-smoothed ratio columns and pairwise quadratic forms."""
    n, k = p.shape
    u = np.zeros_like(p)
    u[:, active] = p[:, active] / pi[active]
    ku = kernel @ u
    gram = u.T @ ku / (n * n)  # gram[a, b] = u_a' Kм u_b / N^2
    row_mean = ku.mean(axis=0) / n  # (1' Kм u_b) / N^2
    total = float(kernel.mean())  # 1' Kм 1 / N^2
    return u, ku, gram, row_mean, total


def mmd_gemini(mode: str, p, geom: GeometryMatrix) -> float:
    """Kernel MMD objective; ``geom`` must be kernel-tagged."""
    _check_mode(mode)
    p, kernel, pi, active = _prepare(p, geom, "kernel")
    _, _, gram, row_mean, total = _mmd_terms(p, kernel, pi, active)
    idx = np.flatnonzero(active)
    if mode == OVA:
        q = gram.diagonal() - 2.0 * row_mean + total
        return float(sum(pi[k] * np.sqrt(max(q[k], 0.0)) for k in idx))
    acc = 0.0
    for a in idx:
        for b in idx:
            if b == a:
                continue
            q_ab = gram[a, a] + gram[b, b] - 2.0 * gram[a, b]
            acc += pi[a] * pi[b] * np.sqrt(max(q_ab, 0.0))
    return float(acc)


def mmd_gemini_grad(mode: str, p, geom: GeometryMatrix) -> np.ndarray:
    """Gradient of :func:`mmd_gemini` in ``P`` (marginal chain included)."""
    _check_mode(mode)
    p, kernel, pi, active = _prepare(p, geom, "kernel")
    n, k = p.shape
    u, ku, gram, row_mean, total = _mmd_terms(p, kernel, pi, active)
    ones_sum = kernel.sum(axis=1)  # (Kм 1)_i
    grad = np.zeros_like(p)
    idx = np.flatnonzero(active)
    if mode == OVA:
        for a in idx:
            q_a = max(gram[a, a] - 2.0 * row_mean[a] + total, 0.0)
            root = np.sqrt(q_a)
            # (Kм w_a)_i / N^2 with w_a = u_a - 1
            kw = (ku[:, a] - ones_sum) / (n * n)
            m_a = p[:, a] / (pi[a] * n)
            centred = kw - float(m_a @ kw)
            grad[:, a] = root / n + centred / max(root, np.sqrt(_Q_FLOOR))
        return grad
    for a in idx:
        for b in idx:
            if b <= a:
                continue
            q_ab = max(gram[a, a] + gram[b, b] - 2.0 * gram[a, b], 0.0)
            root = np.sqrt(q_ab)
            safe = max(root, np.sqrt(_Q_FLOOR))
            kd = (ku[:, a] - ku[:, b]) / (n * n)  # Kм (u_a - u_b) / N^2
            for c, other, sign in ((a, b, 1.0), (b, a, -1.0)):
                m_c = p[:, c] / (pi[c] * n)
                centred = sign * kd - float(m_c @ (sign * kd))
                grad[:, c] += 2.0 * pi[other] * (root / n + centred / safe)
    return grad


def mmd_mean_embedding_oracle(mode: str, p, x) -> float:
    """Linear-kernel MMD straight from weighted means in feature space.

    Independent of the kernel-matrix path: embeds each cluster as its
    importance-weighted mean and measures Euclidean distances between
    embeddings.  Only valid for the linear kernel.
    """
    _check_mode(mode)
    p = as_soft_assignment(p)
    x = np.asarray(x, dtype=np.float64)
    pi = p.mean(axis=0)
    active = np.flatnonzero(pi >= MASS_EPS)
    mu = x.mean(axis=0)
    means = {k: x.T @ (p[:, k] / p[:, k].sum()) for k in active}
    if mode == OVA:
        return float(sum(pi[k] * np.linalg.norm(means[k] - mu) for k in active))
    return float(
        sum(
            pi[a] * pi[b] * np.linalg.norm(means[a] - means[b])
            for a in active
            for b in active
            if a != b
        )
    )


# ----------------------------------------------------------------------
# Wasserstein
# ----------------------------------------------------------------------


def _weights(p, pi, k):
    return p[:, k] / (pi[k] * p.shape[0])


def wasserstein_gemini(mode: str, p, geom: GeometryMatrix) -> float:
    """Exact-transport objective; ``geom`` must be distance-tagged."""
    _check_mode(mode)
    p, dist, pi, active = _prepare(p, geom, "distance")
    idx = np.flatnonzero(active)
    n = p.shape[0]
    if mode == OVA:
        uniform = np.full(n, 1.0 / n)
        return float(
            sum(pi[k] * solve_emd(_weights(p, pi, k), uniform, dist).value for k in idx)
        )
    acc = 0.0
    for i, a in enumerate(idx):
        for b in idx[i + 1 :]:
            value = solve_emd(_weights(p, pi, a), _weights(p, pi, b), dist).value
            acc += 2.0 * pi[a] * pi[b] * value
    return float(acc)


def wasserstein_gemini_grad(mode: str, p, geom: GeometryMatrix) -> np.ndarray:
    """Gradient of :func:`wasserstein_gemini` through the dual potentials."""
    value, grad = wasserstein_value_and_grad(mode, p, geom)
    return grad


def wasserstein_value_and_grad(mode: str, p, geom: GeometryMatrix):
    """Objective value and gradient from a single sweep of transport solves."""
    _check_mode(mode)
    p, dist, pi, active = _prepare(p, geom, "distance")
    n = p.shape[0]
    grad = np.zeros_like(p)
    idx = np.flatnonzero(active)
    value = 0.0
    if mode == OVA:
        uniform = np.full(n, 1.0 / n)
        for k in idx:
            m_k = _weights(p, pi, k)
            sol = solve_emd(m_k, uniform, dist)
            u = sol.dual_u - sol.dual_u.mean()
            value += pi[k] * sol.value
            grad[:, k] = (sol.value + u - float(m_k @ u)) / n
        return float(value), grad
    for i, a in enumerate(idx):
        m_a = _weights(p, pi, a)
        for b in idx[i + 1 :]:
            m_b = _weights(p, pi, b)
            sol = solve_emd(m_a, m_b, dist)
            u = sol.dual_u - sol.dual_u.mean()
            v = sol.dual_v - sol.dual_v.mean()
            value += 2.0 * pi[a] * pi[b] * sol.value
            grad[:, a] += 2.0 * pi[b] * (sol.value + u - float(m_a @ u)) / n
            grad[:, b] += 2.0 * pi[a] * (sol.value + v - float(m_b @ v)) / n
    return float(value), grad


# ----------------------------------------------------------------------
# Sampled-pair OvO estimator
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PairSamplePlan:
    """Reproducible draw of ``m`` distinct cluster pairs.

    Pairs are drawn uniformly from the ``K x K`` grid with equal pairs
    rejected, so every distinct ordered pair is equally likely.  The
    estimator value is invariant to pair order since the transport cost
    is symmetric.
    """

    m: int
    k: int
    seed: int | None = None
    pairs: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one sampled pair")
        if self.k < 2:
            raise ValueError("pair sampling needs K >= 2")
        if not self.pairs:
            if self.seed is None:
                raise ValueError("either a seed or explicit pairs are required")
            rng = np.random.default_rng(self.seed)
            drawn = []
            while len(drawn) < self.m:
                a, b = rng.integers(0, self.k, size=2)
                if a != b:
                    drawn.append((int(a), int(b)))
            object.__setattr__(self, "pairs", tuple(drawn))
        else:
            if len(self.pairs) != self.m:
                raise ValueError("explicit pairs must have length m")
            for a, b in self.pairs:
                if not (0 <= a < self.k and 0 <= b < self.k) or a == b:
                    raise ValueError(f"invalid cluster pair ({a}, {b})")


def wasserstein_ovo_sampled(p, geom: GeometryMatrix, plan: PairSamplePlan) -> float:
    """Pair-subsampled one-vs-one transport objective.

    Averages ``pi_a pi_b W(m^a, m^b)`` over the sampled pairs and scales
    by ``K (K-1) / (2 M)``; over the seed distribution its expectation is
    the sum over distinct unordered pairs of the full objective.
    """
    value, _ = wasserstein_ovo_sampled_value_and_grad(p, geom, plan)
    return value


def wasserstein_ovo_sampled_value_and_grad(p, geom: GeometryMatrix, plan: PairSamplePlan):
    p, dist, pi, active = _prepare(p, geom, "distance")
    if plan.k != p.shape[1]:
        raise DimensionMismatch(f"plan was drawn for K={plan.k}, P has K={p.shape[1]}")
    n = p.shape[0]
    scale = plan.k * (plan.k - 1) / (2.0 * plan.m)
    value = 0.0
    grad = np.zeros_like(p)
    cache: dict[tuple[int, int], tuple] = {}
    for a, b in plan.pairs:
        if not (active[a] and active[b]):
            continue
        key = (min(a, b), max(a, b))
        if key not in cache:
            m_lo = _weights(p, pi, key[0])
            m_hi = _weights(p, pi, key[1])
            sol = solve_emd(m_lo, m_hi, dist)
            cache[key] = (
                sol.value,
                sol.dual_u - sol.dual_u.mean(),
                sol.dual_v - sol.dual_v.mean(),
                m_lo,
                m_hi,
            )
        w, u, v, m_lo, m_hi = cache[key]
        value += scale * pi[a] * pi[b] * w
        lo, hi = key
        grad[:, lo] += scale * pi[hi] * (w + u - float(m_lo @ u)) / n
        grad[:, hi] += scale * pi[lo] * (w + v - float(m_hi @ v)) / n
    return float(value), grad
