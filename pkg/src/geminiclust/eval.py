"""External metrics, stability scores and closed-form diagnostics.

Everything here consumes labels or probability vectors produced
elsewhere; nothing trains.  Entropies and divergences are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_label_vector, as_soft_assignment
from .errors import ConfigError, DomainError, LengthMismatch


def _comb2(x):
    return x * (x - 1) / 2.0


def ari(truth, pred) -> float:
    """Adjusted Rand index (chance-corrected pair-counting agreement).

    1 iff the two labelings are identical up to a relabeling; around 0
    for independent labelings.
    """
    truth = as_label_vector(truth)
    pred = as_label_vector(pred)
    if truth.shape != pred.shape:
        raise LengthMismatch(f"label lengths differ: {truth.size} vs {pred.size}")
    n = truth.size
    _, ti = np.unique(truth, return_inverse=True)
    _, pi_ = np.unique(pred, return_inverse=True)
    table = np.zeros((ti.max() + 1, pi_.max() + 1), dtype=np.int64)
    np.add.at(table, (ti, pi_), 1)
    index = _comb2(table.astype(np.float64)).sum()
    sum_a = _comb2(table.sum(axis=1).astype(np.float64)).sum()
    sum_b = _comb2(table.sum(axis=0).astype(np.float64)).sum()
    expected = sum_a * sum_b / _comb2(float(n))
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:  # both partitions trivial
        return 1.0
    return float((index - expected) / (max_index - expected))


@dataclass(frozen=True)
class ConsensusMatrix:
    """Co-clustering frequency of every sample pair across runs."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise LengthMismatch("consensus matrix must be square")
        object.__setattr__(self, "values", v)

    def offdiag(self) -> np.ndarray:
        n = self.values.shape[0]
        iu = np.triu_indices(n, k=1)
        return self.values[iu]


def consensus_matrix(runs) -> ConsensusMatrix:
    """Fraction of runs in which each pair landed in the same cluster."""
    labels = [as_label_vector(r) for r in runs]
    if len(labels) < 2:
        raise ConfigError("need at least two runs for a consensus")
    n = labels[0].size
    for lab in labels:
        if lab.size != n:
            raise LengthMismatch("all runs must label the same samples")
    acc = np.zeros((n, n), dtype=np.float64)
    for lab in labels:
        acc += lab[:, None] == lab[None, :]
    return ConsensusMatrix(acc / len(labels))


def pac_score(runs, q_low: float = 0.1, q_high: float = 0.9) -> float:
    """Proportion of ambiguous pairs: consensus-CDF gap between two quantiles.

    0 when every pair is always or never co-clustered; 1 when all pairs
    sit strictly between the quantiles.  Lower means more stable runs.
    """
    cm = consensus_matrix(runs)
    values = cm.offdiag()
    if values.size == 0:
        return 0.0
    return float(np.mean(values <= q_high) - np.mean(values <= q_low))


def renyi_entropy(p, order: float = 2.0) -> float:
    """Renyi entropy of a probability vector, in nats.

    ``order = 1`` (or anything within 1e-12 of it) dispatches to the
    Shannon limit.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or abs(p.sum() - 1.0) > 1e-9 or p.min() < -1e-12:
        raise ValueError("expected a probability vector")
    if order <= 0:
        raise DomainError("Renyi order must be positive")
    if abs(order - 1.0) < 1e-12:
        pos = p[p > 0]
        return float(-(pos * np.log(pos)).sum())
    return float(np.log(np.power(p, order).sum()) / (1.0 - order))


# ----------------------------------------------------------------------
# Batch-size bias study
# ----------------------------------------------------------------------


def estimator_bias(
    p_full,
    batch_sizes,
    trials: int,
    seed: int,
    objectives,
    evaluate,
):
    """Mean squared error of subsampled objective estimates.

    ``evaluate(name, row_idx)`` must return the named objective on the
    given subsample (the caller closes over the full soft assignment and
    any geometry, slicing both).  Returns rows ``(objective, batch, mse,
    se)`` where ``se`` is the standard error of the MSE estimate itself.
    """
    p_full = as_soft_assignment(p_full)
    n = p_full.shape[0]
    batch_sizes = [int(b) for b in batch_sizes]
    if any(b < 1 or b > n for b in batch_sizes):
        raise ConfigError(f"batch sizes must lie in [1, {n}]")
    if trials < 1:
        raise ConfigError("need at least one trial")
    rows = []
    full_values = {name: evaluate(name, np.arange(n)) for name in objectives}
    root = np.random.default_rng(seed)
    streams = root.spawn(len(objectives))
    for stream, name in zip(streams, objectives):
        for batch in batch_sizes:
            sq_errors = np.empty(trials)
            for t in range(trials):
                idx = stream.choice(n, size=batch, replace=False)
                sq_errors[t] = (evaluate(name, idx) - full_values[name]) ** 2
            mse = float(sq_errors.mean())
            se = float(sq_errors.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
            rows.append((name, batch, mse, se))
    return rows


# ----------------------------------------------------------------------
# Closed-form two-boundary demonstration
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryDemoResult:
    """Mutual information of the two hard boundaries and their gap (nats)."""

    i_a: float
    i_b: float
    delta_i: float


def boundary_demo(eps: float, beta: float) -> BoundaryDemoResult:
    """Closed-form MI of a centred split (A) versus an interval split (B).

    A balanced two-component location mixture is clustered either by the
    midpoint boundary or by the between-the-means interval; ``eps`` is
    the label noise of the hard assignment and ``beta`` the probability
    mass lying between the two component means.  As ``eps -> 0`` the gap
    tends to ``log 2 - H(beta)``, which vanishes for ``beta = 1/2``: the
    misplaced boundary then looks exactly as good under MI.
    """
    if not 0.0 < eps < 0.5:
        raise DomainError("eps must lie in (0, 0.5)")
    if not 0.0 < beta < 1.0:
        raise DomainError("beta must lie in (0, 1)")
    i_a = eps * math.log(2.0 * eps) + (1.0 - eps) * math.log(2.0 * (1.0 - eps))
    pi_b = eps + beta * (1.0 - 2.0 * eps)
    pi_b_bar = 1.0 - pi_b
    i_b = (
        eps * math.log(eps)
        + (1.0 - eps) * math.log(1.0 - eps)
        - math.log(pi_b_bar)
        - (2.0 * beta * eps - beta - eps) * math.log(pi_b_bar / pi_b)
    )
    return BoundaryDemoResult(i_a=i_a, i_b=i_b, delta_i=i_a - i_b)


def binary_entropy(beta: float) -> float:
    """Shannon entropy of a Bernoulli(beta), in nats."""
    if not 0.0 < beta < 1.0:
        raise DomainError("beta must lie in (0, 1)")
    return float(-beta * math.log(beta) - (1.0 - beta) * math.log(1.0 - beta))


def mixture_beta(mu0: float, mu1: float, sigma: float) -> float:
    """Probability mass of the balanced mixture between the two means."""
    gap = abs(mu1 - mu0) / sigma
    return float(math.erf(gap / math.sqrt(2.0)) / 2.0)  # Phi(gap) - 1/2


def boundary_demo_mc(
    eps: float, mu0: float, mu1: float, sigma: float, n: int, seed: int
) -> float:
    """Monte-Carlo estimate of the MI gap on mixture samples.

    Draws ``n`` points from the balanced Gaussian mixture, applies both
    hard boundary models and returns the difference of plug-in MI
    estimates; cross-checks :func:`boundary_demo` empirically.
    """
    if not 0.0 < eps < 0.5:
        raise DomainError("eps must lie in (0, 0.5)")
    rng = np.random.default_rng(seed)
    comp = rng.integers(0, 2, size=n)
    x = rng.normal(np.where(comp == 0, mu0, mu1), sigma)
    mid = 0.5 * (mu0 + mu1)
    p_a = np.where(x > mid, 1.0 - eps, eps)
    lo, hi = min(mu0, mu1), max(mu0, mu1)
    p_b = np.where((x >= lo) & (x <= hi), 1.0 - eps, eps)
    return _binary_mi(p_a) - _binary_mi(p_b)


def _binary_mi(p1: np.ndarray) -> float:
    pi1 = float(p1.mean())
    p0 = 1.0 - p1
    pi0 = 1.0 - pi1
    terms = p1 * np.log(p1 / pi1) + p0 * np.log(p0 / pi0)
    return float(terms.mean())
