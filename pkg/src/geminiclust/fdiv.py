"""f-divergence clustering objectives and their analytic gradients.

Every objective is the Monte-Carlo plug-in value of a divergence between
cluster-conditional distributions, rewritten through Bayes' theorem so it
only involves the soft assignment ``P`` and its column-mean marginal
``pi``.  One-vs-all ("ova") compares each cluster against the pooled
data; one-vs-one ("ovo") compares independently drawn cluster pairs.

Closed forms used for the values (``r = P / pi`` denotes the posterior
ratio):

- KL ova        mean_i sum_k P log(P / pi)                (the usual MI)
- KL ovo        KL ova + mean_i sum_k pi log(pi / P)      (symmetric KL)
- TV ova        mean_i 0.5 sum_k |P - pi|
- TV ovo        0.5 mean_i sum_{a,b} pi_a pi_b |r_a - r_b|
- H2 ova        1 - mean_i sum_k sqrt(pi P)
- H2 ovo        mean_i Var_{k~pi}[sqrt(r)]

The squared Hellinger rows use the unit-range normalisation (convex
generator ``f(t) = 1 - sqrt(t)``), so both modes live in [0, 1).

Gradients are the exact derivatives of these plug-in estimators with
``pi`` treated as the column mean of ``P`` (that chain rule term is
included).  They are expressed through ``h(t) = f(t) - t f'(t) + f'(1/t)``
for the ovo mode; probabilities are floored at ``PROB_FLOOR`` before any
ratio so hard assignments cannot produce infinities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import as_soft_assignment
from .errors import EmptyCluster, UnsupportedAlpha

PROB_FLOOR = 1e-12

OVA = "ova"
OVO = "ovo"


@dataclass(frozen=True)
class FDivKind:
    """A convex generator ``f`` with ``f(1) = 0`` and its derivative."""

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    fprime: Callable[[np.ndarray], np.ndarray]
    alpha: float | None = None

    def conjugate(self, t: np.ndarray) -> np.ndarray:
        """Convex conjugate ``g(t) = t * f(1/t)`` (swaps divergence args)."""
        t = np.asarray(t, dtype=np.float64)
        return t * self.f(1.0 / t)

    def h(self, t: np.ndarray) -> np.ndarray:
        """Gradient weight ``h(t) = f(t) - t f'(t) + f'(1/t)``."""
        t = np.asarray(t, dtype=np.float64)
        return self.f(t) - t * self.fprime(t) + self.fprime(1.0 / t)

    def check_shape(self, grid: np.ndarray | None = None) -> None:
        """Numeric sanity check: f(1) = 0 and midpoint convexity on (0, 10]."""
        if abs(float(self.f(np.float64(1.0)))) > 1e-12:
            raise ValueError(f"{self.name}: f(1) != 0")
        t = np.linspace(0.01, 10.0, 400) if grid is None else grid
        mid = self.f((t[:-1] + t[1:]) / 2.0)
        chord = (self.f(t[:-1]) + self.f(t[1:])) / 2.0
        if np.any(mid > chord + 1e-10):
            raise ValueError(f"{self.name}: f fails midpoint convexity")


KL = FDivKind(
    "kl",
    f=lambda t: t * np.log(t),
    fprime=lambda t: np.log(t) + 1.0,
)

TOTAL_VARIATION = FDivKind(
    "tv",
    f=lambda t: 0.5 * np.abs(t - 1.0),
    fprime=lambda t: 0.5 * np.sign(t - 1.0),
)

SQUARED_HELLINGER = FDivKind(
    "hellinger",
    f=lambda t: 1.0 - np.sqrt(t),
    fprime=lambda t: -0.5 / np.sqrt(t),
)

_KIND_ALIASES = {
    "kl": KL,
    "tv": TOTAL_VARIATION,
    "total_variation": TOTAL_VARIATION,
    "hellinger": SQUARED_HELLINGER,
    "squared_hellinger": SQUARED_HELLINGER,
}


def fdiv_kind(name: str) -> FDivKind:
    """Look up one of the named generators: kl, tv, hellinger."""
    try:
        return _KIND_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown f-divergence kind {name!r}") from None


def alpha_kind(alpha: float) -> FDivKind:
    """Power-family generator for ``alpha > 0``; ``alpha = 1`` is KL."""
    if alpha <= 0:
        raise UnsupportedAlpha("alpha must be positive (the objective is unbounded otherwise)")
    if alpha == 1.0:
        return KL
    denom = alpha * (alpha - 1.0)
    return FDivKind(
        f"alpha[{alpha:g}]",
        f=lambda t: (np.power(t, alpha) - alpha * t + alpha - 1.0) / denom,
        fprime=lambda t: (np.power(t, alpha - 1.0) - 1.0) / (alpha - 1.0),
        alpha=alpha,
    )


def _check_mode(mode: str) -> str:
    if mode not in (OVA, OVO):
        raise ValueError(f"mode must be 'ova' or 'ovo', got {mode!r}")
    return mode


def _marginal_checked(p: np.ndarray) -> np.ndarray:
    pi = p.mean(axis=0)
    if pi.min() < PROB_FLOOR:
        raise EmptyCluster(
            f"cluster {int(pi.argmin())} has marginal {pi.min():.3e}; "
            "drop dead clusters before evaluating an f-divergence objective"
        )
    return pi


def fdiv_gemini(kind: FDivKind, mode: str, p) -> float:
    """Plug-in value of an f-divergence clustering objective.

    ``kind`` is one of the named generators (KL, total variation,
    squared Hellinger); the alpha family has its own entry point
    :func:`alpha_gemini_ova`.

    Implementation note: each expression is the Monte-Carlo estimator
    ``mean_i sum_y pi_y f(...)`` written without cancelling factors that
    are identically 1 on row-stochastic input (such as ``sum_k pi_k``).
    On valid input the values equal the closed forms in the module
    docstring; keeping the raw form makes the partial derivatives in
    ``P`` agree with :func:`fdiv_gemini_grad`, so central finite
    differences of this function reproduce the analytic gradient.
    """
    if kind.alpha is not None:
        raise ValueError("use alpha_gemini_ova for the alpha family")
    _check_mode(mode)
    p = as_soft_assignment(p)
    pi = _marginal_checked(p)
    if kind is KL:
        pc = np.maximum(p, PROB_FLOOR)
        forward = float(np.mean((pc * (np.log(pc) - np.log(pi))).sum(axis=1)))
        if mode == OVA:
            return forward
        reverse = (pi * (np.log(pi) - np.log(pc))).sum(axis=1)
        return float(pi.sum() * forward + np.mean(pc.sum(axis=1) * reverse))
    if kind is TOTAL_VARIATION:
        if mode == OVA:
            return float(np.mean(0.5 * np.abs(p - pi).sum(axis=1)))
        return _tv_ovo(p, pi)
    if kind is SQUARED_HELLINGER:
        root_sum = np.sqrt(pi * p).sum(axis=1)
        if mode == OVA:
            return float(pi.sum() - np.mean(root_sum))
        return float(np.mean(pi.sum() * p.sum(axis=1) - root_sum**2))
    raise ValueError(f"unhandled kind {kind.name!r}")


def _tv_ovo(p: np.ndarray, pi: np.ndarray) -> float:
    # 0.5 mean_i sum_{a,b} |P_ia pi_b - P_ib pi_a|; the division-free form
    # of 0.5 E[ sum pi_a pi_b |r_a - r_b| ].
    acc = 0.0
    for a in range(p.shape[1]):
        gaps = np.abs(p[:, [a]] * pi - p * pi[a])  # N x K
        acc += float(np.mean(gaps.sum(axis=1)))
    return 0.5 * acc


def fdiv_ovo_generic(p, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """One-vs-one estimator for an arbitrary generator ``f``.

    Evaluates ``mean_i sum_{a,b} pi_a P[i,b] f(r_ia / r_ib)`` on floored
    probabilities.  Used to cross-check the closed forms and the
    conjugate identity ``D_f(p||q) = D_g(q||p)``.
    """
    p = as_soft_assignment(p)
    pi = _marginal_checked(p)
    pc = np.maximum(p, PROB_FLOOR)
    r = pc / pi
    acc = 0.0
    for a in range(p.shape[1]):
        gamma = r[:, [a]] / r  # N x K, pair (a, b) per column
        acc += pi[a] * float(np.mean((pc * f(gamma)).sum(axis=1)))
    return acc


def alpha_gemini_ova(alpha: float, p) -> float:
    """One-vs-all objective for the alpha-divergence family.

    Closed form ``(alpha (alpha-1))^-1 [-1 + sum_k pi_k^(1-alpha)
    E[P^alpha]]`` for ``alpha`` outside {0, 1}; ``alpha = 1`` falls back
    to the KL objective.  ``alpha <= 0`` is rejected (no finite bound).
    """
    if alpha <= 0:
        raise UnsupportedAlpha("alpha must be positive")
    p = as_soft_assignment(p)
    pi = _marginal_checked(p)
    if alpha == 1.0:
        pc = np.maximum(p, PROB_FLOOR)
        return float(np.mean((pc * (np.log(pc) - np.log(pi))).sum(axis=1)))
    moments = np.mean(np.power(p, alpha), axis=0)
    total = float(np.sum(np.power(pi, 1.0 - alpha) * moments))
    # pi.sum() is identically 1 on valid input; written out so the raw
    # partial derivatives line up with alpha_gemini_ova_grad.
    return (total - float(pi.sum())) / (alpha * (alpha - 1.0))


def fdiv_gemini_grad(kind: FDivKind, mode: str, p) -> np.ndarray:
    """Exact gradient of the plug-in objective with respect to ``P``.

    The marginal is treated as the column mean of ``P``, so the returned
    ``N x K`` matrix includes the chain through ``d pi / d P = 1/N``.
    """
    _check_mode(mode)
    p = as_soft_assignment(p)
    pi = _marginal_checked(p)
    pc = np.maximum(p, PROB_FLOOR)
    r = pc / pi
    n = p.shape[0]
    if mode == OVA:
        fpr = kind.fprime(r)
        # Per-cluster constant from the marginal chain rule.
        corr = np.mean(kind.f(r) - r * fpr, axis=0)
        return (fpr + corr) / n
    grad = np.empty_like(p)
    for k in range(p.shape[1]):
        gamma_kb = r[:, [k]] / r        # gamma for pair (k, b)
        h_kb = kind.h(gamma_kb)
        h_bk = kind.h(1.0 / gamma_kb)   # h(gamma) for pair (b, k)
        per_sample = h_bk @ pi
        constant = float(np.mean((pc * h_kb).sum(axis=1)))
        grad[:, k] = (per_sample + constant) / n
    return grad


def alpha_gemini_ova_grad(alpha: float, p) -> np.ndarray:
    """Gradient of :func:`alpha_gemini_ova` (same conventions as above)."""
    return fdiv_gemini_grad(alpha_kind(alpha), OVA, p)
