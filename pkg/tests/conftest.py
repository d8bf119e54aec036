"""Shared test helpers: finite differences and validation bypass."""

import numpy as np
import pytest

from geminiclust import fdiv, ipm


def central_diff(fun, p, step=1e-6):
    """Entrywise central finite differences of a scalar function of P."""
    grad = np.zeros_like(p)
    for i in range(p.shape[0]):
        for k in range(p.shape[1]):
            plus = p.copy()
            plus[i, k] += step
            minus = p.copy()
            minus[i, k] -= step
            grad[i, k] = (fun(plus) - fun(minus)) / (2.0 * step)
    return grad


def rel_error(analytic, numeric):
    denom = max(float(np.linalg.norm(numeric)), 1e-12)
    return float(np.linalg.norm(analytic - numeric)) / denom


@pytest.fixture
def raw_probability_input(monkeypatch):
    """Disable row-stochastic validation so finite differences can step
    off the simplex (the estimators stay well defined there)."""
    passthrough = lambda p: np.asarray(p, dtype=np.float64)
    monkeypatch.setattr(fdiv, "as_soft_assignment", passthrough)
    monkeypatch.setattr(ipm, "as_soft_assignment", passthrough)


def smoothed_assignment(rng, n, k, floor=0.15):
    """Random soft assignment bounded away from the simplex boundary."""
    return (1.0 - floor) * rng.dirichlet(np.ones(k), size=n) + floor / k
