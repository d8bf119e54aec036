"""Wall-time benchmarks: objective cost versus cluster count, and the
jitted hot kernels against their plain-Python twins."""

from __future__ import annotations

import time

import numpy as np

from ._accel import active_impl
from . import transport
from .fdiv import fdiv_gemini, fdiv_gemini_grad, fdiv_kind
from .geometry import GeometrySpec, build_distance, build_kernel, hop_matrix_numpy, _hop_matrix
from .ipm import (
    mmd_gemini,
    mmd_gemini_grad,
    wasserstein_value_and_grad,
)

BENCH_OBJECTIVES = ("kl:ova", "mmd:ova", "mmd:ovo", "wasserstein:ova", "wasserstein:ovo")


def _time(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0


def bench_objectives(n: int = 100, k_values=(2, 8, 14, 20), seed: int = 0, repeats: int = 3):
    """Milliseconds per objective evaluation (value + gradient).

    Returns rows ``(objective, k, ms)``; one row per objective and
    cluster count, timed on Dirichlet predictions and seeded Gaussian
    data with the default geometries.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 2))
    kernel = build_kernel(x, GeometrySpec("linear_kernel"))
    distance = build_distance(x, GeometrySpec("euclidean_distance"))
    rows = []
    for k in k_values:
        p = rng.dirichlet(np.ones(k), size=n)
        for name in BENCH_OBJECTIVES:
            head, mode = name.split(":")
            if head == "mmd":
                fn = lambda: (mmd_gemini(mode, p, kernel), mmd_gemini_grad(mode, p, kernel))
            elif head == "wasserstein":
                fn = lambda: wasserstein_value_and_grad(mode, p, distance)
            else:
                kind = fdiv_kind(head)
                fn = lambda: (fdiv_gemini(kind, mode, p), fdiv_gemini_grad(kind, mode, p))
            fn()  # warm (jit compilation, caches)
            rows.append((name, int(k), _time(fn, repeats)))
    return rows


def bench_impl(sizes=(50, 100, 200), seed: int = 0, repeats: int = 3):
    """Jitted versus plain-Python hot kernels (same code, same results).

    Rows are ``(kernel, n, impl, ms)`` with impl in {active, python};
    ``active`` reflects the dispatch selected by GEMINI_NO_NUMBA.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        x = rng.standard_normal((n, 2))
        a = rng.dirichlet(np.ones(n))
        b = rng.dirichlet(np.ones(n))
        cost = np.sqrt(((x[:, None] - x[None, :]) ** 2).sum(axis=2))

        def run_emd(kernel_fn):
            flow = np.zeros((n, n))
            pot_u = np.zeros(n)
            pot_v = np.zeros(n)
            kernel_fn(a, b, cost, flow, pot_u, pot_v)

        active = transport._ssp_kernel_jit
        run_emd(active)  # warm
        rows.append(("emd", n, active_impl(), _time(lambda: run_emd(active), repeats)))
        rows.append(("emd", n, "python", _time(lambda: run_emd(transport._ssp_kernel), repeats)))

        adj = cost <= np.quantile(cost[~np.eye(n, dtype=bool)], 0.1)
        np.fill_diagonal(adj, False)
        rows.append(("bfs", n, active_impl(), _time(lambda: _hop_matrix(adj), repeats)))
        rows.append(("bfs", n, "python", _time(lambda: hop_matrix_numpy(adj), repeats)))
    return rows
