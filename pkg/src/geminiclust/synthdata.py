"""Seeded generators for the synthetic experiment datasets.

All randomness flows through ``numpy.random.Generator`` seeded with
PCG64; independent components draw from streams split off the given
seed via ``SeedSequence.spawn``, so every dataset is reproducible
across platforms.  Datasets serialise as header-free CSV with feature
columns followed by one integer label column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_gaussian_mixture(means, sigma: float, n_per: int, seed: int):
    """Isotropic Gaussian blobs, ``n_per`` samples per mean."""
    if sigma <= 0:
        raise ConfigError("sigma must be positive")
    means = np.atleast_2d(np.asarray(means, dtype=np.float64))
    streams = np.random.SeedSequence(seed).spawn(len(means))
    xs, ys = [], []
    for label, (mu, ss) in enumerate(zip(means, streams)):
        rng = np.random.default_rng(ss)
        xs.append(mu + sigma * rng.standard_normal((n_per, means.shape[1])))
        ys.append(np.full(n_per, label, dtype=np.int64))
    return np.vstack(xs), np.concatenate(ys)


@dataclass(frozen=True)
class GstmConfig:
    """Three Gaussian blobs plus one heavy-tailed Student-t blob.

    ``alpha`` sets the corner positions (+-alpha, +-alpha), ``sigma``
    the isotropic standard deviation, ``rho`` the Student-t degrees of
    freedom of the fourth component and ``n_per`` the samples per
    component.
    """

    alpha: float = 3.0
    sigma: float = 1.0
    rho: float = 1.0
    n_per: int = 250
    seed: int = 0

    def __post_init__(self):
        if self.alpha <= 0 or self.sigma <= 0 or self.n_per < 1:
            raise ConfigError("alpha, sigma must be positive and n_per >= 1")
        if self.rho <= 0:
            raise ConfigError("Student-t degrees of freedom must be positive")

    def means(self) -> np.ndarray:
        a = self.alpha
        return np.array([[a, a], [a, -a], [-a, a], [-a, -a]])


def gen_gstm(cfg: GstmConfig):
    """Mixture of three Gaussians and one Student-t at the four corners.

    Student-t sampling: draw a centred Gaussian, draw ``u ~ chi2(rho)``
    per sample and scale by ``sqrt(rho / u)``; small ``rho`` produces
    samples arbitrarily far from the corner.
    """
    means = cfg.means()
    streams = np.random.SeedSequence(cfg.seed).spawn(4)
    xs, ys = [], []
    for label in range(3):
        rng = np.random.default_rng(streams[label])
        xs.append(means[label] + cfg.sigma * rng.standard_normal((cfg.n_per, 2)))
        ys.append(np.full(cfg.n_per, label, dtype=np.int64))
    rng = np.random.default_rng(streams[3])
    z = cfg.sigma * rng.standard_normal((cfg.n_per, 2))
    u = rng.chisquare(cfg.rho, size=cfg.n_per)
    xs.append(means[3] + z * np.sqrt(cfg.rho / u)[:, None])
    ys.append(np.full(cfg.n_per, 3, dtype=np.int64))
    return np.vstack(xs), np.concatenate(ys)


def gen_moons(n: int, radius: float = 1.0, noise: float = 0.08, offset: float | None = None, seed: int = 0):
    """Two interleaved half-circles that are not linearly separable.

    Each sample picks a moon by a fair coin, an angle uniform on
    ``[0, pi]`` and lands on a circle of the given radius; the second
    moon is the axis-mirrored arc shifted by ``(radius, offset)``
    (``offset`` defaults to ``radius / 2``), after which isotropic
    Gaussian noise is added.
    """
    if radius <= 0 or noise < 0 or n < 1:
        raise ConfigError("need radius > 0, noise >= 0, n >= 1")
    if offset is None:
        offset = radius / 2.0
    rng = _rng(seed)
    labels = rng.integers(0, 2, size=n).astype(np.int64)
    theta = rng.uniform(0.0, np.pi, size=n)
    x = np.empty((n, 2))
    x[:, 0] = radius * np.cos(theta)
    x[:, 1] = radius * np.sin(theta)
    flip = labels == 1
    x[flip, 0] = radius - x[flip, 0]
    x[flip, 1] = offset - x[flip, 1]
    x += noise * rng.standard_normal((n, 2))
    return x, labels


def gen_dirichlet_predictions(n: int, k: int, concentration: float = 1.0, seed: int = 0):
    """Random soft assignments: ``n`` rows from Dirichlet(concentration)."""
    if concentration <= 0:
        raise ConfigError("concentration must be positive")
    if k < 2 or n < 1:
        raise ConfigError("need k >= 2 and n >= 1")
    rng = _rng(seed)
    return rng.dirichlet(np.full(k, concentration), size=n)


def gen_collinear_gaussians(n_per: int = 100, spread: float = 0.3, seed: int = 0):
    """Three tight blobs on a line at -2, 0 and +2 (pooled mean at 0)."""
    return gen_gaussian_mixture([[-2.0, 0.0], [0.0, 0.0], [2.0, 0.0]], spread, n_per, seed)


def write_dataset_csv(path, x: np.ndarray, labels: np.ndarray) -> None:
    """Feature columns then one integer label column; no header."""
    data = np.column_stack([x, labels.astype(np.float64)])
    np.savetxt(path, data, delimiter=",", fmt="%.17g")


def read_dataset_csv(path):
    """Inverse of :func:`write_dataset_csv`."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return data[:, :-1], data[:, -1].astype(np.int64)
