"""Mini-batch ascent on a clustering objective with Adam.

The objective is *maximised*: parameters move along ``+lr * m_hat /
(sqrt(v_hat) + eps)``.  Geometry (kernel or distance) is computed once
on the full dataset and sliced per batch, so a batch sees exactly the
sub-matrix of the global geometry; marginals are always the batch mean
(the plug-in estimator).  Everything is deterministic given the config:
the shuffle stream, the model init and any pair-sampling seeds all
derive from explicit seeds.

Objective names: ``kl | tv | hellinger`` x ``:ova | :ovo``,
``alpha:ova:<a>``, ``mmd:ova | mmd:ovo``, ``wasserstein:ova |
wasserstein:ovo | wasserstein:ovo_sampled:<M>``.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import fdiv, ipm
from .core import MASS_EPS, as_data_matrix, nonempty_clusters
from .errors import ConfigError
from .eval import ari
from .geometry import GeometryMatrix, GeometrySpec, build_distance, build_kernel
from .models import ModelParams, ModelSpec, backward, forward, init_model


@dataclass(frozen=True)
class Objective:
    """Parsed objective name."""

    family: str  # fdiv | alpha | mmd | wasserstein
    mode: str  # ova | ovo
    kind: str = ""  # fdiv generator name
    alpha: float = 0.0
    sampled_pairs: int = 0  # wasserstein ovo only; 0 = all pairs

    @property
    def geometry_tag(self) -> str | None:
        if self.family == "mmd":
            return "kernel"
        if self.family == "wasserstein":
            return "distance"
        return None


def parse_objective(name: str) -> Objective:
    parts = name.lower().split(":")
    head = parts[0]
    if head in ("kl", "tv", "hellinger", "total_variation", "squared_hellinger"):
        if len(parts) != 2:
            raise ConfigError(f"expected '<kind>:<mode>', got {name!r}")
        kind = fdiv.fdiv_kind(head).name
        return Objective("fdiv", _mode(parts[1], name), kind=kind)
    if head == "alpha":
        if len(parts) != 3:
            raise ConfigError(f"expected 'alpha:ova:<value>', got {name!r}")
        if _mode(parts[1], name) != "ova":
            raise ConfigError("the alpha family is one-vs-all only")
        return Objective("alpha", "ova", alpha=float(parts[2]))
    if head == "mmd":
        if len(parts) != 2:
            raise ConfigError(f"expected 'mmd:<mode>', got {name!r}")
        return Objective("mmd", _mode(parts[1], name))
    if head == "wasserstein":
        if len(parts) == 2:
            return Objective("wasserstein", _mode(parts[1], name))
        if len(parts) == 3 and parts[1] == "ovo_sampled":
            m = int(parts[2])
            if m < 1:
                raise ConfigError("sampled pair count must be >= 1")
            return Objective("wasserstein", "ovo", sampled_pairs=m)
        raise ConfigError(f"bad wasserstein objective {name!r}")
    raise ConfigError(f"unknown objective {name!r}")


def _mode(mode: str, name: str) -> str:
    if mode not in ("ova", "ovo"):
        raise ConfigError(f"bad mode in objective {name!r}")
    return mode


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run depends on."""

    objective: str
    epochs: int
    learning_rate: float = 1e-3
    batch_size: int | None = None  # None = full batch
    geometry: GeometrySpec | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning rate must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be nonnegative")
        parse_objective(self.objective)

    def to_dict(self) -> dict:
        d = {
            "objective": self.objective,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "seed": self.seed,
        }
        if self.geometry is not None:
            d["geometry"] = {
                "kind": self.geometry.kind,
                "bandwidth": self.geometry.bandwidth,
                "quantile": self.geometry.quantile,
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        geometry = None
        if d.get("geometry"):
            g = d["geometry"]
            geometry = GeometrySpec(
                g["kind"],
                bandwidth=float(g.get("bandwidth", 1.0)),
                quantile=float(g.get("quantile", 0.05)),
            )
        return cls(
            objective=d["objective"],
            epochs=int(d["epochs"]),
            learning_rate=float(d.get("learning_rate", 1e-3)),
            batch_size=d.get("batch_size"),
            geometry=geometry,
            beta1=float(d.get("beta1", 0.9)),
            beta2=float(d.get("beta2", 0.999)),
            eps=float(d.get("eps", 1e-8)),
            seed=int(d.get("seed", 0)),
        )


@dataclass(frozen=True)
class HistoryRow:
    epoch: int
    objective: float
    nonempty: int
    ari: float  # nan when no labels were supplied
    ms: float


@dataclass
class TrainHistory:
    rows: list[HistoryRow] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.rows])

    def nonempty(self) -> np.ndarray:
        return np.array([r.nonempty for r in self.rows])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["epoch", "objective", "nonempty", "ari", "ms"])
            for r in self.rows:
                writer.writerow(
                    [r.epoch, f"{r.objective:.12g}", r.nonempty, f"{r.ari:.12g}", f"{r.ms:.6g}"]
                )

    @classmethod
    def read_csv(cls, path) -> "TrainHistory":
        rows = []
        with open(path, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                rows.append(
                    HistoryRow(
                        int(rec["epoch"]),
                        float(rec["objective"]),
                        int(rec["nonempty"]),
                        float(rec["ari"]),
                        float(rec["ms"]),
                    )
                )
        return cls(rows)


@dataclass(frozen=True)
class AdamHyper:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_update(
    params: ModelParams,
    grads: ModelParams,
    state: dict[str, dict[str, np.ndarray]],
    hyper: AdamHyper,
    step: int,
) -> tuple[ModelParams, dict]:
    """One bias-corrected Adam *ascent* step; returns new params and state."""
    if step < 1:
        raise ValueError("Adam step counter starts at 1")
    new_arrays = {}
    new_state = {}
    for name, value in params.arrays.items():
        g = grads.arrays[name]
        prev = state.get(name, {})
        m = hyper.beta1 * prev.get("m", 0.0) + (1.0 - hyper.beta1) * g
        v = hyper.beta2 * prev.get("v", 0.0) + (1.0 - hyper.beta2) * g * g
        m_hat = m / (1.0 - hyper.beta1**step)
        v_hat = v / (1.0 - hyper.beta2**step)
        new_arrays[name] = value + hyper.learning_rate * m_hat / (np.sqrt(v_hat) + hyper.eps)
        new_state[name] = {"m": np.asarray(m), "v": np.asarray(v)}
    return ModelParams(new_arrays), new_state


def _active_columns(p: np.ndarray) -> np.ndarray:
    return p.mean(axis=0) >= MASS_EPS


def evaluate_objective(obj: Objective, p: np.ndarray, geom: GeometryMatrix | None, plan=None):
    """Value and probability-space gradient of an objective on one batch.

    Clusters with (numerically) zero batch mass contribute nothing: the
    f-divergence estimators see only the live columns and dead columns
    get a zero gradient, matching the transport/MMD behaviour.
    """
    if obj.family in ("fdiv", "alpha"):
        active = _active_columns(p)
        if active.sum() < 2:
            return 0.0, np.zeros_like(p)
        sub = p[:, active] if not active.all() else p
        if obj.family == "alpha":
            value = fdiv.alpha_gemini_ova(obj.alpha, sub)
            sub_grad = fdiv.alpha_gemini_ova_grad(obj.alpha, sub)
        else:
            kind = fdiv.fdiv_kind(obj.kind)
            value = fdiv.fdiv_gemini(kind, obj.mode, sub)
            sub_grad = fdiv.fdiv_gemini_grad(kind, obj.mode, sub)
        if active.all():
            return value, sub_grad
        grad = np.zeros_like(p)
        grad[:, active] = sub_grad
        return value, grad
    if geom is None:
        raise ConfigError(f"objective {obj.family}:{obj.mode} needs a geometry matrix")
    if obj.family == "mmd":
        value = ipm.mmd_gemini(obj.mode, p, geom)
        return value, ipm.mmd_gemini_grad(obj.mode, p, geom)
    if obj.sampled_pairs:
        if plan is None:
            raise ConfigError("sampled objective needs a pair plan")
        return ipm.wasserstein_ovo_sampled_value_and_grad(p, geom, plan)
    return ipm.wasserstein_value_and_grad(obj.mode, p, geom)


def build_geometry(x: np.ndarray, spec: GeometrySpec, tag: str) -> GeometryMatrix:
    return build_kernel(x, spec) if tag == "kernel" else build_distance(x, spec)


def train(
    model_spec: ModelSpec,
    x,
    cfg: TrainConfig,
    labels=None,
    geometry_matrix: GeometryMatrix | None = None,
) -> tuple[ModelParams, TrainHistory]:
    """Run ``epochs * ceil(N / batch)`` ascent steps and collect diagnostics.

    ``geometry_matrix`` short-circuits geometry construction (it must
    match the objective's tag); otherwise ``cfg.geometry`` is built on
    the full dataset once and sliced per batch.
    """
    x = as_data_matrix(x)
    n = x.shape[0]
    obj = parse_objective(cfg.objective)
    batch = cfg.batch_size if cfg.batch_size is not None else n
    if not 1 <= batch <= n:
        raise ConfigError(f"batch size {batch} not in [1, {n}]")
    geom = geometry_matrix
    if obj.geometry_tag is not None and geom is None:
        if cfg.geometry is None:
            raise ConfigError(f"objective {cfg.objective!r} requires a geometry spec")
        geom = build_geometry(x, cfg.geometry, obj.geometry_tag)
    if geom is not None and geom.n != n:
        raise ConfigError("geometry matrix size does not match the dataset")
    if geom is not None:
        (geom.require_kernel if obj.geometry_tag == "kernel" else geom.require_distance)()

    params = init_model(model_spec)
    state: dict = {}
    hyper = AdamHyper(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)
    rng = np.random.default_rng(cfg.seed)
    history = TrainHistory()
    step = 0
    table_rows = model_spec.kind == "table"
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        order = rng.permutation(n)
        values = []
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            xb = x[idx]
            probs = forward(params, model_spec, xb, rows=idx if table_rows else None)
            plan = None
            if obj.sampled_pairs:
                plan = ipm.PairSamplePlan(
                    m=obj.sampled_pairs,
                    k=model_spec.k,
                    seed=int(rng.integers(0, 2**63 - 1)),
                )
            geom_b = geom.take(idx) if geom is not None and idx.size != n else geom
            value, d_probs = evaluate_objective(obj, probs, geom_b, plan)
            grads = backward(params, model_spec, xb, d_probs, rows=idx if table_rows else None)
            step += 1
            params, state = adam_update(params, grads, state, hyper, step)
            values.append(value)
        full = forward(params, model_spec, x, rows=None)
        row = HistoryRow(
            epoch=epoch,
            objective=float(np.mean(values)) if values else math.nan,
            nonempty=nonempty_clusters(full),
            ari=float(ari(labels, full.argmax(axis=1))) if labels is not None else math.nan,
            ms=(time.perf_counter() - t0) * 1000.0,
        )
        history.rows.append(row)
    return params, history


def with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    """Copy of ``cfg`` with a different seed (handy for repeat runs)."""
    return replace(cfg, seed=seed)
