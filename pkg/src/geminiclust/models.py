"""Trainable conditional distributions over clusters.

Three shallow model families share a softmax head:

- ``table``     one free logit row per sample (the most flexible model,
                no tie to the input features beyond the row index);
- ``logistic``  affine map from features to logits;
- ``mlp``       ReLU stack ending in an affine logit layer.

``forward`` returns a row-stochastic matrix; ``backward`` converts a
gradient in probability space into parameter gradients by recomputing
the activations (all models are small enough that caching would not pay
for itself).  Parameters live in a name->array dict and serialise to a
JSON checkpoint as a flat list plus shape metadata.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import as_data_matrix
from .errors import DimensionMismatch

MODEL_KINDS = ("table", "logistic", "mlp")


@dataclass(frozen=True)
class ModelSpec:
    """Architecture and seed of a conditional cluster model."""

    kind: str
    k: int
    n_rows: int = 0  # table only: number of samples covered
    in_dim: int = 0  # logistic / mlp
    hidden: tuple[int, ...] = field(default=())
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.k < 2:
            raise ValueError("need at least 2 clusters")
        if self.kind == "table" and self.n_rows < 1:
            raise ValueError("table model needs n_rows >= 1")
        if self.kind in ("logistic", "mlp") and self.in_dim < 1:
            raise ValueError(f"{self.kind} model needs in_dim >= 1")
        if self.kind == "mlp":
            if not self.hidden or any(h < 1 for h in self.hidden):
                raise ValueError("mlp hidden sizes must all be >= 1")
            object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))

    def layer_dims(self) -> list[tuple[int, int]]:
        if self.kind == "logistic":
            return [(self.in_dim, self.k)]
        if self.kind == "mlp":
            dims = [self.in_dim, *self.hidden, self.k]
            return list(zip(dims[:-1], dims[1:]))
        return []

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.k,
            "n_rows": self.n_rows,
            "in_dim": self.in_dim,
            "hidden": list(self.hidden),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(
            kind=d["kind"],
            k=int(d["k"]),
            n_rows=int(d.get("n_rows", 0)),
            in_dim=int(d.get("in_dim", 0)),
            hidden=tuple(d.get("hidden", ())),
            seed=int(d.get("seed", 0)),
        )


@dataclass
class ModelParams:
    """Named parameter arrays with flat (de)serialisation helpers."""

    arrays: dict[str, np.ndarray]

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self.arrays.items()})

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.arrays.values()]) if self.arrays else np.empty(0)

    def shapes(self) -> dict[str, tuple[int, ...]]:
        return {k: v.shape for k, v in self.arrays.items()}

    @classmethod
    def from_flat(cls, flat: np.ndarray, shapes: dict[str, tuple[int, ...]]) -> "ModelParams":
        arrays = {}
        offset = 0
        for name, shape in shapes.items():
            size = int(np.prod(shape))
            arrays[name] = np.asarray(flat[offset : offset + size], dtype=np.float64).reshape(shape)
            offset += size
        if offset != len(flat):
            raise DimensionMismatch("flat parameter vector does not match shapes")
        return cls(arrays)


# Tiny symmetric jitter on the table logits: exact zeros put every row at
# the uniform simplex centre, a stationary point of every objective here,
# and no gradient step would ever leave it.
TABLE_INIT_SCALE = 1e-2


def init_model(spec: ModelSpec) -> ModelParams:
    """Seeded initial parameters: near-uniform table logits, zero biases,
    fan-in-scaled uniform weights."""
    rng = np.random.default_rng(spec.seed)
    arrays: dict[str, np.ndarray] = {}
    if spec.kind == "table":
        arrays["logits"] = rng.uniform(
            -TABLE_INIT_SCALE, TABLE_INIT_SCALE, size=(spec.n_rows, spec.k)
        )
        return ModelParams(arrays)
    for layer, (fan_in, fan_out) in enumerate(spec.layer_dims()):
        bound = np.sqrt(1.0 / fan_in)
        arrays[f"w{layer}"] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        arrays[f"b{layer}"] = np.zeros(fan_out)
    return ModelParams(arrays)


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row softmax with max subtraction for stability."""
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _activations(params: ModelParams, spec: ModelSpec, x: np.ndarray, rows):
    """Logits plus hidden pre/post activations (mlp only)."""
    if spec.kind == "table":
        if rows is None:
            if x.shape[0] != spec.n_rows:
                raise DimensionMismatch(
                    f"table model covers {spec.n_rows} rows but X has {x.shape[0]}"
                )
            rows = np.arange(spec.n_rows)
        return params.arrays["logits"][rows], []
    if x.shape[1] != spec.in_dim:
        raise DimensionMismatch(f"expected {spec.in_dim} features, got {x.shape[1]}")
    if spec.kind == "logistic":
        return x @ params.arrays["w0"] + params.arrays["b0"], []
    hidden = []
    h = x
    n_layers = len(spec.layer_dims())
    for layer in range(n_layers - 1):
        pre = h @ params.arrays[f"w{layer}"] + params.arrays[f"b{layer}"]
        h = np.maximum(pre, 0.0)
        hidden.append((pre, h))
    logits = h @ params.arrays[f"w{n_layers - 1}"] + params.arrays[f"b{n_layers - 1}"]
    return logits, hidden


def forward(params: ModelParams, spec: ModelSpec, x, rows=None) -> np.ndarray:
    """Soft assignment ``p(y | x)`` for a batch.

    ``rows`` selects logit rows for the table model when ``x`` is a
    batch slice of the full dataset; other models ignore it.
    """
    x = as_data_matrix(x)
    logits, _ = _activations(params, spec, x, rows)
    return softmax_rows(logits)


def softmax_backward(probs: np.ndarray, d_probs: np.ndarray) -> np.ndarray:
    """Pull a gradient in probability space back through the row softmax."""
    inner = (probs * d_probs).sum(axis=1, keepdims=True)
    return probs * (d_probs - inner)


def backward(params: ModelParams, spec: ModelSpec, x, d_probs, rows=None) -> ModelParams:
    """Parameter gradient of a scalar whose probability-space gradient is
    ``d_probs`` (shape matching ``forward``'s output)."""
    x = as_data_matrix(x)
    d_probs = np.asarray(d_probs, dtype=np.float64)
    logits, hidden = _activations(params, spec, x, rows)
    if d_probs.shape != logits.shape:
        raise DimensionMismatch(
            f"gradient shape {d_probs.shape} does not match output {logits.shape}"
        )
    probs = softmax_rows(logits)
    d_logits = softmax_backward(probs, d_probs)
    grads = {name: np.zeros_like(arr) for name, arr in params.arrays.items()}
    if spec.kind == "table":
        if rows is None:
            rows = np.arange(spec.n_rows)
        np.add.at(grads["logits"], rows, d_logits)
        return ModelParams(grads)
    n_layers = len(spec.layer_dims())
    inputs = x if not hidden else hidden[-1][1]
    grads[f"w{n_layers - 1}"] = inputs.T @ d_logits
    grads[f"b{n_layers - 1}"] = d_logits.sum(axis=0)
    d_h = d_logits @ params.arrays[f"w{n_layers - 1}"].T
    for layer in range(n_layers - 2, -1, -1):
        pre, _ = hidden[layer]
        d_pre = d_h * (pre > 0.0)
        below = x if layer == 0 else hidden[layer - 1][1]
        grads[f"w{layer}"] = below.T @ d_pre
        grads[f"b{layer}"] = d_pre.sum(axis=0)
        if layer > 0:
            d_h = d_pre @ params.arrays[f"w{layer}"].T
    return ModelParams(grads)


def save_checkpoint(path, spec: ModelSpec, params: ModelParams) -> None:
    """Write spec + flat parameters as JSON."""
    payload = {
        "spec": spec.to_dict(),
        "shapes": {k: list(v) for k, v in params.shapes().items()},
        "params": params.flat().tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_checkpoint(path) -> tuple[ModelSpec, ModelParams]:
    """Read a checkpoint written by :func:`save_checkpoint`."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    spec = ModelSpec.from_dict(payload["spec"])
    shapes = {k: tuple(v) for k, v in payload["shapes"].items()}
    params = ModelParams.from_flat(np.asarray(payload["params"], dtype=np.float64), shapes)
    return spec, params
