"""Command-line front end.

Subcommands: gen, train, eval, bias, boundary-demo, bench, repro.
Tabular artifacts are CSV, configs and metrics JSON, all UTF-8.  Exit
codes: 0 success, 2 configuration error, 3 numeric failure (NaN in a
result), 4 I/O error; failures print a one-line JSON object on stderr.
The environment variable ``GEMINI_SEED`` overrides every seed for smoke
tests; ``GEMINI_NO_NUMBA=1`` selects the plain-Python kernels.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import experiments, models
from .errors import ConfigError, GeminiError
from .eval import ari, renyi_entropy
from .geometry import load_geometry_csv
from .core import nonempty_clusters
from .synthdata import (
    GstmConfig,
    gen_collinear_gaussians,
    gen_gstm,
    gen_moons,
    read_dataset_csv,
    write_dataset_csv,
)
from .train import TrainConfig, TrainHistory, train

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _seed_override(seed: int) -> int:
    env = os.environ.get("GEMINI_SEED")
    return int(env) if env else seed


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": {"kind": kind, "message": message}}) + "\n")
    return code


# ----------------------------------------------------------------------
# gen
# ----------------------------------------------------------------------


def _cmd_gen(args) -> int:
    seed = _seed_override(args.seed)
    if args.kind == "moons":
        x, y = gen_moons(args.n, radius=args.radius, noise=args.noise, offset=args.offset, seed=seed)
    elif args.kind == "gstm":
        x, y = gen_gstm(GstmConfig(alpha=args.alpha, sigma=args.sigma, rho=args.rho, n_per=args.n_per, seed=seed))
    elif args.kind == "gauss3":
        x, y = experiments.gauss3_dataset(seed=seed, n_per=args.n_per, sigma=args.sigma)
    elif args.kind == "collinear3":
        x, y = gen_collinear_gaussians(n_per=args.n_per, seed=seed)
    else:
        raise ConfigError(f"unknown dataset kind {args.kind!r}")
    write_dataset_csv(args.out, x, y)
    return EXIT_OK


# ----------------------------------------------------------------------
# train / eval
# ----------------------------------------------------------------------


def _load_recipe(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _recipe_dataset(recipe: dict):
    ds = recipe.get("dataset")
    if not ds:
        raise ConfigError("recipe needs a 'dataset' entry")
    if "path" in ds:
        return read_dataset_csv(ds["path"])
    raise ConfigError("dataset entry must point at a CSV via 'path'")


def _cmd_train(args) -> int:
    recipe = _load_recipe(args.recipe)
    x, labels = _recipe_dataset(recipe)
    model_spec = models.ModelSpec.from_dict(recipe["model"])
    cfg = TrainConfig.from_dict(recipe["train"])
    cfg = TrainConfig.from_dict({**recipe["train"], "seed": _seed_override(cfg.seed)})
    geometry_matrix = None
    geo = recipe["train"].get("geometry", {})
    if geo.get("kind") == "precomputed":
        geometry_matrix = load_geometry_csv(geo["path"], geo.get("tag", "distance"))
        cfg = TrainConfig.from_dict({**recipe["train"], "geometry": None, "seed": cfg.seed})
    use_labels = labels if recipe.get("use_labels", True) else None
    params, history = train(model_spec, x, cfg, labels=use_labels, geometry_matrix=geometry_matrix)
    if not np.all(np.isfinite(history.objectives())):
        return _fail("numeric", "objective became NaN during training", EXIT_NUMERIC)
    outputs = recipe.get("outputs", {})
    ck = outputs.get("checkpoint", "checkpoint.json")
    hist_path = outputs.get("history", "history.csv")
    models.save_checkpoint(ck, model_spec, params)
    history.write_csv(hist_path)
    return EXIT_OK


def _cmd_eval(args) -> int:
    spec, params = models.load_checkpoint(args.checkpoint)
    x, labels = read_dataset_csv(args.data)
    probs = models.forward(params, spec, x)
    metrics = {
        "nonempty": nonempty_clusters(probs),
        "ari": ari(labels, probs.argmax(axis=1)) if labels.size else math.nan,
        "n": int(x.shape[0]),
        "k": spec.k,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2)
    if args.entropy_out:
        rows = [
            (i, f"{renyi_entropy(probs[i], args.renyi_order):.12g}")
            for i in range(probs.shape[0])
        ]
        _write_rows(args.entropy_out, ["sample", "renyi_entropy"], rows)
    return EXIT_OK


# ----------------------------------------------------------------------
# bias / boundary-demo / bench
# ----------------------------------------------------------------------


def _cmd_bias(args) -> int:
    batches = [int(b) for b in args.batches.split(",")]
    objectives = args.objectives.split(",") if args.objectives else experiments.BIAS_OBJECTIVES
    rows = experiments.bias_study(
        n=args.n,
        k=args.clusters,
        trials=args.trials,
        batch_sizes=batches,
        seed=_seed_override(args.seed),
        objectives=objectives,
    )
    _write_rows(
        args.out,
        ["objective", "batch", "mse", "se"],
        [(name, batch, f"{mse:.12g}", f"{se:.12g}") for name, batch, mse, se in rows],
    )
    return EXIT_OK


def _cmd_boundary_demo(args) -> int:
    betas = [float(b) for b in args.betas.split(",")] if args.betas else None
    rows = experiments.boundary_sweep(eps=args.eps, betas=betas)
    _write_rows(
        args.out,
        ["beta", "i_a", "i_b", "delta_i", "limit"],
        [
            (r["beta"], f"{r['i_a']:.12g}", f"{r['i_b']:.12g}", f"{r['delta_i']:.12g}", f"{r['limit']:.12g}")
            for r in rows
        ],
    )
    return EXIT_OK


def _parse_k_range(text: str):
    # "2..20" or "2..20:3" or "2,5,20"
    if ".." in text:
        head, _, step = text.partition(":")
        lo, hi = head.split("..")
        return list(range(int(lo), int(hi) + 1, int(step) if step else 1))
    return [int(v) for v in text.split(",")]


def _cmd_bench(args) -> int:
    seed = _seed_override(args.seed)
    if args.what == "impl":
        rows = bench_mod.bench_impl(sizes=_parse_k_range(args.sizes), seed=seed, repeats=args.repeats)
        _write_rows(args.out, ["kernel", "n", "impl", "ms"], [(k, n, i, f"{ms:.6g}") for k, n, i, ms in rows])
        return EXIT_OK
    rows = bench_mod.bench_objectives(
        n=args.n, k_values=_parse_k_range(args.k), seed=seed, repeats=args.repeats
    )
    _write_rows(args.out, ["objective", "k", "ms"], [(o, k, f"{ms:.6g}") for o, k, ms in rows])
    return EXIT_OK


# ----------------------------------------------------------------------
# repro
# ----------------------------------------------------------------------


def _cmd_repro(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = _seed_override(0)
    figure = args.figure
    if figure == "fig2":
        rows = experiments.collinear_contrast(seed=seed)
        path = out_dir / "fig2_collinear_contrast.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["record", "cluster", "value", "nonempty", "ari", "objective"])
            for r in rows:
                writer.writerow(
                    [
                        r.get("record"),
                        r.get("cluster", ""),
                        f"{r['value']:.12g}" if "value" in r else "",
                        r.get("nonempty", ""),
                        f"{r['ari']:.6g}" if "ari" in r else "",
                        f"{r['objective']:.6g}" if "objective" in r else "",
                    ]
                )
    elif figure == "fig3":
        return _cmd_bias(
            argparse.Namespace(
                n=1000,
                clusters=10,
                trials=50,
                batches="10,50,100,200,500,1000",
                seed=seed,
                objectives=None,
                out=str(out_dir / "fig3_bias.csv"),
            )
        )
    elif figure == "fig4":
        results = experiments.table_contrast(model_seed=seed if seed else 0)
        _write_rows(
            out_dir / "fig4_table_contrast.csv",
            ["objective", "ari", "nonempty", "final_objective"],
            [
                (name, f"{r['ari']:.6g}", r["nonempty"], f"{r['objective']:.6g}")
                for name, r in results.items()
            ],
        )
    elif figure == "fig7":
        out = experiments.moons_experiment()
        _write_rows(
            out_dir / "fig7_moons.csv",
            ["run", "ari", "nonempty"],
            [(name, f"{r['ari']:.6g}", r["nonempty"]) for name, r in out.items()],
        )
    elif figure == "fig9":
        return _cmd_boundary_demo(
            argparse.Namespace(eps=1e-9, betas=None, out=str(out_dir / "fig9_boundary.csv"))
        )
    else:
        raise ConfigError(f"unknown figure {figure!r} (choose fig2, fig3, fig4, fig7, fig9)")
    return EXIT_OK


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geminiclust", description=__doc__)
    parser.add_argument("--threads", type=int, default=None, help="cap numba threads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", required=True, choices=["moons", "gstm", "gauss3", "collinear3"])
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--n-per", type=int, default=100, dest="n_per")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.06)
    p.add_argument("--offset", type=float, default=None)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="train a model from a JSON recipe")
    p.add_argument("--recipe", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset CSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--entropy-out", default=None, dest="entropy_out")
    p.add_argument("--renyi-order", type=float, default=2.0, dest="renyi_order")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bias", help="batch-size bias table for the estimators")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--clusters", type=int, default=10)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--batches", default="10,50,100,200,500,1000")
    p.add_argument("--objectives", default=None, help="comma-separated objective names")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bias)

    p = sub.add_parser("boundary-demo", help="closed-form two-boundary MI sweep")
    p.add_argument("--eps", type=float, default=1e-9)
    p.add_argument("--betas", default=None, help="comma-separated beta values")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_boundary_demo)

    p = sub.add_parser("bench", help="wall-time benchmarks")
    p.add_argument("--what", choices=["objectives", "impl"], default="objectives")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--k", default="2..20:3")
    p.add_argument("--sizes", default="50,100,200", help="impl mode: problem sizes")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("repro", help="emit desk-scale data for a named figure")
    p.add_argument("figure", choices=["fig2", "fig3", "fig4", "fig7", "fig9"])
    p.add_argument("--out-dir", default=".", dest="out_dir")
    p.set_defaults(func=_cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads:
        try:
            import numba

            numba.set_num_threads(max(1, args.threads))
        except Exception:
            pass
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except GeminiError as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("io", str(exc), EXIT_IO)
    except FloatingPointError as exc:
        return _fail("numeric", str(exc), EXIT_NUMERIC)


if __name__ == "__main__":
    sys.exit(main())
