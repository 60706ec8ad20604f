"""Entropy/accuracy grid: generation kappa x cluster count x method, over seeds.

Both methods see the same dataset in a given (clusters, kappa, repeat) cell,
so per-seed comparisons are paired. Cell seeds derive from the master seed
and the cell's grid position only, which makes results independent of the
number of worker processes.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
import math

import numpy as np

from ._random import STREAM_BENCH, derive_seed
from .evaluation import evaluate
from .optimizer import VmfSneConfig, run
from .simgen import SimSpec, generate_dataset
from .tsne import TsneConfig, tsne_run

METHODS = ("tsne", "vmf")
METHOD_NAMES = {"tsne": "t-SNE", "vmf": "vMF-SNE"}


@dataclass
class BenchConfig:
    gen_kappas: tuple = (10.0, 20.0, 30.0, 40.0)
    clusters: tuple = (4, 16)
    methods: tuple = METHODS
    repeats: int = 5
    seed: int = 0
    d: int = 50
    n_total: int = 800
    perplexity: float = 40.0
    embed_kappa: float = 2.0
    embed_dim: int = 3
    vmf_learning_rate: float | None = None
    tsne_learning_rate: float = 500.0
    iterations: int = 1000
    jobs: int = 1

    def to_dict(self):
        d = asdict(self)
        d.pop("jobs")
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}


@dataclass
class Cell:
    clusters: int
    gen_kappa: float
    repeat: int
    seed: int
    methods: tuple
    results: dict = field(default_factory=dict)


def make_cells(cfg):
    cells = []
    for ci, k in enumerate(cfg.clusters):
        for ki, kappa in enumerate(cfg.gen_kappas):
            for r in range(cfg.repeats):
                seed = derive_seed(cfg.seed, STREAM_BENCH, ci, ki, r)
                cells.append(Cell(int(k), float(kappa), r, seed, tuple(cfg.methods)))
    return cells


def run_method(method, dataset, cfg, seed):
    if method == "vmf":
        conf = VmfSneConfig(
            target_dim=cfg.embed_dim, perplexity=cfg.perplexity, embed_kappa=cfg.embed_kappa,
            iterations=cfg.iterations, learning_rate=cfg.vmf_learning_rate, seed=seed)
        return run(dataset, conf)
    if method == "tsne":
        conf = TsneConfig(perplexity=cfg.perplexity, iterations=cfg.iterations,
                          learning_rate=cfg.tsne_learning_rate, seed=seed)
        return tsne_run(dataset, conf)
    raise ValueError(f"unknown method {method!r}")


def run_cell(cell, cfg):
    spec = SimSpec(d=cfg.d, k=cell.clusters, n_total=cfg.n_total, gen_kappa=cell.gen_kappa, seed=cell.seed)
    ds = generate_dataset(spec)
    out = {}
    for method in cell.methods:
        res = run_method(method, ds, cfg, cell.seed)
        rep = evaluate(res, ds.labels)
        out[method] = {
            "accuracy": rep.accuracy,
            "mean_entropy": rep.mean_entropy,
            "mean_entropy_total": rep.mean_entropy_total,
            "initial_kl": res.initial_kl,
            "final_kl": res.final_kl,
            "trace_finite": bool(np.all(np.isfinite(res.loss_trace)) and math.isfinite(res.final_kl)),
            "max_norm_error": res.max_norm_error,
        }
    return out


def _run_cell_star(args):
    return run_cell(*args)


def run_bench(cfg, progress=None):
    """Run every cell; returns ``{"cells": [...], "rows": [...]}``."""
    cells = make_cells(cfg)
    jobs = [(c, cfg) for c in cells]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_cell_star, jobs))
    else:
        results = []
        for i, job in enumerate(jobs):
            results.append(_run_cell_star(job))
            if progress:
                progress(i + 1, len(jobs))
    for c, r in zip(cells, results):
        c.results = r
    return {"cells": [_cell_dict(c) for c in cells], "rows": summarize(cells, cfg)}


def _cell_dict(c):
    return {"clusters": c.clusters, "gen_kappa": c.gen_kappa, "repeat": c.repeat,
            "seed": c.seed, "results": c.results}


def summarize(cells, cfg):
    rows = []
    for k in cfg.clusters:
        for kappa in cfg.gen_kappas:
            for method in cfg.methods:
                rs = [c.results[method] for c in cells if c.clusters == k and c.gen_kappa == kappa]
                acc = np.array([r["accuracy"] for r in rs])
                rows.append({
                    "clusters": int(k),
                    "gen_kappa": float(kappa),
                    "method": method,
                    "n_seeds": len(rs),
                    "accuracy_mean": float(acc.mean()),
                    "accuracy_median": float(np.median(acc)),
                    "entropy_mean": float(np.mean([r["mean_entropy"] for r in rs])),
                    "entropy_total_mean": float(np.mean([r["mean_entropy_total"] for r in rs])),
                    "final_below_initial": all(r["final_kl"] < r["initial_kl"] for r in rs),
                })
    return rows


def format_table(rows, cfg):
    """Aligned text: one block per cluster count, entropies then accuracies."""
    lines = []
    methods = list(cfg.methods)
    names = [METHOD_NAMES.get(m, m) for m in methods]
    for k in cfg.clusters:
        lines.append(f"{k} clusters")
        head = ["kappa"] + [f"H {n}" for n in names] + [f"H_tot {n}" for n in names] + [f"Acc {n}" for n in names]
        lines.append("  ".join(f"{h:>15}" for h in head))
        for kappa in cfg.gen_kappas:
            by = {r["method"]: r for r in rows if r["clusters"] == k and r["gen_kappa"] == kappa}
            cells = [f"{kappa:g}"]
            cells += [f"{by[m]['entropy_mean']:.4f}" for m in methods]
            cells += [f"{by[m]['entropy_total_mean']:.4f}" for m in methods]
            cells += [f"{100 * by[m]['accuracy_mean']:.2f}%" for m in methods]
            lines.append("  ".join(f"{c:>15}" for c in cells))
        lines.append("")
    return "\n".join(lines)
