"""Command-line driver: ``sphere-sne {gen,embed,eval,plot,bench}``.

Exit codes: 0 success, 2 invalid input, 3 numeric failure, 4 I/O error.
Seeds default to $SPHERE_SNE_SEED, then 0.
"""

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .bench import BenchConfig, format_table, run_bench
from .errors import DomainError, GenerationError, NumericError
from .evaluation import evaluate
from .optimizer import VmfSneConfig, auto_learning_rate, run
from .plot import scatter_svg
from .simgen import SimSpec, generate_dataset
from .tsne import TsneConfig, tsne_run

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

SEED_ENV = "SPHERE_SNE_SEED"


class ValidationError(DomainError):
    pass


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _seed(args):
    return default_seed() if args.seed is None else args.seed


def _float_list(text):
    return tuple(float(v) for v in text.split(","))


def _int_list(text):
    return tuple(int(v) for v in text.split(","))


def cmd_gen(args, argv):
    started = time.perf_counter()
    spec = SimSpec(d=args.dim, k=args.clusters, n_total=args.n, gen_kappa=args.kappa,
                   min_separation=args.min_separation, seed=_seed(args))
    ds = generate_dataset(spec)
    io.write_points(args.output, ds.points, ds.labels, prefix="x")
    man = io.manifest(argv, spec.to_dict(), {"seed": spec.seed}, [], [args.output])
    io.write_sidecar(args.output, man, started)


def _or(value, default):
    return default if value is None else value


def _load_labelled(path):
    points, labels = io.read_points(path)
    if points.shape[0] == 0:
        raise ValidationError(f"{path}: no data rows")
    return points, labels


def cmd_embed(args, argv):
    started = time.perf_counter()
    points, _ = _load_labelled(args.data)
    seed = _seed(args)
    if args.method == "vmf":
        norms = np.linalg.norm(points, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > 1e-6)
        if bad.size:
            shown = ", ".join(str(i + 1) for i in bad[:20])
            more = f" (and {bad.size - 20} more)" if bad.size > 20 else ""
            raise ValidationError(f"{args.data}: rows not unit-norm: {shown}{more}")
        config = VmfSneConfig(target_dim=_or(args.dim, 3), perplexity=args.perplexity,
                              embed_kappa=args.embed_kappa, iterations=args.iterations,
                              learning_rate=_or(args.learning_rate, auto_learning_rate(len(points))),
                              seed=seed)
        result = run(points, config)
    else:
        config = TsneConfig(target_dim=_or(args.dim, 2), perplexity=args.perplexity,
                            iterations=args.iterations,
                            learning_rate=_or(args.learning_rate, TsneConfig.learning_rate),
                            seed=seed)
        result = tsne_run(points, config)

    trace_path = args.trace or str(Path(args.output).with_suffix("")) + ".loss.csv"
    io.write_points(args.output, result.Y, prefix="y")
    io.write_trace(trace_path, result.loss_trace, result.initial_kl, result.final_kl)
    cfg = {"method": args.method, **config.to_dict()}
    man = io.manifest(argv, cfg, {"seed": seed}, [args.data], [args.output, trace_path])
    io.write_sidecar(args.output, man, started)


def _aligned(emb_path, data_path):
    Y, _ = _load_labelled(emb_path)
    X, labels = _load_labelled(data_path)
    if Y.shape[0] != X.shape[0]:
        raise ValidationError(f"row count mismatch: {emb_path} has {Y.shape[0]}, {data_path} has {X.shape[0]}")
    return Y, labels


def _spherical(Y, geometry):
    if geometry == "auto":
        return bool(np.max(np.abs(np.linalg.norm(Y, axis=1) - 1.0)) <= 1e-9)
    return geometry == "sphere"


def cmd_eval(args, argv):
    Y, labels = _aligned(args.embedding, args.data)
    if labels is None:
        raise ValidationError(f"{args.data}: a label column is required for evaluation")
    spherical = _spherical(Y, args.geometry)
    report = evaluate(Y, labels, spherical=spherical)
    doc = {"geometry": "sphere" if spherical else "plane", **report.to_dict()}
    outputs = [] if args.output in (None, "-") else [args.output]
    doc["manifest"] = io.manifest(argv, {"geometry": args.geometry}, {}, [args.embedding, args.data], outputs)
    io.write_json(args.output, doc)


def cmd_plot(args, argv):
    started = time.perf_counter()
    Y, labels = _aligned(args.embedding, args.data)
    svg = scatter_svg(Y, labels, title=args.title)
    with open(args.output, "w") as fh:
        fh.write(svg)
    man = io.manifest(argv, {"title": args.title}, {}, [args.embedding, args.data], [args.output])
    io.write_sidecar(args.output, man, started)


def cmd_bench(args, argv):
    cfg = BenchConfig(gen_kappas=args.kappas, clusters=args.clusters, methods=args.methods,
                      repeats=args.repeats, seed=_seed(args), d=args.dim, n_total=args.n,
                      iterations=args.iterations, jobs=args.jobs)
    if cfg.repeats < 1:
        raise ValidationError("--repeats must be >= 1")
    progress = None
    if args.progress:
        def progress(i, total):
            print(f"cell {i}/{total}", file=sys.stderr, flush=True)
    result = run_bench(cfg, progress)
    table = format_table(result["rows"], cfg)
    outputs = [p for p in (args.output, args.table) if p]
    doc = {"config": cfg.to_dict(), **result,
           "manifest": io.manifest(argv, cfg.to_dict(), {"seed": cfg.seed}, [], outputs)}
    io.write_json(args.output, doc)
    if args.table:
        with open(args.table, "w") as fh:
            fh.write(table)
    else:
        sys.stderr.write(table)


def build_parser():
    parser = argparse.ArgumentParser(prog="sphere-sne", description="Spherical neighbour embedding pipeline.",
                                     epilog="exit codes: 0 ok, 2 invalid input, 3 numeric failure, 4 I/O error")
    sub = parser.add_subparsers(dest="command", required=True)

    def seed_arg(p):
        p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")

    p = sub.add_parser("gen", help="generate clustered vMF data")
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--clusters", type=int, default=4)
    p.add_argument("--n", type=int, default=800)
    p.add_argument("--kappa", type=float, default=15.0)
    p.add_argument("--min-separation", type=float, default=0.5)
    seed_arg(p)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("embed", help="embed a dataset with vMF-SNE or t-SNE")
    p.add_argument("data")
    p.add_argument("--method", choices=("vmf", "tsne"), default="vmf")
    p.add_argument("--perplexity", type=float, default=40.0)
    p.add_argument("--embed-kappa", type=float, default=2.0)
    p.add_argument("--dim", type=int, default=None, help="default 3 for vmf, 2 for tsne")
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--learning-rate", type=float, default=None,
                   help="default N/8 for vmf, 500 for tsne")
    seed_arg(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--trace", default=None, help="loss trace CSV (default <output>.loss.csv)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("eval", help="entropy/accuracy report for an embedding")
    p.add_argument("embedding")
    p.add_argument("data")
    p.add_argument("--geometry", choices=("auto", "sphere", "plane"), default="auto")
    p.add_argument("-o", "--output", default=None, help="JSON report (default stdout)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="SVG scatter plot of an embedding")
    p.add_argument("embedding")
    p.add_argument("data")
    p.add_argument("--title", default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("bench", help="entropy/accuracy grid over kappa, clusters and method")
    p.add_argument("--kappas", type=_float_list, default=(10.0, 20.0, 30.0, 40.0))
    p.add_argument("--clusters", type=_int_list, default=(4, 16))
    p.add_argument("--methods", type=lambda s: tuple(s.split(",")), default=("tsne", "vmf"))
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--n", type=int, default=800)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    seed_arg(p)
    p.add_argument("-o", "--output", default=None, help="JSON results (default stdout)")
    p.add_argument("--table", default=None, help="aligned text table (default stderr)")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "methods", None) and not set(args.methods) <= {"vmf", "tsne"}:
        parser.error(f"--methods must be drawn from vmf,tsne, got {','.join(args.methods)}")
    try:
        args.func(args, ["sphere-sne"] + argv)
    except (DomainError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
