"""``dmc`` command-line interface.

Exit codes: 0 success, 2 usage or validation error, 3 numerical failure,
4 I/O or parse error.
"""
import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import kernel_pca_embed, pca_embed
from .clustering import (
    HIERARCHY_MODES, LINKAGES, agglomerative, cut_dendrogram, hierarchy_distances, kmeans,
    spectral_threshold,
)
from .diffusion import diffusion_embed, epsilon_scan, gaussian_affinity, select_epsilon
from .exceptions import DMCError, NumericalFailureError, ParseError, ValidationError
from .io import load_matrix, matrix_to_csv, save_matrix
from .linalg import pairwise_sq_dists
from .pipeline import RunConfig, StageError, _scan_csv, run_pipeline
from .preprocess import correlation_matrix, signed_log_normalize
from .svg import emit_svg
from .synth import PRESETS, SynthSpec, make_dense_sparse, preset

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _epsilon_arg(text):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"epsilon must be 'auto' or a number, got {text!r}") from None


def _dims_arg(text):
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be 'auto' or an integer, got {text!r}") from None


def _add_input(p):
    p.add_argument("--input", "-i", required=True, help="CSV or DMC1 binary matrix, one sample per row")
    p.add_argument("--header", action="store_true", help="skip the first CSV line")
    p.add_argument("--no-normalize", dest="normalize", action="store_false",
                   help="skip the signed-log normalization")
    p.add_argument("--workers", type=int, default=1, help="threads for distance computation")


def build_parser():
    parser = argparse.ArgumentParser(prog="dmc", description="Diffusion-map clustering for data with few samples and many features.")
    parser.add_argument("--version", action="version", version=f"dmc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic dense/sparse dataset")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--n-dense", type=int)
    p.add_argument("--n-sparse", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--dense-spread", type=float)
    p.add_argument("--sparse-spread", type=float)
    p.add_argument("--separation", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o", required=True, help="output file (.csv for CSV, otherwise DMC1)")
    p.add_argument("--truth", help="also write the planted labels as JSON")

    p = sub.add_parser("scan", help="bandwidth scan and selection")
    _add_input(p)
    p.add_argument("--out", "-o", required=True, help="output directory")

    p = sub.add_parser("embed", help="diffusion-map embedding")
    _add_input(p)
    p.add_argument("--epsilon", type=_epsilon_arg, default="auto")
    p.add_argument("--dims", type=_dims_arg, default="auto")
    p.add_argument("--out", "-o", required=True, help="output directory")

    p = sub.add_parser("cluster", help="cluster with one method")
    _add_input(p)
    p.add_argument("--method", choices=("diffusion", "kmeans", "hierarchical"), default="diffusion")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--epsilon", type=_epsilon_arg, default="auto")
    p.add_argument("--linkage", choices=LINKAGES, default="average")
    p.add_argument("--hierarchy-input", choices=HIERARCHY_MODES, default="raw")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o", help="write labels JSON here instead of stdout")

    p = sub.add_parser("baseline", help="PCA or Gaussian kernel PCA embedding")
    _add_input(p)
    p.add_argument("--method", choices=("pca", "kpca"), default="pca")
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--epsilon", type=_epsilon_arg, default="auto",
                   help="kernel width for kpca; 'auto' uses the diffusion-selected value")
    p.add_argument("--out", "-o", required=True, help="output CSV")

    p = sub.add_parser("corr", help="absolute correlation matrices")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--labels", help="labels JSON (as written by 'cluster' or 'run') for per-cluster matrices")
    p.add_argument("--method", default="diffusion", help="which labels entry to use")
    p.add_argument("--out", "-o", required=True, help="output directory")

    p = sub.add_parser("run", help="full pipeline with comparisons and figures")
    _add_input(p)
    p.add_argument("--epsilon", type=_epsilon_arg, default="auto")
    p.add_argument("--dims", type=_dims_arg, default="auto")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--linkage", choices=LINKAGES, default="average")
    p.add_argument("--hierarchy-input", choices=HIERARCHY_MODES, default="raw")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o", default="results", help="output directory")
    return parser


def _require_file(path):
    if not Path(path).is_file():
        raise ValidationError(f"input file not found: {path}")


def _prepared(args):
    _require_file(args.input)
    X = load_matrix(args.input, header=args.header)
    return signed_log_normalize(X) if getattr(args, "normalize", True) else X


def _resolve_epsilon(sq, epsilon):
    if epsilon == "auto":
        return select_epsilon(epsilon_scan(sq))
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    return float(epsilon)


def _outdir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args):
    if args.preset:
        spec = preset(args.preset, seed=args.seed)
    else:
        spec = SynthSpec(seed=args.seed)
    overrides = {k: getattr(args, k) for k in
                 ("n_dense", "n_sparse", "p", "dense_spread", "sparse_spread", "separation")
                 if getattr(args, k) is not None}
    if overrides:
        spec = replace(spec, **overrides)
    X, truth = make_dense_sparse(spec)
    save_matrix(args.out, X)
    if args.truth:
        Path(args.truth).write_text(json.dumps({"truth": [int(v) for v in truth.labels]}) + "\n")
    print(f"wrote {spec.n}x{spec.p} matrix to {args.out}")


def cmd_scan(args):
    X = _prepared(args)
    scan = epsilon_scan(pairwise_sq_dists(X, n_jobs=args.workers))
    eps = select_epsilon(scan)
    out = _outdir(args.out)
    (out / "epsilon_scan.csv").write_text(_scan_csv(scan), newline="\n")
    emit_svg("epsilon", {"grid": scan.grid, "weight_sums": scan.weight_sums, "selected": eps},
             out / "epsilon.svg")
    print(f"selected epsilon: {eps!r}")


def cmd_embed(args):
    X = _prepared(args)
    sq = pairwise_sq_dists(X, n_jobs=args.workers)
    eps = _resolve_epsilon(sq, args.epsilon)
    emb = diffusion_embed(gaussian_affinity(sq, eps), args.dims)
    out = _outdir(args.out)
    (out / "embedding.csv").write_text(
        matrix_to_csv(emb.coords, header=[f"psi{k + 1}" for k in range(emb.d)]), newline="\n")
    labels = spectral_threshold(emb).labels
    plot = emb if emb.d >= 2 or X.shape[0] < 3 else diffusion_embed(gaussian_affinity(sq, eps), 2)
    emit_svg("embedding", {"coords": plot.coords, "labels": labels}, out / "embedding.svg")
    print(f"epsilon {eps!r}, dims {emb.d}, eigenvalues {[round(float(v), 6) for v in emb.eigenvalues]}")


def cmd_cluster(args):
    X = _prepared(args)
    if args.method == "diffusion":
        sq = pairwise_sq_dists(X, n_jobs=args.workers)
        eps = _resolve_epsilon(sq, args.epsilon)
        emb = diffusion_embed(gaussian_affinity(sq, eps), "auto")
        part = spectral_threshold(emb) if args.k == 2 else kmeans(emb.coords, args.k, seed=args.seed)
    elif args.method == "kmeans":
        part = kmeans(X, args.k, seed=args.seed, n_jobs=args.workers)
    else:
        tree = agglomerative(hierarchy_distances(X, args.hierarchy_input, args.workers), args.linkage)
        part = cut_dendrogram(tree, args.k)
    text = json.dumps({args.method: [int(v) for v in part.labels]}) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_baseline(args):
    X = _prepared(args)
    if args.method == "pca":
        emb = pca_embed(X, args.dims)
    else:
        sq = pairwise_sq_dists(X, n_jobs=args.workers)
        eps = _resolve_epsilon(sq, args.epsilon)
        emb = kernel_pca_embed(X, eps, args.dims, dists=sq)
    Path(args.out).write_text(matrix_to_csv(emb.coords), newline="\n")
    print("explained: " + ", ".join(f"{v:.4f}" for v in emb.explained))


def cmd_corr(args):
    _require_file(args.input)
    X = load_matrix(args.input, header=args.header)
    C = correlation_matrix(X)
    out = _outdir(args.out)
    (out / "corr_all.csv").write_text(matrix_to_csv(C), newline="\n")
    panels = [("all samples", C, list(range(1, X.shape[0] + 1)))]
    if args.labels:
        _require_file(args.labels)
        try:
            labels = np.asarray(json.loads(Path(args.labels).read_text())[args.method])
        except (KeyError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read labels '{args.method}' from {args.labels}: {exc}") from None
        if labels.size != X.shape[0]:
            raise ValidationError(f"labels cover {labels.size} samples, matrix has {X.shape[0]}")
        for c in sorted(set(labels.tolist())):
            idx = np.flatnonzero(labels == c)
            sub = C[np.ix_(idx, idx)]
            (out / f"corr_cluster{c}.csv").write_text(matrix_to_csv(sub), newline="\n")
            panels.append((f"cluster {c}", sub, [int(i) + 1 for i in idx]))
    emit_svg("corr", {"panels": panels[:4]}, out / "corr.svg")


def cmd_run(args):
    cfg = RunConfig(
        input=args.input, out=args.out, normalize=args.normalize, epsilon=args.epsilon,
        dims=args.dims, k=args.k, linkage=args.linkage, hierarchy_input=args.hierarchy_input,
        seed=args.seed, header=args.header, workers=args.workers,
    )
    bundle = run_pipeline(cfg)
    rep = bundle.report
    print(f"epsilon {rep['epsilon']['value']!r}, dims {rep['dims']}, "
          f"methods identical: {rep['all_methods_identical']}")
    print(f"wrote {len(bundle.files)} files to {cfg.out}")


COMMANDS = {
    "synth": cmd_synth, "scan": cmd_scan, "embed": cmd_embed, "cluster": cmd_cluster,
    "baseline": cmd_baseline, "corr": cmd_corr, "run": cmd_run,
}


def exit_code(exc):
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, ValidationError):
        return EXIT_USAGE
    if isinstance(exc, NumericalFailureError):
        return EXIT_NUMERICAL
    if isinstance(exc, (ParseError, OSError)):
        return EXIT_IO
    return EXIT_USAGE


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (DMCError, OSError) as exc:
        print(f"dmc {args.command}: error: {exc}", file=sys.stderr)
        return exit_code(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
