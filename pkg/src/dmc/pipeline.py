"""End-to-end run: normalize, embed, cluster, compare, write artifacts."""
import json
import platform
import shutil
import tempfile
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import sklearn

from . import __version__
from .baselines import kernel_pca_embed, pca_embed
from .clustering import (
    HIERARCHY_MODES, LINKAGES, agglomerative, cut_dendrogram, hierarchy_distances,
    kmeans, partitions_equal, spectral_threshold,
)
from .diffusion import (
    DEFAULT_DECADES, DEFAULT_POINTS_PER_DECADE, choose_dim, diffusion_embed, epsilon_scan,
    gaussian_affinity, select_epsilon,
)
from .exceptions import DMCError, DegenerateInputError, ValidationError
from .io import format_float, load_matrix, matrix_to_csv
from .linalg import pairwise_sq_dists
from .preprocess import correlation_matrix, signed_log_normalize
from .svg import emit_svg
from .validation import check_count, check_positive

METHODS = ("diffusion", "kmeans", "hierarchical")


@dataclass
class RunConfig:
    input: str
    out: str = "results"
    normalize: bool = True
    epsilon: object = "auto"
    dims: object = "auto"
    k: int = 2
    linkage: str = "average"
    hierarchy_input: str = "raw"
    seed: int = 0
    header: bool = False
    workers: int = 1

    def validate(self):
        path = Path(self.input)
        if not path.is_file():
            raise ValidationError(f"input file not found: {self.input}")
        if self.epsilon != "auto":
            self.epsilon = check_positive(self.epsilon, "epsilon")
        if self.dims != "auto":
            self.dims = check_count(self.dims, "dims")
        self.k = check_count(self.k, "k")
        if self.linkage not in LINKAGES:
            raise ValidationError(f"linkage must be one of {LINKAGES}")
        if self.hierarchy_input not in HIERARCHY_MODES:
            raise ValidationError(f"hierarchy input must be one of {HIERARCHY_MODES}")
        self.workers = check_count(self.workers, "workers")
        out = Path(self.out)
        if out.exists() and not out.is_dir():
            raise ValidationError(f"output path exists and is not a directory: {self.out}")
        return self

    def echo(self):
        """Configuration as recorded in the report (worker count lives under ``runtime``)."""
        d = asdict(self)
        d.pop("workers")
        d.pop("out")
        return d


class StageError(DMCError):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class ResultBundle:
    X: np.ndarray
    coords: np.ndarray
    spectrum: np.ndarray
    epsilon: float
    scan: object
    partitions: dict
    dendrogram: object
    embeddings: dict
    correlations: dict
    report: dict
    files: list = field(default_factory=list)


class _Stages:
    def __init__(self):
        self.timings = {}

    @contextmanager
    def __call__(self, name):
        start = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except (DMCError, OSError, ValueError, ArithmeticError) as exc:
            raise StageError(name, exc) from exc
        finally:
            self.timings[name] = round(time.perf_counter() - start, 6)


def _mean_offdiag(C):
    m = C.shape[0]
    if m < 2:
        return None
    return float(C[np.triu_indices(m, 1)].mean())


def canonical_report(report):
    """Copy of ``report`` without run-dependent fields, serialized canonically."""
    stripped = {k: v for k, v in report.items() if k != "runtime"}
    return json.dumps(stripped, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def compute(cfg):
    """Run every stage in memory and return a :class:`ResultBundle` (nothing written)."""
    stage = _Stages()
    with stage("load"):
        raw = load_matrix(cfg.input, header=cfg.header)
    n = raw.shape[0]
    with stage("normalize"):
        X = signed_log_normalize(raw) if cfg.normalize else raw
    with stage("distances"):
        sq = pairwise_sq_dists(X, n_jobs=cfg.workers)
    with stage("epsilon"):
        scan = None
        try:
            scan = epsilon_scan(sq, DEFAULT_DECADES, DEFAULT_POINTS_PER_DECADE)
        except DegenerateInputError:
            if cfg.epsilon == "auto":
                raise
        if cfg.epsilon == "auto":
            eps = select_epsilon(scan)
        else:
            eps = float(cfg.epsilon)
    with stage("embed"):
        graph = gaussian_affinity(sq, eps)
        if cfg.dims != "auto" and cfg.dims > n - 1:
            raise ValidationError(f"dims must be at most n - 1 = {n - 1}")
        full = diffusion_embed(graph, n - 1)
        d = choose_dim(full.full_spectrum) if cfg.dims == "auto" else cfg.dims
        coords = np.array(full.coords[:, :d])
        plot_coords = np.array(full.coords[:, :min(2, n - 1)])
    partitions = {}
    with stage("cluster"):
        if cfg.k == 2:
            partitions["diffusion"] = spectral_threshold(coords)
        else:
            partitions["diffusion"] = kmeans(coords, cfg.k, seed=cfg.seed, n_jobs=cfg.workers)
        partitions["kmeans"] = kmeans(X, cfg.k, seed=cfg.seed, n_jobs=cfg.workers)
        if cfg.hierarchy_input == "raw":
            hdist = np.sqrt(sq)
        else:
            hdist = hierarchy_distances(X, "correlation")
        tree = agglomerative(hdist, cfg.linkage)
        partitions["hierarchical"] = cut_dendrogram(tree, cfg.k)
    with stage("baselines"):
        dplot = min(2, n - 1)
        embeddings = {
            "diffusion map": plot_coords,
            "PCA": pca_embed(X, min(2, X.shape[1])).coords,
            "kernel PCA": kernel_pca_embed(X, eps, dplot, dists=sq).coords,
        }
    with stage("correlation"):
        C = correlation_matrix(raw)
        ref = partitions["diffusion"]
        correlations = {"all": C}
        for c in range(ref.k):
            idx = ref.members(c)
            correlations[f"cluster{c}"] = C[np.ix_(idx, idx)]

    agreement = {}
    for i, a in enumerate(METHODS):
        for b in METHODS[i + 1:]:
            agreement[f"{a}~{b}"] = partitions_equal(partitions[a], partitions[b])
    within = {f"cluster{c}": _mean_offdiag(correlations[f"cluster{c}"]) for c in range(ref.k)}
    across = None
    if ref.k == 2:
        across = float(C[np.ix_(ref.members(0), ref.members(1))].mean())
    report = {
        "tool": "dmc",
        "version": __version__,
        "config": cfg.echo(),
        "n_samples": int(n),
        "n_features": int(raw.shape[1]),
        "epsilon": {
            "value": eps,
            "mode": "auto" if cfg.epsilon == "auto" else "explicit",
            "grid_size": None if scan is None else int(scan.grid.size),
        },
        "dims": int(d),
        "spectrum": [float(v) for v in full.full_spectrum],
        "cluster_sizes": {m: [int(s) for s in partitions[m].sizes()] for m in METHODS},
        "agreement": agreement,
        "all_methods_identical": all(agreement.values()),
        "mean_abs_correlation": {"within": within, "across": across},
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scikit-learn": sklearn.__version__,
        },
        "runtime": {"workers": cfg.workers, "timings": stage.timings},
    }
    return ResultBundle(raw, coords, full.full_spectrum, eps, scan, partitions, tree, embeddings,
                        correlations, report)


def _scan_csv(scan):
    lines = ["epsilon,weight_sum,slope"]
    for i, (e, s) in enumerate(zip(scan.grid, scan.weight_sums)):
        slope = format_float(scan.slope_curve[i - 1]) if 0 < i < scan.grid.size - 1 else ""
        lines.append(f"{format_float(e)},{format_float(s)},{slope}")
    return "\n".join(lines) + "\n"


def write_bundle(bundle, out_dir):
    """Write all artifacts of ``bundle`` to ``out_dir`` and return the file names."""
    out_dir = Path(out_dir)
    files = {}
    d = bundle.coords.shape[1]
    files["embedding.csv"] = matrix_to_csv(bundle.coords, header=[f"psi{k + 1}" for k in range(d)])
    labels = {m: [int(v) for v in bundle.partitions[m].labels] for m in METHODS}
    files["labels.json"] = json.dumps(labels, indent=2) + "\n"
    if bundle.scan is not None:
        files["epsilon_scan.csv"] = _scan_csv(bundle.scan)
    for name, C in bundle.correlations.items():
        files[f"corr_{name}.csv"] = matrix_to_csv(C)
    report = dict(bundle.report)
    files["report.json"] = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    diff_labels = bundle.partitions["diffusion"].labels
    plot = bundle.embeddings["diffusion map"]
    files["embedding.svg"] = emit_svg("embedding", {"coords": plot, "labels": diff_labels})
    if bundle.scan is not None:
        files["epsilon.svg"] = emit_svg("epsilon", {
            "grid": bundle.scan.grid, "weight_sums": bundle.scan.weight_sums, "selected": bundle.epsilon})
    files["dendrogram.svg"] = emit_svg("dendrogram", {"tree": bundle.dendrogram})
    ref = bundle.partitions["diffusion"]
    panels = [("all samples", bundle.correlations["all"], list(range(1, ref.n + 1)))]
    if ref.k <= 3:
        for c in range(ref.k):
            panels.append((f"cluster {c}", bundle.correlations[f"cluster{c}"],
                           [int(i) + 1 for i in ref.members(c)]))
    files["corr.svg"] = emit_svg("corr", {"panels": panels})
    files["comparison.svg"] = emit_svg("comparison", {"embeddings": bundle.embeddings,
                                                      "labels": diff_labels})
    for name, text in files.items():
        (out_dir / name).write_text(text, encoding="utf-8", newline="\n")
    return sorted(files)


def run_pipeline(cfg):
    """Full run. Artifacts appear in ``cfg.out`` only if every stage succeeds."""
    cfg.validate()
    bundle = compute(cfg)
    out = Path(cfg.out)
    parent = out.resolve().parent
    parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".dmc-staging-", dir=parent))
    moved = []
    try:
        with _Stages()("write"):
            names = write_bundle(bundle, staging)
            out.mkdir(parents=True, exist_ok=True)
            for name in names:
                shutil.move(str(staging / name), str(out / name))
                moved.append(name)
    except BaseException:
        for name in moved:
            (out / name).unlink(missing_ok=True)
        raise
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    bundle.files = names
    return bundle
