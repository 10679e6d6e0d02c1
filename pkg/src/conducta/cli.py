"""Command-line interface: ingestion, pipeline stages, persistence, plots.

Exit codes are a stable contract: 0 on success, 1 when a computation stage
fails, 2 for usage or validation problems. Every command is deterministic
given its inputs; the CONDUCTA_SEED environment variable overrides any
configured seed for reproducibility runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from .conductance import ConductanceError, induced_conductance, write_profiles_csv
from .embedding import frechet_embed, sample_references, write_embedding_csv
from .gp import GpError, Hyperparams, dump_model, fit, log_marginal_likelihood, sample_posterior_functions
from .graph import (
    GraphError,
    build_knn_graph,
    connected_components,
    induced_subgraph,
    load_edge_list,
    load_point_cloud,
    random_walk,
    shortest_paths,
    write_edge_list,
)
from .mcmc import (
    GammaPrecisionPrior,
    McmcError,
    MhConfig,
    PriorSet,
    diagnostics,
    mh_sample,
    predictive_mixture,
    write_samples_csv,
)
from .pipeline import (
    PipelineConfig,
    PipelineError,
    adjusted_rand_index,
    run_algorithm,
    score_clustering,
)
from .plotting import PlotError, build_plot_spec, render_posterior_band

VALIDATION_ERRORS = (GraphError, ConductanceError, GpError, McmcError, PipelineError, PlotError)


class ConfigError(ValueError):
    """Bad configuration document or command arguments."""


class StageError(RuntimeError):
    """A pipeline stage failed after validation passed."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


def resolve_seed(seed):
    """Configured seed, unless CONDUCTA_SEED overrides it."""
    env = os.environ.get("CONDUCTA_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"CONDUCTA_SEED must be an integer, got {env!r}") from exc
    return int(seed)


def _threads(args):
    """Worker cap from --threads; defaults to machine parallelism."""
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return args.threads
    return os.cpu_count() or 1


def _require_file(path):
    if not os.path.exists(path):
        raise ConfigError(f"input file not found: {path}")
    return path


def _write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _warn_components(graph):
    comps = connected_components(graph)
    if len(comps) > 1:
        print(
            f"warning: graph has {len(comps)} components; largest has "
            f"{len(comps[0])} vertices",
            file=sys.stderr,
        )
    return comps


# ---------------------------------------------------------------------------
# training CSV format shared by fit-gp / mcmc / plot / partition outputs

def write_training_csv(path, vertices, X, y):
    X = np.atleast_2d(X)
    with open(path, "w", encoding="utf-8") as fh:
        cols = ["vertex"] + [f"coord_{i}" for i in range(X.shape[1])] + ["conductance"]
        fh.write(",".join(cols) + "\n")
        for v, row, t in zip(vertices, X, y):
            fh.write(",".join([str(v)] + [f"{c:.17g}" for c in row] + [f"{t:.17g}"]) + "\n")


def read_training_csv(path):
    """Read (X, y) from a CSV with coord_* feature columns and a conductance/y target."""
    _require_file(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"{path}: empty training file")
        header = [h.strip() for h in header]
        feat_idx = [i for i, h in enumerate(header) if h.startswith("coord_")]
        if not feat_idx:
            raise ConfigError(f"{path}: no coord_* columns in header")
        target_name = "conductance" if "conductance" in header else "y" if "y" in header else None
        if target_name is None:
            raise ConfigError(f"{path}: no 'conductance' (or 'y') column in header")
        t_idx = header.index(target_name)
        X, y = [], []
        for row in reader:
            if not row:
                continue
            X.append([float(row[i]) for i in feat_idx])
            y.append(float(row[t_idx]))
    if not X:
        raise ConfigError(f"{path}: no training rows")
    return np.array(X), np.array(y)


def read_samples_csv(path):
    """Hyperparameter draws from a samples CSV, pooled across chains."""
    _require_file(path)
    draws = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            draws.append(
                Hyperparams(
                    lengthscale=float(row["lengthscale"]),
                    signal_var=float(row["signal_var"]),
                    noise_var=float(row["noise_var"]),
                )
            )
    if not draws:
        raise ConfigError(f"{path}: no posterior draws")
    return draws


def read_labels(path, n):
    _require_file(path)
    labels = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            token = line.strip()
            if not token or token.lower() == "label":
                continue
            labels.append(token)
    if len(labels) != n:
        raise ConfigError(f"{path}: {len(labels)} labels for {n} vertices")
    return labels


def read_embedding_csv(path):
    """Read coords and norms back from an embedding export."""
    _require_file(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        coord_idx = [i for i, h in enumerate(header) if h.startswith("coord_")]
        norm_idx = header.index("l2norm")
        vert_idx = header.index("vertex") if "vertex" in header else None
        coords, norms, verts = [], [], []
        for row in reader:
            if not row:
                continue
            coords.append([float(row[i]) for i in coord_idx])
            norms.append(float(row[norm_idx]))
            verts.append(int(row[vert_idx]) if vert_idx is not None else len(verts))
    if not coords:
        raise ConfigError(f"{path}: no embedding rows")
    return np.array(coords), np.array(norms), verts


# ---------------------------------------------------------------------------
# subcommands

def cmd_build_graph(args):
    if args.points is None and args.edges is None:
        raise ConfigError("provide --points or --edges")
    if args.points is not None:
        cloud = load_point_cloud(_require_file(args.points))
        graph = build_knn_graph(cloud, args.k, args.weight_mode, args.sigma)
    else:
        graph = load_edge_list(_require_file(args.edges))
    comps = _warn_components(graph)
    write_edge_list(graph, args.out)
    print(f"n={graph.n} m={graph.m} components={len(comps)}")
    return 0


def cmd_embed(args):
    graph = load_edge_list(_require_file(args.graph))
    comps = _warn_components(graph)
    sub, ids = (graph, list(range(graph.n))) if len(comps) == 1 else induced_subgraph(graph, comps[0])
    refs = sample_references(sub, args.refs, resolve_seed(args.seed))
    emb = frechet_embed(sub, refs)
    if ids != list(range(len(ids))):
        # re-export with original vertex ids
        with open(args.out, "w", encoding="utf-8") as fh:
            header = ["vertex"] + [f"coord_{i}" for i in range(emb.r)] + ["l2norm"]
            fh.write(",".join(header) + "\n")
            for local in range(emb.n):
                cells = [str(ids[local])] + [f"{c:.17g}" for c in emb.coords[local]]
                cells.append(f"{emb.norms[local]:.17g}")
                fh.write(",".join(cells) + "\n")
    else:
        write_embedding_csv(emb, args.out)
    print(f"embedded {emb.n} vertices into l2^{emb.r}; references {list(refs.refs)}")
    return 0


def cmd_conductance(args):
    graph = load_edge_list(_require_file(args.graph))
    comps = _warn_components(graph)
    sub, ids = (graph, list(range(graph.n))) if len(comps) == 1 else induced_subgraph(graph, comps[0])
    local_of = {orig: local for local, orig in enumerate(ids)}
    walk = random_walk(sub)
    if args.centers == "all":
        centers = list(range(graph.n))
    else:
        try:
            centers = [int(c) for c in args.centers.split(",") if c.strip() != ""]
        except ValueError as exc:
            raise ConfigError(f"bad --centers value {args.centers!r}") from exc
    for c in centers:
        if not (0 <= c < graph.n):
            raise ConfigError(f"center {c} outside vertex range 0..{graph.n - 1}")
    profiles = []
    for center in centers:
        if center not in local_of:
            print(f"warning: center {center} outside the largest component, skipped", file=sys.stderr)
            continue
        local = local_of[center]
        dists = shortest_paths(sub, local)
        cap = args.radius
        if cap == "auto":
            positive = dists[dists > 0]
            cap = float(np.median(positive)) if positive.size else 0.0
        else:
            cap = float(cap)
        search = induced_conductance(walk, dists, local, cap, args.budget)
        profiles.append(replace(search.profile, center=center))
        if search.feasible:
            print(f"center {center}: conductance {search.value:.17g} at radius {search.radius:.17g}")
        else:
            print(f"center {center}: infeasible under budget {args.budget}")
    write_profiles_csv(profiles, args.out)
    return 0


def cmd_fit_gp(args):
    X, y = read_training_csv(args.train)
    hp = Hyperparams(
        lengthscale=args.lengthscale, signal_var=args.signal_var, noise_var=args.noise_var
    )
    model = fit(X, y, hp, standardize=args.standardize)
    dump_model(model, args.out)
    print(f"fitted N={model.n_train} log_marginal_likelihood={log_marginal_likelihood(model):.17g}")
    return 0


def _mh_config_from_args(args):
    return MhConfig(
        steps=args.steps,
        burn_in=args.burn_in,
        chains=args.chains,
        proposal_scales=(args.scale, args.scale, args.scale),
        seed=resolve_seed(args.seed),
        adapt=not args.no_adapt,
    ).validate()


def cmd_mcmc(args):
    X, y = read_training_csv(args.train)
    cfg = _mh_config_from_args(args)
    prior = GammaPrecisionPrior(shape_a=args.shape_a, omega=args.omega)
    priors = PriorSet(lengthscale=prior, signal_var=prior, noise_var=prior)
    samples = _stage("mcmc", mh_sample, X, y, priors, cfg, threads=_threads(args))
    write_samples_csv(samples, args.samples_out)
    diag = diagnostics(samples)
    _write_json(
        {
            "ess": {k: _json_float(v) for k, v in diag.ess.items()},
            "rhat": None if diag.rhat is None else {k: _json_float(v) for k, v in diag.rhat.items()},
            "acceptance": [float(a) for a in diag.acceptance],
        },
        args.diagnostics_out,
    )
    rates = ", ".join(f"{r:.3f}" for r in samples.acceptance_rate)
    print(f"chains={cfg.chains} kept={cfg.steps - cfg.burn_in} acceptance=[{rates}]")
    return 0


def _json_float(v):
    v = float(v)
    return None if np.isnan(v) else v


def cmd_plot(args):
    X, y = read_training_csv(args.train)
    draws = read_samples_csv(args.samples)
    coords, norms, _ = read_embedding_csv(args.embedding)
    if coords.shape[1] != X.shape[1]:
        raise ConfigError(
            f"embedding dimension {coords.shape[1]} does not match training dimension {X.shape[1]}"
        )
    mean, var = _stage("predict", predictive_mixture, X, y, draws, coords, args.subsample)
    paths = None
    if args.paths > 0:
        idx = np.unique(np.linspace(0, len(draws) - 1, args.paths).round().astype(int))
        rows = []
        streams = np.random.SeedSequence(resolve_seed(args.path_seed)).generate_state(len(idx))
        for s, i in zip(streams, idx):
            model = fit(X, y, draws[i])
            rows.append(sample_posterior_functions(model, coords, 1, int(s))[0])
        paths = np.array(rows)
    train_norms = np.linalg.norm(X, axis=1)
    spec = build_plot_spec(norms, mean, var, train_norms, y, paths)
    render_posterior_band(spec, args.out, args.series_out)
    print(f"wrote {args.out}" + (f" and {args.series_out}" if args.series_out else ""))
    return 0


def _stage(name, func, *a, **kw):
    try:
        return func(*a, **kw)
    except VALIDATION_ERRORS as exc:
        raise StageError(name, exc) from exc


# ---------------------------------------------------------------------------
# partition

def _pipeline_config_from_document(doc, seed_override=None):
    pcfg = dict(doc.get("pipeline", {}))
    mh_doc = dict(doc.get("mh", {}))
    prior_doc = dict(doc.get("priors", {}))
    scale = float(mh_doc.pop("proposal_scale", 0.3))
    mh = MhConfig(
        steps=int(mh_doc.get("steps", 2000)),
        burn_in=int(mh_doc.get("burn_in", 500)),
        chains=int(mh_doc.get("chains", 4)),
        proposal_scales=(scale, scale, scale),
        seed=0,  # derived from the pipeline seed
        adapt=bool(mh_doc.get("adapt", True)),
    )
    prior = GammaPrecisionPrior(
        shape_a=float(prior_doc.get("shape_a", 2.0)), omega=float(prior_doc.get("omega", 1.0))
    )
    seed = resolve_seed(pcfg.get("seed", 0) if seed_override is None else seed_override)
    radius_cap = pcfg.get("radius_cap", "auto")
    if radius_cap != "auto":
        radius_cap = float(radius_cap)
    cfg = PipelineConfig(
        r_refs=int(pcfg.get("r_refs", 10)),
        radius_cap=radius_cap,
        mass_budget=float(pcfg.get("mass_budget", 0.5)),
        n_train=None if pcfg.get("n_train") is None else int(pcfg["n_train"]),
        n_test=int(pcfg.get("n_test", 200)),
        seed=seed,
        selection=pcfg.get("selection", "lowest_predicted"),
        max_clusters=None if pcfg.get("max_clusters") is None else int(pcfg["max_clusters"]),
        min_remaining_mass=(
            None if pcfg.get("min_remaining_mass") is None else float(pcfg["min_remaining_mass"])
        ),
        stop_phi_ceiling=float(pcfg.get("stop_phi_ceiling", 0.999)),
        carve_drop_factor=float(pcfg.get("carve_drop_factor", 0.5)),
        carve_gap_factor=float(pcfg.get("carve_gap_factor", 0.5)),
        residual_probe_cap=int(pcfg.get("residual_probe_cap", 64)),
        stop_patience=int(pcfg.get("stop_patience", 3)),
        exact_recompute=bool(pcfg.get("exact_recompute", False)),
        subsample=int(pcfg.get("subsample", 25)),
        restarts=int(pcfg.get("restarts", 1)),
        mh=mh,
        priors=PriorSet(lengthscale=prior, signal_var=prior, noise_var=prior),
    )
    return cfg


def _config_echo(cfg):
    return {
        "r_refs": cfg.r_refs,
        "radius_cap": cfg.radius_cap,
        "mass_budget": cfg.mass_budget,
        "n_train": cfg.n_train,
        "n_test": cfg.n_test,
        "seed": cfg.seed,
        "selection": cfg.selection,
        "max_clusters": cfg.max_clusters,
        "min_remaining_mass": cfg.min_remaining_mass,
        "stop_phi_ceiling": cfg.stop_phi_ceiling,
        "carve_drop_factor": cfg.carve_drop_factor,
        "carve_gap_factor": cfg.carve_gap_factor,
        "residual_probe_cap": cfg.residual_probe_cap,
        "stop_patience": cfg.stop_patience,
        "exact_recompute": cfg.exact_recompute,
        "subsample": cfg.subsample,
        "restarts": cfg.restarts,
        "mh": {
            "steps": cfg.mh.steps,
            "burn_in": cfg.mh.burn_in,
            "chains": cfg.mh.chains,
            "proposal_scales": list(cfg.mh.proposal_scales),
            "adapt": cfg.mh.adapt,
        },
        "priors": {
            "shape_a": cfg.priors.lengthscale.shape_a,
            "omega": cfg.priors.lengthscale.omega,
        },
    }


def clustering_document(clustering, cfg):
    return {
        "schema": 1,
        "config": _config_echo(cfg),
        "clusters": [
            {
                "vertices": sorted(cluster),
                "conductance": clustering.conductance[i],
                "seed_vertex": clustering.provenance[i].seed,
                "radius": clustering.provenance[i].radius,
                "kind": clustering.provenance[i].kind,
            }
            for i, cluster in enumerate(clustering.clusters)
        ],
        "unassigned": sorted(clustering.unassigned),
    }


def cmd_partition(args):
    with open(_require_file(args.config), "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON: {exc}") from exc
    if doc.get("schema") != 1:
        raise ConfigError(f"{args.config}: unsupported schema {doc.get('schema')!r}")
    gdoc = doc.get("graph", {})
    out_dir = args.out_dir or doc.get("out_dir")
    if not out_dir:
        raise ConfigError("no output directory (config key 'out_dir' or --out-dir)")
    cfg = _pipeline_config_from_document(doc, seed_override=args.seed)

    if "edges" in gdoc:
        graph = load_edge_list(_require_file(gdoc["edges"]))
    elif "points" in gdoc:
        cloud = load_point_cloud(_require_file(gdoc["points"]))
        graph = build_knn_graph(
            cloud,
            int(gdoc.get("knn_k", 8)),
            gdoc.get("weight_mode", "distance"),
            gdoc.get("sigma"),
        )
    else:
        raise ConfigError("config graph section needs 'edges' or 'points'")

    cfg = replace(cfg, threads=_threads(args))
    # validation before any heavy computation
    try:
        cfg.validate(n=graph.n)
    except PipelineError as exc:
        raise ConfigError(str(exc)) from exc
    labels = None
    if doc.get("labels"):
        labels = read_labels(doc["labels"], graph.n)

    os.makedirs(out_dir, exist_ok=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = _stage("pipeline", run_algorithm, graph, cfg)

    report = dict(result.report)
    if len(connected_components(graph)) == 1:
        walk = random_walk(graph)
        scores = _stage("score", score_clustering, result.clustering, walk, labels)
        report["scores"] = {
            "per_cluster_conductance": [
                None if p is None else float(p) for p in scores.per_cluster
            ],
            "mean_conductance": None if scores.mean_conductance is None else float(scores.mean_conductance),
            "ari": None if scores.ari is None else float(scores.ari),
        }
    elif labels is not None:
        ari = _stage(
            "score", adjusted_rand_index, labels, result.clustering.labels(graph.n)
        )
        report["scores"] = {"ari": float(ari)}

    _write_json(clustering_document(result.clustering, cfg), os.path.join(out_dir, "clustering.json"))
    _write_json(report, os.path.join(out_dir, "report.json"))
    write_training_csv(
        os.path.join(out_dir, "training_pairs.csv"),
        result.train_vertices,
        result.train_X,
        result.train_y,
    )
    if result.posterior is not None:
        write_samples_csv(result.posterior, os.path.join(out_dir, "posterior_samples.csv"))
        diag = diagnostics(result.posterior)
        _write_json(
            {
                "ess": {k: _json_float(v) for k, v in diag.ess.items()},
                "rhat": None if diag.rhat is None else {k: _json_float(v) for k, v in diag.rhat.items()},
                "acceptance": [float(a) for a in diag.acceptance],
            },
            os.path.join(out_dir, "diagnostics.json"),
        )
        with open(os.path.join(out_dir, "predictions.csv"), "w", encoding="utf-8") as fh:
            fh.write("vertex,l2norm,mean,var\n")
            for v, norm, m, s2 in zip(
                result.test_vertices, result.test_norms, result.pred_mean, result.pred_var
            ):
                fh.write(f"{v},{norm:.17g},{m:.17g},{s2:.17g}\n")
        train_norms = np.linalg.norm(result.train_X, axis=1)
        spec = build_plot_spec(
            result.test_norms, result.pred_mean, result.pred_var, train_norms, result.train_y
        )
        render_posterior_band(
            spec,
            os.path.join(out_dir, "conductance_band.svg"),
            os.path.join(out_dir, "conductance_band.csv"),
        )
    _write_report_text(report, result, os.path.join(out_dir, "report.txt"))
    print(f"wrote clustering with {result.clustering.k} clusters to {out_dir}")
    return 0


def _write_report_text(report, result, path):
    lines = [
        "conducta partition report",
        f"vertices: {report['n_vertices']}  edges: {report['n_edges']}",
        f"components: {report['components']}",
        f"training vertices used: {len(report['training']['vertices'])} "
        f"(skipped {len(report['training']['skipped'])})",
    ]
    if "mh_acceptance" in report:
        rates = ", ".join(f"{r:.3f}" for r in report["mh_acceptance"])
        lines.append(f"mh acceptance per chain: [{rates}]")
    lines.append(f"clusters: {result.clustering.k}")
    for i, info in enumerate(report["clusters"]):
        cond = "n/a" if info["conductance"] is None else f"{info['conductance']:.6g}"
        lines.append(
            f"  cluster {i}: size {info['size']} conductance {cond} kind {info['kind']}"
        )
    scores = report.get("scores", {})
    if scores.get("ari") is not None:
        lines.append(f"adjusted rand index: {scores['ari']:.6g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="conducta",
        description="Bayesian graph partitioning via GP-learned induced conductance",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="build a canonical edge list from points or edges")
    p.add_argument("--points", help="CSV point cloud, one point per row")
    p.add_argument("--edges", help="existing edge-list file to validate and canonicalize")
    p.add_argument("--k", type=int, default=8, help="kNN neighbor count (default 8)")
    p.add_argument("--weight-mode", default="distance", choices=["distance", "inverse_distance", "gaussian"])
    p.add_argument("--sigma", type=float, default=None, help="bandwidth for gaussian weights")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("embed", help="Frechet-style embedding to random references")
    p.add_argument("--graph", required=True)
    p.add_argument("--refs", type=int, required=True, help="number of reference vertices")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("conductance", help="ball-sweep induced conductance profiles")
    p.add_argument("--graph", required=True)
    p.add_argument("--centers", required=True, help="comma-separated vertex ids, or 'all'")
    p.add_argument("--radius", default="auto", help="radius cap, or 'auto' (median distance)")
    p.add_argument("--budget", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_conductance)

    p = sub.add_parser("fit-gp", help="fit a GP at fixed hyperparameters")
    p.add_argument("--train", required=True, help="CSV with coord_* columns and a conductance column")
    p.add_argument("--lengthscale", type=float, required=True)
    p.add_argument("--signal-var", type=float, required=True)
    p.add_argument("--noise-var", type=float, required=True)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--out", required=True, help="model JSON dump")
    p.set_defaults(func=cmd_fit_gp)

    p = sub.add_parser("mcmc", help="MH posterior over GP hyperparameters")
    p.add_argument("--train", required=True)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--burn-in", type=int, default=500)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--scale", type=float, default=0.3, help="proposal std in log space")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-adapt", action="store_true")
    p.add_argument("--shape-a", type=float, default=2.0)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")
    p.add_argument("--samples-out", required=True)
    p.add_argument("--diagnostics-out", required=True)
    p.set_defaults(func=cmd_mcmc)

    p = sub.add_parser("partition", help="full pipeline from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out-dir", default=None, help="override the config output directory")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("plot", help="posterior band figure (SVG + CSV)")
    p.add_argument("--train", required=True)
    p.add_argument("--samples", required=True, help="posterior samples CSV")
    p.add_argument("--embedding", required=True, help="embedding CSV for the test vertices")
    p.add_argument("--subsample", type=int, default=25)
    p.add_argument("--paths", type=int, default=0, help="number of posterior sample paths")
    p.add_argument("--path-seed", type=int, default=0)
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--series-out", default=None, help="CSV of the plotted series")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, *VALIDATION_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
