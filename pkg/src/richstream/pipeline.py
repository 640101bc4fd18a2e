"""Staged pipeline: ingest, weights, partition, profile, rates, cluster, baseline-degree.

Every stage reads its inputs from artifacts in the output directory and
writes its own artifacts there, so a stage run alone and the same stage
inside :func:`run_pipeline` see identical bytes. ``manifest.json`` records
the configuration, a content key per stage and a hash per output file; a
stage whose key and outputs are unchanged is skipped.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import platform
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__, clustering, plotting, profiles, richclub, topology
from .errors import ConfigError, MissingArtifactError, RichStreamError
from .profiles import ChannelWeights
from .richclub import NullModelConfig
from .stream_graph import (ContactEvent, StreamGraph, ingestion_summary, make_windows, parse_contacts,
                           read_contacts, node_sort_key)

logger = logging.getLogger(__name__)

STAGES = ("ingest", "weights", "partition", "profile", "rates", "cluster", "baseline-degree")
UPSTREAM = {
    "ingest": (),
    "weights": ("ingest",),
    "partition": ("weights",),
    "profile": ("partition",),
    "rates": ("partition",),
    "cluster": ("profile",),
    "baseline-degree": ("profile", "cluster"),
}
# config fields each stage depends on (besides its upstream artifacts)
CONFIG_SLICE = {
    "ingest": ("input", "dt", "day_start", "day_end"),
    "weights": ("delta",),
    "partition": ("samples", "alpha", "min_club_size", "seed"),
    "profile": ("alpha_D", "alpha_S", "alpha_P", "sim_threshold", "figures"),
    "rates": ("figures",),
    "cluster": ("k_min", "k_max", "runs", "seed", "k", "figures"),
    "baseline-degree": ("k_min", "k_max", "runs", "seed", "k", "figures"),
}

RUNTIME_ONLY = ("out", "workers")


@dataclass
class PipelineConfig:
    """Run configuration; every field can come from a config file or a flag."""

    input: str | None = None
    out: str = "richstream-out"
    seed: int | None = None
    dt: int = 20
    delta: int = 300
    day_start: int | None = None
    day_end: int | None = None
    alpha_D: float = 1 / 3
    alpha_S: float = 1 / 3
    alpha_P: float = 1 / 3
    samples: int = 100
    alpha: float = 0.05
    min_club_size: int = 3
    k_min: int = 2
    k_max: int = 25
    runs: int = 100
    k: int | None = None
    sim_threshold: float | None = None
    workers: int = 1
    figures: bool = True

    def validate(self):
        if self.seed is None:
            raise ConfigError("a master seed is required (--seed or 'seed = ...' in the config file)")
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.delta <= 0 or self.delta % self.dt:
            raise ConfigError(f"delta={self.delta}s must be a positive multiple of dt={self.dt}s")
        if (self.day_start is None) != (self.day_end is None):
            raise ConfigError("day bounds need both day_start and day_end")
        if self.day_start is not None and self.day_end <= self.day_start:
            raise ConfigError("day_end must be after day_start")
        self.channel_weights()
        self.null_model()
        if self.k_min < 2 or self.k_max < self.k_min:
            raise ConfigError(f"invalid k range [{self.k_min}, {self.k_max}]")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def channel_weights(self) -> ChannelWeights:
        return ChannelWeights(self.alpha_D, self.alpha_S, self.alpha_P)

    def null_model(self) -> NullModelConfig:
        return NullModelConfig(self.samples, self.alpha, self.min_club_size, self.seed)

    def slice(self, stage: str) -> dict:
        return {k: getattr(self, k) for k in CONFIG_SLICE[stage]}

    def to_dict(self) -> dict:
        """Fields that affect results; output location and worker count do not."""
        out = asdict(self)
        for key in RUNTIME_ONLY:
            out.pop(key)
        return out


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def coerce(key: str, raw):
    """Convert a textual config value to the field's type."""
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none")):
        return None
    kind = _FIELD_TYPES[key]
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if "bool" in kind:
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if "int" in kind:
            return int(raw)
        if "float" in kind:
            if "/" in raw:
                num, den = raw.split("/", 1)
                return float(num) / float(den)
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = coerce(key, value)
    return out


def load_config(path: str | Path) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


# -- workspace --------------------------------------------------------------

def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Workspace:
    """Output directory plus its manifest."""

    def __init__(self, out: str | Path):
        self.root = Path(out)
        self.root.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.root / "manifest.json"
        if self.manifest_path.exists():
            self.manifest = json.loads(self.manifest_path.read_text(encoding="utf-8"))
        else:
            self.manifest = {}
        self.manifest.setdefault("stages", {})
        self.manifest.setdefault("warnings", [])

    def path(self, name: str) -> Path:
        return self.root / name

    def write(self, name: str, data: str | bytes) -> Path:
        p = self.path(name)
        p.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, str):
            data = data.encode("utf-8")
        p.write_bytes(data)
        return p

    def read_text(self, name: str, stage: str) -> str:
        p = self.path(name)
        if not p.exists():
            raise MissingArtifactError(
                f"missing {name} in {self.root}; run the '{stage}' subcommand first")
        return p.read_text(encoding="utf-8")

    def file_hash(self, name: str) -> str:
        return _sha(self.path(name).read_bytes())

    def stage_outputs(self, stage: str) -> list[str]:
        return list(self.manifest["stages"].get(stage, {}).get("outputs", {}))

    def stage_key(self, stage: str, cfg: PipelineConfig) -> str:
        parts = {"stage": stage, "config": cfg.slice(stage), "version": __version__}
        for up in UPSTREAM[stage]:
            entry = self.manifest["stages"].get(up)
            if entry is None or entry.get("status") != "ok":
                raise MissingArtifactError(
                    f"stage '{stage}' needs the outputs of '{up}'; run the '{up}' subcommand first")
            parts[up] = entry["outputs"]
        if stage == "ingest" and cfg.input:
            parts["input_sha256"] = _sha(Path(cfg.input).read_bytes())
        return _sha(json.dumps(parts, sort_keys=True).encode("utf-8"))

    def is_current(self, stage: str, key: str) -> bool:
        entry = self.manifest["stages"].get(stage)
        if not entry or entry.get("key") != key or entry.get("status") != "ok":
            return False
        for name, digest in entry["outputs"].items():
            if not self.path(name).exists() or self.file_hash(name) != digest:
                return False
        return True

    def record(self, stage: str, key: str, outputs: list[str], status: str = "ok", **extra):
        entry = {"key": key, "status": status,
                 "outputs": {name: self.file_hash(name) for name in sorted(outputs)}}
        entry.update(extra)
        self.manifest["stages"][stage] = entry

    def warn(self, message: str):
        if message not in self.manifest["warnings"]:
            self.manifest["warnings"].append(message)
        logger.warning(message)

    def save(self, cfg: PipelineConfig | None = None):
        if cfg is not None:
            self.manifest["config"] = cfg.to_dict()
        self.manifest["environment"] = {
            "richstream": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "matplotlib": plotting.matplotlib.__version__,
        }
        done = [s for s in STAGES if self.manifest["stages"].get(s, {}).get("status") == "ok"]
        self.manifest["completed_stages"] = done
        self.manifest["partial"] = any(
            e.get("status") != "ok" for e in self.manifest["stages"].values())
        text = json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"
        self.manifest_path.write_text(text, encoding="utf-8")


# -- artifact readers -----------------------------------------------------

def _load_stream(ws: Workspace, dt: int) -> StreamGraph:
    text = ws.read_text("stream.tsv", "ingest")
    rows = list(csv.DictReader(io.StringIO(ws.read_text("nodes.csv", "ingest"))))
    meta = {r["node"]: r["class"] for r in rows if r["class"]}
    # class metadata comes from nodes.csv; the '-' placeholders in stream.tsv are dropped
    events = [ContactEvent(ev.t, ev.u, ev.v) for ev in parse_contacts(text, dt).events()]
    return StreamGraph.from_events(events, dt, nodes=[r["node"] for r in rows], node_meta=meta)


def _load_weights(ws: Workspace, sg: StreamGraph) -> tuple[list, object]:
    spec = make_windows(sg, _window_delta(ws)) if sg.n_steps else None
    text = ws.read_text("weights_edges.csv", "weights")
    index = {u: i for i, u in enumerate(sg.nodes)}
    per: dict[int, list] = {}
    for rec in csv.DictReader(io.StringIO(text)):
        per.setdefault(int(rec["window_index"]), []).append(
            (index[rec["u"]], index[rec["v"]], float(rec["omega_bar"]), int(rec["support"])))
    out = []
    if spec is None:
        return out, spec
    for i, (a, b) in enumerate(spec.bounds):
        rows = sorted(per.get(i, []))
        arr = np.array(rows, dtype=np.float64).reshape(-1, 4)
        out.append(topology.WindowedWeights(
            i, sg.nodes, arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2],
            arr[:, 3].astype(np.int64), b - a))
    return out, spec


def _window_delta(ws: Workspace) -> int:
    rows = list(csv.DictReader(io.StringIO(ws.read_text("windows.csv", "weights"))))
    return int(rows[0]["delta"]) if rows else 0


def _load_labels(ws: Workspace) -> tuple[list[str], np.ndarray]:
    return profiles.read_profiles_csv(ws.read_text("profiles.csv", "partition"))


# -- stages ---------------------------------------------------------------

def stage_ingest(ws: Workspace, cfg: PipelineConfig) -> list[str]:
    if not cfg.input:
        raise ConfigError("no input file given")
    full = read_contacts(cfg.input, cfg.dt)
    sg = full
    if cfg.day_start is not None:
        sg = full.restrict(cfg.day_start, cfg.day_end)
    summary = ingestion_summary(full)
    summary["day_start"] = cfg.day_start if cfg.day_start is not None else "all"
    summary["day_end"] = cfg.day_end if cfg.day_end is not None else "all"
    summary["day_events"] = sg.n_events
    summary["day_steps"] = sg.n_steps
    if sg.is_empty:
        ws.warn("empty stream: every profile is all-passive and clustering is skipped")
    lines = "".join(f"{k}: {v}\n" for k, v in summary.items())
    ws.write("ingest_summary.txt", lines)
    buf = io.StringIO()
    for ev in sg.events():
        buf.write(f"{ev.t}\t{ev.u}\t{ev.v}\t{ev.meta_u or '-'}\t{ev.meta_v or '-'}\n")
    ws.write("stream.tsv", buf.getvalue())
    nb = io.StringIO()
    w = csv.writer(nb, lineterminator="\n")
    w.writerow(["node", "class"])
    for u in sg.nodes:
        w.writerow([u, sg.node_meta.get(u, "")])
    ws.write("nodes.csv", nb.getvalue())
    return ["ingest_summary.txt", "stream.tsv", "nodes.csv"]


def stage_weights(ws: Workspace, cfg: PipelineConfig) -> list[str]:
    sg = _load_stream(ws, cfg.dt)
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["window_index", "start_step", "stop_step", "steps", "delta"])
    edges = io.StringIO()
    ew = csv.writer(edges, lineterminator="\n")
    ew.writerow(["window_index", "u", "v", "omega_bar", "support"])
    nodes_out = "window_index,node,delta_bar\n"
    if sg.n_steps:
        spec = make_windows(sg, cfg.delta)
        for i, (a, b) in enumerate(spec.bounds):
            w.writerow([i, a, b, b - a, cfg.delta])
        wws = topology.all_window_weights(sg, spec)
        for ww in wws:
            for a, b, om, sup in zip(ww.src.tolist(), ww.dst.tolist(), ww.omega.tolist(),
                                     ww.support.tolist()):
                ew.writerow([ww.index, sg.nodes[a], sg.nodes[b], repr(om), sup])
        nodes_out = topology.weights_csv(wws)[1]
    ws.write("windows.csv", rows.getvalue())
    ws.write("weights_edges.csv", edges.getvalue())
    ws.write("weights_nodes.csv", nodes_out)
    return ["windows.csv", "weights_edges.csv", "weights_nodes.csv"]


def stage_partition(ws: Workspace, cfg: PipelineConfig) -> list[str]:
    sg = _load_stream(ws, cfg.dt)
    wws, spec = _load_weights(ws, sg)
    if spec is None:
        labels = np.zeros((sg.n_nodes, 0), dtype=np.uint8)
        parts = []
    else:
        parts = richclub.partition_windows(wws, cfg.null_model(), workers=cfg.workers)
        labels = richclub.label_instants(parts, sg, spec)
    ws.write("partitions.csv", richclub.partitions_csv(parts, sg.nodes))
    ws.write("labels.csv", "node,word\n" + "".join(
        f"{u},{word}\n" for u, word in zip(sg.nodes, richclub.label_words(labels))))
    ws.write("profiles.csv", profiles.profiles_csv(sg.nodes, labels, sg.node_meta))
    return ["partitions.csv", "labels.csv", "profiles.csv"]


def _class_order(nodes, node_meta, extra=None) -> list[int]:
    keys = []
    for i, u in enumerate(nodes):
        keys.append((node_meta.get(u, ""), extra[i] if extra is not None else 0, node_sort_key(u)))
    return sorted(range(len(nodes)), key=lambda i: keys[i])


def _heatmap_csv(nodes, labels, order, node_meta, cluster=None) -> str:
    """Plot-ready matrix: one row per node, label codes D=2, S=1, P=0."""
    codes = np.zeros(labels.shape, dtype=np.int8)
    codes[labels == ord("D")] = 2
    codes[labels == ord("S")] = 1
    buf = io.StringIO()
    head = ["node", "class"] + (["cluster"] if cluster is not None else [])
    buf.write(",".join(head + [str(k) for k in range(labels.shape[1])]) + "\n")
    for i in order:
        row = [nodes[i], node_meta.get(nodes[i], "")]
        if cluster is not None:
            row.append(str(int(cluster[i])))
        buf.write(",".join(row + [str(x) for x in codes[i].tolist()]) + "\n")
    return buf.getvalue()


def stage_profile(ws: Workspace, cfg: PipelineConfig) -> list[str]:
    sg = _load_stream(ws, cfg.dt)
    nodes, labels = _load_labels(ws)
    if labels.size == 0:
        labels = np.zeros((len(nodes), sg.n_steps), dtype=np.uint8)
    sim = profiles.similarity_matrix(labels, cfg.channel_weights())
    out = ["similarity.csv", "heatmap_profiles.csv"]
    ws.write("similarity.csv", profiles.matrix_csv(nodes, sim))
    if cfg.sim_threshold is not None:
        ws.write("similarity_pairs.csv", profiles.matrix_csv(nodes, sim, cfg.sim_threshold))
        out.append("similarity_pairs.csv")
    order = _class_order(nodes, sg.node_meta)
    ws.write("heatmap_profiles.csv", _heatmap_csv(nodes, labels, order, sg.node_meta))
    if cfg.figures:
        groups = [sg.node_meta.get(nodes[i], "") for i in order]
        plotting.label_heatmap(labels[order], groups, ws.path("figures/profiles.png"),
                               "D/S/P profiles by class", sg.dt)
        out.append("figures/profiles.png")
    return out


def rates_report(nodes, labels, degrees, node_meta) -> tuple[list, dict]:
    rates = profiles.all_rates(labels, degrees, nodes)
    tau_a = np.array([r.tau_A for r in rates])
    tau_d = np.array([r.tau_D for r in rates])
    tau_s = np.array([r.tau_S for r in rates])
    d_bar = np.array([r.d_bar for r in rates])
    summary = {
        "nodes": len(nodes),
        "profile_length": int(labels.shape[1]) if labels.ndim == 2 else 0,
        "mean_tau_D": float(tau_d.mean()) if len(nodes) else 0.0,
        "mean_tau_S": float(tau_s.mean()) if len(nodes) else 0.0,
        "mean_tau_P": float(1.0 - tau_a.mean()) if len(nodes) else 0.0,
        "reference_mean_tau_D": "0.12 (primary school) / 0.03 (preparatory classes)",
    }
    for name, x in (("tau_A", tau_a), ("tau_D", tau_d), ("tau_S", tau_s)):
        try:
            summary[f"pearson_{name}_d_bar"] = profiles.pearson(x, d_bar)
        except RichStreamError:
            summary[f"pearson_{name}_d_bar"] = "undefined"
    return rates, summary


def stage_rates(ws: Workspace, cfg: PipelineConfig) -> list[str]:
    sg = _load_stream(ws, cfg.dt)
    nodes, labels = _load_labels(ws)
    if labels.size == 0:
        labels = np.zeros((len(nodes), sg.n_steps), dtype=np.uint8)
    degrees = sg.degree_matrix()
    rates, summary = rates_report(nodes, labels, degrees, sg.node_meta)
    ws.write("rates.csv", profiles.rates_csv(nodes, rates, sg.node_meta))
    ws.write("rates_summary.txt", "".join(f"{k}: {v}\n" for k, v in summary.items()))
    out = ["rates.csv", "rates_summary.txt"]
    if cfg.figures and rates:
        plotting.rates_scatter([r.tau_A for r in rates], [r.d_bar for r in rates],
                               [r.tau_D for r in rates], [r.tau_S for r in rates],
                               ws.path("figures/rates.png"), "activity rate vs average degree")
        out.append("figures/rates.png")
    return out


def _cluster_outputs(ws, cfg, prefix, nodes, labels, x, dist, node_meta, sg) -> tuple[list[str], dict]:
    n = len(nodes)
    if labels.shape[1] == 0 or n < 2:
        ws.warn(f"{prefix or 'cluster'}: nothing to cluster (empty profiles or fewer than 2 nodes)")
        return [], {"skipped": True}
    if cfg.k_max > n:
        raise ConfigError(f"k range [{cfg.k_min}, {cfg.k_max}] exceeds node count {n}")
    if cfg.k is not None and not cfg.k_min <= cfg.k <= cfg.k_max:
        raise ConfigError(f"selected k={cfg.k} outside [{cfg.k_min}, {cfg.k_max}]")
    curve = clustering.sweep_k(x, dist, range(cfg.k_min, cfg.k_max + 1), cfg.runs, cfg.seed,
                               workers=cfg.workers)
    k = cfg.k if cfg.k is not None else curve.best_k
    best = curve.best_result(k)
    classes, table = clustering.contingency(nodes, best.labels, node_meta)
    files = {
        f"{prefix}silhouette.csv": clustering.curve_csv(curve),
        f"{prefix}assignments.csv": clustering.assignments_csv(nodes, best.labels, node_meta),
        f"{prefix}contingency.csv": clustering.contingency_csv(classes, table),
    }
    order = _class_order(nodes, node_meta, best.labels)
    files[f"{prefix}heatmap_clusters.csv"] = _heatmap_csv(nodes, labels, order, node_meta, best.labels)
    for name, text in files.items():
        ws.write(name, text)
    out = list(files)
    if cfg.figures:
        plotting.silhouette_curve(curve.ks, curve.mean, curve.std,
                                  ws.path(f"figures/{prefix}silhouette.png"), [k],
                                  f"mean silhouette over {cfg.runs} runs")
        c_order = sorted(range(n), key=lambda i: (int(best.labels[i]), node_meta.get(nodes[i], ""),
                                                  node_sort_key(nodes[i])))
        groups = [f"C{int(best.labels[i]) + 1}" for i in c_order]
        plotting.label_heatmap(labels[c_order], groups, ws.path(f"figures/{prefix}clusters.png"),
                               f"profiles grouped by cluster (k={k})", sg.dt)
        out += [f"figures/{prefix}silhouette.png", f"figures/{prefix}clusters.png"]
    info = {"k_selected": k, "k_argmax": curve.best_k, "local_maxima": curve.local_maxima,
            "inertia": best.inertia}
    return out, info


def stage_cluster(ws: Workspace, cfg: PipelineConfig) -> list[str]:
    sg = _load_stream(ws, cfg.dt)
    nodes, labels = _load_labels(ws)
    sim_nodes, sim = profiles.read_matrix_csv(ws.read_text("similarity.csv", "profile"))
    if labels.size == 0:
        labels = np.zeros((len(nodes), sg.n_steps), dtype=np.uint8)
    x = clustering.embed_labels(labels, cfg.channel_weights())
    dist = clustering.distance_from_similarity(sim)
    out, info = _cluster_outputs(ws, cfg, "", nodes, labels, x, dist, sg.node_meta, sg)
    ws.manifest.setdefault("results", {})["cluster"] = info
    return out


def adjusted_rand(a: np.ndarray, b: np.ndarray) -> float:
    """Adjusted Rand index between two labelings."""
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(table, (ia, ib), 1)

    def pairs(x):
        return float((x * (x - 1) / 2).sum())

    n = a.size
    total = n * (n - 1) / 2
    sum_ij = pairs(table)
    sum_a, sum_b = pairs(table.sum(axis=1)), pairs(table.sum(axis=0))
    expected = sum_a * sum_b / total if total else 0.0
    top = (sum_a + sum_b) / 2 - expected
    return 1.0 if top == 0 else (sum_ij - expected) / top


def stage_baseline_degree(ws: Workspace, cfg: PipelineConfig) -> list[str]:
    sg = _load_stream(ws, cfg.dt)
    nodes, labels = _load_labels(ws)
    degrees = sg.degree_matrix()
    sim = profiles.degree_similarity_matrix(degrees)
    ws.write("baseline/similarity.csv", profiles.matrix_csv(nodes, sim))
    norms = np.sqrt((degrees.astype(np.float64) ** 2).sum(axis=1))
    x = degrees / np.where(norms > 0, norms, 1.0)[:, None]
    if labels.size == 0:
        labels = np.zeros((len(nodes), sg.n_steps), dtype=np.uint8)
    out, info = _cluster_outputs(ws, cfg, "baseline/", nodes, labels, x,
                                 clustering.distance_from_similarity(sim), sg.node_meta, sg)
    out.append("baseline/similarity.csv")
    main_path = ws.path("assignments.csv")
    if main_path.exists() and "k_selected" in info:
        main = clustering.read_assignments_csv(main_path.read_text(encoding="utf-8"))
        base = clustering.read_assignments_csv(ws.read_text("baseline/assignments.csv", "baseline-degree"))
        a = np.array([main[u] for u in nodes])
        b = np.array([base[u] for u in nodes])
        info["adjusted_rand_vs_dsp"] = adjusted_rand(a, b)
        ws.write("baseline/comparison.txt",
                 f"adjusted_rand_index_vs_dsp: {info['adjusted_rand_vs_dsp']!r}\n")
        out.append("baseline/comparison.txt")
    ws.manifest.setdefault("results", {})["baseline-degree"] = info
    return out


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "weights": stage_weights,
    "partition": stage_partition,
    "profile": stage_profile,
    "rates": stage_rates,
    "cluster": stage_cluster,
    "baseline-degree": stage_baseline_degree,
}


class StageError(RichStreamError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        # an unreadable input or output path is a configuration problem
        default = ConfigError.exit_code if isinstance(cause, OSError) else 1
        self.exit_code = getattr(cause, "exit_code", default)


def run_stage(stage: str, cfg: PipelineConfig, ws: Workspace | None = None,
              force: bool = False) -> list[str]:
    """Run one stage (or reuse its cached outputs) and update the manifest."""
    cfg.validate()
    ws = ws or Workspace(cfg.out)
    try:
        key = ws.stage_key(stage, cfg)
        if not force and ws.is_current(stage, key):
            logger.info("stage %s: cached", stage)
            return ws.stage_outputs(stage)
        logger.info("stage %s: running", stage)
        outputs = STAGE_FUNCS[stage](ws, cfg)
    except Exception as exc:
        ws.manifest["stages"][stage] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
        ws.manifest["failed_stage"] = stage
        ws.save(cfg)
        raise StageError(stage, exc) from exc
    ws.record(stage, key, outputs)
    # a rerun invalidates anything computed from the previous outputs
    for later in STAGES[STAGES.index(stage) + 1:]:
        entry = ws.manifest["stages"].get(later)
        if not entry or entry.get("status") != "ok":
            continue
        try:
            current = ws.stage_key(later, cfg)
        except MissingArtifactError:
            current = None
        if current != entry.get("key"):
            entry["status"] = "stale"
    ws.manifest.pop("failed_stage", None)
    ws.save(cfg)
    return outputs


def run_pipeline(cfg: PipelineConfig, stages=STAGES) -> Workspace:
    cfg.validate()
    ws = Workspace(cfg.out)
    for stage in stages:
        run_stage(stage, cfg, ws)
    return ws


def config_from_sources(file_values: dict | None = None, manifest: dict | None = None,
                        overrides: dict | None = None) -> PipelineConfig:
    """Merge manifest config < config file < explicit overrides."""
    values = {}
    for src in (manifest or {}, file_values or {}, overrides or {}):
        for k, v in src.items():
            if v is not None:
                values[k] = coerce(k, v) if isinstance(v, str) else v
    return PipelineConfig(**values)


def environment_note() -> str:
    return f"python {sys.version.split()[0]} on {platform.system()}"
