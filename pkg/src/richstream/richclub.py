"""Iterative weighted rich-club extraction per window, and D/S/P labelling.

Within a window, nodes are ranked by strength and every prefix of the
ranking is a candidate club. A prefix is significant when the total weight
of the edges it spans beats a null model that shuffles the window's edge
weights over its fixed topology (empirical p-value with add-one smoothing).
Among significant prefixes the one whose weight most exceeds the null
expectation becomes a club layer; its members are removed, strengths are
recomputed on what is left, and the search repeats until no prefix is
significant.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConsistencyError
from .stream_graph import StreamGraph, WindowSpec
from .topology import WindowedWeights, strengths_from_edges

LABELS = "DSP"

# Strengths closer than this (relative to the round's maximum) rank as ties;
# keeps the ranking identical when all weights are rescaled.
_RANK_RESOLUTION = 2.0 ** -32
# Null sums within this fraction of the total weight count as reaching W(r).
_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class NullModelConfig:
    samples: int = 100
    alpha: float = 0.05
    min_club_size: int = 3
    seed: int = 0
    null_model: str = "edge-weight-permutation"

    def __post_init__(self):
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.min_club_size < 2:
            raise ConfigError(f"min_club_size must be >= 2, got {self.min_club_size}")
        if self.null_model != "edge-weight-permutation":
            raise ConfigError(f"unknown null model {self.null_model!r}")


@dataclass(frozen=True)
class ClubLayer:
    level: int
    members: frozenset[str]
    p_value: float = 0.0


@dataclass(frozen=True)
class WindowPartition:
    index: int
    layers: tuple[ClubLayer, ...]
    dense: frozenset[str]
    sparse: frozenset[str]
    inactive: frozenset[str]

    def level_of(self, node: str) -> int:
        for layer in self.layers:
            if node in layer.members:
                return layer.level
        return 0


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), index]))


def _rank(strength: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Candidate node indices by strength descending, ties by node order."""
    vals = strength[candidates]
    q = np.round(vals / vals.max() / _RANK_RESOLUTION)
    order = np.lexsort((candidates, -q))
    return candidates[order]


def _extract_club(src, dst, omega, n_nodes, alive, cfg, rng):
    """One extraction round on the subgraph induced by ``alive``.

    Returns ``(members, p_value)`` or ``None`` when no prefix is significant.
    """
    keep = alive[src] & alive[dst]
    s, d, w = src[keep], dst[keep], omega[keep]
    if s.size == 0:
        return None
    strength = strengths_from_edges(n_nodes, s, d, w)
    candidates = np.flatnonzero(strength > 0)
    if candidates.size < cfg.min_club_size:
        return None
    ranked = _rank(strength, candidates)
    pos = np.full(n_nodes, np.iinfo(np.int64).max // 4, dtype=np.int64)
    pos[ranked] = np.arange(ranked.size)
    # prefix size at which each edge first lies inside the club
    entry = np.maximum(pos[s], pos[d]) + 1
    order = np.argsort(entry, kind="stable")
    entry, w = entry[order], w[order]
    sizes = np.arange(cfg.min_club_size, ranked.size + 1)
    inside = np.searchsorted(entry, sizes, side="right")
    observed = np.concatenate(([0.0], np.cumsum(w)))[inside]
    # null weights are drawn from every edge of the window, removed layers included
    tol = _SUM_TOLERANCE * float(omega.sum())
    shuffled = rng.permuted(np.broadcast_to(omega, (cfg.samples, omega.size)), axis=1)[:, : w.size]
    null = np.concatenate((np.zeros((cfg.samples, 1)), np.cumsum(shuffled, axis=1)), axis=1)[:, inside]
    hits = np.count_nonzero(null >= observed - tol, axis=0)
    pvals = (1.0 + hits) / (cfg.samples + 1.0)
    significant = np.flatnonzero(pvals <= cfg.alpha)
    if significant.size == 0:
        return None
    excess = observed[significant] - inside[significant] * omega.mean()
    best = significant[np.flatnonzero(excess >= excess.max() - tol)[0]]
    return ranked[: sizes[best]], float(pvals[best])


def itrich_window(weights: WindowedWeights, cfg: NullModelConfig) -> WindowPartition:
    """Extract the club layers of one window and partition its nodes.

    The result depends only on ``weights`` and ``(cfg.seed, weights.index)``.
    """
    nodes = weights.nodes
    n = len(nodes)
    active = weights.active_nodes
    alive = active.copy()
    rng = _rng(cfg.seed, weights.index)
    layers = []
    while True:
        found = _extract_club(weights.src, weights.dst, weights.omega, n, alive, cfg, rng)
        if found is None:
            break
        members, pval = found
        alive[members] = False
        layers.append(ClubLayer(len(layers) + 1, frozenset(nodes[i] for i in members.tolist()), pval))
    dense = frozenset().union(*(layer.members for layer in layers))
    sparse = frozenset(nodes[i] for i in np.flatnonzero(active).tolist()) - dense
    inactive = frozenset(nodes) - dense - sparse
    return WindowPartition(weights.index, tuple(layers), dense, sparse, inactive)


def partition_windows(windows: list[WindowedWeights], cfg: NullModelConfig,
                      workers: int = 1) -> list[WindowPartition]:
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda ww: itrich_window(ww, cfg), windows))
    return [itrich_window(ww, cfg) for ww in windows]


def dense_mask(partitions: list[WindowPartition], nodes: tuple[str, ...]) -> np.ndarray:
    """Boolean ``(n_nodes, n_windows)`` membership of the dense part."""
    index = {u: i for i, u in enumerate(nodes)}
    out = np.zeros((len(nodes), len(partitions)), dtype=bool)
    for j, part in enumerate(partitions):
        for u in part.dense:
            out[index[u], j] = True
    return out


def label_instants(partitions: list[WindowPartition], sg: StreamGraph,
                   windows: WindowSpec, degrees: np.ndarray | None = None) -> np.ndarray:
    """Per-instant labels as a ``(n_nodes, n_steps)`` array of ``b'D'``/``b'S'``/``b'P'``.

    A node is P wherever its instantaneous degree is 0, otherwise D if it
    belongs to the dense part of the enclosing window, else S.
    """
    if len(partitions) != windows.n_windows:
        raise ConsistencyError(
            f"{len(partitions)} partitions for {windows.n_windows} windows")
    if windows.n_steps != sg.n_steps:
        raise ConsistencyError(f"windows cover {windows.n_steps} steps, stream has {sg.n_steps}")
    if degrees is None:
        degrees = sg.degree_matrix()
    dense = dense_mask(partitions, sg.nodes)[:, windows.window_of_step()]
    labels = np.full(degrees.shape, ord("S"), dtype=np.uint8)
    labels[dense] = ord("D")
    labels[degrees == 0] = ord("P")
    return labels


def label_words(labels: np.ndarray) -> list[str]:
    return [row.tobytes().decode("ascii") for row in labels]


def partitions_csv(partitions: list[WindowPartition], nodes: tuple[str, ...]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["window_index", "node", "label", "layer_level"])
    for part in partitions:
        for u in nodes:
            if u in part.dense:
                label = "D"
            elif u in part.sparse:
                label = "S"
            else:
                label = "P"
            w.writerow([part.index, u, label, part.level_of(u)])
    return buf.getvalue()


def read_partitions_csv(text: str, nodes: tuple[str, ...]) -> list[WindowPartition]:
    rows: dict[int, dict[str, tuple[str, int]]] = {}
    for rec in csv.DictReader(io.StringIO(text)):
        rows.setdefault(int(rec["window_index"]), {})[rec["node"]] = (rec["label"], int(rec["layer_level"]))
    out = []
    for idx in sorted(rows):
        recs = rows[idx]
        levels: dict[int, set[str]] = {}
        for u, (_, lvl) in recs.items():
            if lvl:
                levels.setdefault(lvl, set()).add(u)
        layers = tuple(ClubLayer(lvl, frozenset(levels[lvl])) for lvl in sorted(levels))
        by = {c: frozenset(u for u, (lab, _) in recs.items() if lab == c) for c in "DSP"}
        out.append(WindowPartition(idx, layers, by["D"], by["S"], frozenset(nodes) - by["D"] - by["S"]))
    return out
