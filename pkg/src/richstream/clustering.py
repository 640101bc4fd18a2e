"""k-means on channel-normalized profile embeddings, silhouette scoring and k sweeps.

Each profile is embedded as three concatenated blocks, block ``X`` being
``R_X * sqrt(alpha_X) / |R_X|``; the dot product of two embeddings then
equals the weighted cosine similarity whenever no channel is empty.
Silhouettes are computed on ``1 - similarity`` from the exact similarity
matrix.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .profiles import CHANNELS, ChannelWeights, IndicatorTriple

MAX_ITER = 300
# restarts per k-means call; the best start is kept
N_INIT = 10


@dataclass(frozen=True)
class ClusterResult:
    k: int
    labels: np.ndarray
    inertia: float
    seed: tuple[int, ...]
    n_iter: int = 0

    def assignment(self, nodes) -> dict[str, int]:
        return dict(zip(nodes, self.labels.tolist()))


@dataclass(frozen=True)
class SilhouetteCurve:
    ks: tuple[int, ...]
    scores: np.ndarray  # (len(ks), runs)
    results: tuple[tuple[ClusterResult, ...], ...]

    @property
    def mean(self) -> np.ndarray:
        return self.scores.mean(axis=1)

    @property
    def std(self) -> np.ndarray:
        return self.scores.std(axis=1)

    @property
    def best_k(self) -> int:
        return self.ks[int(np.argmax(self.mean))]

    @property
    def local_maxima(self) -> list[int]:
        """k values whose mean score beats both neighbours on the grid."""
        m = self.mean
        out = []
        for i, k in enumerate(self.ks):
            left = m[i - 1] if i > 0 else -np.inf
            right = m[i + 1] if i + 1 < len(m) else -np.inf
            if m[i] > left and m[i] > right:
                out.append(k)
        return out

    def best_result(self, k: int) -> ClusterResult:
        """Lowest-inertia run at ``k`` (first one on ties)."""
        runs = self.results[self.ks.index(k)]
        return min(runs, key=lambda r: r.inertia)


def embed_labels(labels: np.ndarray, w: ChannelWeights = ChannelWeights()) -> np.ndarray:
    """Embed a ``(n, L)`` label array as ``(n, 3L)`` channel-normalized rows."""
    n, length = labels.shape
    out = np.zeros((n, 3 * length))
    for b, (c, alpha) in enumerate(zip(CHANNELS, w.as_tuple())):
        block = (labels == ord(c)).astype(np.float64)
        norms = np.sqrt(block.sum(axis=1))
        nz = norms > 0
        block[nz] *= (np.sqrt(alpha) / norms[nz])[:, None]
        out[:, b * length:(b + 1) * length] = block
    return out


def embed(triples: list[IndicatorTriple], w: ChannelWeights = ChannelWeights()) -> np.ndarray:
    if not triples:
        return np.zeros((0, 0))
    length = len(triples[0])
    if any(len(t) != length for t in triples):
        raise ConfigError("indicator triples have different lengths")
    labels = np.zeros((len(triples), length), dtype=np.uint8)
    for i, t in enumerate(triples):
        for c in CHANNELS:
            labels[i, t.channel(c).astype(bool)] = ord(c)
    return embed_labels(labels, w)


def reduce_dims(x: np.ndarray) -> np.ndarray:
    """Coordinates of the rows in an orthonormal basis of their span.

    Pairwise distances, centroids and inertia are preserved, and k-means
    on ``n x n`` coordinates is much cheaper than on ``n x 3L``.
    """
    if x.shape[1] <= x.shape[0]:
        return x
    _, r = np.linalg.qr(x.T)
    return r.T.copy()


def _seed_rng(seed) -> np.random.Generator:
    if isinstance(seed, (tuple, list)):
        return np.random.default_rng(np.random.SeedSequence([int(s) & (2**64 - 1) for s in seed]))
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))


def _sq_dists(x: np.ndarray, centers: np.ndarray, x_sq: np.ndarray) -> np.ndarray:
    d = x_sq[:, None] - 2.0 * (x @ centers.T) + (centers * centers).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def _init_centers(x: np.ndarray, k: int, rng: np.random.Generator, x_sq) -> np.ndarray:
    """Greedy k-means++ seeding.

    Each new centre is the best of ``2 + log k`` candidates drawn with
    probability proportional to squared distance; once every point is
    covered the remaining centres are uniform picks.
    """
    n = x.shape[0]
    trials = 2 + int(np.log(k))
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(x, x[chosen], x_sq)[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            cand = rng.choice(n, size=trials, p=closest / total)
            potential = np.minimum(closest[:, None], _sq_dists(x, x[cand], x_sq)).sum(axis=0)
            idx = int(cand[np.argmin(potential)])
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(rest))
        chosen.append(idx)
        closest = np.minimum(closest, _sq_dists(x, x[[idx]], x_sq)[:, 0])
    return x[chosen].copy()


def _repair(labels: np.ndarray, dists: np.ndarray, k: int) -> np.ndarray:
    """Give every empty cluster the point farthest from its current centre."""
    counts = np.bincount(labels, minlength=k)
    own = dists[np.arange(labels.size), labels]
    for c in np.flatnonzero(counts == 0).tolist():
        movable = counts[labels] > 1
        cand = np.flatnonzero(movable)
        pt = int(cand[np.argmax(own[cand])])
        counts[labels[pt]] -= 1
        labels[pt] = c
        counts[c] = 1
        own[pt] = 0.0
    return labels


def _lloyd(x, k, rng, x_sq, max_iter):
    n = x.shape[0]
    centers = _init_centers(x, k, rng, x_sq)
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        dists = _sq_dists(x, centers, x_sq)
        new = _repair(np.argmin(dists, axis=1), dists, k)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        onehot = np.zeros((n, k))
        onehot[np.arange(n), labels] = 1.0
        centers = (onehot.T @ x) / onehot.sum(axis=0)[:, None]
    diff = x - centers[labels]
    return labels, float((diff * diff).sum()), it


def kmeans(x: np.ndarray, k: int, seed=0, max_iter: int = MAX_ITER,
           n_init: int = N_INIT) -> ClusterResult:
    """Lloyd's algorithm from seeded greedy k-means++ starts.

    Each start iterates until the assignment no longer changes or for
    ``max_iter`` rounds; empty clusters are reseeded from the farthest
    point. The lowest-inertia start of ``n_init`` is returned (the first
    one on ties).
    """
    n = x.shape[0]
    if not 2 <= k <= n:
        raise ConfigError(f"k={k} outside [2, {n}]")
    if n_init < 1:
        raise ConfigError(f"n_init must be >= 1, got {n_init}")
    rng = _seed_rng(seed)
    x_sq = (x * x).sum(axis=1)
    best = None
    for _ in range(n_init):
        labels, inertia, it = _lloyd(x, k, rng, x_sq, max_iter)
        if best is None or inertia < best[1]:
            best = (labels, inertia, it)
    seed_t = tuple(seed) if isinstance(seed, (tuple, list)) else (int(seed),)
    return ClusterResult(k, best[0], best[1], seed_t, best[2])


def silhouette(labels, dist: np.ndarray) -> float:
    """Mean silhouette over all points; singleton clusters score 0."""
    labels = np.asarray(labels.labels if isinstance(labels, ClusterResult) else labels)
    n = labels.size
    ids, inv = np.unique(labels, return_inverse=True)
    k = ids.size
    if k < 2:
        raise ConfigError("silhouette needs at least two clusters")
    onehot = np.zeros((n, k))
    onehot[np.arange(n), inv] = 1.0
    counts = onehot.sum(axis=0)
    sums = dist @ onehot
    own_count = counts[inv] - 1
    a = sums[np.arange(n), inv] / np.where(own_count > 0, own_count, 1)
    means = sums / counts[None, :]
    means[np.arange(n), inv] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 0, (b - a) / denom, 0.0)
    s[own_count == 0] = 0.0
    return float(s.mean())


def distance_from_similarity(sim: np.ndarray) -> np.ndarray:
    d = 1.0 - sim
    np.fill_diagonal(d, 0.0)
    d = np.clip(d, 0.0, None)
    return (d + d.T) / 2.0


def run_seed(master_seed: int, k: int, run: int) -> tuple[int, int, int]:
    return (int(master_seed), int(k), int(run))


def sweep_k(x: np.ndarray, dist: np.ndarray, k_range, runs: int = 100, master_seed: int = 0,
            workers: int = 1) -> SilhouetteCurve:
    """k-means + silhouette for every ``k`` in ``k_range``, ``runs`` times each."""
    if runs < 1:
        raise ConfigError(f"runs must be >= 1, got {runs}")
    ks = tuple(int(k) for k in k_range)
    coords = reduce_dims(x)

    def cell(k_run):
        k, r = k_run
        res = kmeans(coords, k, run_seed(master_seed, k, r))
        return res, silhouette(res.labels, dist)

    cells = [(k, r) for k in ks for r in range(runs)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(cell, cells))
    else:
        out = [cell(c) for c in cells]
    scores = np.array([s for _, s in out], dtype=np.float64).reshape(len(ks), runs)
    results = tuple(tuple(res for res, _ in out[i * runs:(i + 1) * runs]) for i in range(len(ks)))
    return SilhouetteCurve(ks, scores, results)


# -- exports --------------------------------------------------------------

def assignments_csv(nodes, labels: np.ndarray, node_meta: dict[str, str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", "class", "cluster"])
    for u, c in zip(nodes, labels.tolist()):
        w.writerow([u, node_meta.get(u, ""), c])
    return buf.getvalue()


def curve_csv(curve: SilhouetteCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "mean_score", "std_score", "local_max"])
    maxima = set(curve.local_maxima)
    for k, m, s in zip(curve.ks, curve.mean.tolist(), curve.std.tolist()):
        w.writerow([k, repr(m), repr(s), int(k in maxima)])
    return buf.getvalue()


def contingency(nodes, labels: np.ndarray, node_meta: dict[str, str]) -> tuple[list[str], np.ndarray]:
    """Cluster-by-class head counts; rows are clusters, columns sorted classes."""
    classes = sorted({node_meta.get(u, "") for u in nodes})
    col = {c: j for j, c in enumerate(classes)}
    k = int(labels.max()) + 1 if labels.size else 0
    table = np.zeros((k, len(classes)), dtype=np.int64)
    for u, c in zip(nodes, labels.tolist()):
        table[c, col[node_meta.get(u, "")]] += 1
    return classes, table


def contingency_csv(classes: list[str], table: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cluster"] + [c or "(none)" for c in classes])
    for i, row in enumerate(table.tolist()):
        w.writerow([i] + row)
    return buf.getvalue()


def read_assignments_csv(text: str) -> dict[str, int]:
    return {rec["node"]: int(rec["cluster"]) for rec in csv.DictReader(io.StringIO(text))}
