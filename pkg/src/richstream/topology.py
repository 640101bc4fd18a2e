"""Topological edge weights and node strengths, per instant and per window.

For an edge ``(u, v)`` present at instant ``t`` the weight is

    |N_t(u) & N_t(v)| * |N_t(u)| * |N_t(v)| / (|N_t(u)| + |N_t(v)|)

with the proportionality constant fixed to 1; absent pairs weigh 0. A
node's strength is the sum of its incident weights. Window values are the
arithmetic mean over the window's grid steps.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .stream_graph import Snapshot, StreamGraph


def edge_weight_t(snapshot: Snapshot, u: str, v: str) -> float:
    if u == v:
        raise DomainError("edge weight needs two distinct nodes")
    adj = snapshot.adjacency
    for w in (u, v):
        if w not in adj:
            raise DomainError(f"unknown node {w!r}")
    nu, nv = adj[u], adj[v]
    if v not in nu:
        return 0.0
    return len(nu & nv) * len(nu) * len(nv) / (len(nu) + len(nv))


def node_strength_t(snapshot: Snapshot, u: str) -> float:
    if u not in snapshot.adjacency:
        raise DomainError(f"unknown node {u!r}")
    return float(sum(edge_weight_t(snapshot, u, v) for v in sorted(snapshot.adjacency[u])))


def step_edge_weights(n_nodes: int, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Weights of the edges ``(src[e], dst[e])`` of a single instant.

    Common-neighbour counts come from set intersections on the instant's
    adjacency lists; instants are sparse so this beats a matrix product.
    """
    m = src.size
    if m == 0:
        return np.zeros(0)
    deg = np.bincount(src, minlength=n_nodes) + np.bincount(dst, minlength=n_nodes)
    nbrs: dict[int, set[int]] = {}
    for a, b in zip(src.tolist(), dst.tolist()):
        nbrs.setdefault(a, set()).add(b)
        nbrs.setdefault(b, set()).add(a)
    common = np.fromiter((len(nbrs[a] & nbrs[b]) for a, b in zip(src.tolist(), dst.tolist())),
                         dtype=np.float64, count=m)
    du = deg[src].astype(np.float64)
    dv = deg[dst].astype(np.float64)
    return common * du * dv / (du + dv)


def instant_weights(sg: StreamGraph) -> np.ndarray:
    """Per-event weight, aligned with ``sg.step``/``sg.src``/``sg.dst``."""
    out = np.zeros(sg.n_events)
    bounds = sg.step_bounds()
    for k in range(sg.n_steps):
        lo, hi = bounds[k], bounds[k + 1]
        if hi > lo:
            out[lo:hi] = step_edge_weights(sg.n_nodes, sg.src[lo:hi], sg.dst[lo:hi])
    return out


@dataclass(frozen=True)
class WindowedWeights:
    """Window-averaged weights over the edges present at least once.

    Edge arrays are sorted by ``(src, dst)`` with ``src < dst`` (node
    indices into ``nodes``).
    """

    index: int
    nodes: tuple[str, ...]
    src: np.ndarray
    dst: np.ndarray
    omega: np.ndarray
    support: np.ndarray
    n_steps: int

    @property
    def strengths(self) -> np.ndarray:
        return strengths_from_edges(len(self.nodes), self.src, self.dst, self.omega)

    @property
    def edge_weights(self) -> dict[frozenset[str], float]:
        return {frozenset((self.nodes[a], self.nodes[b])): float(w)
                for a, b, w in zip(self.src.tolist(), self.dst.tolist(), self.omega)}

    @property
    def node_strengths(self) -> dict[str, float]:
        return dict(zip(self.nodes, self.strengths.tolist()))

    @property
    def active_nodes(self) -> np.ndarray:
        """Boolean mask of nodes with at least one contact in the window."""
        mask = np.zeros(len(self.nodes), dtype=bool)
        mask[self.src] = True
        mask[self.dst] = True
        return mask

    def scaled(self, c: float) -> "WindowedWeights":
        return WindowedWeights(self.index, self.nodes, self.src, self.dst, self.omega * c,
                               self.support, self.n_steps)


def strengths_from_edges(n_nodes: int, src: np.ndarray, dst: np.ndarray,
                         omega: np.ndarray) -> np.ndarray:
    # bincount accumulates in array order, which keeps the sum deterministic
    return (np.bincount(src, weights=omega, minlength=n_nodes)
            + np.bincount(dst, weights=omega, minlength=n_nodes))


def window_weights(sg: StreamGraph, window: tuple[int, int], p_effective: int | None = None,
                   index: int = 0, weights: np.ndarray | None = None) -> WindowedWeights:
    """Average instant weights over the grid steps ``[start, stop)``.

    Parameters
    ----------
    window : (int, int)
        Half-open step range, as stored in ``WindowSpec.bounds``.
    p_effective : int, optional
        Step count of the window; defaults to ``stop - start``.
    weights : ndarray, optional
        Precomputed :func:`instant_weights`, to avoid recomputing per window.
    """
    start, stop = window
    p = stop - start if p_effective is None else p_effective
    if p <= 0 or stop <= start:
        raise DomainError(f"window {window} has no grid steps")
    if weights is None:
        weights = instant_weights(sg)
    lo, hi = np.searchsorted(sg.step, [start, stop])
    n = sg.n_nodes
    key = sg.src[lo:hi] * n + sg.dst[lo:hi]
    uniq, inv = np.unique(key, return_inverse=True)
    total = np.zeros(uniq.size)
    np.add.at(total, inv, weights[lo:hi])
    support = np.bincount(inv, minlength=uniq.size)
    return WindowedWeights(index, sg.nodes, uniq // n, uniq % n, total / p, support, p)


def all_window_weights(sg: StreamGraph, spec) -> list[WindowedWeights]:
    w = instant_weights(sg)
    return [window_weights(sg, b, index=i, weights=w) for i, b in enumerate(spec.bounds)]


def weights_csv(windows: list[WindowedWeights]) -> tuple[str, str]:
    """Render the edge and node tables of the per-window weight dump."""
    edges, nodes = io.StringIO(), io.StringIO()
    ew, nw = csv.writer(edges, lineterminator="\n"), csv.writer(nodes, lineterminator="\n")
    ew.writerow(["window_index", "u", "v", "omega_bar"])
    nw.writerow(["window_index", "node", "delta_bar"])
    for ww in windows:
        for a, b, om in zip(ww.src.tolist(), ww.dst.tolist(), ww.omega.tolist()):
            ew.writerow([ww.index, ww.nodes[a], ww.nodes[b], repr(om)])
        st = ww.strengths
        for i in np.flatnonzero(ww.active_nodes).tolist():
            nw.writerow([ww.index, ww.nodes[i], repr(float(st[i]))])
    return edges.getvalue(), nodes.getvalue()
