"""Independent brute-force references used by the test suite.

Nothing here imports the code under test except plain data containers, so
a bug in the package cannot leak into its own oracle.
"""
from __future__ import annotations

import itertools
import math


def brute_snapshot(events, nodes, t):
    """Adjacency at raw time ``t`` by linear scan over ``(t, u, v)`` tuples."""
    adj = {u: set() for u in nodes}
    for tt, u, v in events:
        if tt == t:
            adj[u].add(v)
            adj[v].add(u)
    return adj


def triangle_weight(adj, u, v):
    """Edge weight by explicit triangle enumeration; fractions kept exact."""
    if v not in adj[u]:
        return 0.0
    triangles = 0
    for w in adj:
        if w not in (u, v) and w in adj[u] and w in adj[v]:
            triangles += 1
    du, dv = len(adj[u]), len(adj[v])
    return triangles * du * dv / (du + dv)


def brute_strength(adj, u):
    return sum(triangle_weight(adj, u, v) for v in adj[u])


def brute_window_strength(events, nodes, times, u):
    """Mean of the per-instant strength over the raw instants ``times``."""
    return sum(brute_strength(brute_snapshot(events, nodes, t), u) for t in times) / len(times)


def naive_cosine(a, b):
    na = sum(x * x for x in a)
    nb = sum(x * x for x in b)
    if na == 0 and nb == 0:
        return 1.0
    if na == 0 or nb == 0:
        return 0.0
    return sum(x * y for x, y in zip(a, b)) / (math.sqrt(na) * math.sqrt(nb))


def naive_similarity(word_a, word_b, weights=(1 / 3, 1 / 3, 1 / 3)):
    total = 0.0
    for letter, alpha in zip("DSP", weights):
        ra = [1 if c == letter else 0 for c in word_a]
        rb = [1 if c == letter else 0 for c in word_b]
        total += alpha * naive_cosine(ra, rb)
    return total


def naive_silhouette(labels, dist):
    n = len(labels)
    scores = []
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            scores.append(0.0)
            continue
        a = sum(dist[i][j] for j in own) / len(own)
        b = math.inf
        for c in set(labels):
            if c == labels[i]:
                continue
            members = [j for j in range(n) if labels[j] == c]
            b = min(b, sum(dist[i][j] for j in members) / len(members))
        m = max(a, b)
        scores.append(0.0 if m == 0 else (b - a) / m)
    return sum(scores) / n


def best_two_partition_inertia(points):
    """Minimum k-means inertia over every split into two non-empty groups."""
    n = len(points)
    best = math.inf
    for mask in range(1, 2 ** (n - 1)):
        groups = ([], [])
        for i in range(n):
            groups[(mask >> i) & 1].append(points[i])
        total = 0.0
        for g in groups:
            dim = len(g[0])
            centre = [sum(p[d] for p in g) / len(g) for d in range(dim)]
            total += sum(sum((p[d] - centre[d]) ** 2 for d in range(dim)) for p in g)
        best = min(best, total)
    return best


def scan_labels(events, nodes, origin, dt, n_steps, dense_by_window, p):
    """Per-instant D/S/P words re-derived from raw ``(t, u, v)`` events."""
    deg = {u: [0] * n_steps for u in nodes}
    for t, u, v in events:
        k = (t - origin) // dt
        deg[u][k] += 1
        deg[v][k] += 1
    words = {}
    for u in nodes:
        out = []
        for k in range(n_steps):
            if deg[u][k] == 0:
                out.append("P")
            elif u in dense_by_window[k // p]:
                out.append("D")
            else:
                out.append("S")
        words[u] = "".join(out)
    return words


def two_pass_pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def all_pairs(nodes):
    return itertools.combinations(nodes, 2)
