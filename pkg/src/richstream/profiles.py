"""Temporal D/S/P profiles, their indicator vectors and pairwise similarity.

Profiles are kept at grid resolution. Labels are stored as ``uint8``
arrays holding the ASCII codes of ``D``, ``S`` and ``P``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConsistencyError, DomainError
from .stream_graph import StreamGraph

CHANNELS = "DSP"
_CODES = {c: ord(c) for c in CHANNELS}


@dataclass(frozen=True)
class DSPProfile:
    node: str
    word: str

    def __post_init__(self):
        bad = set(self.word) - set(CHANNELS)
        if bad:
            raise DomainError(f"profile of {self.node!r} has letters outside DSP: {sorted(bad)}")

    def __len__(self):
        return len(self.word)


@dataclass(frozen=True)
class IndicatorTriple:
    R_D: np.ndarray
    R_S: np.ndarray
    R_P: np.ndarray

    def channel(self, c: str) -> np.ndarray:
        return getattr(self, "R_" + c)

    def __len__(self):
        return self.R_D.size


@dataclass(frozen=True)
class ChannelWeights:
    alpha_D: float = 1 / 3
    alpha_S: float = 1 / 3
    alpha_P: float = 1 / 3

    def __post_init__(self):
        vals = self.as_tuple()
        if min(vals) < 0:
            raise ConfigError(f"channel weights must be non-negative, got {vals}")
        if not math.isclose(sum(vals), 1.0, rel_tol=0, abs_tol=1e-9):
            raise ConfigError(f"channel weights must sum to 1, got {sum(vals)}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha_D, self.alpha_S, self.alpha_P)


@dataclass(frozen=True)
class MembershipRates:
    tau_A: float
    tau_D: float
    tau_S: float
    theta_D: int
    theta_S: int
    theta_P: int
    d_bar: float


def indicators(profile: DSPProfile) -> IndicatorTriple:
    codes = np.frombuffer(profile.word.encode("ascii"), dtype=np.uint8)
    return IndicatorTriple(*((codes == _CODES[c]).astype(np.uint8) for c in CHANNELS))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; two zero vectors count as identical, one as orthogonal."""
    na = float(np.dot(a, a))
    nb = float(np.dot(b, b))
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b)) / math.sqrt(na * nb)


def similarity(a: IndicatorTriple, b: IndicatorTriple, w: ChannelWeights = ChannelWeights()) -> float:
    if len(a) != len(b):
        raise DomainError(f"profile lengths differ: {len(a)} vs {len(b)}")
    total = 0.0
    for c, alpha in zip(CHANNELS, w.as_tuple()):
        total += alpha * cosine(a.channel(c).astype(np.float64), b.channel(c).astype(np.float64))
    return total


def _cosine_matrix(vectors: np.ndarray) -> np.ndarray:
    """All-pairs cosine of the rows, with the zero-vector convention."""
    x = vectors.astype(np.float64)
    gram = x @ x.T
    sq = np.diag(gram).copy()
    zero = sq == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = gram / np.sqrt(sq[:, None] * sq[None, :])
    out[zero, :] = 0.0
    out[:, zero] = 0.0
    out[np.ix_(zero, zero)] = 1.0
    return out


def similarity_matrix(labels: np.ndarray, w: ChannelWeights = ChannelWeights()) -> np.ndarray:
    """Weighted three-channel similarity between all rows of a label array."""
    out = np.zeros((labels.shape[0], labels.shape[0]))
    for c, alpha in zip(CHANNELS, w.as_tuple()):
        out += alpha * _cosine_matrix(labels == _CODES[c])
    return out


def degree_profile_similarity(sg: StreamGraph, u: str, v: str,
                              degrees: np.ndarray | None = None) -> float:
    i, j = sg.index_of(u), sg.index_of(v)
    if degrees is None:
        degrees = sg.degree_matrix()
    return cosine(degrees[i].astype(np.float64), degrees[j].astype(np.float64))


def degree_similarity_matrix(degrees: np.ndarray) -> np.ndarray:
    return _cosine_matrix(degrees)


def membership_rates(profile: DSPProfile, degrees) -> MembershipRates:
    deg = np.asarray(degrees)
    if deg.size != len(profile):
        raise DomainError(f"profile length {len(profile)} != degree sequence length {deg.size}")
    codes = np.frombuffer(profile.word.encode("ascii"), dtype=np.uint8)
    passive = codes == _CODES["P"]
    if not np.array_equal(passive, deg == 0):
        k = int(np.flatnonzero(passive != (deg == 0))[0])
        raise ConsistencyError(
            f"node {profile.node!r} step {k}: label {profile.word[k]} with degree {deg[k]}")
    length = len(profile)
    theta = {c: int(np.count_nonzero(codes == _CODES[c])) for c in CHANNELS}
    if length == 0:
        return MembershipRates(0.0, 0.0, 0.0, 0, 0, 0, 0.0)
    tau_d = theta["D"] / length
    tau_s = theta["S"] / length
    # summing the two rates (not 1 - theta_P / L) keeps tau_A == tau_D + tau_S bit-exact
    tau_a = tau_d + tau_s
    return MembershipRates(tau_a, tau_d, tau_s, theta["D"], theta["S"], theta["P"],
                           float(deg.mean()))


def all_rates(labels: np.ndarray, degrees: np.ndarray, nodes) -> list[MembershipRates]:
    return [membership_rates(DSPProfile(u, row.tobytes().decode("ascii")), deg)
            for u, row, deg in zip(nodes, labels, degrees)]


def pearson(x, y) -> float:
    """Sample Pearson correlation (two-pass)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise DomainError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise DomainError("need at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise DomainError("correlation undefined for a constant sequence")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


# -- exports --------------------------------------------------------------

def profiles_csv(nodes, labels: np.ndarray, node_meta: dict[str, str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", "class", "word"])
    for u, row in zip(nodes, labels):
        w.writerow([u, node_meta.get(u, ""), row.tobytes().decode("ascii")])
    return buf.getvalue()


def read_profiles_csv(text: str) -> tuple[list[str], np.ndarray]:
    nodes, rows = [], []
    for rec in csv.DictReader(io.StringIO(text)):
        nodes.append(rec["node"])
        rows.append(np.frombuffer(rec["word"].encode("ascii"), dtype=np.uint8))
    if not rows:
        return nodes, np.zeros((0, 0), dtype=np.uint8)
    return nodes, np.vstack(rows)


def rates_csv(nodes, rates: list[MembershipRates], node_meta: dict[str, str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["node", "class", "tau_A", "tau_D", "tau_S", "d_bar"])
    for u, r in zip(nodes, rates):
        w.writerow([u, node_meta.get(u, ""), repr(r.tau_A), repr(r.tau_D), repr(r.tau_S), repr(r.d_bar)])
    return buf.getvalue()


def matrix_csv(nodes, mat: np.ndarray, threshold: float | None = None) -> str:
    """Dense ``node x node`` CSV, or ``u,v,value`` triples above ``threshold``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if threshold is None:
        w.writerow([""] + list(nodes))
        for u, row in zip(nodes, mat):
            w.writerow([u] + [repr(float(x)) for x in row])
    else:
        w.writerow(["u", "v", "value"])
        ii, jj = np.triu_indices(len(nodes), 1)
        for i, j in zip(ii.tolist(), jj.tolist()):
            if mat[i, j] > threshold:
                w.writerow([nodes[i], nodes[j], repr(float(mat[i, j]))])
    return buf.getvalue()


def read_matrix_csv(text: str) -> tuple[list[str], np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    nodes = rows[0][1:]
    mat = np.array([[float(x) for x in r[1:]] for r in rows[1:]], dtype=np.float64)
    return nodes, mat.reshape(len(nodes), len(nodes))
