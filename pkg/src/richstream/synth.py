"""Synthetic stream graphs with planted clubs and activity schedules."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .stream_graph import ContactEvent, StreamGraph


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a planted-club stream.

    ``schedule[u][w]`` switches node ``u`` on in window ``w``. When
    ``club_members`` is omitted, the club of window ``w`` is the first
    ``club_sizes[w]`` active nodes in index order.
    """

    n: int
    club_sizes: tuple[int, ...]
    p_in: float
    p_out: float
    dt: int = 20
    delta: int = 300
    seed: int = 0
    schedule: np.ndarray | None = None
    club_members: tuple[tuple[int, ...], ...] | None = None
    node_classes: tuple[str, ...] | None = None

    @property
    def n_windows(self) -> int:
        return len(self.club_sizes)

    @property
    def p(self) -> int:
        return self.delta // self.dt

    def active(self) -> np.ndarray:
        if self.schedule is None:
            return np.ones((self.n, self.n_windows), dtype=bool)
        return np.asarray(self.schedule, dtype=bool)

    def validate(self):
        if not 0.0 <= self.p_out < self.p_in <= 1.0:
            raise ConfigError(f"need 0 <= p_out < p_in <= 1, got p_out={self.p_out}, p_in={self.p_in}")
        if self.delta <= 0 or self.delta % self.dt:
            raise ConfigError(f"delta={self.delta} is not a positive multiple of dt={self.dt}")
        act = self.active()
        if act.shape != (self.n, self.n_windows):
            raise ConfigError(f"schedule shape {act.shape} != ({self.n}, {self.n_windows})")
        for w, size in enumerate(self.club_sizes):
            if size > self.n:
                raise ConfigError(f"club of size {size} exceeds n={self.n}")
            if size > act[:, w].sum():
                raise ConfigError(f"window {w}: club of size {size} exceeds {act[:, w].sum()} active nodes")
            if self.club_members is not None:
                members = self.club_members[w]
                if len(members) != size:
                    raise ConfigError(f"window {w}: {len(members)} club members listed, size is {size}")
                if not act[list(members), w].all():
                    raise ConfigError(f"window {w}: club lists inactive nodes")


@dataclass(frozen=True)
class GroundTruth:
    clubs: tuple[frozenset[str], ...]
    profile_class: dict[str, str] = field(default_factory=dict)

    def csv(self, nodes: tuple[str, ...], active: np.ndarray) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["window", "node", "planted_label"])
        for j, club in enumerate(self.clubs):
            for i, u in enumerate(nodes):
                label = "club" if u in club else ("background" if active[i, j] else "off")
                w.writerow([j, u, label])
        return buf.getvalue()


def node_name(i: int) -> str:
    return str(i)


def generate(spec: SynthSpec) -> tuple[StreamGraph, GroundTruth]:
    """Sample a stream: club pairs with ``p_in``, other active pairs with ``p_out``.

    Edges are drawn independently at every instant.
    """
    spec.validate()
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed & (2**64 - 1)))
    act = spec.active()
    n, p = spec.n, spec.p
    iu, ju = np.triu_indices(n, 1)
    names = [node_name(i) for i in range(n)]
    clubs = []
    events = []
    for w in range(spec.n_windows):
        if spec.club_members is not None:
            members = np.array(sorted(spec.club_members[w]), dtype=np.int64)
        else:
            members = np.flatnonzero(act[:, w])[: spec.club_sizes[w]]
        in_club = np.zeros(n, dtype=bool)
        in_club[members] = True
        clubs.append(frozenset(names[i] for i in members.tolist()))
        prob = np.where(in_club[iu] & in_club[ju], spec.p_in, spec.p_out)
        prob = np.where(act[iu, w] & act[ju, w], prob, 0.0)
        draws = rng.random((p, iu.size)) < prob
        for k, e in zip(*np.nonzero(draws)):
            t = (w * p + int(k)) * spec.dt
            events.append(ContactEvent(t, names[iu[e]], names[ju[e]]))
    meta = {}
    if spec.node_classes is not None:
        meta = {names[i]: c for i, c in enumerate(spec.node_classes)}
    sg = StreamGraph.from_events(events, spec.dt, nodes=names, node_meta=meta, origin=0,
                                 n_steps=spec.n_windows * p)
    return sg, GroundTruth(tuple(clubs), dict(meta))
