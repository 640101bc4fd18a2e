"""Stream graphs on a regular time grid.

A stream graph here is a fixed node set plus undirected contacts recorded
at instants ``t_origin + k * dt``. Events are stored as integer step
indices so that snapshots, degrees and window slicing are cheap array
operations.
"""
from __future__ import annotations

import gzip
import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .errors import ConfigError, DomainError, ParseError


def node_sort_key(node: str):
    """Order node ids numerically when they look like integers."""
    try:
        return (0, int(node), "")
    except ValueError:
        return (1, 0, node)


@dataclass(frozen=True)
class ContactEvent:
    t: int
    u: str
    v: str
    meta_u: str | None = None
    meta_v: str | None = None

    def __post_init__(self):
        if self.u == self.v:
            raise DomainError(f"loop contact on node {self.u!r}")


@dataclass(frozen=True, eq=False)
class StreamGraph:
    """Immutable stream graph on a ``dt`` grid.

    Attributes
    ----------
    nodes : tuple of str
        Node ids in canonical order; the index of a node in this tuple is
        used by every array-valued method.
    dt : int
        Resolution in seconds.
    origin : int or None
        Raw timestamp of step 0 (the first recorded event); ``None`` for an
        empty stream.
    n_steps : int
        Number of grid instants between the first and last event, inclusive.
    step, src, dst : ndarray
        Event arrays sorted by ``(step, src, dst)`` with ``src < dst``.
    """

    nodes: tuple[str, ...]
    dt: int
    origin: int | None
    n_steps: int
    step: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    node_meta: dict[str, str] = field(default_factory=dict)
    duplicates_dropped: int = 0

    def __post_init__(self):
        for arr in (self.step, self.src, self.dst):
            arr.setflags(write=False)

    @classmethod
    def from_events(
        cls,
        events: Iterable[ContactEvent],
        dt: int,
        nodes: Iterable[str] = (),
        node_meta: dict[str, str] | None = None,
        origin: int | None = None,
        n_steps: int | None = None,
    ) -> "StreamGraph":
        """Build a stream graph from raw-timestamp events.

        ``origin`` defaults to the earliest timestamp; every timestamp must
        sit on the ``dt`` grid anchored there. ``n_steps`` extends the period
        past the last event (synthetic streams with silent tails).
        """
        if dt <= 0:
            raise ConfigError(f"dt must be positive, got {dt}")
        events = list(events)
        meta = dict(node_meta or {})
        node_set = set(nodes)
        for ev in events:
            node_set.add(ev.u)
            node_set.add(ev.v)
            if ev.meta_u is not None:
                meta.setdefault(ev.u, ev.meta_u)
            if ev.meta_v is not None:
                meta.setdefault(ev.v, ev.meta_v)
        node_set.update(meta)
        ordered = tuple(sorted(node_set, key=node_sort_key))
        index = {u: i for i, u in enumerate(ordered)}
        if not events:
            empty = np.zeros(0, dtype=np.int64)
            if n_steps:
                return cls(ordered, dt, origin or 0, n_steps, empty, empty.copy(), empty.copy(), meta, 0)
            return cls(ordered, dt, None, 0, empty, empty.copy(), empty.copy(), meta, 0)
        if origin is None:
            origin = min(ev.t for ev in events)
        triples = set()
        for ev in events:
            off = ev.t - origin
            if off % dt:
                raise ParseError(f"timestamp {ev.t} is not on the {dt}s grid anchored at {origin}")
            if off < 0:
                raise DomainError(f"timestamp {ev.t} precedes origin {origin}")
            a, b = index[ev.u], index[ev.v]
            if a > b:
                a, b = b, a
            triples.add((off // dt, a, b))
        dropped = len(events) - len(triples)
        arr = np.array(sorted(triples), dtype=np.int64).reshape(-1, 3)
        n_steps = max(int(arr[:, 0].max()) + 1, n_steps or 0)
        return cls(ordered, dt, int(origin), n_steps, arr[:, 0].copy(), arr[:, 1].copy(),
                   arr[:, 2].copy(), meta, dropped)

    # -- basic accessors -------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return self.n_events == 0

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_events(self) -> int:
        return int(self.step.size)

    @property
    def t_start(self) -> int | None:
        return None if self.n_steps == 0 else 0

    @property
    def t_end(self) -> int | None:
        return None if self.n_steps == 0 else (self.n_steps - 1) * self.dt

    def index_of(self, u: str) -> int:
        try:
            return self._index[u]
        except KeyError:
            raise DomainError(f"unknown node {u!r}") from None

    @property
    def _index(self) -> dict[str, int]:
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = {u: i for i, u in enumerate(self.nodes)}
            object.__setattr__(self, "_index_cache", cache)
        return cache

    def step_of(self, t: int) -> int:
        """Convert a normalized timestamp to a grid step, validating it."""
        if self.n_steps == 0:
            raise DomainError("stream is empty")
        if t % self.dt:
            raise DomainError(f"t={t} is off the {self.dt}s grid")
        k = t // self.dt
        if not 0 <= k < self.n_steps:
            raise DomainError(f"t={t} outside [{self.t_start}, {self.t_end}]")
        return int(k)

    def events(self) -> Iterator[ContactEvent]:
        """Iterate events with raw (un-normalized) timestamps."""
        for k, a, b in zip(self.step.tolist(), self.src.tolist(), self.dst.tolist()):
            u, v = self.nodes[a], self.nodes[b]
            yield ContactEvent(self.origin + k * self.dt, u, v,
                               self.node_meta.get(u), self.node_meta.get(v))

    def step_bounds(self) -> np.ndarray:
        """Offsets into the event arrays: events of step k are ``[b[k], b[k+1])``."""
        return np.searchsorted(self.step, np.arange(self.n_steps + 1))

    def degree_matrix(self) -> np.ndarray:
        """Instantaneous degrees as an ``(n_nodes, n_steps)`` int array."""
        deg = np.zeros((self.n_nodes, self.n_steps), dtype=np.int64)
        np.add.at(deg, (self.src, self.step), 1)
        np.add.at(deg, (self.dst, self.step), 1)
        return deg

    def restrict(self, t_lo: int, t_hi: int) -> "StreamGraph":
        """Keep events with raw timestamp in ``[t_lo, t_hi)``.

        The node set and metadata are kept whole; the grid origin moves to
        the first retained event.
        """
        if self.is_empty:
            return self
        raw = self.origin + self.step * self.dt
        keep = (raw >= t_lo) & (raw < t_hi)
        if not keep.any():
            empty = np.zeros(0, dtype=np.int64)
            return StreamGraph(self.nodes, self.dt, None, 0, empty, empty.copy(), empty.copy(),
                               dict(self.node_meta), 0)
        step = self.step[keep]
        first = int(step[0])
        step = step - first
        return StreamGraph(self.nodes, self.dt, int(self.origin + first * self.dt),
                           int(step[-1]) + 1, step, self.src[keep].copy(), self.dst[keep].copy(),
                           dict(self.node_meta), 0)

    def same_as(self, other: "StreamGraph") -> bool:
        return (self.nodes == other.nodes and self.dt == other.dt and self.origin == other.origin
                and self.n_steps == other.n_steps and self.node_meta == other.node_meta
                and np.array_equal(self.step, other.step) and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst))


@dataclass(frozen=True)
class Snapshot:
    t: int
    adjacency: dict[str, frozenset[str]]

    def edges(self) -> set[frozenset[str]]:
        return {frozenset((u, v)) for u, nb in self.adjacency.items() for v in nb}


@dataclass(frozen=True)
class WindowSpec:
    """Disjoint consecutive windows over the grid.

    ``bounds[i]`` is the half-open step range ``[start, stop)`` of window i.
    """

    delta: int
    p: int
    dt: int
    bounds: tuple[tuple[int, int], ...]

    @property
    def n_windows(self) -> int:
        return len(self.bounds)

    @property
    def n_steps(self) -> int:
        return self.bounds[-1][1] if self.bounds else 0

    @property
    def windows(self) -> list[tuple[int, int]]:
        """Windows as half-open intervals in (normalized) seconds."""
        return [(a * self.dt, b * self.dt) for a, b in self.bounds]

    def step_counts(self) -> list[int]:
        return [b - a for a, b in self.bounds]

    def window_of_step(self) -> np.ndarray:
        out = np.empty(self.n_steps, dtype=np.int64)
        for i, (a, b) in enumerate(self.bounds):
            out[a:b] = i
        return out


# -- parsing / export -----------------------------------------------------

def parse_contacts(text: str, dt: int = 20) -> StreamGraph:
    """Parse ``t i j [Ci Cj]`` contact lines into a :class:`StreamGraph`.

    Raises
    ------
    ParseError
        On a malformed line, a loop record, or an off-grid timestamp. The
        message carries the 1-based line number.
    """
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    events = []
    lines = []
    for lineno, line in enumerate(text.splitlines(), 1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) < 3:
            raise ParseError(f"line {lineno}: expected at least 3 fields, got {len(fields)}", lineno)
        try:
            t = int(fields[0])
        except ValueError:
            try:
                tf = float(fields[0])
            except ValueError:
                raise ParseError(f"line {lineno}: non-numeric timestamp {fields[0]!r}", lineno) from None
            if not tf.is_integer():
                raise ParseError(f"line {lineno}: timestamp {fields[0]} is not whole seconds", lineno)
            t = int(tf)
        u, v = fields[1], fields[2]
        if u == v:
            raise ParseError(f"line {lineno}: loop record on node {u!r}", lineno)
        mu = fields[3] if len(fields) > 3 else None
        mv = fields[4] if len(fields) > 4 else None
        events.append(ContactEvent(t, u, v, mu, mv))
        lines.append(lineno)
    if events:
        origin = min(ev.t for ev in events)
        for ev, lineno in zip(events, lines):
            if (ev.t - origin) % dt:
                raise ParseError(
                    f"line {lineno}: timestamp {ev.t} is not on the {dt}s grid anchored at {origin}",
                    lineno)
    return StreamGraph.from_events(events, dt)


def read_contacts(path: str | os.PathLike, dt: int = 20) -> StreamGraph:
    """Read a contact file, transparently handling gzip compression."""
    with open(path, "rb") as fh:
        head = fh.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rt", encoding="utf-8") as fh:
        return parse_contacts(fh.read(), dt)


def export_contacts(sg: StreamGraph) -> str:
    """Canonical sorted event list in the ingestion layout (raw timestamps)."""
    buf = io.StringIO()
    has_meta = bool(sg.node_meta)
    for ev in sg.events():
        if has_meta:
            buf.write(f"{ev.t}\t{ev.u}\t{ev.v}\t{ev.meta_u or '-'}\t{ev.meta_v or '-'}\n")
        else:
            buf.write(f"{ev.t}\t{ev.u}\t{ev.v}\n")
    return buf.getvalue()


def ingestion_summary(sg: StreamGraph) -> dict[str, object]:
    return {
        "nodes": sg.n_nodes,
        "events": sg.n_events,
        "duplicates_dropped": sg.duplicates_dropped,
        "grid_violations": 0,
        "dt": sg.dt,
        "origin": sg.origin if sg.origin is not None else "empty",
        "steps": sg.n_steps,
        "classes": len(set(sg.node_meta.values())),
    }


# -- snapshots ------------------------------------------------------------

def snapshot(sg: StreamGraph, t: int) -> Snapshot:
    k = sg.step_of(t)
    lo, hi = np.searchsorted(sg.step, [k, k + 1])
    adj: dict[str, set[str]] = {u: set() for u in sg.nodes}
    for a, b in zip(sg.src[lo:hi].tolist(), sg.dst[lo:hi].tolist()):
        u, v = sg.nodes[a], sg.nodes[b]
        adj[u].add(v)
        adj[v].add(u)
    return Snapshot(t, {u: frozenset(nb) for u, nb in adj.items()})


def instantaneous_degree(sg: StreamGraph, u: str, t: int) -> int:
    i = sg.index_of(u)
    k = sg.step_of(t)
    lo, hi = np.searchsorted(sg.step, [k, k + 1])
    return int(np.count_nonzero(sg.src[lo:hi] == i) + np.count_nonzero(sg.dst[lo:hi] == i))


def make_windows(sg: StreamGraph, delta: int) -> WindowSpec:
    """Split the grid into consecutive windows of ``delta`` seconds.

    A trailing partial window is kept when the period is not a multiple of
    ``delta``.
    """
    if delta <= 0 or delta % sg.dt:
        raise ConfigError(f"window width {delta}s is not a positive multiple of dt={sg.dt}s")
    p = delta // sg.dt
    bounds = tuple((a, min(a + p, sg.n_steps)) for a in range(0, sg.n_steps, p))
    return WindowSpec(delta, p, sg.dt, bounds)
