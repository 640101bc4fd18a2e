from __future__ import annotations

import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from richstream.stream_graph import ContactEvent, StreamGraph  # noqa: E402

DATA = Path(__file__).parent / "data"
PRIMARY = DATA / "primaryschool.csv.gz"
HIGHSCHOOL = DATA / "highschool_2013.csv.gz"
# calendar days (UTC) analysed: day 1 of the primary school, day 3 of the preparatory classes
PRIMARY_DAY = (1254355200, 1254355200 + 86400)
HIGHSCHOOL_DAY = (1386115200, 1386115200 + 86400)

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_events(rng: np.random.Generator, n_nodes: int, n_steps: int, density: float,
                  dt: int = 20, origin: int = 0) -> list[tuple[int, str, str]]:
    out = []
    for k in range(n_steps):
        for a in range(n_nodes):
            for b in range(a + 1, n_nodes):
                if rng.random() < density:
                    out.append((origin + k * dt, str(a), str(b)))
    return out


def to_stream(events, n_nodes: int, dt: int = 20, origin: int | None = None,
              n_steps: int | None = None) -> StreamGraph:
    return StreamGraph.from_events([ContactEvent(t, u, v) for t, u, v in events], dt,
                                   nodes=[str(i) for i in range(n_nodes)], origin=origin,
                                   n_steps=n_steps)


@st.composite
def small_streams(draw, max_nodes: int = 9, max_steps: int = 6):
    """Raw ``(t, u, v)`` events on a 20 s grid anchored at 0, plus the node count."""
    n = draw(st.integers(2, max_nodes))
    steps = draw(st.integers(1, max_steps))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = draw(st.sets(st.tuples(st.integers(0, steps - 1), st.sampled_from(pairs)),
                          min_size=1, max_size=40))
    events = sorted({(k * 20, str(a), str(b)) for k, (a, b) in chosen})
    return n, events


words = st.text(alphabet="DSP", min_size=1, max_size=40)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one pass/fail line per acceptance criterion, echoed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
