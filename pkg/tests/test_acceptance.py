"""Acceptance criteria, each checked at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line (printed immediately and
repeated in the terminal summary) before asserting.
"""
import csv
import filecmp
import itertools
import time

import numpy as np
import pytest

from conftest import (ACCEPTANCE_LINES, HIGHSCHOOL, HIGHSCHOOL_DAY, PRIMARY, PRIMARY_DAY,
                      random_events, to_stream)
from oracles import naive_silhouette, naive_similarity, triangle_weight
from richstream.cli import main
from richstream.clustering import (contingency, distance_from_similarity, embed_labels, silhouette,
                                   sweep_k)
from richstream.profiles import (ChannelWeights, DSPProfile, all_rates, indicators,
                                 read_profiles_csv, similarity, similarity_matrix)
from richstream.richclub import NullModelConfig, itrich_window, label_instants, partition_windows
from richstream.stream_graph import make_windows
from richstream.synth import SynthSpec, generate
from richstream.topology import WindowedWeights, all_window_weights, instant_weights, window_weights


def record(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_summary(path):
    out = {}
    for line in path.read_text().splitlines():
        key, _, value = line.partition(": ")
        out[key] = value
    return out


def run_pipeline(input_path, day, out, workers=1):
    argv = ["run", "--input", str(input_path), "--out", str(out), "--seed", "0",
            "--day-start", str(day[0]), "--day-end", str(day[1]), "--workers", str(workers)]
    t0 = time.perf_counter()
    code = main(argv)
    return code, time.perf_counter() - t0


@pytest.fixture(scope="session")
def dataset_runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("datasets")
    runs = {}
    for name, path, day in (("primary", PRIMARY, PRIMARY_DAY), ("highschool", HIGHSCHOOL, HIGHSCHOOL_DAY)):
        code, seconds = run_pipeline(path, day, root / name)
        runs[name] = (root / name, code, seconds)
    return runs


# -- 1: exact identities --------------------------------------------------

def test_criterion_1_exact_identities():
    cases = bad = 0
    for seed in range(300):
        rng = np.random.default_rng(seed)
        n, steps = int(rng.integers(3, 16)), int(rng.integers(1, 60))
        sg = to_stream(random_events(rng, n, steps, float(rng.uniform(0.02, 0.4))), n,
                       origin=0, n_steps=steps)
        spec = make_windows(sg, 20 * int(rng.integers(1, 16)))
        parts = partition_windows(all_window_weights(sg, spec), NullModelConfig(seed=seed, samples=40))
        degrees = sg.degree_matrix()
        labels = label_instants(parts, sg, spec, degrees)
        for u, row, rate in zip(sg.nodes, labels, all_rates(labels, degrees, sg.nodes)):
            cases += 1
            tri = indicators(DSPProfile(u, row.tobytes().decode()))
            ok = (rate.tau_A == rate.tau_D + rate.tau_S
                  and rate.theta_D + rate.theta_S + rate.theta_P == steps
                  and np.all(tri.R_D + tri.R_S + tri.R_P == 1)
                  and np.array_equal(row == ord("P"), degrees[sg.index_of(u)] == 0))
            bad += not ok
    record(1, bad == 0, f"{cases} node profiles, {bad} identity violations")


# -- 2: oracle equivalence -------------------------------------------------

def test_criterion_2_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = {"omega": 0, "delta_bar": 0.0, "silhouette": 0.0, "similarity": 0.0}
    for _ in range(1000):
        n, steps = int(rng.integers(2, 31)), int(rng.integers(1, 4))
        events = random_events(rng, n, steps, float(rng.uniform(0.05, 0.6)))
        sg = to_stream(events, n, origin=0, n_steps=steps)
        nodes = [str(i) for i in range(n)]
        adjs = []
        for k in range(steps):
            adj = {u: set() for u in nodes}
            for t, u, v in events:
                if t == 20 * k:
                    adj[u].add(v)
                    adj[v].add(u)
            adjs.append(adj)
        # instant weights: exact match, event by event
        w = instant_weights(sg)
        for i, (k, a, b) in enumerate(zip(sg.step.tolist(), sg.src.tolist(), sg.dst.tolist())):
            worst["omega"] += w[i] != triangle_weight(adjs[k], sg.nodes[a], sg.nodes[b])
        # window strength against the per-step mean of brute strengths
        strengths = window_weights(sg, (0, steps), weights=w).node_strengths
        for u in nodes:
            ref = sum(sum(triangle_weight(adj, u, v) for v in adj[u]) for adj in adjs) / steps
            worst["delta_bar"] = max(worst["delta_bar"], abs(strengths[u] - ref))
        # silhouette on a random labelling of a random metric
        pts = rng.normal(size=(n, 3))
        dist = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
        k = int(rng.integers(2, n + 1))
        labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
        worst["silhouette"] = max(worst["silhouette"],
                                  abs(silhouette(labels, dist) - naive_silhouette(labels.tolist(),
                                                                                  dist.tolist())))
        # similarity of two random words under random channel weights
        length = int(rng.integers(1, 60))
        a, b = ("".join(rng.choice(list("DSP"), size=length)) for _ in range(2))
        raw = rng.random(3)
        cw = ChannelWeights(raw[0] / raw.sum(), raw[1] / raw.sum(), 1 - (raw[0] + raw[1]) / raw.sum())
        s = similarity(indicators(DSPProfile("a", a)), indicators(DSPProfile("b", b)), cw)
        worst["similarity"] = max(worst["similarity"], abs(s - naive_similarity(a, b, cw.as_tuple())))
    seconds = time.perf_counter() - t0
    ok = (worst["omega"] == 0 and worst["delta_bar"] <= 1e-9 and worst["silhouette"] <= 1e-12
          and worst["similarity"] <= 1e-12 and seconds < 60)
    detail = f"{worst.pop('omega')} omega mismatches, " + ", ".join(
        f"{k} max err {v:.1e}" for k, v in worst.items())
    record(2, ok, f"1000 cases, {detail}, {seconds:.1f}s")


# -- 3: scalar invariance --------------------------------------------------

def random_window(rng, n, index):
    club = int(rng.integers(0, 10))
    nodes = tuple(str(i) for i in range(n))
    rows = []
    for a, b in itertools.combinations(range(n), 2):
        if a < club and b < club:
            rows.append((a, b, 5.0 * (1.0 + rng.random())))
        elif rng.random() < 0.2:
            rows.append((a, b, rng.random() * rng.integers(0, 4)))
    arr = np.array(rows, dtype=np.float64).reshape(-1, 3)
    return WindowedWeights(index, nodes, arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64),
                           arr[:, 2], np.ones(len(rows), dtype=np.int64), 15)


def test_criterion_3_scalar_invariance():
    rng = np.random.default_rng(3)
    cfg = NullModelConfig(seed=3)
    changed = 0
    for i in range(100):
        ww = random_window(rng, int(rng.integers(8, 40)), i)
        base = itrich_window(ww, cfg)
        for c in (0.1, 7.0, 1000.0):
            other = itrich_window(ww.scaled(c), cfg)
            changed += (base.dense, base.sparse, base.inactive) != (other.dense, other.sparse,
                                                                    other.inactive)
    record(3, changed == 0, f"100 windows x 3 factors, {changed} partitions changed")


# -- 4: planted recovery and null calibration -------------------------------

def test_criterion_4_planted_recovery_and_calibration():
    t0 = time.perf_counter()
    recalls, precisions = [], []
    for seed in range(50):
        sg, truth = generate(SynthSpec(60, (8,) * 10, 0.8, 0.02, seed=seed))
        spec = make_windows(sg, 300)
        parts = partition_windows(all_window_weights(sg, spec), NullModelConfig(seed=seed))
        for part, club in zip(parts, truth.clubs):
            background = set(sg.nodes) - club
            recalls.append(len(club & part.dense) / len(club))
            precisions.append(len(background & (part.sparse | part.inactive)) / len(background))
    cfg = NullModelConfig()
    false_dense = 0
    for seed in range(200):
        rng = np.random.default_rng(10_000 + seed)
        nodes = tuple(str(i) for i in range(25))
        pairs = [p for p in itertools.combinations(range(25), 2) if rng.random() < 0.2]
        arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
        ww = WindowedWeights(seed, nodes, arr[:, 0], arr[:, 1], np.ones(len(pairs)),
                             np.ones(len(pairs), dtype=np.int64), 15)
        false_dense += bool(itrich_window(ww, cfg).dense)
    seconds = time.perf_counter() - t0
    recall, precision, rate = np.mean(recalls), np.mean(precisions), false_dense / 200
    ok = recall >= 0.95 and precision >= 0.95 and rate <= 2 * cfg.alpha and seconds < 120
    record(4, ok, f"recall {recall:.3f}, background precision {precision:.3f}, "
                  f"false-dense rate {rate:.3f} (limit {2 * cfg.alpha:.2f}), {seconds:.1f}s")


# -- 5: dataset reproduction -------------------------------------------------

@pytest.mark.slow
def test_criterion_5_dataset_reproduction(dataset_runs):
    facts = {}
    for name, (out, code, seconds) in dataset_runs.items():
        summary = read_summary(out / "rates_summary.txt")
        facts[name] = dict(code=code, seconds=seconds, nodes=int(summary["nodes"]),
                           length=int(summary["profile_length"]),
                           pearson=float(summary["pearson_tau_A_d_bar"]),
                           dense=float(summary["mean_tau_D"]))
    p, h = facts["primary"], facts["highschool"]
    checks = [
        p["code"] == 0 and h["code"] == 0,
        p["nodes"] == 242 and h["nodes"] == 327,
        abs(p["length"] - 1530) <= 0.05 * 1530 and abs(h["length"] - 1620) <= 0.05 * 1620,
        p["pearson"] >= 0.95 and h["pearson"] >= 0.95,
        p["dense"] > h["dense"],
        abs(p["dense"] - 0.12) <= 0.04 and abs(h["dense"] - 0.03) <= 0.04,
        p["seconds"] < 600 and h["seconds"] < 600,
    ]
    detail = "; ".join(
        f"{name}: {f['nodes']} nodes, length {f['length']}, pearson {f['pearson']:.3f}, "
        f"mean tau_D {100 * f['dense']:.2f}%, {f['seconds']:.0f}s" for name, f in facts.items())
    record(5, all(checks), detail)


# -- 6: clustering qualitative check ----------------------------------------

def modal_pair_share(nodes, labels, meta, classes=("5A", "5B")):
    members = [i for i, u in enumerate(nodes) if meta.get(u) in classes]
    counts = np.bincount(labels[members])
    return np.sort(counts)[::-1][:2].sum() / len(members)


@pytest.mark.slow
def test_criterion_6_class_concentration(dataset_runs):
    out = dataset_runs["primary"][0]
    nodes, labels = read_profiles_csv((out / "profiles.csv").read_text())
    meta = {r["node"]: r["class"] for r in read_rows(out / "profiles.csv")}
    x = embed_labels(labels)
    dist = distance_from_similarity(similarity_matrix(labels))
    shares = {}
    for k in (5, 6):
        best = sweep_k(x, dist, [k], runs=100, master_seed=0).best_result(k)
        shares[k] = modal_pair_share(nodes, best.labels, meta)
    classes, table = contingency(nodes, sweep_k(x, dist, [6], runs=100, master_seed=0).best_result(6).labels,
                                 meta)
    print("k=6 contingency (rows: clusters):", classes)
    print(table)
    hs = dataset_runs["highschool"][0]
    hs_curve = [r for r in read_rows(hs / "silhouette.csv")]
    prim_curve = [r for r in read_rows(out / "silhouette.csv")]
    print("primary silhouette:", [(r["k"], round(float(r["mean_score"]), 4)) for r in prim_curve][:8])
    print("preparatory silhouette:", [(r["k"], round(float(r["mean_score"]), 4)) for r in hs_curve][:8])
    record(6, shares[6] >= 0.60,
           f"5A+5B share in modal cluster pair: k=6 {100 * shares[6]:.1f}% (asserted >= 60%), "
           f"k=5 {100 * shares[5]:.1f}% (reported)")


# -- 7: determinism ------------------------------------------------------------

@pytest.mark.slow
def test_criterion_7_byte_identical_runs(dataset_runs, tmp_path):
    first = dataset_runs["primary"][0]
    code, _ = run_pipeline(PRIMARY, PRIMARY_DAY, tmp_path / "again", workers=3)
    files = sorted(str(p.relative_to(first)) for p in first.rglob("*") if p.is_file())
    other = sorted(str(p.relative_to(tmp_path / "again")) for p in (tmp_path / "again").rglob("*")
                   if p.is_file())
    _, mismatch, errors = filecmp.cmpfiles(first, tmp_path / "again", files, shallow=False)
    ok = code == 0 and files == other and not mismatch and not errors
    record(7, ok, f"{len(files)} files compared across workers=1 and workers=3, "
                  f"{len(mismatch) + len(errors)} differ")


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="primary-school silhouette curve decreases from k=2; "
                                       "no local maximum in 5..7 with this k-means and seed")
def test_primary_silhouette_local_max_in_5_to_7(dataset_runs):
    rows = read_rows(dataset_runs["primary"][0] / "silhouette.csv")
    local = [int(r["k"]) for r in rows if r["local_max"] == "1"]
    print("primary silhouette local maxima:", local)
    assert any(5 <= k <= 7 for k in local)
