"""Command-line entry point.

Stage subcommands read their inputs from the output directory, so they can
be run one at a time (``ingest``, then ``weights``, ...) or all at once with
``run``. Settings are merged in this order, later winning: the configuration
recorded in an existing ``manifest.json``, the ``--config`` file, then flags.

Exit codes: 0 success, 2 parse error, 3 configuration error, 4 internal
consistency error, 5 missing upstream artifact, 1 anything else.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, pipeline
from .errors import ConfigError, RichStreamError
from .stream_graph import export_contacts
from .synth import SynthSpec, generate

logger = logging.getLogger("richstream")

CONFIG_HELP = """\
config file format: one 'key = value' per line, '#' starts a comment.
keys: input, out, seed, dt, delta, day_start, day_end, alpha_D, alpha_S,
alpha_P (fractions like 1/3 allowed), samples, alpha, min_club_size, k_min,
k_max, runs, k, sim_threshold, workers, figures (true/false).
"""


def _add_config_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("pipeline configuration")
    g.add_argument("--config", type=Path, help="key = value configuration file")
    g.add_argument("--out", "-o", help="output directory (default: richstream-out)")
    g.add_argument("--input", "-i", help="contact file: 't i j [Ci Cj]' per line, gzip allowed")
    g.add_argument("--seed", type=int, help="master seed (required for a new run)")
    g.add_argument("--dt", type=int, help="grid resolution in seconds (default 20)")
    g.add_argument("--delta", type=int, help="window width in seconds (default 300)")
    g.add_argument("--day-start", dest="day_start", type=int, help="first raw timestamp kept")
    g.add_argument("--day-end", dest="day_end", type=int, help="raw timestamp bound, exclusive")
    g.add_argument("--channel-weights", nargs=3, type=float, metavar=("A_D", "A_S", "A_P"),
                   help="similarity channel weights, summing to 1 (default 1/3 each)")
    g.add_argument("--samples", type=int, help="null-model samples per test (default 100)")
    g.add_argument("--alpha", type=float, help="rich-club significance level (default 0.05)")
    g.add_argument("--min-club-size", dest="min_club_size", type=int, help="default 3")
    g.add_argument("--k-min", dest="k_min", type=int, help="smallest k in the sweep (default 2)")
    g.add_argument("--k-max", dest="k_max", type=int, help="largest k in the sweep (default 25)")
    g.add_argument("--runs", type=int, help="k-means runs per k (default 100)")
    g.add_argument("--k", type=int, help="k used for assignments (default: silhouette argmax)")
    g.add_argument("--sim-threshold", dest="sim_threshold", type=float,
                   help="also write similarity pairs above this value")
    g.add_argument("--workers", type=int, help="worker threads (default 1)")
    g.add_argument("--no-figures", dest="figures", action="store_const", const=False,
                   help="skip PNG figures")
    g.add_argument("--force", action="store_true", help="recompute even when cached")
    p.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="richstream",
        description="Dense/sparse/passive temporal profiles of contact streams.",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "ingest": "parse the contact file and write the normalized stream",
        "weights": "window-averaged topological weights and strengths",
        "partition": "rich-club layers per window and per-instant D/S/P labels",
        "profile": "three-channel profile similarity and class-ordered heatmap CSV",
        "rates": "membership rates, average degrees and their correlations",
        "cluster": "k-means silhouette sweep, assignments and contingency table",
        "baseline-degree": "same clustering on degree-vector cosine similarity",
        "run": "every stage in order",
    }
    for name, text in helps.items():
        _add_config_flags(sub.add_parser(name, help=text, description=text))

    sp = sub.add_parser("synth", help="write a synthetic planted-club contact file")
    sp.add_argument("--out", "-o", required=True, help="output directory")
    sp.add_argument("--n", type=int, default=60)
    sp.add_argument("--club-size", type=int, default=8)
    sp.add_argument("--windows", type=int, default=20)
    sp.add_argument("--p-in", type=float, default=0.8)
    sp.add_argument("--p-out", type=float, default=0.02)
    sp.add_argument("--dt", type=int, default=20)
    sp.add_argument("--delta", type=int, default=300)
    sp.add_argument("--seed", type=int, required=True)
    return parser


def config_from_args(args: argparse.Namespace) -> pipeline.PipelineConfig:
    flags = {k: getattr(args, k, None) for k in (
        "out", "input", "seed", "dt", "delta", "day_start", "day_end", "samples", "alpha",
        "min_club_size", "k_min", "k_max", "runs", "k", "sim_threshold", "workers", "figures")}
    if args.channel_weights is not None:
        flags.update(zip(("alpha_D", "alpha_S", "alpha_P"), args.channel_weights))
    file_values = pipeline.load_config(args.config) if args.config else {}
    out = flags["out"] or file_values.get("out") or pipeline.PipelineConfig.out
    recorded = {}
    manifest = Path(out) / "manifest.json"
    if manifest.exists():
        recorded = json.loads(manifest.read_text(encoding="utf-8")).get("config", {})
        recorded.pop("out", None)
    flags["out"] = out
    return pipeline.config_from_sources(file_values, recorded, flags)


def _synth(args) -> int:
    spec = SynthSpec(args.n, (args.club_size,) * args.windows, args.p_in, args.p_out,
                     dt=args.dt, delta=args.delta, seed=args.seed)
    sg, truth = generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "synth_contacts.tsv").write_text(export_contacts(sg), encoding="utf-8")
    (out / "ground_truth.csv").write_text(truth.csv(sg.nodes, spec.active()), encoding="utf-8")
    print(f"wrote {sg.n_events} events for {sg.n_nodes} nodes to {out / 'synth_contacts.tsv'}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            return _synth(args)
        cfg = config_from_args(args)
        cfg.validate()
        ws = pipeline.Workspace(cfg.out)
        stages = pipeline.STAGES if args.command == "run" else (args.command,)
        for stage in stages:
            outputs = pipeline.run_stage(stage, cfg, ws, force=args.force)
            print(f"{stage}: {len(outputs)} artifact(s) in {ws.root}")
        for w in ws.manifest.get("warnings", []):
            print(f"warning: {w}", file=sys.stderr)
        return 0
    except RichStreamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
