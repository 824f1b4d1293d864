"""Command-line entry point.

Exit status: 0 on success, 1 when a run fails, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from . import experiments as ex
from .errors import GeomodError
from .geodesy import DecayKernel
from .graph import build_graph, load_checkins, load_edge_list, load_graph, save_graph
from .louvain import DetectionConfig, detect
from .oracle import MAX_NODES, brute_force_best
from .sampling import batch_samples, write_stats_csv

log = logging.getLogger("geomod")


def _positive_sigma(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"sigma must be a finite positive number of km, got {text}")
    return value


def _existing_file(parser, path, flag):
    if path is None or not Path(path).is_file():
        parser.error(f"{flag}: file not found: {path}")
    return path


def _objective(parser, args):
    if args.objective == "ng":
        return "ng"
    if args.sigma is None:
        parser.error("--objective distance requires --sigma")
    return DecayKernel.exponential(args.sigma)


# -- subcommands ------------------------------------------------------------

def cmd_ingest(args, parser):
    _existing_file(parser, args.edges, "--edges")
    _existing_file(parser, args.checkins, "--checkins")
    pairs = load_edge_list(args.edges)
    locations = load_checkins(args.checkins)
    g, report = build_graph(pairs, locations)
    save_graph(g, args.out)
    print(f"ingest: nodes={g.n} edges={g.num_edges} {report.summary()}")
    return report


def cmd_sample(args, parser):
    _existing_file(parser, args.graph, "--graph")
    if args.count < 1 or args.min_size < 1:
        parser.error("--count and --min-size must be >= 1")
    g = load_graph(args.graph)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        samples = batch_samples(g, args.count, args.min_size, args.seed, expand=args.expand)
    for w in caught:
        log.warning("%s", w.message)
    width = max(3, len(str(len(samples) - 1)))
    for i, s in enumerate(samples):
        save_graph(s, outdir / f"sample_{i:0{width}d}.json")
    write_stats_csv(samples, outdir / "samples.csv")
    sizes = [s.n for s in samples]
    print(f"sample: wrote {len(samples)} samples to {outdir} "
          f"(nodes min={min(sizes)} max={max(sizes)} avg={sum(sizes) / len(sizes):.2f})")
    return samples


def cmd_detect(args, parser):
    _existing_file(parser, args.graph, "--graph")
    objective = _objective(parser, args)
    if args.init == "warm" and objective == "ng":
        parser.error("--init warm only applies to --objective distance")
    g = load_graph(args.graph)
    cfg = DetectionConfig(objective=objective, init=args.init, warm_mode=args.warm_mode,
                          meta_null=args.meta_null, rng_seed=args.seed)
    res = detect(g, cfg)
    ex.write_partition_tsv(res.partition, args.out)
    summary = ex.run_summary(g, res, objective, cfg)
    summary_path = args.summary or str(Path(args.out).with_suffix(".json"))
    ex.write_json(summary, summary_path)
    print(f"detect: communities={res.n_communities} objective={res.objective:.6f} "
          f"levels={res.n_levels} runtime={res.duration:.3f}s -> {args.out}")
    return res


def cmd_sweep(args, parser):
    if not Path(args.samples).is_dir():
        parser.error(f"--samples: not a directory: {args.samples}")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in ex.METHODS]
    if bad or not methods:
        parser.error(f"--methods: unknown {bad}; choose from {','.join(ex.METHODS)}")
    samples = ex.load_samples(args.samples)
    if not samples:
        parser.error(f"--samples: no *.json graphs in {args.samples}")
    sigmas = args.sigma or list(ex.DEFAULT_SIGMAS)
    report = ex.run_sweep(samples, sigmas, methods, seed=args.seed, jobs=args.jobs,
                          meta_null=args.meta_null)
    timing = report.write(args.out)
    failed = sum(1 for r in report.rows if r.status != "ok")
    print(f"sweep: {len(report.rows)} rows + {len(report.means)} mean rows -> {args.out} "
          f"(timings in {timing}, {failed} failed)")
    return report


def cmd_rank(args, parser):
    _existing_file(parser, args.graph, "--graph")
    _existing_file(parser, args.partition, "--partition")
    g = load_graph(args.graph)
    p = ex.read_partition_tsv(args.partition)
    kernel = DecayKernel.exponential(args.sigma) if args.sigma is not None else None
    scores = ex.rank(g, p, kernel)
    print("rank\tcommunity_id\tsize\tquality")
    for i, s in enumerate(scores[:args.top_k], 1):
        print(f"{i}\t{s.community}\t{s.size}\t{ex.fmt(s.quality)}")
    if args.out:
        ex.write_json(ex.community_geojson(g, p, scores, args.top_k), args.out)
    return scores


def cmd_oracle(args, parser):
    _existing_file(parser, args.graph, "--graph")
    g = load_graph(args.graph)
    if g.n > MAX_NODES:
        parser.error(f"oracle is limited to {MAX_NODES} nodes (graph has {g.n})")
    res = brute_force_best(g, _objective(parser, args))
    print(f"oracle: best={res.objective:.12g} enumerated={res.enumerated}")
    for c, members in res.partition.canonical().communities.items():
        print(f"{c}\t{' '.join(map(str, sorted(members)))}")
    return res


def cmd_synth(args, parser):
    from .synthetic import generate, write_snap

    net = generate(n_users=args.users, n_cities=args.cities, n_groups=args.groups, seed=args.seed)
    edges, checkins = write_snap(net, args.out)
    print(f"synth: {len(net.pairs)} edges, {len(net.checkins)} check-ins -> {edges}, {checkins}")


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="geomod", description=(
        "Detect geographically disperse communities by maximizing distance modularity."))
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("ingest", help="build a graph JSON from SNAP edge and check-in files")
    p.add_argument("--edges", required=True)
    p.add_argument("--checkins", required=True)
    p.add_argument("--out", required=True, help="output graph JSON")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("sample", help="draw snowball samples from a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--min-size", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--expand", choices=("layer", "node"), default="layer",
                   help="add a whole BFS layer per step, or one node's neighbours at a time")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sample)

    def detection_flags(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--meta-null", choices=("exact", "centroid"), default="exact",
                       help="meta-level null model for the distance objective")

    p = sub.add_parser("detect", help="run Louvain or Louvain-D on one graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--objective", choices=("ng", "distance"), default="distance")
    p.add_argument("--sigma", type=_positive_sigma, help="decay distance in km")
    p.add_argument("--init", choices=("singleton", "warm"), default="singleton")
    p.add_argument("--warm-mode", choices=("aggregate", "resweep"), default="aggregate")
    detection_flags(p)
    p.add_argument("--out", required=True, help="output partition TSV")
    p.add_argument("--summary", help="run summary JSON (default: OUT with .json suffix)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="compare Louvain and Louvain-D over samples and sigmas")
    p.add_argument("--samples", required=True, help="directory of sample graph JSON files")
    p.add_argument("--sigma", type=_positive_sigma, action="append",
                   help="repeatable; default 50,100,...,500")
    p.add_argument("--methods", default=",".join(ex.METHODS))
    p.add_argument("--jobs", type=int, default=1)
    detection_flags(p)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rank", help="rank communities by quality and export GeoJSON")
    p.add_argument("--graph", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--sigma", type=_positive_sigma, help="omit to rank under NG modularity")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--out", help="output GeoJSON")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("synth", help="write a synthetic SNAP-format check-in network")
    p.add_argument("--users", type=int, default=3000)
    p.add_argument("--cities", type=int, default=25)
    p.add_argument("--groups", type=int, default=60)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    # debugging aid, not listed in --help
    p = sub.add_parser("oracle")
    p.add_argument("--graph", required=True)
    p.add_argument("--objective", choices=("ng", "distance"), default="ng")
    p.add_argument("--sigma", type=_positive_sigma)
    p.set_defaults(func=cmd_oracle)
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "oracle"]
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    sub_parser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        args.func(args, sub_parser)
    except (GeomodError, OSError) as exc:
        print(f"geomod {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
