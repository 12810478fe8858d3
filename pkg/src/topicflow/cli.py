"""Command-line pipeline: synth, ingest, flows, metrics, viz, report.

Every stage reads and writes plain sorted TSV under the output
directory, so intermediate artifacts stay diffable, and the whole tree
is byte-identical across reruns with the same inputs and flags.
Exit codes: 0 success, 1 usage, 2 input format, 3 internal invariant.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .bundleviz import VizConfig, load_viz_config, render_svg
from .classification import ClassificationTable, load_classification
from .errors import (
    EXIT_INPUT,
    EXIT_INTERNAL,
    EXIT_OK,
    InvalidSpec,
    MalformedLine,
    MissingInput,
    PipelineError,
    UsageError,
)
from .flows import (
    FlowNetwork,
    flow_file_name,
    flow_networks_from_profiles,
    load_flow_network,
    write_flow_network,
)
from .ingest import (
    ActivityProfile,
    IngestStats,
    SnapshotGrid,
    compute_yearly_paper_quantile,
    ingest_records,
)
from .metrics import (
    ZeroBaselinePolicy,
    attractiveness_table,
    migration_index_series,
    median_sink_source,
    most_attractive_topics,
    multidisciplinarity,
)
from .synth import SyntheticSpec, generate_corpus
from .util import fmt_float, iter_tsv

PROFILE_HEADER = "#author\tsnapshot\ttopic\tcount"


@dataclass
class PipelineConfig:
    records: str | None = None
    journal_topics: str | None = None
    topic_areas: str | None = None
    out_dir: str = "out"
    start_year: int = 1910
    end_year: int = 2014
    width: int = 5
    max_papers_per_year: int = 17
    quantile: float | None = None
    cut_scope: str = "classified"
    level: str = "both"
    baseline_policy: str = "strict"
    appearing_weight: str = "unit"
    area_mode: str = "mapped"
    viz_config: str | None = None
    min_weight: float | None = None
    sector_order: str | None = None
    canvas_size: int | None = None
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise InvalidSpec("seed must be a 64-bit unsigned integer")

    def grid(self) -> SnapshotGrid:
        return SnapshotGrid(self.start_year, self.end_year, self.width)

    def levels(self) -> list[str]:
        if self.level == "both":
            return ["topic", "area"]
        if self.level in ("topic", "area"):
            return [self.level]
        raise UsageError(f"level must be topic, area or both, got {self.level!r}")

    def effective_threads(self) -> int:
        if self.threads is not None:
            if self.threads < 1:
                raise UsageError("--threads must be >= 1")
            return self.threads
        return os.cpu_count() or 1


_FIELD_TYPES = {
    "records": str, "journal_topics": str, "topic_areas": str, "out_dir": str,
    "start_year": int, "end_year": int, "width": int, "max_papers_per_year": int,
    "quantile": float, "cut_scope": str, "level": str, "baseline_policy": str,
    "appearing_weight": str, "area_mode": str, "viz_config": str, "min_weight": float,
    "sector_order": str, "canvas_size": int, "seed": int, "threads": int,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="flat key=value file with defaults for any flag")
    shared.add_argument("--out", dest="out_dir", help="output directory (default: out)")
    shared.add_argument("--records", help="publication records TSV or NDJSON")
    shared.add_argument("--journal-topics", help="journal->topic TSV")
    shared.add_argument("--topic-areas", help="topic->area TSV")
    shared.add_argument("--start-year", type=int)
    shared.add_argument("--end-year", type=int)
    shared.add_argument("--width", type=int, help="snapshot width in years (default 5)")
    shared.add_argument("--max-papers-per-year", type=int,
                        help="disambiguation cut, 0 disables (default 17)")
    shared.add_argument("--quantile", type=float,
                        help="derive the cut from this yearly paper-count quantile instead")
    shared.add_argument("--cut-scope", choices=["classified", "all"],
                        help="count classified in-range papers only, or all records")
    shared.add_argument("--level", choices=["topic", "area", "both"])
    shared.add_argument("--baseline-policy",
                        help="strict | active | smooth:<k> (default strict)")
    shared.add_argument("--appearing-weight", choices=["unit", "uniform"])
    shared.add_argument("--area-mode", choices=["mapped", "argmax"])
    shared.add_argument("--viz-config", help="key=value file with rendering settings")
    shared.add_argument("--min-weight", type=float, help="omit edges lighter than this")
    shared.add_argument("--sector-order", choices=["modularity", "strength", "alphabetical"])
    shared.add_argument("--canvas-size", type=int)
    shared.add_argument("--seed", type=int)
    shared.add_argument("--threads", type=int,
                        help="worker cap for parallel stages (default: all cores)")

    parser = _Parser(prog="topicflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[shared],
                   help="records -> activity profiles + ingest stats")
    sub.add_parser("flows", parents=[shared],
                   help="profiles -> flow networks per consecutive snapshot pair")
    sub.add_parser("metrics", parents=[shared],
                   help="flow networks -> attractiveness, migration indices, distributions")
    viz = sub.add_parser("viz", parents=[shared],
                         help="one flow network -> edge-bundled circular SVG")
    viz.add_argument("--pair", nargs=2, type=int, metavar=("FROM", "TO"), required=True)
    synth = sub.add_parser("synth", parents=[shared],
                           help="generate a seeded corpus with ground-truth answer networks")
    synth.add_argument("--authors", type=int, default=200)
    synth.add_argument("--topics", type=int, default=12)
    synth.add_argument("--areas", type=int, default=4)
    synth.add_argument("--snapshots", type=int, default=5)
    synth.add_argument("--mobility", type=float, default=0.3)
    synth.add_argument("--skew", type=float, default=1.0)
    sub.add_parser("report", parents=[shared],
                   help="run ingest, flows, metrics and viz, then write a summary")
    return parser


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    file_values: dict[str, object] = {}
    config_path = getattr(args, "config", None)
    if config_path:
        if not Path(config_path).is_file():
            raise MissingInput(f"config file not found: {config_path}")
        for lineno, parts in iter_tsv(config_path):
            line = "\t".join(parts)
            if "=" not in line:
                raise MalformedLine(f"{config_path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _FIELD_TYPES:
                raise MalformedLine(f"{config_path}:{lineno}: unknown setting {key!r}")
            try:
                file_values[key] = _FIELD_TYPES[key](value)
            except ValueError:
                raise MalformedLine(
                    f"{config_path}:{lineno}: bad value {value!r} for {key}"
                ) from None
    values: dict[str, object] = {}
    for f in fields(PipelineConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
        elif f.name in file_values:
            values[f.name] = file_values[f.name]
    return PipelineConfig(**values)


def _require_file(path, what: str) -> Path:
    if path is None:
        raise UsageError(f"{what} is required (flag or config file)")
    p = Path(path)
    if not p.is_file():
        raise MissingInput(f"{what} not found: {p}")
    return p


def _load_table(cfg: PipelineConfig) -> ClassificationTable:
    jt = _require_file(cfg.journal_topics, "--journal-topics")
    ta = _require_file(cfg.topic_areas, "--topic-areas")
    return load_classification(jt, ta)


def _out_dir(cfg: PipelineConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- profile serialization --


def write_profiles(profiles: list[ActivityProfile], path) -> None:
    lines = [PROFILE_HEADER]
    for profile in profiles:
        for topic in sorted(profile.topic_counts):
            lines.append(
                f"{profile.author_id}\t{profile.snapshot}\t{topic}\t"
                f"{profile.topic_counts[topic]}"
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_profiles(path, table: ClassificationTable) -> list[ActivityProfile]:
    grouped: dict[tuple[str, int], dict[str, int]] = {}
    for lineno, parts in iter_tsv(path):
        if len(parts) != 4:
            raise MalformedLine(f"{path}:{lineno}: expected 4 columns, got {len(parts)}")
        author, snapshot_text, topic, count_text = parts
        try:
            snapshot, count = int(snapshot_text), int(count_text)
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: snapshot and count must be integers") from None
        if count < 1:
            raise MalformedLine(f"{path}:{lineno}: counts must be >= 1")
        bucket = grouped.setdefault((author, snapshot), {})
        if topic in bucket:
            raise MalformedLine(f"{path}:{lineno}: duplicate topic row {topic!r}")
        bucket[topic] = count
    return [
        ActivityProfile(
            author_id=author,
            snapshot=snapshot,
            topic_counts=counts,
            area_set=frozenset(table.topic_area[t] for t in counts),
        )
        for (author, snapshot), counts in sorted(grouped.items())
    ]


# -- commands --


def cmd_ingest(cfg: PipelineConfig) -> tuple[Path, IngestStats]:
    records = _require_file(cfg.records, "--records")
    table = _load_table(cfg)
    out = _out_dir(cfg)
    threshold = cfg.max_papers_per_year
    if cfg.quantile is not None:
        threshold = compute_yearly_paper_quantile(records, cfg.quantile)
        print(f"quantile {cfg.quantile} -> max papers per year {threshold}")
    profiles, stats = ingest_records(
        records, table, cfg.grid(), threshold, cut_scope=cfg.cut_scope
    )
    profiles_path = out / "profiles.tsv"
    write_profiles(profiles, profiles_path)
    stats_path = out / "ingest_stats.json"
    with open(stats_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(stats.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"ingest: {json.dumps(stats.as_dict(), sort_keys=True)}", file=sys.stderr)
    print(f"wrote {profiles_path} ({len(profiles)} profiles)")
    return profiles_path, stats


def cmd_flows(cfg: PipelineConfig) -> list[Path]:
    table = _load_table(cfg)
    out = _out_dir(cfg)
    profiles_path = out / "profiles.tsv"
    if not profiles_path.is_file():
        raise MissingInput(f"profiles not found: {profiles_path} (run ingest first)")
    profiles = load_profiles(profiles_path, table)
    grid = cfg.grid()
    written: list[Path] = []
    for level in cfg.levels():
        nets = flow_networks_from_profiles(
            profiles,
            grid,
            level=level,
            table=table,
            area_mode=cfg.area_mode,
            appearing_weight=cfg.appearing_weight,
            threads=cfg.effective_threads(),
        )
        for net in nets:
            path = out / flow_file_name(level, net.from_snapshot, net.to_snapshot)
            write_flow_network(net, path)
            written.append(path)
    print(f"wrote {len(written)} network files to {out}")
    return written


def _load_networks(cfg: PipelineConfig, out: Path, level: str) -> list[FlowNetwork]:
    nets = []
    for earlier, later in cfg.grid().label_pairs():
        path = out / flow_file_name(level, earlier, later)
        if not path.is_file():
            raise MissingInput(f"network file not found: {path} (run flows first)")
        nets.append(
            load_flow_network(path, level=level, from_snapshot=earlier, to_snapshot=later)
        )
    return nets


def _write_tsv(path: Path, header: str, rows: list[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join([header, *rows]) + "\n")


def cmd_metrics(cfg: PipelineConfig) -> list[Path]:
    table = _load_table(cfg)
    out = _out_dir(cfg)
    policy = ZeroBaselinePolicy.parse(cfg.baseline_policy)
    written: list[Path] = []

    if "topic" in cfg.levels():
        nets = _load_networks(cfg, out, "topic")
        deltas = attractiveness_table(nets, policy, n_topics=table.topic_count)
        rows = [
            f"{snapshot}\t{topic}\t{fmt_float(delta)}\t{pairs_used}"
            for (snapshot, topic), (delta, pairs_used) in sorted(deltas.items())
        ]
        path = out / "delta_topic.tsv"
        _write_tsv(path, "#snapshot\ttopic\tdelta\tpairs_used", rows)
        written.append(path)

        winner_rows = []
        if deltas:
            for snapshot, entry in sorted(
                most_attractive_topics(nets, policy, n_topics=table.topic_count).items()
            ):
                for topic in entry.ties:
                    flag = "winner" if topic == entry.topic else "tie"
                    winner_rows.append(
                        f"{snapshot}\t{topic}\t{fmt_float(entry.delta)}\t{flag}"
                    )
        path = out / "most_attractive_topic.tsv"
        _write_tsv(path, "#snapshot\ttopic\tdelta\trank", winner_rows)
        written.append(path)

    if "area" in cfg.levels():
        nets = [n for n in _load_networks(cfg, out, "area") if n.weights]
        series = migration_index_series(nets, areas=table.areas())
        rows = [
            f"{entry.snapshot}\t{area}\t{fmt_float(idx.iota)}\t{fmt_float(idx.epsilon)}"
            f"\t{fmt_float(idx.rho)}\t{fmt_float(idx.sigma)}"
            for entry in series
            for area, idx in sorted(entry.indices.items())
        ]
        path = out / "indices_area.tsv"
        _write_tsv(path, "#snapshot\tarea\tiota\tepsilon\trho\tsigma", rows)
        written.append(path)

        median_rows = []
        if any(entry.cross_total > 0 for entry in series):
            medians = median_sink_source(series)
            median_rows = [
                f"{area}\t{fmt_float(rho)}\t{fmt_float(sigma)}"
                for area, (rho, sigma) in sorted(medians.items())
            ]
        path = out / "medians_area.tsv"
        _write_tsv(path, "#area\tmedian_rho\tmedian_sigma", median_rows)
        written.append(path)

    profiles_path = out / "profiles.tsv"
    if not profiles_path.is_file():
        raise MissingInput(f"profiles not found: {profiles_path} (run ingest first)")
    distributions = multidisciplinarity(load_profiles(profiles_path, table))
    hist_rows = [
        f"{dist.snapshot}\t{n_areas}\t{count}"
        for dist in distributions
        for n_areas, count in sorted(dist.histogram.items())
    ]
    path = out / "multidisciplinarity.tsv"
    _write_tsv(path, "#snapshot\tn_areas\tauthor_count", hist_rows)
    written.append(path)
    summary_rows = [
        f"{dist.snapshot}\t{dist.author_volume}\t{dist.q_cutoff}" for dist in distributions
    ]
    path = out / "multidisciplinarity_summary.tsv"
    _write_tsv(path, "#snapshot\tauthor_volume\tq99_cutoff", summary_rows)
    written.append(path)

    print(f"wrote {len(written)} metric files to {out}")
    return written


def _viz_config(cfg: PipelineConfig) -> VizConfig:
    viz = VizConfig()
    if cfg.viz_config is not None:
        viz = load_viz_config(_require_file(cfg.viz_config, "--viz-config"), viz)
    overrides = {}
    if cfg.min_weight is not None:
        overrides["min_weight"] = cfg.min_weight
    if cfg.sector_order is not None:
        overrides["sector_order"] = cfg.sector_order
    if cfg.canvas_size is not None:
        overrides["canvas_size"] = cfg.canvas_size
    if overrides:
        viz = replace(viz, **overrides)
    return viz


def cmd_viz(cfg: PipelineConfig, pair: tuple[int, int]) -> Path:
    level = cfg.level if cfg.level != "both" else "topic"
    table = _load_table(cfg)
    out = _out_dir(cfg)
    earlier, later = pair
    net_path = out / flow_file_name(level, earlier, later)
    if not net_path.is_file():
        raise MissingInput(f"network file not found: {net_path} (run flows first)")
    net = load_flow_network(net_path, level=level, from_snapshot=earlier, to_snapshot=later)
    svg_path = out / f"viz_{level}_{earlier}_{later}.svg"
    render_svg(net, table, _viz_config(cfg), out=svg_path)
    print(f"wrote {svg_path}")
    return svg_path


def cmd_synth(cfg: PipelineConfig, args: argparse.Namespace) -> Path:
    spec = SyntheticSpec(
        n_authors=args.authors,
        n_topics=args.topics,
        n_areas=args.areas,
        n_snapshots=args.snapshots,
        mobility=args.mobility,
        skew=args.skew,
        seed=cfg.seed,
    )
    result = generate_corpus(spec, cfg.grid(), cfg.out_dir)
    print(
        f"wrote {result.records_path} ({result.n_records} records), classification "
        f"tables and {len(result.answer_paths)} answer networks"
    )
    return result.records_path


def cmd_report(cfg: PipelineConfig) -> Path:
    out = _out_dir(cfg)
    _, stats = cmd_ingest(cfg)
    flow_paths = cmd_flows(cfg)
    metric_paths = cmd_metrics(cfg)
    viz_level = "area" if cfg.level == "area" else "topic"
    viz_cfg = replace(cfg, level=viz_level)
    svg_paths = []
    for earlier, later in cfg.grid().label_pairs():
        net_path = out / flow_file_name(viz_level, earlier, later)
        if net_path.is_file():
            svg_paths.append(str(cmd_viz(viz_cfg, (earlier, later))))
    summary = {
        "ingest_stats": stats.as_dict(),
        "snapshot_labels": cfg.grid().labels(),
        "flow_files": sorted(p.name for p in flow_paths),
        "metric_files": sorted(p.name for p in metric_paths),
        "viz_files": sorted(Path(p).name for p in svg_paths),
    }
    report_path = out / "report.json"
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {report_path}")
    return report_path


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = _resolve_config(args)
        if args.command == "ingest":
            cmd_ingest(cfg)
        elif args.command == "flows":
            cmd_flows(cfg)
        elif args.command == "metrics":
            cmd_metrics(cfg)
        elif args.command == "viz":
            cmd_viz(cfg, tuple(args.pair))
        elif args.command == "synth":
            cmd_synth(cfg, args)
        elif args.command == "report":
            cmd_report(cfg)
        return EXIT_OK
    except PipelineError as exc:
        print(f"topicflow: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"topicflow: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - invariant violations exit 3
        print(f"topicflow: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
