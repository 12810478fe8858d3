"""Dominant activity sets and inter-snapshot author flow networks.

For each author and snapshot we keep the set of topics where the author
was maximally active (ties retained in full). Transitions between the
dominant sets of consecutive snapshots are counted with one unified
rule: a topic present on both sides contributes exactly one
self-transition; a topic appearing on the later side receives one
transition from every topic of the earlier side. Summing over authors
yields a weighted directed network per consecutive snapshot pair, at
topic or area granularity.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .classification import AreaId, ClassificationTable
from .errors import (
    EmptySet,
    InvariantViolation,
    MalformedLine,
    UnknownArea,
    UnknownTopic,
    UsageError,
)
from .ingest import ActivityProfile, SnapshotGrid
from .util import check_token, fmt_weight, iter_tsv, parse_weight

# Worker pools only pay off once there are enough authors to amortize
# the fork+pickle overhead; below this the build runs inline.
POOL_MIN_AUTHORS = 50_000

FLOW_HEADER = "#from_snapshot\tto_snapshot\tsource\ttarget\tweight"


@dataclass(frozen=True)
class DominantTopicSet:
    """Topics (or areas, at the coarse level) of maximal activity, ties included."""

    author_id: str
    snapshot: int
    topics: frozenset[str]


@dataclass
class FlowNetwork:
    """Author volume moving between nodes across one consecutive snapshot pair."""

    level: str
    from_snapshot: int
    to_snapshot: int
    weights: dict[tuple[str, str], int | float | Fraction] = field(default_factory=dict)

    def nodes(self) -> set[str]:
        found: set[str] = set()
        for source, target in self.weights:
            found.add(source)
            found.add(target)
        return found

    def total_weight(self):
        return sum(self.weights.values())

    def sorted_items(self) -> list[tuple[tuple[str, str], int | float | Fraction]]:
        return sorted(self.weights.items())


def dominant_topics(profile: ActivityProfile) -> DominantTopicSet:
    """All topics achieving the maximum activity count within the snapshot."""
    if not profile.topic_counts:
        raise EmptySet(f"profile {profile.author_id}@{profile.snapshot} has no topic counts")
    best = max(profile.topic_counts.values())
    return DominantTopicSet(
        author_id=profile.author_id,
        snapshot=profile.snapshot,
        topics=frozenset(t for t, c in profile.topic_counts.items() if c == best),
    )


def dominant_area_set(profile: ActivityProfile, table: ClassificationTable) -> DominantTopicSet:
    """Areas of maximal aggregated activity (the argmax-at-area-level variant)."""
    if not profile.topic_counts:
        raise EmptySet(f"profile {profile.author_id}@{profile.snapshot} has no topic counts")
    area_counts: dict[str, int] = {}
    for topic, count in profile.topic_counts.items():
        area = _area_of(topic, table)
        area_counts[area] = area_counts.get(area, 0) + count
    best = max(area_counts.values())
    return DominantTopicSet(
        author_id=profile.author_id,
        snapshot=profile.snapshot,
        topics=frozenset(a for a, c in area_counts.items() if c == best),
    )


def _area_of(topic: str, table: ClassificationTable) -> str:
    try:
        return table.topic_area[topic]
    except KeyError:
        raise UnknownTopic(f"topic {topic!r} not in the topic->area table") from None


def count_transitions(
    source_set: frozenset[str] | set[str],
    target_set: frozenset[str] | set[str],
    appearing_weight: str = "unit",
) -> dict[tuple[str, str], int | Fraction]:
    """Transitions of one author between consecutive dominant sets.

    For each node in the later set: if it persists from the earlier set
    it emits exactly one self-transition; if it is new it receives one
    transition from every node of the earlier set (or a 1/|S| share from
    each under ``appearing_weight='uniform'``). Disappearing nodes emit
    nothing except as sources for appearing ones.
    """
    if not source_set or not target_set:
        raise EmptySet("transition counting needs non-empty sets on both sides")
    if appearing_weight == "unit":
        share: int | Fraction = 1
    elif appearing_weight == "uniform":
        share = Fraction(1, len(source_set))
    else:
        raise UsageError(f"appearing_weight must be 'unit' or 'uniform', got {appearing_weight!r}")
    out: dict[tuple[str, str], int | Fraction] = {}
    for target in target_set:
        if target in source_set:
            out[(target, target)] = 1
        else:
            for source in source_set:
                out[(source, target)] = share
    return out


def _author_snapshot_sets(
    entries: Iterable[tuple[str, int, frozenset[str]]],
) -> dict[str, dict[int, frozenset[str]]]:
    by_author: dict[str, dict[int, frozenset[str]]] = {}
    for author, snapshot, nodes in entries:
        snaps = by_author.setdefault(author, {})
        if snapshot in snaps:
            raise InvariantViolation(
                f"duplicate dominant set for author {author!r} at snapshot {snapshot}"
            )
        snaps[snapshot] = nodes
    return by_author


def _transitions_for_authors(
    snapshot_maps: list[dict[int, frozenset[str]]],
    pairs: list[tuple[int, int]],
    appearing_weight: str,
) -> dict[tuple[int, int], dict[tuple[str, str], int | Fraction]]:
    acc: dict[tuple[int, int], dict[tuple[str, str], int | Fraction]] = {
        pair: {} for pair in pairs
    }
    for snaps in snapshot_maps:
        if len(snaps) < 2:
            continue
        for pair in pairs:
            earlier = snaps.get(pair[0])
            later = snaps.get(pair[1])
            if earlier is None or later is None:
                continue
            bucket = acc[pair]
            for edge, weight in count_transitions(earlier, later, appearing_weight).items():
                bucket[edge] = bucket.get(edge, 0) + weight
    return acc


def _merge_accumulators(into, other) -> None:
    for pair, edges in other.items():
        bucket = into[pair]
        for edge, weight in edges.items():
            bucket[edge] = bucket.get(edge, 0) + weight


def build_flow_networks(
    dominant_sets: Iterable[DominantTopicSet],
    grid: SnapshotGrid,
    *,
    level: str = "topic",
    table: ClassificationTable | None = None,
    appearing_weight: str = "unit",
    threads: int = 1,
    pool_min_authors: int = POOL_MIN_AUTHORS,
) -> list[FlowNetwork]:
    """Sum per-author transitions into one network per consecutive grid pair.

    Only authors present in both snapshots of a pair contribute; skipped
    snapshots never bridge (1910->1920 without 1915 yields nothing). With
    ``level='area'`` each dominant topic set is mapped through the
    topic->area table and deduplicated before counting. Accumulation is
    an associative, commutative merge, so results are identical at every
    ``threads`` setting.
    """
    if level not in ("topic", "area"):
        raise UsageError(f"level must be 'topic' or 'area', got {level!r}")
    if level == "area" and table is None:
        raise UsageError("area-level flows need a classification table")

    entries = []
    for ds in dominant_sets:
        nodes = ds.topics
        if level == "area":
            nodes = frozenset(_area_of(t, table) for t in nodes)
        entries.append((ds.author_id, ds.snapshot, nodes))
    return _build_from_entries(
        entries, grid, level, appearing_weight, threads, pool_min_authors
    )


def _build_from_entries(
    entries: list[tuple[str, int, frozenset[str]]],
    grid: SnapshotGrid,
    level: str,
    appearing_weight: str,
    threads: int,
    pool_min_authors: int,
) -> list[FlowNetwork]:
    pairs = grid.label_pairs()
    by_author = _author_snapshot_sets(entries)
    snapshot_maps = [by_author[a] for a in sorted(by_author)]

    workers = max(1, int(threads or 1))
    if workers > 1 and len(snapshot_maps) >= pool_min_authors:
        chunk = (len(snapshot_maps) + workers - 1) // workers
        slices = [snapshot_maps[i : i + chunk] for i in range(0, len(snapshot_maps), chunk)]
        acc = {pair: {} for pair in pairs}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for partial in pool.map(
                _transitions_for_authors,
                slices,
                [pairs] * len(slices),
                [appearing_weight] * len(slices),
            ):
                _merge_accumulators(acc, partial)
    else:
        acc = _transitions_for_authors(snapshot_maps, pairs, appearing_weight)

    return [
        FlowNetwork(level=level, from_snapshot=a, to_snapshot=b, weights=acc[(a, b)])
        for a, b in pairs
    ]


def flow_networks_from_profiles(
    profiles: Iterable[ActivityProfile],
    grid: SnapshotGrid,
    *,
    level: str = "topic",
    table: ClassificationTable | None = None,
    area_mode: str = "mapped",
    appearing_weight: str = "unit",
    threads: int = 1,
    pool_min_authors: int = POOL_MIN_AUTHORS,
) -> list[FlowNetwork]:
    """Profiles -> dominant sets -> flow networks, in one call.

    ``area_mode='mapped'`` (default) maps each dominant topic set through
    the topic->area table; ``'argmax'`` re-runs the argmax on per-area
    aggregated counts instead.
    """
    if area_mode not in ("mapped", "argmax"):
        raise UsageError(f"area_mode must be 'mapped' or 'argmax', got {area_mode!r}")
    if level == "area" and area_mode == "argmax":
        if table is None:
            raise UsageError("area-level flows need a classification table")
        entries = []
        for profile in profiles:
            ds = dominant_area_set(profile, table)
            entries.append((ds.author_id, ds.snapshot, ds.topics))
        return _build_from_entries(
            entries, grid, "area", appearing_weight, threads, pool_min_authors
        )
    return build_flow_networks(
        (dominant_topics(p) for p in profiles),
        grid,
        level=level,
        table=table,
        appearing_weight=appearing_weight,
        threads=threads,
        pool_min_authors=pool_min_authors,
    )


def decompose_area_flows(
    net: FlowNetwork,
    area: AreaId,
    known_areas: Iterable[AreaId] | None = None,
):
    """(intra, incoming-cross, outgoing-cross) volume for one area.

    Flows are indexed by the network's arrival snapshot. An area absent
    from the network but part of the known universe decomposes to
    (0, 0, 0); passing ``known_areas`` makes truly unknown areas an error.
    """
    if net.level != "area":
        raise UsageError(f"decomposition needs an area-level network, got {net.level!r}")
    if known_areas is not None and area not in set(known_areas):
        raise UnknownArea(f"area {area!r} not in the known area universe")
    intra = net.weights.get((area, area), 0)
    incoming = 0
    outgoing = 0
    for (source, target), weight in net.weights.items():
        if source == target:
            continue
        if target == area:
            incoming += weight
        if source == area:
            outgoing += weight
    return intra, incoming, outgoing


# -- serialization --


def flow_file_name(level: str, from_snapshot: int, to_snapshot: int) -> str:
    return f"flows_{level}_{from_snapshot}_{to_snapshot}.tsv"


def write_flow_network(net: FlowNetwork, path) -> None:
    """Sorted TSV rows; byte-stable for identical networks."""
    lines = [FLOW_HEADER]
    for (source, target), weight in net.sorted_items():
        lines.append(
            f"{net.from_snapshot}\t{net.to_snapshot}\t{source}\t{target}\t{fmt_weight(weight)}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_flow_network(
    path,
    *,
    level: str,
    from_snapshot: int | None = None,
    to_snapshot: int | None = None,
) -> FlowNetwork:
    """Read a serialized network; snapshot labels fall back to the arguments
    for header-only (empty) files."""
    weights: dict[tuple[str, str], int | float] = {}
    seen_from, seen_to = from_snapshot, to_snapshot
    for lineno, fields in iter_tsv(path):
        if len(fields) != 5:
            raise MalformedLine(f"{path}:{lineno}: expected 5 columns, got {len(fields)}")
        try:
            row_from, row_to = int(fields[0]), int(fields[1])
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: snapshot labels must be integers") from None
        if (seen_from is not None and row_from != seen_from) or (
            seen_to is not None and row_to != seen_to
        ):
            raise MalformedLine(f"{path}:{lineno}: inconsistent snapshot labels")
        seen_from, seen_to = row_from, row_to
        source = check_token(fields[2], path, lineno, "source")
        target = check_token(fields[3], path, lineno, "target")
        try:
            weight = parse_weight(fields[4])
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: bad weight {fields[4]!r}") from None
        if weight <= 0:
            raise MalformedLine(f"{path}:{lineno}: weights must be strictly positive")
        if (source, target) in weights:
            raise MalformedLine(f"{path}:{lineno}: duplicate edge {source}->{target}")
        weights[(source, target)] = weight
    if seen_from is None or seen_to is None:
        raise MalformedLine(f"{path}: empty network file needs explicit snapshot labels")
    return FlowNetwork(
        level=level, from_snapshot=seen_from, to_snapshot=seen_to, weights=weights
    )
