"""Scalar indices and distributions over flow networks.

Attractiveness of a topic is the mean relative change of its incoming
flows from all other topics between consecutive transition networks.
At area level, immigration/emigration indices compare cross flows with
the area's own persisting population, while sink/source indices measure
an area's share of the global cross flow. All ratios follow the 0/0 -> 0
convention: an area with no population and no flow is a non-participant.
"""
from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .classification import AreaId, TopicId
from .errors import EmptySeries, NoBaseline, UnknownTopic, UsageError
from .flows import FlowNetwork, decompose_area_flows
from .ingest import ActivityProfile
from .util import quantile_cutoff


@dataclass(frozen=True)
class ZeroBaselinePolicy:
    """How to handle vanishing baseline flows in the relative-change sum.

    ``strict``    sums only pairs with a nonzero baseline and divides by
                  the full N-1 (the literal formula denominator);
    ``active``    divides by the number of nonzero-baseline pairs instead;
    ``smooth``    adds ``k`` to every baseline before dividing.
    """

    kind: str = "strict"
    k: float = 0.0

    def __post_init__(self):
        if self.kind not in ("strict", "active", "smooth"):
            raise UsageError(f"unknown baseline policy {self.kind!r}")
        if self.kind == "smooth" and self.k <= 0:
            raise UsageError("smooth policy needs k > 0")

    @classmethod
    def parse(cls, text: str) -> "ZeroBaselinePolicy":
        if text.startswith("smooth:"):
            try:
                return cls("smooth", float(text.split(":", 1)[1]))
            except ValueError:
                raise UsageError(f"bad smoothing constant in {text!r}") from None
        return cls(text)

    def label(self) -> str:
        return f"smooth:{self.k:g}" if self.kind == "smooth" else self.kind


@dataclass
class AttractivenessSeries:
    topic: TopicId
    points: dict[int, float]
    pairs_used: dict[int, int]


@dataclass(frozen=True)
class MigrationIndices:
    iota: float
    epsilon: float
    rho: float
    sigma: float


@dataclass(frozen=True)
class SnapshotIndices:
    """Per-area indices for the transition arriving at ``snapshot``."""

    snapshot: int
    indices: dict[AreaId, MigrationIndices]
    cross_total: int | float | Fraction


@dataclass(frozen=True)
class MostAttractive:
    topic: TopicId
    delta: float
    ties: tuple[TopicId, ...]


@dataclass
class MultidisciplinarityDistribution:
    snapshot: int
    histogram: dict[int, int]
    author_volume: int
    q_cutoff: int


def _ratio(numerator, denominator) -> float:
    """Exact quotient rounded once to float; 0/0 -> 0."""
    if not denominator:
        return 0.0
    return float(Fraction(numerator) / Fraction(denominator))


def _incoming_index(net: FlowNetwork) -> dict[str, dict[str, int | float | Fraction]]:
    index: dict[str, dict[str, int | float | Fraction]] = {}
    for (source, target), weight in net.weights.items():
        index.setdefault(target, {})[source] = weight
    return index


def _consecutive_pairs(nets: Iterable[FlowNetwork]) -> list[tuple[FlowNetwork, FlowNetwork]]:
    ordered = sorted(nets, key=lambda n: n.to_snapshot)
    return [
        (prev, cur)
        for prev, cur in zip(ordered, ordered[1:])
        if cur.from_snapshot == prev.to_snapshot
    ]


def _delta_for_topic(
    topic: str,
    prev_in: dict[str, int | float | Fraction],
    cur_in: dict[str, int | float | Fraction],
    policy: ZeroBaselinePolicy,
    n_topics: int,
) -> tuple[float, int]:
    baseline = {s: w for s, w in prev_in.items() if s != topic}
    current = {s: w for s, w in cur_in.items() if s != topic}
    pairs_used = sum(1 for w in baseline.values() if w > 0)
    # Summation order is pinned so results stay bit-identical across runs.
    if policy.kind == "smooth":
        total = sum(
            (float(current.get(s, 0)) - float(baseline.get(s, 0)))
            / (float(baseline.get(s, 0)) + policy.k)
            for s in sorted(set(baseline) | set(current))
        )
        divisor = n_topics - 1
    else:
        total = sum(
            (float(current.get(s, 0)) - float(baseline[s])) / float(baseline[s])
            for s in sorted(baseline)
            if baseline[s] > 0
        )
        divisor = (n_topics - 1) if policy.kind == "strict" else pairs_used
    delta = total / divisor if divisor > 0 else 0.0
    return delta, pairs_used


def attractiveness(
    nets: Iterable[FlowNetwork],
    topic: TopicId,
    policy: ZeroBaselinePolicy = ZeroBaselinePolicy(),
    n_topics: int | None = None,
) -> AttractivenessSeries:
    """Mean relative change of the topic's incoming flows, per snapshot.

    Each value compares the network arriving at a snapshot with the one
    arriving one step earlier; self-flow is always excluded. ``n_topics``
    is the size of the topic universe (the classification table's count
    in the full pipeline); it defaults to the number of distinct nodes
    seen across the networks.
    """
    nets = list(nets)
    pairs = _consecutive_pairs(nets)
    if not pairs:
        raise NoBaseline("attractiveness needs two consecutive transition networks")
    universe: set[str] = set()
    for net in nets:
        universe |= net.nodes()
    if topic not in universe:
        raise UnknownTopic(f"topic {topic!r} absent from every supplied network")
    if n_topics is None:
        n_topics = len(universe)

    points: dict[int, float] = {}
    used: dict[int, int] = {}
    for prev, cur in pairs:
        prev_in = _incoming_index(prev).get(topic, {})
        cur_in = _incoming_index(cur).get(topic, {})
        delta, pairs_used = _delta_for_topic(topic, prev_in, cur_in, policy, n_topics)
        points[cur.to_snapshot] = delta
        used[cur.to_snapshot] = pairs_used
    return AttractivenessSeries(topic=topic, points=points, pairs_used=used)


def attractiveness_table(
    nets: Iterable[FlowNetwork],
    policy: ZeroBaselinePolicy = ZeroBaselinePolicy(),
    n_topics: int | None = None,
) -> dict[tuple[int, TopicId], tuple[float, int]]:
    """(snapshot, topic) -> (delta, pairs_used) for every observed topic.

    One shared incoming index per network pair, so sweeping all topics
    stays linear in the number of edges.
    """
    nets = list(nets)
    pairs = _consecutive_pairs(nets)
    if not pairs:
        return {}
    if n_topics is None:
        universe: set[str] = set()
        for net in nets:
            universe |= net.nodes()
        n_topics = len(universe)
    table: dict[tuple[int, str], tuple[float, int]] = {}
    for prev, cur in pairs:
        prev_idx = _incoming_index(prev)
        cur_idx = _incoming_index(cur)
        for topic in sorted(prev.nodes() | cur.nodes()):
            table[(cur.to_snapshot, topic)] = _delta_for_topic(
                topic, prev_idx.get(topic, {}), cur_idx.get(topic, {}), policy, n_topics
            )
    return table


def most_attractive_topics(
    nets: Iterable[FlowNetwork],
    policy: ZeroBaselinePolicy = ZeroBaselinePolicy(),
    n_topics: int | None = None,
) -> dict[int, MostAttractive]:
    """Topic with the largest attractiveness per snapshot.

    Candidates are the topics observed in either network of the pair.
    Exact ties are all reported, with the lexicographically first marked
    as the winner.
    """
    nets = list(nets)
    if not _consecutive_pairs(nets):
        raise NoBaseline("need two consecutive transition networks")
    table = attractiveness_table(nets, policy, n_topics)
    by_snapshot: dict[int, list[tuple[float, str]]] = {}
    for (snapshot, topic), (delta, _) in table.items():
        by_snapshot.setdefault(snapshot, []).append((delta, topic))
    winners: dict[int, MostAttractive] = {}
    for snapshot, scored in by_snapshot.items():
        best = max(delta for delta, _ in scored)
        ties = tuple(sorted(t for delta, t in scored if delta == best))
        winners[snapshot] = MostAttractive(topic=ties[0], delta=best, ties=ties)
    return winners


def migration_indices(
    net: FlowNetwork,
    areas: Iterable[AreaId] | None = None,
) -> dict[AreaId, MigrationIndices]:
    """Immigration, emigration, sink and source indices for every area.

    The universe defaults to the areas present in the network; passing
    the classification table's areas gives explicit zeros for silent ones.
    """
    if net.level != "area":
        raise UsageError(f"migration indices need an area-level network, got {net.level!r}")
    universe = set(net.nodes())
    if areas is not None:
        universe |= set(areas)
    decomposed = {a: decompose_area_flows(net, a) for a in sorted(universe)}
    total_cross = sum(incoming for _, incoming, _ in decomposed.values())
    out: dict[AreaId, MigrationIndices] = {}
    for area, (intra, incoming, outgoing) in decomposed.items():
        out[area] = MigrationIndices(
            iota=_ratio(incoming, intra + incoming),
            epsilon=_ratio(outgoing, intra + outgoing),
            rho=_ratio(incoming, total_cross),
            sigma=_ratio(outgoing, total_cross),
        )
    return out


def migration_index_series(
    nets: Iterable[FlowNetwork],
    areas: Iterable[AreaId] | None = None,
) -> list[SnapshotIndices]:
    """Indices per arrival snapshot, ordered by snapshot."""
    area_list = list(areas) if areas is not None else None
    series = []
    for net in sorted(nets, key=lambda n: n.to_snapshot):
        indices = migration_indices(net, area_list)
        cross = sum(
            w for (s, t), w in net.weights.items() if s != t
        )
        series.append(
            SnapshotIndices(snapshot=net.to_snapshot, indices=indices, cross_total=cross)
        )
    return series


def median_sink_source(
    series: Iterable[SnapshotIndices],
) -> dict[AreaId, tuple[float, float]]:
    """Median sink and source index per area over the defined snapshots.

    A snapshot defines the indices only when it has positive cross flow;
    the median of an even count is the mean of the middle two.
    """
    entries = list(series)
    if not entries:
        raise EmptySeries("no snapshots supplied")
    defined = [e for e in entries if e.cross_total > 0]
    if not defined:
        raise EmptySeries("no snapshot has positive cross-area flow")
    areas: set[str] = set()
    for entry in defined:
        areas |= set(entry.indices)
    zero = MigrationIndices(0.0, 0.0, 0.0, 0.0)
    return {
        area: (
            statistics.median(e.indices.get(area, zero).rho for e in defined),
            statistics.median(e.indices.get(area, zero).sigma for e in defined),
        )
        for area in sorted(areas)
    }


def multidisciplinarity(
    profiles: Iterable[ActivityProfile],
    q: float = 0.99,
) -> list[MultidisciplinarityDistribution]:
    """Distribution of the number of distinct areas touched per author.

    Uses the full per-snapshot area set of each author (every area of
    every journal published in), not the dominant set. The cutoff is the
    smallest count covering at least a fraction q of the authors.
    """
    by_snapshot: dict[int, Counter[int]] = {}
    for profile in profiles:
        by_snapshot.setdefault(profile.snapshot, Counter())[len(profile.area_set)] += 1
    out = []
    for snapshot in sorted(by_snapshot):
        hist = by_snapshot[snapshot]
        sizes = [n for n, c in hist.items() for _ in range(c)]
        out.append(
            MultidisciplinarityDistribution(
                snapshot=snapshot,
                histogram=dict(sorted(hist.items())),
                author_volume=sum(hist.values()),
                q_cutoff=quantile_cutoff(sizes, q),
            )
        )
    return out
