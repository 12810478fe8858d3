"""Categorical edge-bundled circular diagrams rendered as standalone SVG.

Areas become colored sectors on a circle; nodes (topics, or areas at the
coarse level) sit just inside their sector, ordered by the logarithm of
their strength. Same-area transitions are drawn as U-shaped curves in
the band between nodes and sectors. Cross-area transitions are cubic
B-splines through seven control points: the two endpoints plus five
points on concentric guide circles that gather outgoing flow near the
source sector and incoming flow near the circle center, which is what
produces the visual bundling.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from xml.sax.saxutils import escape

from .classification import AreaId, ClassificationTable
from .errors import (
    DifferentArea,
    EmptyNetwork,
    MalformedLine,
    SameArea,
    UnknownTopic,
    UsageError,
)
from .flows import FlowNetwork
from .util import iter_tsv

Point = tuple[float, float]

DEFAULT_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
    "#98df8a", "#ff9896", "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7",
    "#dbdb8d", "#9edae5", "#393b79", "#637939", "#8c6d31", "#843c39",
    "#7b4173", "#5254a3", "#bd9e39",
)


@dataclass(frozen=True)
class VizConfig:
    """All rendering knobs; level radii are fractions of the node circle."""

    canvas_size: int = 1000
    radius_frac: float = 0.36
    r_node: float = 1.00
    r_zero: float = 0.92
    r_first: float = 0.80
    r_second: float = 0.55
    sector_inner: float = 1.04
    sector_outer: float = 1.10
    sector_gap_deg: float = 3.0
    out_offset_deg: float = 0.6
    radial_nudge: float = 0.03
    dest_color_weight: float = 0.7
    alpha_max: float = 0.85
    alpha_slope: float = 0.55
    alpha_floor: float = 0.08
    width_min: float = 0.6
    width_scale: float = 0.5
    min_weight: float = 0.0
    node_radius_scale: float = 3.0
    node_radius_min: float = 2.0
    node_radius_max: float = 9.0
    label_radius: float = 1.13
    font_size: float = 9.0
    show_labels: bool = True
    sector_order: str = "modularity"
    palette: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not (0 < self.r_second < self.r_first < self.r_zero <= self.r_node):
            raise UsageError("level radii must satisfy r_node >= r_zero > r_first > r_second > 0")
        if not self.r_node < self.sector_inner < self.sector_outer:
            raise UsageError("sector band must lie outside the node circle")
        if self.sector_order not in ("modularity", "strength", "alphabetical"):
            raise UsageError(f"unknown sector order {self.sector_order!r}")
        if not 0 <= self.dest_color_weight <= 1:
            raise UsageError("destination color weight must lie in [0, 1]")
        if self.alpha_floor <= 0 or self.alpha_max > 1:
            raise UsageError("alpha must stay within (0, 1]")
        if self.width_min <= 0 or self.width_scale <= 0:
            raise UsageError("stroke widths must be positive and strictly increasing")

    def color_overrides(self) -> dict[str, str]:
        return dict(self.palette)


_BOOL_WORDS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}
_HEX_RE = frozenset("0123456789abcdefABCDEF")


def _is_hex_color(text: str) -> bool:
    return len(text) == 7 and text[0] == "#" and all(c in _HEX_RE for c in text[1:])


def load_viz_config(path, base: VizConfig | None = None) -> VizConfig:
    """Flat ``key=value`` file; unknown keys with #RRGGBB values are
    per-area palette overrides."""
    cfg = base or VizConfig()
    known = {f.name: f.type for f in fields(VizConfig)}
    updates: dict[str, object] = {}
    palette = dict(cfg.palette)
    for lineno, parts in iter_tsv(path):
        line = "\t".join(parts)
        if "=" not in line:
            raise MalformedLine(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in known and key != "palette":
            current = getattr(cfg, key)
            try:
                if isinstance(current, bool):
                    updates[key] = _BOOL_WORDS[value.lower()]
                elif isinstance(current, int):
                    updates[key] = int(value)
                elif isinstance(current, float):
                    updates[key] = float(value)
                else:
                    updates[key] = value
            except (KeyError, ValueError):
                raise MalformedLine(f"{path}:{lineno}: bad value {value!r} for {key}") from None
        elif _is_hex_color(value):
            palette[key] = value
        else:
            raise MalformedLine(f"{path}:{lineno}: unknown setting {key!r}")
    updates["palette"] = tuple(sorted(palette.items()))
    return replace(cfg, **updates)


# -- colors --


def parse_hex(color: str) -> tuple[int, int, int]:
    if not _is_hex_color(color):
        raise UsageError(f"colors must be #RRGGBB, got {color!r}")
    return int(color[1:3], 16), int(color[3:5], 16), int(color[5:7], 16)


def mix_colors(source: str, destination: str, dest_weight: float) -> str:
    """Channel-wise interpolation, biased toward the destination color."""
    src = parse_hex(source)
    dst = parse_hex(destination)
    mixed = (
        round(s * (1.0 - dest_weight) + d * dest_weight) for s, d in zip(src, dst)
    )
    return "#" + "".join(f"{c:02x}" for c in mixed)


# -- geometry --


def _polar(center: Point, angle: float, radius: float) -> Point:
    return (center[0] + radius * math.cos(angle), center[1] + radius * math.sin(angle))


def arc_midpoint(a: float, b: float) -> float:
    """Midpoint of the shorter arc from a to b (ties resolve toward +pi/2 from a)."""
    diff = (b - a) % (2.0 * math.pi)
    if diff > math.pi:
        diff -= 2.0 * math.pi
    return a + diff / 2.0


def _lerp(p: Point, q: Point, t: float) -> Point:
    return (p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t)


def _insert_knot(ctrl: list[Point], knots: list[float], u: float) -> tuple[list[Point], list[float]]:
    degree = 3
    span = bisect_right(knots, u) - 1
    new_ctrl = ctrl[: span - degree + 1]
    for i in range(span - degree + 1, span + 1):
        denom = knots[i + degree] - knots[i]
        alpha = (u - knots[i]) / denom if denom else 0.0
        new_ctrl.append(_lerp(ctrl[i - 1], ctrl[i], alpha))
    new_ctrl.extend(ctrl[span:])
    return new_ctrl, knots[: span + 1] + [u] + knots[span + 1 :]


def bspline_beziers(points: list[Point]) -> list[list[Point]]:
    """Clamped uniform cubic B-spline over the control polygon, converted
    to cubic Bezier segments by raising interior knots to full multiplicity."""
    if len(points) < 4:
        raise UsageError("cubic B-spline needs at least 4 control points")
    spans = len(points) - 3
    knots = [0.0] * 4 + [float(i) for i in range(1, spans)] + [float(spans)] * 4
    ctrl = [tuple(p) for p in points]
    for value in range(1, spans):
        for _ in range(2):
            ctrl, knots = _insert_knot(ctrl, knots, float(value))
    return [ctrl[3 * i : 3 * i + 4] for i in range(spans)]


# -- layout --


@dataclass
class VizLayout:
    cfg: VizConfig
    center: Point
    circle_radius: float
    node_angle: dict[str, float]
    node_radius: dict[str, float]
    node_area: dict[str, AreaId]
    node_strength: dict[str, Fraction]
    sector_arc: dict[AreaId, tuple[float, float]]
    sector_color: dict[AreaId, str]
    sector_order: list[AreaId] = field(default_factory=list)

    def sector_barycenter(self, area: AreaId) -> float:
        a0, a1 = self.sector_arc[area]
        return (a0 + a1) / 2.0

    def node_point(self, node: str) -> Point:
        return _polar(
            self.center, self.node_angle[node], self.cfg.r_node * self.circle_radius
        )


def _symmetrized_area_graph(net: FlowNetwork, node_area: dict[str, str]):
    # Exact rational accumulation: iteration order cannot perturb the
    # modularity comparisons, whatever the weight type.
    sym: dict[tuple[str, str], Fraction] = {}
    for (source, target), weight in net.weights.items():
        a, b = node_area[source], node_area[target]
        key = (a, b) if a <= b else (b, a)
        sym[key] = sym.get(key, 0) + Fraction(weight)
    return sym


def _greedy_modularity_order(areas, sym, area_strength) -> list[str]:
    """Agglomerative modularity merge over the (tiny) area graph.

    Exact rational arithmetic plus lexicographic tie-breaking keep the
    resulting order reproducible across runs and hash seeds.
    """
    adjacency = {a: dict() for a in areas}
    degree = {a: 0 for a in areas}
    for (a, b), w in sym.items():
        if a == b:
            adjacency[a][a] = adjacency[a].get(a, 0) + 2 * w
            degree[a] += 2 * w
        else:
            adjacency[a][b] = adjacency[a].get(b, 0) + w
            adjacency[b][a] = adjacency[b].get(a, 0) + w
            degree[a] += w
            degree[b] += w
    two_m = sum(degree.values())

    communities = {a: frozenset([a]) for a in areas}
    if two_m > 0:
        while len(communities) > 1:
            best = None
            ids = sorted(communities)
            for i, ca in enumerate(ids):
                for cb in ids[i + 1 :]:
                    between = sum(
                        adjacency[x].get(y, 0)
                        for x in sorted(communities[ca])
                        for y in sorted(communities[cb])
                    )
                    ka = sum(degree[x] for x in sorted(communities[ca]))
                    kb = sum(degree[x] for x in sorted(communities[cb]))
                    gain = 2 * (Fraction(between, two_m) - Fraction(ka * kb, two_m * two_m))
                    if best is None or gain > best[0]:
                        best = (gain, ca, cb)
            if best is None or best[0] <= 0:
                break
            _, ca, cb = best
            merged = communities.pop(ca) | communities.pop(cb)
            communities[min(merged)] = merged

    def community_key(members: frozenset):
        return (-sum(area_strength[a] for a in sorted(members)), min(members))

    ordered: list[str] = []
    for members in sorted(communities.values(), key=community_key):
        ordered.extend(sorted(members, key=lambda a: (-area_strength[a], a)))
    return ordered


def _sector_colors(order: list[str], overrides: dict[str, str]) -> dict[str, str]:
    colors = {}
    for i, area in enumerate(order):
        colors[area] = overrides.get(area, DEFAULT_PALETTE[i % len(DEFAULT_PALETTE)])
    return colors


def layout(net: FlowNetwork, table: ClassificationTable | None, cfg: VizConfig) -> VizLayout:
    """Deterministic circular layout: sector order by the configured
    heuristic, node angles inside their sector, radii clamped to the
    configured band."""
    if not net.weights:
        raise EmptyNetwork("layout needs a network with at least one edge")

    # Strengths as exact rationals: node order must not depend on float
    # summation order, which varies with the hash seed.
    strength: dict[str, Fraction] = {}
    for (source, target), weight in net.weights.items():
        w = Fraction(weight)
        strength[source] = strength.get(source, Fraction(0)) + w
        strength[target] = strength.get(target, Fraction(0)) + w

    node_area: dict[str, str] = {}
    for node in strength:
        if net.level == "area":
            node_area[node] = node
        else:
            if table is None or node not in table.topic_area:
                raise UnknownTopic(f"topic {node!r} not in the topic->area table")
            node_area[node] = table.topic_area[node]

    by_area: dict[str, list[str]] = {}
    for node, area in node_area.items():
        by_area.setdefault(area, []).append(node)
    area_strength = {
        area: sum(strength[n] for n in nodes) for area, nodes in by_area.items()
    }

    if cfg.sector_order == "alphabetical":
        order = sorted(by_area)
    elif cfg.sector_order == "strength":
        order = sorted(by_area, key=lambda a: (-area_strength[a], a))
    else:
        sym = _symmetrized_area_graph(net, node_area)
        order = _greedy_modularity_order(sorted(by_area), sym, area_strength)

    center = (cfg.canvas_size / 2.0, cfg.canvas_size / 2.0)
    circle_radius = cfg.canvas_size * cfg.radius_frac
    gap = math.radians(cfg.sector_gap_deg)
    gap = min(gap, math.pi / max(1, len(order)))
    available = 2.0 * math.pi - gap * len(order)
    total_nodes = len(strength)

    node_angle: dict[str, float] = {}
    sector_arc: dict[str, tuple[float, float]] = {}
    theta = -math.pi / 2.0
    for area in order:
        nodes = sorted(by_area[area], key=lambda n: (-strength[n], n))
        span = available * len(nodes) / total_nodes
        sector_arc[area] = (theta, theta + span)
        for i, node in enumerate(nodes):
            node_angle[node] = theta + span * (i + 0.5) / len(nodes)
        theta += span + gap

    node_radius = {
        node: min(
            cfg.node_radius_max,
            max(cfg.node_radius_min, cfg.node_radius_scale * math.log1p(s)),
        )
        for node, s in strength.items()
    }

    return VizLayout(
        cfg=cfg,
        center=center,
        circle_radius=circle_radius,
        node_angle=node_angle,
        node_radius=node_radius,
        node_area=node_area,
        node_strength=strength,
        sector_arc=sector_arc,
        sector_color=_sector_colors(order, cfg.color_overrides()),
        sector_order=list(order),
    )


# -- edge routing --


def route_cross_edge(lay: VizLayout, source: str, target: str) -> list[Point]:
    """Seven control points for a cross-area edge.

    Outgoing flow gathers beside the source sector's barycenter slightly
    outside the first-level circle; incoming flow gathers beside the
    target's barycenter slightly inside it, so direction stays readable.
    """
    src_area = lay.node_area[source]
    dst_area = lay.node_area[target]
    if src_area == dst_area:
        raise SameArea(f"{source}->{target} stays inside {src_area}; route as intra-area")
    cfg = lay.cfg
    radius = lay.circle_radius
    offset = math.radians(cfg.out_offset_deg)
    a_src = lay.node_angle[source]
    a_dst = lay.node_angle[target]
    points = [
        lay.node_point(source),
        _polar(lay.center, a_src, cfg.r_zero * radius),
        _polar(
            lay.center,
            lay.sector_barycenter(src_area) + offset,
            (cfg.r_first + cfg.radial_nudge) * radius,
        ),
        _polar(lay.center, arc_midpoint(a_src, a_dst), cfg.r_second * radius),
        _polar(
            lay.center,
            lay.sector_barycenter(dst_area) - offset,
            (cfg.r_first - cfg.radial_nudge) * radius,
        ),
        _polar(lay.center, a_dst, cfg.r_zero * radius),
        lay.node_point(target),
    ]
    return points


def route_intra_edge(lay: VizLayout, source: str, target: str) -> list[Point]:
    """Endpoints plus one control point at the angular midpoint, placed in
    the band between the node circle and the sector."""
    src_area = lay.node_area[source]
    dst_area = lay.node_area[target]
    if src_area != dst_area:
        raise DifferentArea(f"{source}->{target} crosses {src_area}->{dst_area}")
    cfg = lay.cfg
    mid_angle = arc_midpoint(lay.node_angle[source], lay.node_angle[target])
    mid_radius = (cfg.r_node + cfg.sector_inner) / 2.0 * lay.circle_radius
    return [
        lay.node_point(source),
        _polar(lay.center, mid_angle, mid_radius),
        lay.node_point(target),
    ]


# -- rendering --


def _fmt(value: float) -> str:
    return f"{value:.3f}"


def _pt(p: Point) -> str:
    return f"{_fmt(p[0])} {_fmt(p[1])}"


def _annulus_path(center: Point, r_in: float, r_out: float, a0: float, a1: float) -> str:
    large = 1 if (a1 - a0) > math.pi else 0
    p_out0 = _polar(center, a0, r_out)
    p_out1 = _polar(center, a1, r_out)
    p_in1 = _polar(center, a1, r_in)
    p_in0 = _polar(center, a0, r_in)
    return (
        f"M {_pt(p_out0)} "
        f"A {_fmt(r_out)} {_fmt(r_out)} 0 {large} 1 {_pt(p_out1)} "
        f"L {_pt(p_in1)} "
        f"A {_fmt(r_in)} {_fmt(r_in)} 0 {large} 0 {_pt(p_in0)} Z"
    )


def _spline_path(points: list[Point]) -> str:
    segments = bspline_beziers(points)
    parts = [f"M {_pt(segments[0][0])}"]
    for seg in segments:
        parts.append(f"C {_pt(seg[1])} {_pt(seg[2])} {_pt(seg[3])}")
    return " ".join(parts)


def _edge_alpha(cfg: VizConfig, p: Point, q: Point, circle_radius: float) -> float:
    distance = math.hypot(q[0] - p[0], q[1] - p[1])
    normalized = distance / (2.0 * circle_radius)
    return min(1.0, max(cfg.alpha_floor, cfg.alpha_max - cfg.alpha_slope * normalized))


def edge_width(cfg: VizConfig, weight) -> float:
    return cfg.width_min + cfg.width_scale * float(weight)


def _sector_elements(lay: VizLayout) -> list[str]:
    cfg = lay.cfg
    out = []
    for area in lay.sector_order:
        a0, a1 = lay.sector_arc[area]
        path = _annulus_path(
            lay.center,
            cfg.sector_inner * lay.circle_radius,
            cfg.sector_outer * lay.circle_radius,
            a0,
            a1,
        )
        out.append(
            f'<path class="sector" fill="{lay.sector_color[area]}" d="{path}"/>'
        )
    return out


def _label_element(lay: VizLayout, node: str) -> str:
    cfg = lay.cfg
    angle = lay.node_angle[node]
    pos = _polar(lay.center, angle, cfg.label_radius * lay.circle_radius)
    color = lay.sector_color[lay.node_area[node]]
    degrees = math.degrees(angle)
    if math.cos(angle) >= 0:
        anchor = "start"
    else:
        anchor = "end"
        degrees += 180.0
    return (
        f'<text class="label" x="{_fmt(pos[0])}" y="{_fmt(pos[1])}" '
        f'font-size="{cfg.font_size:g}" fill="{color}" text-anchor="{anchor}" '
        f'dominant-baseline="middle" '
        f'transform="rotate({_fmt(degrees)} {_pt(pos)})">{escape(node)}</text>'
    )


def _document(cfg: VizConfig, body: list[str]) -> str:
    size = cfg.canvas_size
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _sectors_only(table: ClassificationTable, cfg: VizConfig) -> str:
    areas = list(table.areas())
    center = (cfg.canvas_size / 2.0, cfg.canvas_size / 2.0)
    circle_radius = cfg.canvas_size * cfg.radius_frac
    gap = min(math.radians(cfg.sector_gap_deg), math.pi / max(1, len(areas)))
    span = (2.0 * math.pi - gap * len(areas)) / len(areas)
    colors = _sector_colors(areas, cfg.color_overrides())
    body = []
    theta = -math.pi / 2.0
    for area in areas:
        path = _annulus_path(
            center,
            cfg.sector_inner * circle_radius,
            cfg.sector_outer * circle_radius,
            theta,
            theta + span,
        )
        body.append(f'<path class="sector" fill="{colors[area]}" d="{path}"/>')
        theta += span + gap
    return _document(cfg, body)


def render_svg(
    net: FlowNetwork,
    table: ClassificationTable | None,
    cfg: VizConfig = VizConfig(),
    out=None,
) -> str:
    """Render the network as a standalone SVG document (also written to
    ``out`` when given). Self-transitions are never drawn; edges lighter
    than ``cfg.min_weight`` are omitted. Element order: sectors, intra
    edges, cross edges, nodes, labels.
    """
    if not net.weights:
        if table is None:
            raise EmptyNetwork("nothing to render: empty network and no table")
        svg = _sectors_only(table, cfg)
    else:
        lay = layout(net, table, cfg)
        intra: list[str] = []
        cross: list[str] = []
        for (source, target), weight in net.sorted_items():
            if source == target or float(weight) < cfg.min_weight:
                continue
            width = edge_width(cfg, weight)
            alpha = _edge_alpha(
                cfg, lay.node_point(source), lay.node_point(target), lay.circle_radius
            )
            src_area = lay.node_area[source]
            dst_area = lay.node_area[target]
            if src_area == dst_area:
                p0, ctrl, p1 = route_intra_edge(lay, source, target)
                intra.append(
                    f'<path class="edge-intra" fill="none" '
                    f'stroke="{lay.sector_color[src_area]}" '
                    f'stroke-width="{width:.6g}" stroke-opacity="{alpha:.4f}" '
                    f'd="M {_pt(p0)} Q {_pt(ctrl)} {_pt(p1)}"/>'
                )
            else:
                color = mix_colors(
                    lay.sector_color[src_area],
                    lay.sector_color[dst_area],
                    cfg.dest_color_weight,
                )
                cross.append(
                    f'<path class="edge-cross" fill="none" stroke="{color}" '
                    f'stroke-width="{width:.6g}" stroke-opacity="{alpha:.4f}" '
                    f'd="{_spline_path(route_cross_edge(lay, source, target))}"/>'
                )
        nodes = [
            f'<circle class="node" cx="{_fmt(lay.node_point(n)[0])}" '
            f'cy="{_fmt(lay.node_point(n)[1])}" r="{_fmt(lay.node_radius[n])}" '
            f'fill="{lay.sector_color[lay.node_area[n]]}"/>'
            for n in sorted(lay.node_angle)
        ]
        labels = (
            [_label_element(lay, n) for n in sorted(lay.node_angle)]
            if cfg.show_labels
            else []
        )
        svg = _document(cfg, [*_sector_elements(lay), *intra, *cross, *nodes, *labels])

    if out is not None:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    return svg
