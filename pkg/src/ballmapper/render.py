"""Spring layout and SVG / DOT output for Ball Mapper graphs.

Positions carry no meaning beyond adjacency; only the structure (balls,
edges, sizes, colors) is interpretable. Ball area is proportional to the
number of points in the ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .color import RAINBOW, Coloring, scale_to_palette, to_hex
from .errors import DataError
from .graph import BMGraph, connected_components

SPRING_LENGTH = 1.0
RADIUS_PX = 4.0
UNIT_PX = 60.0
DOT_WIDTH_IN = 0.1
DEFAULT_ITERATIONS = 500
NO_COLOR = "#c0c0c0"


@dataclass(frozen=True, eq=False)
class Layout:
    positions: np.ndarray  # (k, 2), abstract units
    radii: np.ndarray  # (k,), pixels
    iterations: int
    seed: int


def ball_radius(count) -> np.ndarray:
    return RADIUS_PX * np.sqrt(np.asarray(count, dtype=np.float64))


def _spring(m, edges, rng, iterations):
    """Fruchterman-Reingold on one component, linear cooling."""
    if m == 1:
        return np.zeros((1, 2))
    k = SPRING_LENGTH
    pos = rng.uniform(-0.5, 0.5, size=(m, 2)) * math.sqrt(m) * k
    a = np.array([e[0] for e in edges], dtype=np.intp)
    b = np.array([e[1] for e in edges], dtype=np.intp)
    t0 = 0.1 * math.sqrt(m) * k + 0.5 * k
    for it in range(iterations):
        delta = pos[:, None, :] - pos[None, :, :]
        dist2 = np.maximum((delta**2).sum(axis=-1), 1e-12)
        np.fill_diagonal(dist2, np.inf)
        disp = ((k * k / dist2)[..., None] * delta).sum(axis=1)
        if len(a):
            d = pos[a] - pos[b]
            pull = d * (np.sqrt((d**2).sum(axis=1)) / k)[:, None]
            np.add.at(disp, a, -pull)
            np.add.at(disp, b, pull)
        length = np.maximum(np.sqrt((disp**2).sum(axis=1)), 1e-12)
        temp = t0 * (1 - it / iterations)
        pos = pos + disp * (np.minimum(length, temp) / length)[:, None]
    return pos


def layout_graph(graph: BMGraph, seed: int = 0, iterations: int = DEFAULT_ITERATIONS) -> Layout:
    """Spring-embed each connected component, then tile components on a grid.

    Components are tiled in order of their smallest ball id, so isolated
    balls (outliers) stay visibly apart from the main mass.
    """
    if iterations < 1:
        raise DataError("layout needs at least one iteration")
    if graph.n_vertices < 1:
        raise DataError("cannot lay out an empty graph")
    rng = np.random.default_rng(seed)
    components = connected_components(graph)
    local_index = {}
    for comp in components:
        for j, v in enumerate(comp):
            local_index[v] = j
    comp_of = {v: c for c, comp in enumerate(components) for v in comp}
    comp_edges = [[] for _ in components]
    for e in graph.edges:
        comp_edges[comp_of[e.a]].append((local_index[e.a], local_index[e.b]))

    pieces = []
    for comp, edges in zip(components, comp_edges):
        pos = _spring(len(comp), edges, rng, iterations)
        pos = pos - (pos.max(axis=0) + pos.min(axis=0)) / 2
        pieces.append(pos)

    extent = max(float(np.ptp(p, axis=0).max()) for p in pieces)
    cell = extent + 2 * SPRING_LENGTH
    ncols = math.ceil(math.sqrt(len(pieces)))
    positions = np.zeros((graph.n_vertices, 2))
    for c, (comp, pos) in enumerate(zip(components, pieces)):
        row, col = divmod(c, ncols)
        positions[comp] = pos + np.array([col * cell, row * cell])
    return Layout(positions, ball_radius(graph.counts()), iterations, seed)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(graph: BMGraph, layout: Layout, coloring: Coloring | None = None,
               legend: bool = True, labels: bool = True) -> str:
    """SVG 1.1 document: one circle per ball, one line per edge."""
    k = graph.n_vertices
    if len(layout.positions) != k:
        raise DataError(f"layout has {len(layout.positions)} positions for {k} balls")
    if coloring is not None and len(coloring.values) != k:
        raise DataError(f"coloring has {len(coloring.values)} values for {k} balls")
    fills = [to_hex(c) for c in scale_to_palette(coloring)] if coloring else [NO_COLOR] * k

    margin = float(layout.radii.max()) + 20
    xy = layout.positions * np.array([UNIT_PX, -UNIT_PX])
    xy = xy - xy.min(axis=0) + margin
    width = float(xy[:, 0].max()) + margin
    height = float(xy[:, 1].max()) + margin
    legend_h = 60 if legend and coloring is not None else 0
    width = max(width, 260.0)
    total_h = height + legend_h

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(width)}" '
        f'height="{_fmt(total_h)}" viewBox="0 0 {_fmt(width)} {_fmt(total_h)}">',
        f"<title>Ball Mapper graph, epsilon={graph.epsilon:g}, {k} balls, "
        f"{len(graph.edges)} edges</title>",
        '<rect width="100%" height="100%" fill="#ffffff"/>',
        '<g id="edges" stroke="#7f7f7f" stroke-width="1.5">',
    ]
    for e in graph.edges:
        (x1, y1), (x2, y2) = xy[e.a], xy[e.b]
        out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}"/>')
    out.append("</g>")
    out.append('<g id="balls" stroke="#333333" stroke-width="1">')
    for i, node in enumerate(graph.nodes):
        x, y = xy[i]
        tip = f"ball {node.id}: n={node.count}"
        if coloring is not None:
            tip += f", {escape(coloring.label)}={coloring.values[i]:.6g}"
        out.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(layout.radii[i])}" '
            f'fill="{fills[i]}"><title>{tip}</title></circle>'
        )
    out.append("</g>")
    if labels:
        out.append('<g id="labels" font-family="sans-serif" font-size="9" text-anchor="middle">')
        for i, node in enumerate(graph.nodes):
            x, y = xy[i]
            out.append(f'<text x="{_fmt(x)}" y="{_fmt(y + 3)}">{node.id}</text>')
        out.append("</g>")
    if legend_h:
        vmin, vmax = coloring.scale
        top = height + 10
        out += [
            '<g id="legend" font-family="sans-serif" font-size="10">',
            '<defs><linearGradient id="palette" x1="0" x2="1" y1="0" y2="0">',
        ]
        for s, rgb in enumerate(RAINBOW):
            out.append(f'<stop offset="{s / (len(RAINBOW) - 1):.4f}" stop-color="{to_hex(rgb)}"/>')
        out += [
            "</linearGradient></defs>",
            f'<rect x="20" y="{_fmt(top)}" width="200" height="12" fill="url(#palette)"/>',
            f'<text x="20" y="{_fmt(top + 26)}">{vmin:.4g}</text>',
            f'<text x="220" y="{_fmt(top + 26)}" text-anchor="end">{vmax:.4g}</text>',
            f'<text x="120" y="{_fmt(top + 40)}" text-anchor="middle">{escape(coloring.label)}</text>',
            "</g>",
        ]
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_dot(graph: BMGraph, coloring: Coloring | None = None) -> str:
    """Undirected DOT; node width grows with the square root of the ball size."""
    if coloring is not None and len(coloring.values) != graph.n_vertices:
        raise DataError("coloring length does not match the graph")
    fills = [to_hex(c) for c in scale_to_palette(coloring)] if coloring else None
    lines = ["graph ballmapper {", "  node [shape=circle];"]
    for i, node in enumerate(graph.nodes):
        attrs = [f'label="{node.id}"', f"width={DOT_WIDTH_IN * math.sqrt(node.count):.4f}",
                 f"count={node.count}"]
        if fills:
            attrs += ["style=filled", f'fillcolor="{fills[i]}"']
        lines.append(f"  {node.id} [{', '.join(attrs)}];")
    for e in graph.edges:
        lines.append(f"  {e.a} -- {e.b} [weight={e.shared}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
