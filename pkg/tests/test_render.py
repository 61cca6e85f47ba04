import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from ballmapper import (
    Coloring,
    DataError,
    PointCloud,
    build_graph,
    connected_components,
    export_dot,
    greedy_net,
    layout_graph,
    render_svg,
)
from ballmapper.render import NO_COLOR, RADIUS_PX, ball_radius
from conftest import line_cloud

SVG = "{http://www.w3.org/2000/svg}"


def graph_of(cloud, eps):
    return build_graph(greedy_net(cloud, eps), cloud.axis_names)


def parse_dot(text):
    """Minimal reader for the subset of DOT the exporter writes."""
    nodes = {}
    for m in re.finditer(r"^\s*(\d+) \[(.*)\];$", text, re.M):
        attrs = dict(re.findall(r'(\w+)=("[^"]*"|[^,\s]+)', m.group(2)))
        nodes[int(m.group(1))] = {k: v.strip('"') for k, v in attrs.items()}
    edges = {
        (int(a), int(b)): int(w)
        for a, b, w in re.findall(r"^\s*(\d+) -- (\d+) \[weight=(\d+)\];$", text, re.M)
    }
    return nodes, edges


def two_ball_graph():
    return graph_of(line_cloud([0, 1, 2]), 1.0)


def test_single_vertex_at_origin():
    layout = layout_graph(graph_of(line_cloud([0.0]), 1.0))
    assert layout.positions.tolist() == [[0.0, 0.0]]


def test_connected_pair_near_spring_length():
    layout = layout_graph(two_ball_graph())
    gap = np.linalg.norm(layout.positions[0] - layout.positions[1])
    assert 0.5 <= gap <= 2.0


def test_layout_deterministic_and_seed_sensitive():
    rng = np.random.default_rng(6)
    g = graph_of(PointCloud(("a", "b"), rng.standard_normal((300, 2))), 0.5)
    a = layout_graph(g, seed=1, iterations=100)
    assert np.array_equal(a.positions, layout_graph(g, seed=1, iterations=100).positions)
    assert not np.array_equal(a.positions, layout_graph(g, seed=2, iterations=100).positions)


def test_layout_arguments_validated():
    with pytest.raises(DataError):
        layout_graph(two_ball_graph(), iterations=0)


def test_components_do_not_overlap():
    g = graph_of(line_cloud([0, 1, 2, 50, 51, 52, 100]), 1.0)
    pos = layout_graph(g).positions
    comps = connected_components(g)
    assert comps == [[0, 1], [2, 3], [4]]
    centers = [pos[c].mean(axis=0) for c in comps]
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.linalg.norm(centers[i] - centers[j]) > 1.0


def test_radius_grows_with_count():
    assert ball_radius([1, 4]).tolist() == [RADIUS_PX, 2 * RADIUS_PX]
    r = ball_radius(np.arange(1, 50))
    assert np.all(np.diff(r) > 0)


def test_svg_structure():
    g = two_ball_graph()
    svg = render_svg(g, layout_graph(g))
    root = ET.fromstring(svg)
    assert root.tag == SVG + "svg"
    circles = root.findall(f".//{SVG}circle")
    assert len(circles) == 2
    assert len(root.findall(f".//{SVG}line")) == 1
    assert {c.get("fill") for c in circles} == {NO_COLOR}
    assert root.find(f".//{SVG}linearGradient") is None


def test_svg_radii_follow_area():
    cloud = line_cloud([0, 0.1, 0.2, 0.3, 10])
    g = graph_of(cloud, 0.5)
    assert g.counts().tolist() == [4, 1]
    root = ET.fromstring(render_svg(g, layout_graph(g)))
    radii = [float(c.get("r")) for c in root.findall(f".//{SVG}circle")]
    assert radii[0] == pytest.approx(2 * radii[1], abs=0.01)


def test_svg_without_edges_has_no_lines():
    g = graph_of(line_cloud([0, 5, 10]), 1.0)
    root = ET.fromstring(render_svg(g, layout_graph(g)))
    assert root.findall(f".//{SVG}line") == []
    assert len(root.findall(f".//{SVG}circle")) == 3


def test_svg_coloring_and_legend():
    g = two_ball_graph()
    svg = render_svg(g, layout_graph(g), Coloring([0.0, 1.0], "axis:x"))
    root = ET.fromstring(svg)
    fills = [c.get("fill") for c in root.findall(f".//{SVG}circle")]
    assert fills == ["#ff0000", "#8f00ff"]
    assert root.find(f".//{SVG}linearGradient") is not None
    assert "axis:x" in svg


def test_mismatched_lengths_rejected():
    g = two_ball_graph()
    layout = layout_graph(g)
    with pytest.raises(DataError):
        render_svg(g, layout, Coloring([1.0, 2.0, 3.0], "x"))
    with pytest.raises(DataError):
        export_dot(g, Coloring([1.0], "x"))
    other = layout_graph(graph_of(line_cloud([0.0]), 1.0))
    with pytest.raises(DataError):
        render_svg(g, other)


def test_dot_export():
    g = two_ball_graph()
    text = export_dot(g)
    assert text.startswith("graph ballmapper {")
    assert text.count("0 -- 1") == 1
    assert "fillcolor" not in text
    nodes, edges = parse_dot(text)
    assert set(nodes) == {0, 1}
    assert edges == {(0, 1): 1}
    assert nodes[0]["count"] == "2"


def test_dot_round_trip_on_random_graph():
    rng = np.random.default_rng(13)
    g = graph_of(PointCloud(("a", "b", "c"), rng.standard_normal((300, 3))), 0.9)
    coloring = Coloring(rng.standard_normal(g.n_vertices), "v")
    nodes, edges = parse_dot(export_dot(g, coloring))
    assert set(nodes) == set(range(g.n_vertices))
    assert edges == {(e.a, e.b): e.shared for e in g.edges}
    assert [int(nodes[i]["count"]) for i in range(g.n_vertices)] == g.counts().tolist()
    assert all(re.fullmatch(r"#[0-9a-f]{6}", nodes[i]["fillcolor"]) for i in nodes)
    widths = [float(nodes[i]["width"]) for i in range(g.n_vertices)]
    assert np.allclose(widths, 0.1 * np.sqrt(g.counts()), atol=1e-4)


def test_outputs_are_byte_stable():
    rng = np.random.default_rng(3)
    g = graph_of(PointCloud(("a", "b"), rng.standard_normal((200, 2))), 0.6)
    c = Coloring(np.arange(g.n_vertices, dtype=float), "id")
    one = render_svg(g, layout_graph(g, seed=4), c)
    two = render_svg(g, layout_graph(g, seed=4), c)
    assert one == two
    assert export_dot(g, c) == export_dot(g, c)
