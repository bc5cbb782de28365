import xml.etree.ElementTree as ET

import numpy as np
import pytest

from dmc.clustering import agglomerative
from dmc.exceptions import ValidationError
from dmc.linalg import pairwise_sq_dists
from dmc.svg import emit_svg, nice_ticks, scale_unit

NS = "{http://www.w3.org/2000/svg}"


def parse(text):
    root = ET.fromstring(text)
    assert root.tag == NS + "svg"
    assert (root.get("width"), root.get("height"), root.get("viewBox")) == ("800", "600", "0 0 800 600")
    return root


def test_two_point_embedding():
    root = parse(emit_svg("embedding", {"coords": [[0.5, 0.1], [-0.5, -0.1]], "labels": [1, 0]}))
    # plot markers are drawn with a wider stroke than the legend entries
    crosses = [e for e in root.iter(NS + "path") if e.get("fill") == "none"]
    circles = [e for e in root.iter(NS + "circle") if e.get("stroke-width") == "1.5"]
    assert len(crosses) == 1 and len(circles) == 1
    ticks_at_zero = [e for e in root.iter(NS + "text") if e.text == "0" and e.get("y") == "538"]
    x0 = ticks_at_zero[0].get("x")
    dashed = [e for e in root.iter(NS + "line") if e.get("stroke-dasharray")]
    assert len(dashed) == 1 and dashed[0].get("x1") == dashed[0].get("x2") == x0


def test_one_dimensional_embedding_renders():
    parse(emit_svg("embedding", {"coords": [[0.3], [-0.2], [0.1]], "labels": [1, 0, 1]}))


def test_empty_scan_refused():
    with pytest.raises(ValidationError):
        emit_svg("epsilon", {"grid": [], "weight_sums": [], "selected": None})


def test_unknown_kind():
    with pytest.raises(ValidationError):
        emit_svg("pie", {})


def all_figures(rng):
    X = rng.normal(size=(6, 3))
    C = np.abs(np.corrcoef(X))
    labels = [0, 0, 0, 1, 1, 1]
    return {
        "embedding": {"coords": X[:, :2], "labels": labels},
        "epsilon": {"grid": np.logspace(-1, 1, 9), "weight_sums": np.linspace(6, 36, 9), "selected": 1.0},
        "dendrogram": {"tree": agglomerative(np.sqrt(pairwise_sq_dists(X)))},
        "corr": {"panels": [("all samples", C, list(range(1, 7))), ("cluster 0", C[:3, :3], [1, 2, 3])]},
        "comparison": {"embeddings": {"a": X[:, :2], "b": X[:, 1:]}, "labels": labels},
    }


@pytest.mark.parametrize("kind", ["embedding", "epsilon", "dendrogram", "corr", "comparison"])
def test_figures_are_deterministic_and_well_formed(kind, tmp_path):
    a = emit_svg(kind, all_figures(np.random.default_rng(1))[kind], tmp_path / "a.svg")
    b = emit_svg(kind, all_figures(np.random.default_rng(1))[kind], tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    assert a == b
    parse(a)


def test_nice_ticks_cover_range():
    ticks = nice_ticks(-0.37, 1.42)
    assert ticks[0] >= -0.37 and ticks[-1] <= 1.42 and len(ticks) >= 3
    steps = np.diff(ticks)
    np.testing.assert_allclose(steps, steps[0])


def test_scale_unit():
    out = scale_unit(np.array([[2.0, -1.0], [-4.0, 0.5]]))
    np.testing.assert_array_equal(out, [[0.5, -1.0], [-1.0, 0.5]])
    np.testing.assert_array_equal(scale_unit(np.zeros((2, 1))), np.zeros((2, 1)))
