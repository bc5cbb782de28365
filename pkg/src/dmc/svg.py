"""Self-contained SVG figures with deterministic bytes.

Every figure is 800x600. Text is generated with fixed number formatting and
contains no timestamps or random ids, so identical input gives identical
files.
"""
import math
from pathlib import Path

import numpy as np

from .exceptions import ValidationError

WIDTH, HEIGHT = 800, 600
PALETTE = ("#1f4e79", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085")


def _num(v):
    return f"{v:.6g}"


def _esc(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;"))


def nice_ticks(lo, hi, count=5):
    """Round tick positions covering ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError("axis limits must be finite")
    if hi <= lo:
        span = abs(lo) if lo != 0 else 1.0
        lo, hi = lo - 0.5 * span, hi + 0.5 * span
    raw = (hi - lo) / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9)
    ticks = []
    k = first
    while k * step <= hi + 1e-9 * step:
        ticks.append(round(k * step, 12) + 0.0)
        k += 1
    return ticks


class Canvas:
    """Minimal SVG builder with one plotting area per panel."""

    def __init__(self, title):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="16">{_esc(title)}</text>',
        ]

    def add(self, element):
        self.parts.append(element)

    def render(self):
        return "\n".join(self.parts + ["</svg>"]) + "\n"


class Axes:
    def __init__(self, canvas, box, xlim, ylim, xlabel="", ylabel="", xticks=None, yticks=None):
        self.canvas = canvas
        self.x0, self.y0, self.w, self.h = box
        self.xticks = nice_ticks(*xlim) if xticks is None else xticks
        self.yticks = nice_ticks(*ylim) if yticks is None else yticks
        self.xlim = (min([xlim[0], *self.xticks]), max([xlim[1], *self.xticks]))
        self.ylim = (min([ylim[0], *self.yticks]), max([ylim[1], *self.yticks]))
        if self.xlim[1] == self.xlim[0]:
            self.xlim = (self.xlim[0] - 1, self.xlim[1] + 1)
        if self.ylim[1] == self.ylim[0]:
            self.ylim = (self.ylim[0] - 1, self.ylim[1] + 1)
        self._frame(xlabel, ylabel)

    def px(self, x):
        return self.x0 + (x - self.xlim[0]) / (self.xlim[1] - self.xlim[0]) * self.w

    def py(self, y):
        return self.y0 + self.h - (y - self.ylim[0]) / (self.ylim[1] - self.ylim[0]) * self.h

    def _frame(self, xlabel, ylabel):
        c = self.canvas
        c.add(f'<rect x="{_num(self.x0)}" y="{_num(self.y0)}" width="{_num(self.w)}" '
              f'height="{_num(self.h)}" fill="none" stroke="black"/>')
        base = self.y0 + self.h
        for t in self.xticks:
            x = self.px(t)
            c.add(f'<line x1="{_num(x)}" y1="{_num(base)}" x2="{_num(x)}" y2="{_num(base + 5)}" stroke="black"/>')
            c.add(f'<text x="{_num(x)}" y="{_num(base + 18)}" text-anchor="middle">{_num(t)}</text>')
        for t in self.yticks:
            y = self.py(t)
            c.add(f'<line x1="{_num(self.x0 - 5)}" y1="{_num(y)}" x2="{_num(self.x0)}" y2="{_num(y)}" stroke="black"/>')
            c.add(f'<text x="{_num(self.x0 - 8)}" y="{_num(y + 4)}" text-anchor="end">{_num(t)}</text>')
        if xlabel:
            c.add(f'<text x="{_num(self.x0 + self.w / 2)}" y="{_num(base + 38)}" '
                  f'text-anchor="middle">{_esc(xlabel)}</text>')
        if ylabel:
            cx, cy = self.x0 - 52, self.y0 + self.h / 2
            c.add(f'<text x="{_num(cx)}" y="{_num(cy)}" text-anchor="middle" '
                  f'transform="rotate(-90 {_num(cx)} {_num(cy)})">{_esc(ylabel)}</text>')

    def marker(self, x, y, kind, color, size=5):
        px, py = self.px(x), self.py(y)
        if kind == "cross":
            self.canvas.add(
                f'<path d="M{_num(px - size)},{_num(py - size)}L{_num(px + size)},{_num(py + size)}'
                f'M{_num(px - size)},{_num(py + size)}L{_num(px + size)},{_num(py - size)}" '
                f'stroke="{color}" stroke-width="2" fill="none"/>')
        elif kind == "square":
            self.canvas.add(f'<rect x="{_num(px - size)}" y="{_num(py - size)}" width="{2 * size}" '
                            f'height="{2 * size}" stroke="{color}" fill="none" stroke-width="1.5"/>')
        else:
            self.canvas.add(f'<circle cx="{_num(px)}" cy="{_num(py)}" r="{size}" stroke="{color}" '
                            f'fill="none" stroke-width="1.5"/>')

    def vline(self, x, color="red", dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.canvas.add(f'<line x1="{_num(self.px(x))}" y1="{_num(self.y0)}" x2="{_num(self.px(x))}" '
                        f'y2="{_num(self.y0 + self.h)}" stroke="{color}" stroke-width="1.5"{extra}/>')

    def polyline(self, xs, ys, color="black"):
        pts = " ".join(f"{_num(self.px(x))},{_num(self.py(y))}" for x, y in zip(xs, ys))
        self.canvas.add(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')

    def label(self, x, y, text, dx=7, dy=-6):
        self.canvas.add(f'<text x="{_num(self.px(x) + dx)}" y="{_num(self.py(y) + dy)}" '
                        f'font-size="10">{_esc(text)}</text>')


MAIN_BOX = (90, 50, 660, 470)
CLUSTER_MARKERS = ("cross", "circle", "square")


def _limits(values, pad=0.05):
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    span = hi - lo if hi > lo else max(abs(lo), 1.0)
    return lo - pad * span, hi + pad * span


def _legend(canvas, x, y, entries):
    for i, (kind, color, text) in enumerate(entries):
        yy = y + 18 * i
        if kind == "cross":
            canvas.add(f'<path d="M{x - 4},{yy - 4}L{x + 4},{yy + 4}M{x - 4},{yy + 4}L{x + 4},{yy - 4}" '
                       f'stroke="{color}" stroke-width="2"/>')
        elif kind == "square":
            canvas.add(f'<rect x="{x - 4}" y="{yy - 4}" width="8" height="8" stroke="{color}" fill="none"/>')
        elif kind == "line":
            canvas.add(f'<line x1="{x - 8}" y1="{yy}" x2="{x + 8}" y2="{yy}" stroke="{color}" stroke-width="2"/>')
        else:
            canvas.add(f'<circle cx="{x}" cy="{yy}" r="4" stroke="{color}" fill="none"/>')
        canvas.add(f'<text x="{x + 12}" y="{yy + 4}">{_esc(text)}</text>')


def embedding_svg(coords, labels, title="Diffusion map clustering"):
    """Scatter of the first two diffusion coordinates, numbered points, threshold at x = 0."""
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels)
    if coords.ndim != 2 or coords.shape[0] == 0 or coords.shape[0] != labels.size:
        raise ValidationError("embedding plot needs one label per embedded sample")
    x = coords[:, 0]
    y = coords[:, 1] if coords.shape[1] > 1 else np.zeros_like(x)
    canvas = Canvas(title)
    xlo, xhi = _limits(np.append(x, 0.0))
    ax = Axes(canvas, MAIN_BOX, (xlo, xhi), _limits(y), "first diffusion coordinate",
              "second diffusion coordinate" if coords.shape[1] > 1 else "")
    ax.vline(0.0, color="gray", dash="6,4")
    for i, (xi, yi, lab) in enumerate(zip(x, y, labels)):
        ax.marker(xi, yi, CLUSTER_MARKERS[int(lab) % 3], PALETTE[int(lab) % len(PALETTE)])
        ax.label(xi, yi, str(i + 1))
    _legend(canvas, 640, 70, [(CLUSTER_MARKERS[k % 3], PALETTE[k % len(PALETTE)], f"cluster {k}")
                              for k in sorted(set(int(v) for v in labels))])
    return canvas.render()


def epsilon_svg(grid, weight_sums, selected, title="Bandwidth selection"):
    """Log-log weight-sum curve with the selected bandwidth as a vertical line."""
    grid = np.asarray(grid, dtype=np.float64)
    sums = np.asarray(weight_sums, dtype=np.float64)
    if grid.size == 0 or grid.size != sums.size:
        raise ValidationError("epsilon scan is empty or inconsistent; nothing to draw")
    lx, ly = np.log10(grid), np.log10(sums)
    canvas = Canvas(title)
    ax = Axes(canvas, MAIN_BOX, _limits(lx, 0.0), _limits(ly), "log10 epsilon", "log10 sum of weights")
    ax.polyline(lx, ly, color=PALETTE[0])
    for a, b in zip(lx, ly):
        ax.marker(a, b, "circle", PALETTE[0], size=2)
    if selected is not None:
        ax.vline(math.log10(selected), color="red")
    return canvas.render()


def dendrogram_svg(tree, title="Agglomerative clustering dendrogram"):
    """Classic U-shaped dendrogram; leaves numbered from 1 in drawing order."""
    n = tree.n
    order = tree.leaf_order()
    xpos = {leaf: float(i) for i, leaf in enumerate(order)}
    ypos = {leaf: 0.0 for leaf in range(n)}
    top = max((m.height for m in tree.merges), default=1.0) or 1.0
    canvas = Canvas(title)
    ax = Axes(canvas, MAIN_BOX, (-0.5, n - 0.5), (0.0, top * 1.05), "sample", "merge height",
              xticks=[])
    for m in tree.merges:
        xl, xr = xpos[m.left], xpos[m.right]
        yl, yr, h = ypos[m.left], ypos[m.right], m.height
        ax.polyline([xl, xl, xr, xr], [yl, h, h, yr], color=PALETTE[0])
        xpos[m.node] = 0.5 * (xl + xr)
        ypos[m.node] = h
    base = ax.y0 + ax.h
    for leaf in order:
        canvas.add(f'<text x="{_num(ax.px(xpos[leaf]))}" y="{_num(base + 16)}" text-anchor="middle" '
                   f'font-size="10">{leaf + 1}</text>')
    return canvas.render()


def _heat_color(v):
    v = min(max(float(v), 0.0), 1.0)
    g = int(round(255 * (1.0 - v)))
    return f"rgb(255,{g},{g})"


def corr_svg(panels, title="Absolute correlation between samples"):
    """Up to three heatmaps side by side; each panel is ``(name, matrix, sample_ids)``."""
    if not panels:
        raise ValidationError("no correlation matrices to draw")
    canvas = Canvas(title)
    k = len(panels)
    gap = 30
    size = min(460.0, (WIDTH - 60 - gap * (k - 1)) / k)
    x = (WIDTH - (k * size + (k - 1) * gap)) / 2
    for name, M, ids in panels:
        M = np.asarray(M, dtype=np.float64)
        m = M.shape[0]
        cell = size / max(m, 1)
        y0 = 80.0
        canvas.add(f'<text x="{_num(x + size / 2)}" y="{_num(y0 - 12)}" text-anchor="middle">{_esc(name)}</text>')
        for i in range(m):
            for j in range(m):
                canvas.add(f'<rect x="{_num(x + j * cell)}" y="{_num(y0 + i * cell)}" width="{_num(cell)}" '
                           f'height="{_num(cell)}" fill="{_heat_color(M[i, j])}"/>')
        if m <= 30:
            for i, sid in enumerate(ids):
                canvas.add(f'<text x="{_num(x - 3)}" y="{_num(y0 + (i + 0.5) * cell + 3)}" '
                           f'text-anchor="end" font-size="8">{sid}</text>')
        canvas.add(f'<rect x="{_num(x)}" y="{_num(y0)}" width="{_num(size)}" height="{_num(size)}" '
                   f'fill="none" stroke="black"/>')
        x += size + gap
    bar_y = 80 + size + 30
    for i in range(11):
        canvas.add(f'<rect x="{250 + 30 * i}" y="{_num(bar_y)}" width="30" height="12" '
                   f'fill="{_heat_color(i / 10)}" stroke="black" stroke-width="0.3"/>')
    canvas.add(f'<text x="250" y="{_num(bar_y + 28)}" text-anchor="middle">0</text>')
    canvas.add(f'<text x="580" y="{_num(bar_y + 28)}" text-anchor="middle">1</text>')
    return canvas.render()


def scale_unit(coords):
    """Divide each column by its largest absolute value (all-zero columns left alone)."""
    coords = np.asarray(coords, dtype=np.float64)
    peak = np.abs(coords).max(axis=0)
    return coords / np.where(peak > 0, peak, 1.0)


def comparison_svg(embeddings, labels, title="Dimensionality reduction comparison (scaled)"):
    """Overlay of several 2-D embeddings, each scaled to unit max-abs per axis.

    ``embeddings`` maps method name to an ``n x d`` coordinate array. Color
    encodes the method and marker shape the cluster.
    """
    if not embeddings:
        raise ValidationError("no embeddings to compare")
    labels = np.asarray(labels)
    canvas = Canvas(title)
    ax = Axes(canvas, MAIN_BOX, (-1.1, 1.1), (-1.1, 1.1), "scaled coordinate 1", "scaled coordinate 2")
    entries = []
    for m, (name, coords) in enumerate(embeddings.items()):
        coords = np.asarray(coords, dtype=np.float64)
        if coords.shape[0] != labels.size:
            raise ValidationError(f"{name}: embedding has {coords.shape[0]} rows, expected {labels.size}")
        if coords.shape[1] == 1:
            coords = np.hstack([coords, np.zeros_like(coords)])
        s = scale_unit(coords[:, :2])
        color = PALETTE[m % len(PALETTE)]
        for (a, b), lab in zip(s, labels):
            ax.marker(a, b, CLUSTER_MARKERS[int(lab) % 3], color, size=4)
        entries.append(("line", color, name))
    entries += [(CLUSTER_MARKERS[k % 3], "black", f"cluster {k}") for k in sorted(set(int(v) for v in labels))]
    _legend(canvas, 620, 70, entries)
    return canvas.render()


_RENDERERS = {
    "embedding": embedding_svg,
    "epsilon": epsilon_svg,
    "dendrogram": dendrogram_svg,
    "corr": corr_svg,
    "comparison": comparison_svg,
}


def emit_svg(kind, data, path=None):
    """Render figure ``kind`` from keyword ``data``; write to ``path`` if given and return the text."""
    try:
        render = _RENDERERS[kind]
    except KeyError:
        raise ValidationError(f"unknown figure kind {kind!r}; choose from {sorted(_RENDERERS)}") from None
    text = render(**data)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text
