"""SVG rendering of tropical curves over their line arrangement."""

from __future__ import annotations

from fractions import Fraction

SCALE = 40
RAY_LEN = Fraction(3, 2)


def _f(x):
    return float(x) * SCALE


class _Canvas:
    def __init__(self):
        self.items = []
        self.min_x = self.max_x = self.min_y = self.max_y = 0.0

    def _touch(self, x, y):
        self.min_x = min(self.min_x, x)
        self.max_x = max(self.max_x, x)
        self.min_y = min(self.min_y, y)
        self.max_y = max(self.max_y, y)

    def line(self, p1, p2, color="#000", width=1.5, dash=None):
        x1, y1 = _f(p1[0]), -_f(p1[1])
        x2, y2 = _f(p2[0]), -_f(p2[1])
        self._touch(x1, y1)
        self._touch(x2, y2)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{color}" stroke-width="{width}"{extra}/>')

    def dot(self, p, r=3, color="#000"):
        x, y = _f(p[0]), -_f(p[1])
        self._touch(x, y)
        self.items.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="{color}"/>')

    def text(self, p, s, color="#444", size=11, dx=4, dy=-4):
        x, y = _f(p[0]) + dx, -_f(p[1]) + dy
        self._touch(x, y)
        self.items.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" fill="{color}" '
            f'font-family="monospace">{s}</text>')

    def render(self):
        pad = 30
        w = self.max_x - self.min_x + 2 * pad
        h = self.max_y - self.min_y + 2 * pad
        view = f"{self.min_x - pad:.2f} {self.min_y - pad:.2f} {w:.2f} {h:.2f}"
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" '
                f'height="{h:.0f}" viewBox="{view}">')
        return "\n".join([head, *self.items, "</svg>"])


def _label(q, levels):
    if not levels:
        return f"i{q}"
    return f"i{q},{{{','.join(map(str, levels))}}}"


def render_curve(curve, catalog, show_arrangement=True) -> str:
    """One curve (possibly disconnected) over its arrangement."""
    components = catalog.geometry(curve)
    arrangement = catalog.arrangement
    canvas = _Canvas()
    lines = sorted(arrangement.lines.values(), key=lambda l: (l.orient, l.rank))
    lo = min([l.offset for l in lines if l.orient == "v"], default=Fraction(-1)) - 1
    hi = max([l.offset for l in lines if l.orient == "h"], default=Fraction(1)) + 1
    if show_arrangement:
        for line in lines:
            if line.orient == "v":
                canvas.line((line.offset, lo - 1), (line.offset, hi + 1),
                            color="#ccc", width=0.6)
                canvas.text((line.offset, hi + 1), _label(line.vertex, line.levels),
                            color="#999", size=9)
            else:
                canvas.line((lo - 1, line.offset), (hi + 1, line.offset),
                            color="#ccc", width=0.6)
                canvas.text((lo - 1, line.offset), _label(line.vertex, line.levels),
                            color="#999", size=9)
    for comp in components:
        for p1, p2, w, _dir in comp.edges:
            canvas.line(p1, p2, width=1.0 + 0.8 * (w - 1))
            if w > 1:
                mid = ((p1[0] + p2[0]) / 2, (p1[1] + p2[1]) / 2)
                canvas.text(mid, str(w), color="#a00")
        for q, levels, end, direction in comp.legs:
            if end is None:
                continue
            tail = (end[0] - RAY_LEN * direction[0], end[1] - RAY_LEN * direction[1])
            canvas.line(end, tail)
            canvas.text(tail, _label(q, levels), size=10)
        if comp.out_point is not None:
            a, b = comp.out_dir
            g = max(abs(a), abs(b), 1)
            tip = (comp.out_point[0] + RAY_LEN * Fraction(a, g),
                   comp.out_point[1] + RAY_LEN * Fraction(b, g))
            canvas.line(comp.out_point, tip, dash="6,3")
            canvas.text(tip, f"out {comp.out_dir}", size=10)
        for v in comp.vertices:
            canvas.dot(v)
    return canvas.render()


def curve_dump(curve, catalog=None) -> str:
    """Structured-text mirror of the curve fields, for golden tests."""
    lines = [f"slope={curve.slope} mult_q={curve.mult_q}"]
    d_sparse = [(v + 1, x) for v, x in enumerate(curve.d_out) if x]
    lines.append(f"d_out={d_sparse}")
    lines.append("legs=" + repr(sorted(curve.legs)))
    for legs, mult in curve.lineages:
        lines.append(f"lineage legs={sorted(legs)} mult={mult}")
    if curve.weight_fn is not None:
        wf = curve.weight_fn
        lines.append(f"weight_fn alpha={wf.alpha} exp={list(wf.exp)} mask={wf.mask}")
    if catalog is None:
        return "\n".join(lines)
    try:
        components = catalog.geometry(curve)
    except Exception as exc:        # non-embeddable combined wall
        lines.append(f"embedding: unavailable ({exc})")
        return "\n".join(lines)
    for comp in components:
        lines.append(f"component d="
                     f"{[(v + 1, x) for v, x in enumerate(comp.op.exp) if x]}")
        for p1, p2, w, prim in comp.edges:
            lines.append(f"  edge {tuple(map(str, p1))} -> {tuple(map(str, p2))} "
                         f"w={w} dir={prim}")
        for q, levels, end, _d in comp.legs:
            at = tuple(map(str, end)) if end else None
            lines.append(f"  leg ({q},{list(levels)}) at {at}")
    return "\n".join(lines)
