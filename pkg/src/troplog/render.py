"""Matplotlib renderings of tropical curves, written to files.

The layout is radial: the circuit sits at the center and every subtree
fans outward, with vertex radii given by evaluating the symbolic radial
distances at an exact sample point of the chamber.  Import of matplotlib
is deferred so the core library stays plotting-free.
"""

from __future__ import annotations

import math
import random
from typing import Optional

from .curve import TropicalCurve, circuit_of, radial_distances
from .forms import Chamber, sample_point
from .tropmap import TropicalMap


def _layout(curve: TropicalCurve, ch: Chamber) -> dict[str, tuple[float, float]]:
    point = sample_point(ch, random.Random(7))
    dist = radial_distances(curve)
    radius = {v: float(d.evaluate(point)) for v, d in dist.items()}
    scale = max(radius.values()) or 1.0
    radius = {v: r / scale for v, r in radius.items()}

    circ = circuit_of(curve)
    core = sorted(circ.vertices)
    coords: dict[str, tuple[float, float]] = {}
    core_r = 0.12 if len(core) > 1 else 0.0
    for i, vid in enumerate(core):
        a = 2 * math.pi * i / max(len(core), 1)
        coords[vid] = (core_r * math.cos(a), core_r * math.sin(a))

    children: dict[str, list[str]] = {v.id: [] for v in curve.vertices}
    seen = set(core)
    frontier = list(core)
    while frontier:
        vid = frontier.pop(0)
        for e in curve.edges_at(vid):
            w = e.other(vid)
            if w not in seen:
                seen.add(w)
                children[vid].append(w)
                frontier.append(w)

    def weight(vid: str) -> int:
        return max(1, sum(weight(w) for w in children[vid]) + len(curve.legs_at(vid)))

    def place(vid: str, lo: float, hi: float):
        kids = children[vid]
        total = sum(weight(w) for w in kids) or 1
        a = lo
        for w in kids:
            span = (hi - lo) * weight(w) / total
            mid = a + span / 2
            r = 0.25 + 0.75 * radius[w]
            coords[w] = (r * math.cos(mid), r * math.sin(mid))
            place(w, a, a + span)
            a += span

    roots = [w for vid in core for w in children[vid]]
    total = sum(weight(w) for w in roots) or 1
    a = 0.0
    for w in roots:
        span = 2 * math.pi * weight(w) / total
        mid = a + span / 2
        r = 0.25 + 0.75 * radius[w]
        coords[w] = (r * math.cos(mid), r * math.sin(mid))
        place(w, a, a + span)
        a += span
    return coords


def render_curve(curve: TropicalCurve, ch: Chamber, path: str,
                 title: str = "", tmap: Optional[TropicalMap] = None) -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    coords = _layout(curve, ch)
    fig, ax = plt.subplots(figsize=(6, 6))
    for e in curve.edges:
        (x1, y1), (x2, y2) = coords[e.ends[0]], coords[e.ends[1]]
        ax.plot([x1, x2], [y1, y2], color="black", lw=1.2, zorder=1)
        ax.annotate(repr(e.length), ((x1 + x2) / 2, (y1 + y2) / 2),
                    fontsize=7, color="gray")
    for l in curve.legs:
        x, y = coords[l.vertex]
        norm = math.hypot(x, y) or 1.0
        dx, dy = x / norm * 0.22, y / norm * 0.22
        if norm < 1e-9:
            dx, dy = 0.22, 0.0
        ax.plot([x, x + dx], [y, y + dy], color="steelblue", lw=1.0, zorder=1)
        ax.annotate(l.label, (x + dx, y + dy), fontsize=7, color="steelblue")
    for v in curve.vertices:
        x, y = coords[v.id]
        color = "crimson" if v.genus else "black"
        ax.scatter([x], [y], s=36 if v.genus else 18, color=color, zorder=2)
        label = v.id if tmap is None else f"{v.id} {tmap.multidegree[v.id]}"
        if v.genus:
            label += " g=1"
        ax.annotate(label, (x, y), xytext=(4, 4),
                    textcoords="offset points", fontsize=8)
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
