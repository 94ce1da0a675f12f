"""SVG diagram of a multicone on the projective line and its generator images.

A direction at angle theta in [0, pi) is drawn at angle 2*theta on the
circle, so the projective line closes up once. All layout numbers live in
``LAYOUT`` so that output is stable for golden-file tests.
"""
from __future__ import annotations

import math
from typing import Optional
from xml.sax.saxutils import escape

import numpy as np

from .cocycle import OneStepCocycle
from .errors import InputError
from .projcone import Arc, Multicone, image_arc

# name            value   meaning
LAYOUT = {
    "size": 480,          # square canvas side (px)
    "radius": 170,        # circle radius (px)
    "circle_width": 1.5,  # stroke of the base circle
    "cone_width": 10,     # stroke of multicone arcs (drawn on the circle)
    "image_width": 5,     # stroke of image arcs (drawn just inside)
    "image_inset": 16,    # radial inset of image arcs
    "arrow_curvature": 0.45,  # control point pulled toward the centre by this fraction
    "arrow_width": 1.2,
    "eig_tick": 9,        # half-length of eigendirection ticks
    "font_size": 13,
    "label_offset": 12,
}

_COLORS = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]
_CONE = "#444444"


def _fmt(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _point(theta: float, r: float) -> tuple[float, float]:
    c = LAYOUT["size"] / 2
    phi = 2.0 * theta
    return c + r * math.cos(phi), c - r * math.sin(phi)  # SVG y axis points down


def _arc_path(arc: Arc, r: float) -> str:
    x0, y0 = _point(arc.start, r)
    x1, y1 = _point(arc.start + arc.length, r)
    large = 1 if 2.0 * arc.length > math.pi else 0
    # counter-clockwise on screen = sweep flag 0 with the flipped y axis
    return f"M {_fmt(x0)} {_fmt(y0)} A {_fmt(r)} {_fmt(r)} 0 {large} 0 {_fmt(x1)} {_fmt(y1)}"


def _real_eigendirections(m: np.ndarray) -> Optional[tuple[float, float]]:
    vals, vecs = np.linalg.eig(m)
    if np.any(vals.imag != 0) or abs(abs(vals[0]) - abs(vals[1])) <= 1e-12 * abs(vals).max():
        return None
    order = np.argsort(-np.abs(vals))
    angles = [math.atan2(vecs[1, i].real, vecs[0, i].real) % math.pi for i in order]
    return angles[0], angles[1]


def render_svg(A: OneStepCocycle, mc: Multicone, title: str = "") -> str:
    """Circle, highlighted multicone arcs, one arrow per generator and arc
    from the arc to its image, and unstable (filled) / stable (open) marks at
    each generator's real eigendirections."""
    if mc is None or not getattr(mc, "arcs", None):
        raise InputError("nothing to draw: no multicone")
    L = LAYOUT
    size, r = L["size"], L["radius"]
    c = size / 2
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        "<defs>",
    ]
    for i in range(A.k):
        col = _COLORS[i % len(_COLORS)]
        out.append(f'<marker id="head{i + 1}" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto">'
                   f'<path d="M0,0 L8,4 L0,8 z" fill="{col}"/></marker>')
    out.append("</defs>")
    if title:
        out.append(f'<text x="{_fmt(c)}" y="{L["font_size"] + 4}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="{L["font_size"]}">{escape(title)}</text>')
    out.append(f'<circle class="base" cx="{_fmt(c)}" cy="{_fmt(c)}" r="{r}" fill="none" stroke="#999999" '
               f'stroke-width="{L["circle_width"]}"/>')
    for arc in mc.arcs:
        out.append(f'<path class="cone" d="{_arc_path(arc, r)}" fill="none" stroke="{_CONE}" '
                   f'stroke-width="{L["cone_width"]}" stroke-linecap="butt"/>')
    ri = r - L["image_inset"]
    for i, g in enumerate(A.generators, 1):
        col = _COLORS[(i - 1) % len(_COLORS)]
        for arc in mc.arcs:
            img = image_arc(g, arc)
            out.append(f'<path class="image" data-generator="{i}" d="{_arc_path(img, ri)}" fill="none" '
                       f'stroke="{col}" stroke-width="{L["image_width"]}"/>')
            x0, y0 = _point(arc.midpoint, r - L["cone_width"])
            x1, y1 = _point(img.midpoint, ri - L["image_width"])
            mx, my = (x0 + x1) / 2, (y0 + y1) / 2
            k = L["arrow_curvature"]
            qx, qy = mx + k * (c - mx), my + k * (c - my)
            out.append(f'<path class="arrow" data-generator="{i}" d="M {_fmt(x0)} {_fmt(y0)} Q {_fmt(qx)} {_fmt(qy)} '
                       f'{_fmt(x1)} {_fmt(y1)}" fill="none" stroke="{col}" stroke-width="{L["arrow_width"]}" '
                       f'marker-end="url(#head{i})"/>')
            lx, ly = qx, qy - L["label_offset"] / 2
            out.append(f'<text class="label" x="{_fmt(lx)}" y="{_fmt(ly)}" fill="{col}" font-family="sans-serif" '
                       f'font-size="{L["font_size"]}">A{i}</text>')
        eig = _real_eigendirections(np.asarray(g))
        if eig is not None:
            for kind, theta in zip(("unstable", "stable"), eig):
                x0, y0 = _point(theta, r - L["eig_tick"])
                x1, y1 = _point(theta, r + L["eig_tick"])
                fill = col if kind == "unstable" else "white"
                out.append(f'<line class="{kind}" data-generator="{i}" x1="{_fmt(x0)}" y1="{_fmt(y0)}" '
                           f'x2="{_fmt(x1)}" y2="{_fmt(y1)}" stroke="{col}" stroke-width="2"/>')
                px, py = _point(theta, r + L["eig_tick"] + 4)
                out.append(f'<circle class="{kind}-mark" cx="{_fmt(px)}" cy="{_fmt(py)}" r="3.5" '
                           f'fill="{fill}" stroke="{col}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def run_plot(cfg, report: dict) -> str:
    """Diagram for a config using the multicone recorded in ``report``."""
    dom = report.get("stages", {}).get("domination", {})
    arcs = dom.get("multicone")
    if not arcs:
        raise InputError("report has no multicone to draw")
    return render_svg(cfg.cocycle(), Multicone.from_list(arcs), title=cfg.name)
