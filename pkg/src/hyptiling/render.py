"""SVG pictures of the tiled half-plane.

Tiles are pentagons: four corners of a dyadic box plus the bottom edge's
midpoint.  Edges joining points of equal height are drawn as hyperbolic
geodesics, circular arcs centered on the boundary axis, flattened to
polylines by recursive bisection until the sagitta drops below a screen-unit
tolerance.  Vertical edges are already geodesics and stay straight.

The output coordinate system maps the requested world window onto a fixed
pixel width; content outside the window is clipped by the viewBox.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET

from .errors import CapError, DomainError, SizeError
from .symbolic import as_model

MAX_TILES = 50_000

DEFAULT_PALETTE = (
    "#4e79a7", "#f28e2b", "#59a14c", "#e15759", "#b07aa1",
    "#76b7b2", "#edc948", "#ff9da7", "#9c755f",
)
UNCOLORED = "#d4d4d4"
OVERLAY_STROKES = ("#1a1a1a", "#b10026", "#08306b", "#54278f")


def _arc_points(xa: float, xb: float, y: float, tol_world: float) -> list:
    """Polyline for the geodesic from (xa, y) to (xb, y), endpoint included,
    start point excluded."""
    center = (xa + xb) / 2.0
    radius = math.hypot((xb - xa) / 2.0, y)

    def angle(px):
        return math.atan2(y, px - center)

    def on_arc(theta):
        return (center + radius * math.cos(theta), radius * math.sin(theta))

    out = []

    def recurse(t1, p1, t2, p2, depth):
        tm = (t1 + t2) / 2.0
        pm = on_arc(tm)
        chord_mid = ((p1[0] + p2[0]) / 2.0, (p1[1] + p2[1]) / 2.0)
        err = math.hypot(pm[0] - chord_mid[0], pm[1] - chord_mid[1])
        if err <= tol_world or depth >= 16:
            out.append(p2)
            return
        recurse(t1, p1, tm, pm, depth + 1)
        recurse(tm, pm, t2, p2, depth + 1)

    recurse(angle(xa), (xa, y), angle(xb), (xb, y), 0)
    return out


def _tile_outline(x0: float, x1: float, y0: float, y1: float,
                  tol_world: float) -> list:
    """World-coordinate polyline around one pentagon, closed implicitly."""
    mid = (x0 + x1) / 2.0
    pts = [(x0, y0)]
    pts.extend(_arc_points(x0, mid, y0, tol_world))
    pts.extend(_arc_points(mid, x1, y0, tol_world))
    pts.append((x1, y1))
    pts.extend(_arc_points(x1, x0, y1, tol_world))
    return pts


def _path_data(points, to_screen) -> str:
    cmds = []
    for i, (wx, wy) in enumerate(points):
        sx, sy = to_screen(wx, wy)
        cmds.append(f"{'M' if i == 0 else 'L'}{sx:.4f},{sy:.4f}")
    cmds.append("Z")
    return " ".join(cmds)


def render_svg(model_like, rows, x_range, out_path, overlay_levels=(),
               tol: float = 1e-3, palette=None, width_px: float = 800.0,
               y_clip=None) -> int:
    """Write an SVG of the tiles in the given row band and x-window.

    rows is an inclusive (low, high) pair of band indices; an inverted pair
    renders an empty (but valid) picture.  Returns the number of tiles drawn.
    """
    row_lo, row_hi = int(rows[0]), int(rows[1])
    x_min, x_max = float(x_range[0]), float(x_range[1])
    if not (x_min < x_max):
        raise DomainError(f"empty x-window [{x_min}, {x_max}]")
    if max(abs(row_lo), abs(row_hi)) > 1000:
        raise DomainError("row indices beyond float range")
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    model = as_model(model_like) if model_like is not None else None
    colors = tuple(palette) if palette else DEFAULT_PALETTE

    has_rows = row_hi >= row_lo
    y_lo = math.ldexp(1.0, row_lo) if has_rows else 0.0
    y_hi = math.ldexp(1.0, row_hi + 1) if has_rows else 1.0
    if y_clip is not None:
        c_lo, c_hi = float(y_clip[0]), float(y_clip[1])
        if not (0 < c_lo < c_hi):
            raise DomainError(f"bad height clip [{c_lo}, {c_hi}]")
        y_lo, y_hi = c_lo, c_hi

    scale = width_px / (x_max - x_min)
    height_px = (y_hi - y_lo) * scale
    tol_world = tol / scale

    def to_screen(wx, wy):
        return ((wx - x_min) * scale, (y_hi - wy) * scale)

    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=f"{width_px:.2f}",
        height=f"{max(height_px, 1.0):.2f}",
        viewBox=f"0 0 {width_px:.2f} {max(height_px, 1.0):.2f}",
    )
    ET.SubElement(
        svg, "rect", x="0", y="0",
        width=f"{width_px:.2f}", height=f"{max(height_px, 1.0):.2f}",
        fill="#ffffff",
    )

    drawn = 0
    if has_rows:
        tile_group = ET.SubElement(
            svg, "g", attrib={"stroke": "#333333", "stroke-width": "0.8"}
        )
        for row in range(row_lo, row_hi + 1):
            width = math.ldexp(1.0, row)
            y0, y1 = width, 2.0 * width
            if y1 <= y_lo or y0 >= y_hi:
                continue
            n_lo = math.floor(x_min / width)
            n_hi = math.ceil(x_max / width)
            if (n_hi - n_lo) + drawn > MAX_TILES:
                raise SizeError(
                    f"window holds more than {MAX_TILES} tiles; "
                    "shrink the x-range or raise the lowest row"
                )
            fill = UNCOLORED
            if model is not None:
                try:
                    letter = model.letter(row)
                    fill = colors[(letter - 1) % len(colors)]
                except CapError:
                    fill = UNCOLORED
            for n in range(n_lo, n_hi):
                outline = _tile_outline(
                    n * width, (n + 1) * width, y0, y1, tol_world
                )
                ET.SubElement(
                    tile_group, "path",
                    d=_path_data(outline, to_screen),
                    fill=fill,
                    attrib={"fill-opacity": "0.75"},
                )
                drawn += 1

    for idx, q in enumerate(overlay_levels):
        q = int(q)
        if q < 1:
            raise DomainError(f"overlay level {q} must be at least 1")
        if not has_rows:
            continue
        stroke = OVERLAY_STROKES[idx % len(OVERLAY_STROKES)]
        group = ET.SubElement(
            svg, "g", attrib={
                "stroke": stroke, "stroke-width": "1.6", "fill": "none",
            },
        )
        apex = row_hi
        while apex >= row_lo:
            h = math.ldexp(1.0, apex)
            top = 2.0 * h
            bottom = math.ldexp(1.0, apex - q + 1)
            n_lo = math.floor(x_min / h)
            n_hi = math.ceil(x_max / h)
            for n in range(n_lo, n_hi):
                sx0, sy0 = to_screen(n * h, top)
                sx1, sy1 = to_screen((n + 1) * h, bottom)
                ET.SubElement(
                    group, "rect",
                    x=f"{sx0:.4f}", y=f"{sy0:.4f}",
                    width=f"{sx1 - sx0:.4f}", height=f"{sy1 - sy0:.4f}",
                )
            apex -= q
    ET.ElementTree(svg).write(out_path, encoding="utf-8", xml_declaration=True)
    return drawn
