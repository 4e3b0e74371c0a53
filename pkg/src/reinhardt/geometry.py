"""Planar realisation of a composition: star skeleton, Reuleaux arcs, metrics, SVG."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classify import DihedralComposition
from .seqcore import OddComposition

CLOSE_TOL = 1e-9

Point = tuple[float, float]


class InvalidComposition(ValueError):
    """The star walk does not close, so the composition is not Reinhardt."""


class InvalidGeometry(ValueError):
    pass


def _parts(comp) -> tuple[int, ...]:
    if isinstance(comp, DihedralComposition):
        return comp.canonical
    if isinstance(comp, OddComposition):
        return comp.parts
    if isinstance(comp, str):
        return tuple(int(x) for x in comp.strip("[] ").split(","))
    return tuple(int(x) for x in comp)


def star_vertices(comp, n: int | None = None) -> list[Point]:
    """Unit-step walk turning by pi - k_i*pi/n after the i-th step.

    The angle of the star at point i+1 is k_i*pi/n.  Returns the l distinct
    points, starting at the origin with the first step along +x.
    """
    parts = _parts(comp)
    if not parts or len(parts) % 2 == 0 or min(parts) < 1:
        raise InvalidComposition(f"need an odd number of positive parts, got {list(parts)}")
    n = sum(parts) if n is None else n
    if sum(parts) != n:
        raise InvalidComposition(f"parts sum to {sum(parts)}, not n={n}")
    pts = [(0.0, 0.0)]
    x = y = 0.0
    turns = 0  # heading measured in units of pi/n, kept exact
    for k in parts:
        a = turns * math.pi / n
        x += math.cos(a)
        y += math.sin(a)
        pts.append((x, y))
        turns += n - k
    residual = math.hypot(x, y)
    if residual > CLOSE_TOL or turns % (2 * n):
        raise InvalidComposition(f"star walk for {list(parts)} misses closure by {residual:.3g}")
    return pts[:-1]


def star_closes(comp) -> bool:
    try:
        star_vertices(comp)
    except InvalidComposition:
        return False
    return True


@dataclass(frozen=True)
class Metrics:
    diameter: float
    perimeter: float
    width: float


@dataclass
class PolygonGeometry:
    parts: tuple[int, ...]
    star_vertices: list[Point]
    polygon_vertices: list[Point]
    metrics: Metrics | None = field(default=None)

    @property
    def n(self) -> int:
        return sum(self.parts)

    def side_lengths(self) -> list[float]:
        v = self.polygon_vertices
        return [math.dist(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]


def _signed_area(pts: Sequence[Point]) -> float:
    s = 0.0
    for i, (x0, y0) in enumerate(pts):
        x1, y1 = pts[(i + 1) % len(pts)]
        s += x0 * y1 - x1 * y0
    return s / 2


def polygon_vertices(comp) -> PolygonGeometry:
    """Reinhardt polygon inscribed in the Reuleaux polygon over the star.

    The arc centred at star point P_i joins P_{i-1} to P_{i+1}; it is cut into
    k sub-arcs of angle pi/n where k*pi/n is the star angle at P_i.  Arcs are
    visited as the Reuleaux boundary runs (centres P_1, P_3, ...), taking the
    start point of each sub-arc, which yields every vertex exactly once.
    """
    parts = _parts(comp)
    n = sum(parts)
    star = star_vertices(parts, n)
    ell = len(star)
    verts: list[Point] = []
    for step in range(ell):
        i = (1 + 2 * step) % ell
        k = parts[(i - 1) % ell]
        cx, cy = star[i]
        px, py = star[(i - 1) % ell]
        qx, qy = star[(i + 1) % ell]
        a0 = math.atan2(py - cy, px - cx)
        a1 = math.atan2(qy - cy, qx - cx)
        delta = math.remainder(a1 - a0, 2 * math.pi)
        for t in range(k):
            a = a0 + delta * t / k
            verts.append((cx + math.cos(a), cy + math.sin(a)))
    if _signed_area(verts) < 0:
        verts.reverse()
    geom = PolygonGeometry(parts, star, verts)
    geom.metrics = metrics(geom)
    return geom


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def is_convex(pts: Sequence[Point], tol: float = 1e-12) -> bool:
    m = len(pts)
    signs = {_cross(pts[i], pts[(i + 1) % m], pts[(i + 2) % m]) > 0
             for i in range(m) if abs(_cross(pts[i], pts[(i + 1) % m], pts[(i + 2) % m])) > tol}
    return len(signs) <= 1


def _width(pts: Sequence[Point]) -> float:
    """Minimum support width of a CCW convex polygon by rotating calipers."""
    m = len(pts)
    best = math.inf
    j = 1
    for i in range(m):
        a, b = pts[i], pts[(i + 1) % m]
        edge = math.dist(a, b)
        if edge == 0:
            continue
        # advance the antipodal pointer while the distance to edge (a,b) grows
        while _cross(a, b, pts[(j + 1) % m]) > _cross(a, b, pts[j]):
            j = (j + 1) % m
        best = min(best, _cross(a, b, pts[j]) / edge)
    return best


def metrics(geom: PolygonGeometry | Sequence[Point]) -> Metrics:
    pts = list(geom.polygon_vertices if isinstance(geom, PolygonGeometry) else geom)
    if len(pts) < 3 or abs(_signed_area(pts)) < 1e-12:
        raise InvalidGeometry("polygon is degenerate (fewer than 3 points or collinear)")
    if _signed_area(pts) < 0:
        pts.reverse()
    xy = np.asarray(pts)
    diameter = float(np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1).max()))
    perimeter = sum(math.dist(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts)))
    return Metrics(diameter, perimeter, _width(pts))


def expected_metrics(n: int) -> Metrics:
    return Metrics(1.0, 2 * n * math.sin(math.pi / (2 * n)), math.cos(math.pi / (2 * n)))


def diameter_pairs(pts: Sequence[Point], tol: float = 1e-9) -> list[tuple[int, int]]:
    return [(i, j) for i in range(len(pts)) for j in range(i + 1, len(pts))
            if abs(math.dist(pts[i], pts[j]) - 1.0) < tol]


# -- SVG ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SvgOptions:
    size: int = 400
    margin: int = 20
    outline_width: float = 1.5
    skeleton_width: float = 0.4
    star_width: float = 1.8
    skeleton: bool = True
    caption: bool = True


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def render_svg(geom: PolygonGeometry, options: SvgOptions = SvgOptions()) -> str:
    o = options
    pts = geom.polygon_vertices
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    span = max(max(xs) - min(xs), max(ys) - min(ys))
    scale = (o.size - 2 * o.margin) / span
    cap_h = 24 if o.caption else 0

    def tx(p: Point) -> tuple[str, str]:
        return _fmt(o.margin + (p[0] - min(xs)) * scale), _fmt(o.margin + (max(ys) - p[1]) * scale)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{o.size}" '
        f'height="{o.size + cap_h}" viewBox="0 0 {o.size} {o.size + cap_h}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    if o.skeleton:
        lines.append(f'<g stroke="#888" stroke-width="{_fmt(o.skeleton_width)}">')
        for i, j in diameter_pairs(pts):
            (x1, y1), (x2, y2) = tx(pts[i]), tx(pts[j])
            lines.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
        lines.append("</g>")
    star = geom.star_vertices
    ell = len(star)
    # star polygon: consecutive walk points are unit-distance diagonals
    path = " ".join(",".join(tx(star[i % ell])) for i in range(ell + 1))
    lines.append(f'<polyline points="{path}" fill="none" stroke="#c03030" '
                 f'stroke-width="{_fmt(o.star_width)}"/>')
    poly = " ".join(",".join(tx(p)) for p in pts)
    lines.append(f'<polygon points="{poly}" fill="none" stroke="black" '
                 f'stroke-width="{_fmt(o.outline_width)}"/>')
    if o.caption:
        label = _caption(geom.parts)
        lines.append(f'<text x="{o.size // 2}" y="{o.size + cap_h - 6}" font-family="monospace" '
                     f'font-size="12" text-anchor="middle">{label}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _caption(parts: tuple[int, ...]) -> str:
    from .classify import canonicalize

    return f"n={sum(parts)} " + canonicalize(parts).power_str()


def svg_filename(parts) -> str:
    from .classify import canonicalize

    c = canonicalize(_parts(parts))
    return f"reinhardt_{c.n}_" + "-".join(map(str, c.canonical)) + ".svg"
